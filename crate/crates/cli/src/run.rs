//! Command implementations: wire configuration and data into the analysis
//! layer and assemble reports.

use std::path::Path;

use capq_core::classical::ProcessMoments;
use capq_core::dist::{derive_seed, ProcessModel};
use capq_core::inference::{
    bootstrap_ci, empirical_model, fit_best, fit_model, model_entry, moment_entry,
    EstimateConfig, FitFamily, ModelChoice, Sample,
};
use capq_core::multivariate::{
    chen_mcp, fit_mv_normal, five_step_pipeline, mv_generalized, shahriari_vector, McConfig,
    MvModel,
};
use capq_core::report::{registry, IndexEntry};
use capq_core::yield_based::yield_summary;

use crate::config::{self, ModelDirective};
use crate::data;
use crate::output::{self, Format};
use crate::CliError;

fn analysis(e: capq_core::Error) -> CliError {
    CliError::Analysis(e)
}

/// Convention notes attached to indices whose published formulas circulate
/// in more than one form; the note states the form this tool computes.
fn convention_note(name: &str) -> Option<&'static str> {
    match name {
        "vannman" => {
            Some("denominator combines sigma^2 and v*(mean - target)^2 under one square root")
        }
        "spiring_cpw" => Some("penalty applied as division by sqrt(1 + g(delta))"),
        _ => None,
    }
}

fn spec_echo(spec: &capq_core::classical::SpecLimits) -> output::SpecEcho {
    output::SpecEcho { lower: spec.lower(), upper: spec.upper(), target: spec.target() }
}

pub fn analyze(
    config_path: &Path,
    data_path: Option<&Path>,
    seed: Option<u64>,
    format: Format,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mut cfg = config::load(config_path)?;
    config::override_seeds(&mut cfg, seed);
    let spec = cfg
        .spec
        .clone()
        .ok_or_else(|| CliError::Config("analyze needs a spec block (lower, upper)".into()))?;
    let directive = cfg
        .model
        .clone()
        .ok_or_else(|| CliError::Config("analyze needs a model block".into()))?;
    if cfg.indices.is_empty() {
        return Err(CliError::Config("analyze needs an indices list".into()));
    }
    let model_echo = cfg.model_echo.clone().unwrap_or_default();

    let mut data_echo = None;
    let mut intervals = None;
    let (mut entries, summary) = match directive {
        ModelDirective::Fixed(model) => {
            if data_path.is_some() {
                return Err(CliError::Config(format!(
                    "model '{model_echo}' is fully specified; analyzing a data file needs an \
                     'empirical' or fit directive"
                )));
            }
            if cfg.bootstrap.is_some() {
                return Err(CliError::Config(
                    "bootstrap resampling needs a data file, not a fully specified model".into(),
                ));
            }
            let moments = model.moments();
            let mom = ProcessMoments::new(moments.mean, moments.sd).map_err(analysis)?;
            let entries = cfg
                .indices
                .iter()
                .map(|request| {
                    if request.is_moment_based() {
                        moment_entry(request, &spec, &mom)
                    } else {
                        model_entry(request, &spec, &cfg.desired, &model)
                    }
                })
                .collect::<Result<Vec<IndexEntry>, _>>()
                .map_err(analysis)?;
            let summary = output::ModelSummary {
                description: model.describe(),
                source: "configured",
                ks: None,
            };
            (entries, summary)
        }
        directive => {
            let path = data_path.ok_or_else(|| {
                CliError::Config(format!("model directive '{model_echo}' needs --data"))
            })?;
            let file = data::load(path)?;
            let sample = file.univariate()?;
            data_echo = Some(output::DataEcho {
                path: file.path.clone(),
                observations: file.observations(),
            });
            let (choice, summary) = resolve_data_model(&directive, &sample)?;
            let estimate_config = EstimateConfig {
                spec: spec.clone(),
                desired: cfg.desired.clone(),
                model: choice,
            };
            let entries = cfg
                .indices
                .iter()
                .map(|request| {
                    capq_core::inference::estimate_index(&sample, request, &estimate_config)
                })
                .collect::<Result<Vec<IndexEntry>, _>>()
                .map_err(analysis)?;
            if let Some(settings) = &cfg.bootstrap {
                let master = settings.seed.ok_or_else(|| {
                    CliError::Config("bootstrap needs a seed (bootstrap.seed or --seed)".into())
                })?;
                let cis = cfg
                    .indices
                    .iter()
                    .enumerate()
                    .map(|(position, request)| {
                        let ci = bootstrap_ci(
                            &sample,
                            request,
                            &estimate_config,
                            settings.replicates,
                            settings.level,
                            derive_seed(master, position as u64),
                        )
                        .map_err(analysis)?;
                        Ok(output::IntervalOut {
                            index: request.name().to_string(),
                            point: ci.point,
                            lower: ci.lower,
                            upper: ci.upper,
                            level: ci.level,
                            replicates: ci.replicates,
                            seed: ci.seed,
                            method: ci.method.name(),
                            point_outside: ci.point_outside,
                        })
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                intervals = Some(cis);
            }
            (entries, summary)
        }
    };

    for entry in &mut entries {
        if let Some(note) = convention_note(&entry.name) {
            entry.notes.push(note.to_string());
        }
    }

    let report = output::AnalyzeReport {
        schema_version: output::SCHEMA_VERSION,
        tool: output::ToolInfo::current(),
        command: "analyze",
        input: output::AnalyzeInput {
            data: data_echo,
            spec: spec_echo(&spec),
            desired: cfg.desired_echo.clone(),
            model: model_echo,
            seeds: output::SeedsEcho {
                monte_carlo: cfg.monte_carlo.as_ref().and_then(|m| m.seed),
                bootstrap: cfg.bootstrap.as_ref().and_then(|b| b.seed),
            },
        },
        defaults_applied: cfg.defaults_applied,
        model: summary,
        indices: entries.into_iter().map(Into::into).collect(),
        bootstrap: intervals,
    };
    let text = output::text_analyze(&report);
    output::emit(&report, text, format, out)
}

/// Resolve the model once so the report can describe it; the per-index
/// estimates go through the same `ModelChoice`, which reproduces this model
/// deterministically.
fn resolve_data_model(
    directive: &ModelDirective,
    sample: &Sample,
) -> Result<(ModelChoice, output::ModelSummary), CliError> {
    match directive {
        ModelDirective::Empirical { interpolated } => {
            let model = if *interpolated {
                ProcessModel::empirical_interpolated(sample.values()).map_err(analysis)?
            } else {
                empirical_model(sample)
            };
            Ok((
                ModelChoice::Empirical { interpolated: *interpolated },
                output::ModelSummary {
                    description: model.describe(),
                    source: "empirical",
                    ks: None,
                },
            ))
        }
        ModelDirective::FitOne(family) => {
            let fitted = fit_model(sample, *family).map_err(analysis)?;
            Ok((
                ModelChoice::Fit(*family),
                output::ModelSummary {
                    description: fitted.model.describe(),
                    source: "fitted",
                    ks: Some(fitted.ks),
                },
            ))
        }
        ModelDirective::FitBest(candidates) => {
            let fitted = fit_best(sample, candidates).map_err(analysis)?;
            Ok((
                ModelChoice::FitBest(candidates.clone()),
                output::ModelSummary {
                    description: fitted.model.describe(),
                    source: "fitted",
                    ks: Some(fitted.ks),
                },
            ))
        }
        ModelDirective::Fixed(_) => unreachable!("fixed models never reach the data path"),
    }
}

pub fn mv_analyze(
    config_path: &Path,
    data_path: &Path,
    seed: Option<u64>,
    format: Format,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mut cfg = config::load(config_path)?;
    config::override_seeds(&mut cfg, seed);
    let mv = cfg
        .multivariate
        .take()
        .ok_or_else(|| CliError::Config("mv-analyze needs a multivariate block".into()))?;
    let file = data::load(data_path)?;
    if file.dimensions() != mv.spec.dim() {
        return Err(CliError::Config(format!(
            "the multivariate block has {} axes but '{}' has {} columns",
            mv.spec.dim(),
            file.path,
            file.dimensions()
        )));
    }
    let matrix = file.matrix();
    let pipeline = five_step_pipeline(
        &matrix,
        &mv.candidates,
        &mv.structurals,
        &mv.spec,
        &cfg.desired,
        &mv.options,
    )
    .map_err(analysis)?;

    let fitted_normal = match &cfg.monte_carlo {
        Some(mc) => {
            let seed = mc.seed.ok_or_else(|| {
                CliError::Config("Monte Carlo needs a seed (monte_carlo.seed or --seed)".into())
            })?;
            if mc.draws < 100_000 {
                return Err(CliError::Config(format!(
                    "multivariate Monte Carlo needs monte_carlo.draws of at least 100000 \
                     (got {})",
                    mc.draws
                )));
            }
            let fitted = fit_mv_normal(&matrix).map_err(analysis)?;
            let model = MvModel::Normal(fitted);
            let chen =
                chen_mcp(&model, &mv.spec, mv.nonconforming, mc.draws, seed).map_err(analysis)?;
            let shahriari = shahriari_vector(&matrix, &mv.spec, mv.nonconforming, mc.draws, seed)
                .map_err(analysis)?;
            let generalized = mv
                .structurals
                .iter()
                .map(|structural| {
                    let indices = mv_generalized(
                        &mv.spec,
                        structural,
                        &model,
                        &cfg.desired,
                        Some(McConfig { draws: mc.draws, seed }),
                    )
                    .map_err(analysis)?;
                    Ok(output::StructuralIndicesOut {
                        structural: structural.label(),
                        indices: (&indices).into(),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Some(output::NormalExtrasOut {
                description: format!(
                    "multivariate normal fitted to {} observations in {} dimensions",
                    matrix.nrows(),
                    mv.spec.dim()
                ),
                chen_containment: chen,
                shahriari: (&shahriari).into(),
                generalized,
            })
        }
        None => None,
    };

    let mut notes = Vec::new();
    if cfg.desired_echo.kind == "limits" {
        notes.push("desired limits are interpreted on the transformed scale".to_string());
    }

    let report = output::MvReport {
        schema_version: output::SCHEMA_VERSION,
        tool: output::ToolInfo::current(),
        command: "mv-analyze",
        input: output::MvInput {
            data: output::MvDataEcho {
                path: file.path.clone(),
                observations: file.observations(),
                dimensions: file.dimensions(),
            },
            spec: output::MvSpecEcho {
                lower: mv.spec.lower().to_vec(),
                upper: mv.spec.upper().to_vec(),
                target: mv.spec.target().map(<[f64]>::to_vec),
            },
            structural: mv.structurals.iter().map(|s| s.label()).collect(),
            candidates: mv.candidates.iter().map(|f| f.name().to_string()).collect(),
            significance: mv.options.significance,
            nonconforming: mv.nonconforming,
            desired: cfg.desired_echo.clone(),
            seeds: output::SeedsEcho {
                monte_carlo: cfg.monte_carlo.as_ref().and_then(|m| m.seed),
                bootstrap: None,
            },
        },
        defaults_applied: cfg.defaults_applied,
        notes,
        pipeline: (&pipeline).into(),
        fitted_normal,
    };
    let text = output::text_mv(&report);
    output::emit(&report, text, format, out)
}

pub fn fit(
    data_path: &Path,
    families: Option<&[String]>,
    trials: Option<u64>,
    format: Format,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mut defaults = Vec::new();
    let candidates: Vec<FitFamily> = match families {
        Some(names) => {
            if names.is_empty() {
                return Err(CliError::Config("--families is empty".into()));
            }
            names
                .iter()
                .map(|n| config::parse_family(n, trials))
                .collect::<Result<Vec<_>, _>>()?
        }
        None => {
            defaults.push(format!("families = {} (default)", config::continuous_names()));
            FitFamily::CONTINUOUS.to_vec()
        }
    };
    let file = data::load(data_path)?;
    let sample = file.univariate()?;

    let mut rows = Vec::with_capacity(candidates.len());
    let mut best: Option<(usize, f64)> = None;
    for (position, family) in candidates.iter().enumerate() {
        match fit_model(&sample, *family) {
            Ok(fitted) => {
                if best.is_none_or(|(_, ks)| fitted.ks < ks) {
                    best = Some((position, fitted.ks));
                }
                rows.push(output::FitRow {
                    family: family.name().to_string(),
                    model: Some(fitted.model.describe()),
                    ks: Some(fitted.ks),
                    error: None,
                });
            }
            Err(e) => rows.push(output::FitRow {
                family: family.name().to_string(),
                model: None,
                ks: None,
                error: Some(e.to_string()),
            }),
        }
    }

    let report = output::FitReport {
        schema_version: output::SCHEMA_VERSION,
        tool: output::ToolInfo::current(),
        command: "fit",
        input: output::FitInput {
            data: output::DataEcho { path: file.path.clone(), observations: file.observations() },
            families: candidates.iter().map(|f| f.name().to_string()).collect(),
        },
        defaults_applied: defaults,
        fits: rows,
        best: best.map(|(position, _)| candidates[position].name().to_string()),
    };
    let text = output::text_fit(&report);
    output::emit(&report, text, format, out)
}

pub fn oracle(
    config_path: &Path,
    seed: Option<u64>,
    format: Format,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mut cfg = config::load(config_path)?;
    let spec = cfg
        .spec
        .clone()
        .ok_or_else(|| CliError::Config("oracle needs a spec block (lower, upper)".into()))?;
    let model = match cfg.model {
        Some(ModelDirective::Fixed(model)) => model,
        _ => {
            return Err(CliError::Config(
                "oracle needs a fully specified model (a family with params)".into(),
            ))
        }
    };
    let mut settings = cfg.monte_carlo.take().unwrap_or_else(|| {
        cfg.defaults_applied
            .push(format!("monte_carlo.draws = {} (default)", config::DEFAULT_DRAWS));
        config::McSettings { draws: config::DEFAULT_DRAWS, seed: None }
    });
    if let Some(s) = seed {
        settings.seed = Some(s);
    }
    let seed = settings.seed.ok_or_else(|| {
        CliError::Config("Monte Carlo needs a seed (monte_carlo.seed or --seed)".into())
    })?;

    let mc = capq_core::inference::mc_yield(&model, &spec, settings.draws, seed).map_err(analysis)?;
    let analytic = yield_summary(&model, &spec);
    let gap = mc.estimate - analytic.p;
    let gap_in_standard_errors =
        (mc.standard_error > 0.0).then(|| gap / mc.standard_error);

    let report = output::OracleReport {
        schema_version: output::SCHEMA_VERSION,
        tool: output::ToolInfo::current(),
        command: "oracle",
        input: output::OracleInput {
            spec: spec_echo(&spec),
            model: cfg.model_echo.unwrap_or_default(),
            draws: settings.draws,
            seed,
        },
        defaults_applied: cfg.defaults_applied,
        model: output::ModelSummary {
            description: model.describe(),
            source: "configured",
            ks: None,
        },
        estimate: output::OracleEstimate {
            monte_carlo_yield: mc.estimate,
            standard_error: mc.standard_error,
            analytic_yield: analytic.p,
            gap,
            gap_in_standard_errors,
        },
    };
    let text = output::text_oracle(&report);
    output::emit(&report, text, format, out)
}

pub fn list_indices(format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let report = output::ListReport {
        schema_version: output::SCHEMA_VERSION,
        tool: output::ToolInfo::current(),
        command: "list-indices",
        indices: registry()
            .iter()
            .map(|d| output::IndexInfoOut {
                name: d.name,
                summary: d.summary,
                params: d
                    .params
                    .iter()
                    .map(|p| output::ParamOut { name: p.name, default: p.default })
                    .collect(),
            })
            .collect(),
    };
    let text = output::text_list(&report);
    output::emit(&report, text, format, out)
}
