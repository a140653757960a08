//! Configuration loading: JSON file → validated analysis settings.
//!
//! Every default applied during resolution is recorded as a
//! `"block.field = value (default)"` string so reports can list them; no
//! default is ever applied silently.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use capq_core::classical::SpecLimits;
use capq_core::dist::ProcessModel;
use capq_core::inference::FitFamily;
use capq_core::multivariate::{MvSpec, PipelineOptions, StructuralFunction};
use capq_core::report::{descriptor, IndexRequest, DEFAULT_NONCONFORMING, DEFAULT_TAIL};
use capq_core::yield_based::DesiredRegion;
use serde::Deserialize;

use crate::output::DesiredEcho;
use crate::CliError;

/// Draw count used when a Monte Carlo block omits one.
pub const DEFAULT_DRAWS: usize = 1_000_000;
/// Bootstrap replicate count used when the block omits one.
pub const DEFAULT_REPLICATES: usize = 1_000;
/// Bootstrap confidence level used when the block omits one.
pub const DEFAULT_LEVEL: f64 = 0.95;

// --- raw file layer ---------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    spec: Option<SpecBlock>,
    #[serde(default)]
    desired: Option<DesiredBlock>,
    #[serde(default)]
    model: Option<ModelBlock>,
    #[serde(default)]
    indices: Option<Vec<IndexSpec>>,
    #[serde(default)]
    multivariate: Option<MvBlock>,
    #[serde(default)]
    monte_carlo: Option<McBlock>,
    #[serde(default)]
    bootstrap: Option<BootstrapBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecBlock {
    lower: f64,
    upper: f64,
    #[serde(default)]
    target: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DesiredBlock {
    #[serde(default)]
    alpha1: Option<f64>,
    #[serde(default)]
    alpha2: Option<f64>,
    #[serde(default)]
    ldl: Option<f64>,
    #[serde(default)]
    udl: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelBlock {
    directive: String,
    #[serde(default)]
    params: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    candidates: Option<Vec<String>>,
    #[serde(default)]
    interpolated: Option<bool>,
    #[serde(default)]
    trials: Option<u64>,
}

/// `"c_p"` or `{"name": "vannman", "params": {"u": 1, "v": 0}}`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum IndexSpec {
    Name(String),
    WithParams {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructuralSpec {
    kind: String,
    #[serde(default)]
    weights: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MvBlock {
    lower: Vec<f64>,
    upper: Vec<f64>,
    #[serde(default)]
    target: Option<Vec<f64>>,
    structural: OneOrMany<StructuralSpec>,
    #[serde(default)]
    candidates: Option<Vec<String>>,
    #[serde(default)]
    significance: Option<f64>,
    #[serde(default)]
    nonconforming: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct McBlock {
    #[serde(default)]
    draws: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BootstrapBlock {
    #[serde(default)]
    replicates: Option<usize>,
    #[serde(default)]
    level: Option<f64>,
    #[serde(default)]
    seed: Option<u64>,
}

// --- resolved layer ---------------------------------------------------------

/// How the analysis obtains its distribution model.
#[derive(Debug, Clone)]
pub enum ModelDirective {
    /// Family with explicit parameters; needs no data.
    Fixed(ProcessModel),
    /// Empirical CDF of the data.
    Empirical { interpolated: bool },
    /// Maximum-likelihood fit of one family to the data.
    FitOne(FitFamily),
    /// Fit every candidate and keep the best KS score.
    FitBest(Vec<FitFamily>),
}

#[derive(Debug, Clone)]
pub struct McSettings {
    pub draws: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct BootstrapSettings {
    pub replicates: usize,
    pub level: f64,
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub struct MvConfig {
    pub spec: MvSpec,
    pub structurals: Vec<StructuralFunction>,
    pub candidates: Vec<FitFamily>,
    pub options: PipelineOptions,
    /// Nonconforming proportion defining containment regions.
    pub nonconforming: f64,
}

/// Fully validated configuration with all defaults resolved and recorded.
#[derive(Debug)]
pub struct Config {
    pub spec: Option<SpecLimits>,
    pub desired: DesiredRegion,
    pub desired_echo: DesiredEcho,
    pub model: Option<ModelDirective>,
    /// The directive string exactly as configured, for the input echo.
    pub model_echo: Option<String>,
    pub indices: Vec<IndexRequest>,
    pub multivariate: Option<MvConfig>,
    pub monte_carlo: Option<McSettings>,
    pub bootstrap: Option<BootstrapSettings>,
    pub defaults_applied: Vec<String>,
}

/// Read and validate a configuration file.
pub fn load(path: &Path) -> Result<Config, CliError> {
    let display = path.display();
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config '{display}': {e}")))?;
    let file: FileConfig = serde_json::from_str(&raw)
        .map_err(|e| CliError::Config(format!("config '{display}': {e}")))?;

    let mut defaults = Vec::new();
    let spec = file
        .spec
        .map(|b| {
            match b.target {
                Some(t) => SpecLimits::with_target(b.lower, b.upper, t),
                None => SpecLimits::new(b.lower, b.upper),
            }
            .map_err(cfg_err)
        })
        .transpose()?;
    let (desired, desired_echo) = resolve_desired(file.desired, &mut defaults)?;
    let (model, model_echo) = match file.model {
        Some(block) => {
            let (directive, echo) = resolve_model(block, &mut defaults)?;
            (Some(directive), Some(echo))
        }
        None => (None, None),
    };
    let indices = match file.indices {
        Some(list) => resolve_indices(list, &mut defaults)?,
        None => Vec::new(),
    };
    let multivariate =
        file.multivariate.map(|b| resolve_mv(b, &mut defaults)).transpose()?;
    let monte_carlo = file.monte_carlo.map(|b| resolve_mc(b, &mut defaults)).transpose()?;
    let bootstrap = file.bootstrap.map(|b| resolve_bootstrap(b, &mut defaults)).transpose()?;

    Ok(Config {
        spec,
        desired,
        desired_echo,
        model,
        model_echo,
        indices,
        multivariate,
        monte_carlo,
        bootstrap,
        defaults_applied: defaults,
    })
}

fn cfg_err(e: capq_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn resolve_desired(
    block: Option<DesiredBlock>,
    defaults: &mut Vec<String>,
) -> Result<(DesiredRegion, DesiredEcho), CliError> {
    let block = block.unwrap_or_default();
    let has_limits = block.ldl.is_some() || block.udl.is_some();
    let has_tails = block.alpha1.is_some() || block.alpha2.is_some();
    if has_limits && has_tails {
        return Err(CliError::Config(
            "the desired region takes either ldl/udl or alpha1/alpha2, not both".into(),
        ));
    }
    if has_limits {
        let (Some(ldl), Some(udl)) = (block.ldl, block.udl) else {
            return Err(CliError::Config("desired limits need both ldl and udl".into()));
        };
        let region = DesiredRegion::limits(ldl, udl).map_err(cfg_err)?;
        return Ok((
            region,
            DesiredEcho {
                kind: "limits",
                alpha1: None,
                alpha2: None,
                ldl: Some(ldl),
                udl: Some(udl),
            },
        ));
    }
    let mut tail = |name: &str, value: Option<f64>| match value {
        Some(v) => v,
        None => {
            defaults.push(format!("desired.{name} = {DEFAULT_TAIL} (default)"));
            DEFAULT_TAIL
        }
    };
    let alpha1 = tail("alpha1", block.alpha1);
    let alpha2 = tail("alpha2", block.alpha2);
    let region = DesiredRegion::tail_proportions(alpha1, alpha2).map_err(cfg_err)?;
    Ok((
        region,
        DesiredEcho {
            kind: "tail_proportions",
            alpha1: Some(alpha1),
            alpha2: Some(alpha2),
            ldl: None,
            udl: None,
        },
    ))
}

/// Family names accepted by fit directives and candidate lists.
pub fn parse_family(name: &str, trials: Option<u64>) -> Result<FitFamily, CliError> {
    if name == "binomial" {
        let trials = trials.ok_or_else(|| {
            CliError::Config("fitting the binomial family requires a trials count".into())
        })?;
        if trials == 0 {
            return Err(CliError::Config("binomial trials must be at least 1".into()));
        }
        return Ok(FitFamily::Binomial { trials });
    }
    FitFamily::parse(name).ok_or_else(|| {
        CliError::Config(format!(
            "unknown model family '{name}'; known families: normal, lognormal, weibull, gamma, \
             uniform, exponential, poisson, binomial"
        ))
    })
}

/// Names of the default candidate set, for default echoes.
pub fn continuous_names() -> String {
    let names: Vec<&str> = FitFamily::CONTINUOUS.iter().map(|f| f.name()).collect();
    names.join(", ")
}

fn resolve_model(
    block: ModelBlock,
    defaults: &mut Vec<String>,
) -> Result<(ModelDirective, String), CliError> {
    let reject = |field: &str, present: bool, directive: &str| -> Result<(), CliError> {
        if present {
            return Err(CliError::Config(format!(
                "model directive '{directive}' does not take '{field}'"
            )));
        }
        Ok(())
    };
    match block.directive.as_str() {
        "empirical" => {
            reject("params", block.params.is_some(), "empirical")?;
            reject("candidates", block.candidates.is_some(), "empirical")?;
            reject("trials", block.trials.is_some(), "empirical")?;
            let interpolated = match block.interpolated {
                Some(v) => v,
                None => {
                    defaults.push("model.interpolated = false (default)".into());
                    false
                }
            };
            let echo = if interpolated { "empirical (interpolated)" } else { "empirical" };
            Ok((ModelDirective::Empirical { interpolated }, echo.into()))
        }
        "fit:auto" => {
            reject("params", block.params.is_some(), "fit:auto")?;
            reject("interpolated", block.interpolated.is_some(), "fit:auto")?;
            let candidates = match block.candidates {
                Some(names) => names
                    .iter()
                    .map(|n| parse_family(n, block.trials))
                    .collect::<Result<Vec<_>, _>>()?,
                None => {
                    defaults
                        .push(format!("model.candidates = {} (default)", continuous_names()));
                    FitFamily::CONTINUOUS.to_vec()
                }
            };
            if candidates.is_empty() {
                return Err(CliError::Config("model.candidates is empty".into()));
            }
            Ok((ModelDirective::FitBest(candidates), "fit:auto".into()))
        }
        family => {
            reject("candidates", block.candidates.is_some(), family)?;
            reject("interpolated", block.interpolated.is_some(), family)?;
            match block.params {
                Some(params) => {
                    if block.trials.is_some() {
                        return Err(CliError::Config(
                            "a fully specified binomial model takes 'trials' inside params".into(),
                        ));
                    }
                    let model = fixed_model(family, &params)?;
                    Ok((ModelDirective::Fixed(model), family.to_string()))
                }
                None => {
                    if family != "binomial" && block.trials.is_some() {
                        return Err(CliError::Config(
                            "model.trials only applies to the binomial family".into(),
                        ));
                    }
                    let fit = parse_family(family, block.trials)?;
                    Ok((ModelDirective::FitOne(fit), family.to_string()))
                }
            }
        }
    }
}

/// Build a fully specified model, checking the parameter keys exactly.
fn fixed_model(family: &str, params: &BTreeMap<String, f64>) -> Result<ProcessModel, CliError> {
    let take = |keys: &[&str]| -> Result<Vec<f64>, CliError> {
        for key in params.keys() {
            if !keys.contains(&key.as_str()) {
                return Err(CliError::Config(format!(
                    "model family '{family}' takes parameters {}; got '{key}'",
                    keys.join(", ")
                )));
            }
        }
        keys.iter()
            .map(|k| {
                params.get(*k).copied().ok_or_else(|| {
                    CliError::Config(format!("model family '{family}' needs parameter '{k}'"))
                })
            })
            .collect()
    };
    let model = match family {
        "normal" => {
            let v = take(&["mean", "sd"])?;
            ProcessModel::normal(v[0], v[1])
        }
        "lognormal" => {
            let v = take(&["log_mean", "log_sd"])?;
            ProcessModel::log_normal(v[0], v[1])
        }
        "weibull" => {
            let v = take(&["shape", "scale"])?;
            ProcessModel::weibull(v[0], v[1])
        }
        "gamma" => {
            let v = take(&["shape", "scale"])?;
            ProcessModel::gamma(v[0], v[1])
        }
        "uniform" => {
            let v = take(&["lower", "upper"])?;
            ProcessModel::uniform(v[0], v[1])
        }
        "exponential" => {
            let v = take(&["rate"])?;
            ProcessModel::exponential(v[0])
        }
        "poisson" => {
            let v = take(&["rate"])?;
            ProcessModel::poisson(v[0])
        }
        "binomial" => {
            let v = take(&["trials", "prob"])?;
            let trials = v[0];
            if trials.fract() != 0.0 || !(1.0..=9.0e15).contains(&trials) {
                return Err(CliError::Config(format!(
                    "binomial trials must be a positive integer (got {trials})"
                )));
            }
            ProcessModel::binomial(trials as u64, v[1])
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown model family '{other}'; known families: normal, lognormal, weibull, \
                 gamma, uniform, exponential, poisson, binomial"
            )))
        }
    };
    model.map_err(cfg_err)
}

fn resolve_indices(
    list: Vec<IndexSpec>,
    defaults: &mut Vec<String>,
) -> Result<Vec<IndexRequest>, CliError> {
    if list.is_empty() {
        return Err(CliError::Config("the indices list is empty".into()));
    }
    let mut out = Vec::with_capacity(list.len());
    let mut seen = BTreeSet::new();
    for item in list {
        let (name, params) = match item {
            IndexSpec::Name(name) => (name, BTreeMap::new()),
            IndexSpec::WithParams { name, params } => (name, params),
        };
        // Reject unknown parameter keys before the lookup silently skips them.
        if let Some(desc) = descriptor(&name) {
            for key in params.keys() {
                if !desc.params.iter().any(|p| p.name == key) {
                    let known: Vec<&str> = desc.params.iter().map(|p| p.name).collect();
                    return Err(CliError::Config(if known.is_empty() {
                        format!("index '{name}' takes no parameters; got '{key}'")
                    } else {
                        format!(
                            "index '{name}' has no parameter '{key}'; parameters: {}",
                            known.join(", ")
                        )
                    }));
                }
            }
        }
        let (request, applied) =
            IndexRequest::from_name(&name, &|p| params.get(p).copied()).map_err(cfg_err)?;
        defaults.extend(applied);
        if !seen.insert(name.clone()) {
            return Err(CliError::Config(format!("index '{name}' requested more than once")));
        }
        out.push(request);
    }
    Ok(out)
}

fn resolve_structural(spec: StructuralSpec) -> Result<StructuralFunction, CliError> {
    match spec.kind.as_str() {
        "min" | "max" => {
            if spec.weights.is_some() {
                return Err(CliError::Config(format!(
                    "structural '{}' takes no weights",
                    spec.kind
                )));
            }
            Ok(if spec.kind == "min" { StructuralFunction::Min } else { StructuralFunction::Max })
        }
        "weighted_sum" => {
            let weights = spec.weights.ok_or_else(|| {
                CliError::Config("structural 'weighted_sum' needs weights".into())
            })?;
            StructuralFunction::weighted_sum(weights).map_err(cfg_err)
        }
        other => Err(CliError::Config(format!(
            "unknown structural kind '{other}'; kinds: min, max, weighted_sum"
        ))),
    }
}

fn resolve_mv(block: MvBlock, defaults: &mut Vec<String>) -> Result<MvConfig, CliError> {
    let spec = match block.target {
        Some(t) => MvSpec::with_target(block.lower, block.upper, t),
        None => MvSpec::new(block.lower, block.upper),
    }
    .map_err(cfg_err)?;
    let raw = match block.structural {
        OneOrMany::One(s) => vec![s],
        OneOrMany::Many(list) => list,
    };
    if raw.is_empty() {
        return Err(CliError::Config("the structural list is empty".into()));
    }
    let structurals =
        raw.into_iter().map(resolve_structural).collect::<Result<Vec<_>, _>>()?;
    for s in &structurals {
        s.validate(spec.dim()).map_err(cfg_err)?;
    }
    let candidates = match block.candidates {
        Some(names) => {
            names.iter().map(|n| parse_family(n, None)).collect::<Result<Vec<_>, _>>()?
        }
        None => {
            defaults
                .push(format!("multivariate.candidates = {} (default)", continuous_names()));
            FitFamily::CONTINUOUS.to_vec()
        }
    };
    if candidates.is_empty() {
        return Err(CliError::Config("multivariate.candidates is empty".into()));
    }
    let significance = match block.significance {
        Some(v) => v,
        None => {
            let v = PipelineOptions::default().significance;
            defaults.push(format!("multivariate.significance = {v} (default)"));
            v
        }
    };
    if !(significance > 0.0 && significance < 1.0) {
        return Err(CliError::Config(format!(
            "multivariate.significance must lie strictly between 0 and 1 (got {significance})"
        )));
    }
    let nonconforming = match block.nonconforming {
        Some(v) => v,
        None => {
            defaults
                .push(format!("multivariate.nonconforming = {DEFAULT_NONCONFORMING} (default)"));
            DEFAULT_NONCONFORMING
        }
    };
    if !(nonconforming > 0.0 && nonconforming < 1.0) {
        return Err(CliError::Config(format!(
            "multivariate.nonconforming must lie strictly between 0 and 1 (got {nonconforming})"
        )));
    }
    Ok(MvConfig {
        spec,
        structurals,
        candidates,
        options: PipelineOptions { significance },
        nonconforming,
    })
}

fn resolve_mc(block: McBlock, defaults: &mut Vec<String>) -> Result<McSettings, CliError> {
    let draws = match block.draws {
        Some(v) => v,
        None => {
            defaults.push(format!("monte_carlo.draws = {DEFAULT_DRAWS} (default)"));
            DEFAULT_DRAWS
        }
    };
    if draws < 10_000 {
        return Err(CliError::Config(format!(
            "monte_carlo.draws must be at least 10000 (got {draws})"
        )));
    }
    Ok(McSettings { draws, seed: block.seed })
}

fn resolve_bootstrap(
    block: BootstrapBlock,
    defaults: &mut Vec<String>,
) -> Result<BootstrapSettings, CliError> {
    let replicates = match block.replicates {
        Some(v) => v,
        None => {
            defaults.push(format!("bootstrap.replicates = {DEFAULT_REPLICATES} (default)"));
            DEFAULT_REPLICATES
        }
    };
    if replicates < 200 {
        return Err(CliError::Config(format!(
            "bootstrap.replicates must be at least 200 (got {replicates})"
        )));
    }
    let level = match block.level {
        Some(v) => v,
        None => {
            defaults.push(format!("bootstrap.level = {DEFAULT_LEVEL} (default)"));
            DEFAULT_LEVEL
        }
    };
    if !(level > 0.0 && level < 1.0) {
        return Err(CliError::Config(format!(
            "bootstrap.level must lie strictly between 0 and 1 (got {level})"
        )));
    }
    Ok(BootstrapSettings { replicates, level, seed: block.seed })
}

/// Apply a `--seed` override to every stochastic block.
pub fn override_seeds(config: &mut Config, seed: Option<u64>) {
    let Some(seed) = seed else { return };
    if let Some(mc) = &mut config.monte_carlo {
        mc.seed = Some(seed);
    }
    if let Some(b) = &mut config.bootstrap {
        b.seed = Some(seed);
    }
}
