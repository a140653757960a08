//! Estimation layer: maximum-likelihood model fitting with goodness-of-fit
//! ranking, plug-in index estimation from samples, percentile-bootstrap
//! confidence intervals, and a seeded Monte Carlo yield check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classical::{basic_indices, ProcessMoments, SpecLimits};
use crate::dist::{derive_seed, ProcessModel};
use crate::error::{Error, Result};
use crate::report::{IndexEntry, IndexRequest};
use crate::special;
use crate::yield_based::{self, DesiredRegion};
use crate::{classical, generalized};

/// A univariate sample of finite measurements with a source tag.
#[derive(Debug, Clone)]
pub struct Sample {
    values: Vec<f64>,
    source: String,
}

impl Sample {
    /// Validate and wrap measurements; at least two finite values required.
    pub fn new(values: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::domain(format!(
                "sample needs at least 2 observations (got {})",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("sample values must be finite (got {bad})")));
        }
        Ok(Self { values, source: source.into() })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the constructor enforces n >= 2
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Sample mean.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Sample standard deviation with the n−1 denominator.
    pub fn sd(&self) -> f64 {
        let mean = self.mean();
        let ss = self.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
        (ss / (self.len() as f64 - 1.0)).sqrt()
    }
}

/// Parametric families the fitter knows how to estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitFamily {
    Normal,
    LogNormal,
    Weibull,
    Gamma,
    Uniform,
    Exponential,
    Poisson,
    /// Binomial needs the number of trials supplied; it cannot be inferred
    /// reliably from counts alone.
    Binomial { trials: u64 },
}

impl FitFamily {
    /// Continuous families, the default candidate set for automatic fitting.
    pub const CONTINUOUS: &'static [FitFamily] = &[
        FitFamily::Normal,
        FitFamily::LogNormal,
        FitFamily::Weibull,
        FitFamily::Gamma,
        FitFamily::Uniform,
        FitFamily::Exponential,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FitFamily::Normal => "normal",
            FitFamily::LogNormal => "lognormal",
            FitFamily::Weibull => "weibull",
            FitFamily::Gamma => "gamma",
            FitFamily::Uniform => "uniform",
            FitFamily::Exponential => "exponential",
            FitFamily::Poisson => "poisson",
            FitFamily::Binomial { .. } => "binomial",
        }
    }

    /// Parse a family name; binomial is excluded because it needs a trial
    /// count to accompany it.
    pub fn parse(name: &str) -> Option<FitFamily> {
        match name {
            "normal" => Some(FitFamily::Normal),
            "lognormal" => Some(FitFamily::LogNormal),
            "weibull" => Some(FitFamily::Weibull),
            "gamma" => Some(FitFamily::Gamma),
            "uniform" => Some(FitFamily::Uniform),
            "exponential" => Some(FitFamily::Exponential),
            "poisson" => Some(FitFamily::Poisson),
            _ => None,
        }
    }
}

/// A fitted model together with its goodness-of-fit score.
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub model: ProcessModel,
    pub family: FitFamily,
    /// Kolmogorov–Smirnov distance between the sample and the fitted CDF.
    /// Used as a ranking score only — fitted parameters invalidate the
    /// standard KS reference distribution, so no p-value is attached.
    pub ks: f64,
}

/// Kolmogorov–Smirnov statistic of `sorted` (ascending) against `cdf`.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in sorted.iter().enumerate() {
        let f = cdf(*x);
        d = d.max(((i + 1) as f64 / n - f).max(f - i as f64 / n));
    }
    d
}

/// Fit `family` to `sample` by maximum likelihood (method of moments as a
/// fallback where the likelihood equations fail to bracket) and attach the
/// KS score against the fitted CDF.
pub fn fit_model(sample: &Sample, family: FitFamily) -> Result<FittedModel> {
    let xs = sample.values();
    let model = match family {
        FitFamily::Normal => {
            let (mean, sd) = normal_mle(xs)?;
            ProcessModel::normal(mean, sd)?
        }
        FitFamily::LogNormal => {
            if let Some(bad) = xs.iter().find(|v| **v <= 0.0) {
                return Err(Error::domain(format!(
                    "lognormal requires strictly positive observations (found {bad})"
                )));
            }
            let logs: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
            let (mean, sd) = normal_mle(&logs)?;
            ProcessModel::log_normal(mean, sd)?
        }
        FitFamily::Weibull => {
            if let Some(bad) = xs.iter().find(|v| **v <= 0.0) {
                return Err(Error::domain(format!(
                    "weibull requires strictly positive observations (found {bad})"
                )));
            }
            let (shape, scale) = weibull_mle(xs)?;
            ProcessModel::weibull(shape, scale)?
        }
        FitFamily::Gamma => {
            if let Some(bad) = xs.iter().find(|v| **v <= 0.0) {
                return Err(Error::domain(format!(
                    "gamma requires strictly positive observations (found {bad})"
                )));
            }
            let (shape, scale) = gamma_mle(xs)?;
            ProcessModel::gamma(shape, scale)?
        }
        FitFamily::Uniform => {
            let (lo, hi) = min_max(xs);
            if lo == hi {
                return Err(Error::domain("constant sample: uniform fit is degenerate"));
            }
            ProcessModel::uniform(lo, hi)?
        }
        FitFamily::Exponential => {
            if let Some(bad) = xs.iter().find(|v| **v < 0.0) {
                return Err(Error::domain(format!(
                    "exponential requires nonnegative observations (found {bad})"
                )));
            }
            let mean = sample.mean();
            if mean <= 0.0 {
                return Err(Error::domain("constant zero sample: exponential fit is degenerate"));
            }
            ProcessModel::exponential(1.0 / mean)?
        }
        FitFamily::Poisson => {
            if let Some(bad) = xs.iter().find(|v| **v < 0.0 || v.fract() != 0.0) {
                return Err(Error::domain(format!(
                    "poisson requires nonnegative integer counts (found {bad})"
                )));
            }
            let mean = sample.mean();
            if mean <= 0.0 {
                return Err(Error::domain("all-zero sample: poisson rate would be zero"));
            }
            ProcessModel::poisson(mean)?
        }
        FitFamily::Binomial { trials } => {
            if let Some(bad) =
                xs.iter().find(|v| **v < 0.0 || v.fract() != 0.0 || **v > trials as f64)
            {
                return Err(Error::domain(format!(
                    "binomial with {trials} trials requires integer counts in [0, {trials}] (found {bad})"
                )));
            }
            ProcessModel::binomial(trials, sample.mean() / trials as f64)?
        }
    };
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let ks = ks_statistic(&sorted, |x| model.cdf(x));
    Ok(FittedModel { model, family, ks })
}

/// Fit every candidate family and return the one with the smallest KS score.
pub fn fit_best(sample: &Sample, candidates: &[FitFamily]) -> Result<FittedModel> {
    if candidates.is_empty() {
        return Err(Error::domain("no candidate families supplied"));
    }
    let mut best: Option<FittedModel> = None;
    let mut failures = Vec::new();
    for family in candidates {
        match fit_model(sample, *family) {
            Ok(fit) => {
                if best.as_ref().is_none_or(|b| fit.ks < b.ks) {
                    best = Some(fit);
                }
            }
            Err(e) => failures.push(format!("{}: {e}", family.name())),
        }
    }
    best.ok_or_else(|| {
        Error::numeric(format!("no candidate family could be fitted ({})", failures.join("; ")))
    })
}

/// Empirical model over the sample (step CDF, order-statistic quantiles).
pub fn empirical_model(sample: &Sample) -> ProcessModel {
    ProcessModel::empirical(sample.values()).expect("sample invariants imply a valid model")
}

fn normal_mle(xs: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss = xs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    let sd = (ss / n).sqrt();
    if sd <= 0.0 {
        return Err(Error::domain("constant sample: fitted sd would be zero"));
    }
    Ok((mean, sd))
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in xs {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    (lo, hi)
}

/// Weibull maximum likelihood via bisection on the profile shape equation
/// `Σ xᵏ ln x / Σ xᵏ − 1/k − mean(ln x) = 0` (increasing in k).
fn weibull_mle(xs: &[f64]) -> Result<(f64, f64)> {
    let (lo_x, hi_x) = min_max(xs);
    if lo_x == hi_x {
        return Err(Error::domain("constant sample: weibull fit is degenerate"));
    }
    let n = xs.len() as f64;
    let mean_log = xs.iter().map(|v| v.ln()).sum::<f64>() / n;
    // Work with t = x/max(x) so that t^k never overflows.
    let scale_ref = hi_x;
    let profile = |k: f64| -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for &x in xs {
            let t = (x / scale_ref).powf(k);
            num += t * x.ln();
            den += t;
        }
        num / den - 1.0 / k - mean_log
    };
    let mut lo = 1.0e-2;
    let mut hi = 1.0;
    let mut grow = 0;
    while profile(hi) < 0.0 {
        hi *= 2.0;
        grow += 1;
        if grow > 24 {
            return Err(Error::numeric("weibull shape iteration failed to bracket"));
        }
    }
    while profile(lo) > 0.0 {
        lo *= 0.5;
        grow += 1;
        if grow > 48 {
            return Err(Error::numeric("weibull shape iteration failed to bracket"));
        }
    }
    let shape = special::bisect_increasing(profile, 0.0, lo, hi);
    let mean_pow = xs.iter().map(|v| (v / scale_ref).powf(shape)).sum::<f64>() / n;
    let scale = scale_ref * mean_pow.powf(1.0 / shape);
    Ok((shape, scale))
}

/// Gamma maximum likelihood: solve `ln k − ψ(k) = ln(mean) − mean(ln x)` by
/// bisection, falling back to method of moments if bracketing fails.
fn gamma_mle(xs: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let mean_log = xs.iter().map(|v| v.ln()).sum::<f64>() / n;
    let s = mean.ln() - mean_log;
    if !(s > 0.0) {
        return Err(Error::domain("constant sample: gamma fit is degenerate"));
    }
    // Standard closed-form starting point.
    let k0 = (3.0 - s + ((s - 3.0) * (s - 3.0) + 24.0 * s).sqrt()) / (12.0 * s);
    let gap = |k: f64| k.ln() - special::digamma(k); // decreasing toward 0
    let mut lo = k0;
    let mut hi = k0;
    let mut grow = 0;
    while gap(lo) < s {
        lo *= 0.5;
        grow += 1;
        if grow > 60 {
            return Ok(moment_gamma(xs, mean));
        }
    }
    while gap(hi) > s {
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return Ok(moment_gamma(xs, mean));
        }
    }
    // gap is decreasing, so bisect its negation.
    let shape = special::bisect_increasing(|k| -gap(k), -s, lo, hi);
    Ok((shape, mean / shape))
}

fn moment_gamma(xs: &[f64], mean: f64) -> (f64, f64) {
    let n = xs.len() as f64;
    let var = xs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let shape = mean * mean / var;
    (shape, var / mean)
}

/// Monte Carlo yield estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McYield {
    /// Fraction of draws inside `[L, U]`.
    pub estimate: f64,
    /// Binomial standard error `√(p̂(1−p̂)/n)`.
    pub standard_error: f64,
}

/// Estimate the yield of `model` over `spec` from `n >= 10_000` seeded draws.
pub fn mc_yield(model: &ProcessModel, spec: &SpecLimits, n: usize, seed: u64) -> Result<McYield> {
    if n < 10_000 {
        return Err(Error::domain(format!(
            "monte carlo yield requires at least 10000 draws (got {n})"
        )));
    }
    let draws = model.sample(n, seed)?;
    let hits =
        draws.iter().filter(|x| **x >= spec.lower() && **x <= spec.upper()).count();
    let p = hits as f64 / n as f64;
    Ok(McYield { estimate: p, standard_error: (p * (1.0 - p) / n as f64).sqrt() })
}

/// How to turn a sample into a distribution model for yield/quantile indices.
#[derive(Debug, Clone)]
pub enum ModelChoice {
    /// Step empirical CDF; `interpolated` switches quantiles to linear
    /// interpolation between order statistics.
    Empirical { interpolated: bool },
    /// Fit one specific family.
    Fit(FitFamily),
    /// Fit every candidate and keep the best KS score.
    FitBest(Vec<FitFamily>),
}

/// Everything an index estimate needs besides the sample itself.
#[derive(Debug, Clone)]
pub struct EstimateConfig {
    pub spec: SpecLimits,
    pub desired: DesiredRegion,
    pub model: ModelChoice,
}

fn resolve_model(sample: &Sample, choice: &ModelChoice) -> Result<ProcessModel> {
    match choice {
        ModelChoice::Empirical { interpolated: false } => Ok(empirical_model(sample)),
        ModelChoice::Empirical { interpolated: true } => {
            ProcessModel::empirical_interpolated(sample.values())
        }
        ModelChoice::Fit(family) => Ok(fit_model(sample, *family)?.model),
        ModelChoice::FitBest(candidates) => Ok(fit_best(sample, candidates)?.model),
    }
}

/// Reject empirical tail quantiles that would fall on the extreme order
/// statistics: a tail of mass `a` needs at least ⌈1/a⌉ observations.
fn interior_quantile_guard(request: &IndexRequest, model: &ProcessModel) -> Result<()> {
    let Some(n) = model.observation_count() else {
        return Ok(());
    };
    let check = |label: &str, tail: f64| -> Result<()> {
        if tail <= 0.0 {
            return Ok(());
        }
        let needed = (1.0 / tail).ceil() as usize;
        if n < needed {
            return Err(Error::domain(format!(
                "empirical quantile at tail {label} = {tail} needs at least {needed} observations (got {n})"
            )));
        }
        Ok(())
    };
    match request {
        IndexRequest::Clements { a } => check("a", *a),
        IndexRequest::Mukherjee { alpha1, alpha2 } => {
            check("alpha1", *alpha1)?;
            check("alpha2", *alpha2)
        }
        _ => Ok(()),
    }
}

/// Plug-in estimate of one index from a sample.
///
/// Moment-based indices substitute the sample mean and the n−1 standard
/// deviation into the closed forms; model-based indices evaluate the fitted
/// or empirical model selected by `config.model`.
pub fn estimate_index(
    sample: &Sample,
    request: &IndexRequest,
    config: &EstimateConfig,
) -> Result<IndexEntry> {
    request.validate_params()?;
    if request.is_moment_based() {
        let sd = sample.sd();
        if !(sd > 0.0) {
            return Err(Error::domain(format!(
                "moment index '{}' needs sample sd > 0 (constant sample of {} values)",
                request.name(),
                sample.len()
            )));
        }
        let mom = ProcessMoments::new(sample.mean(), sd)?;
        moment_entry(request, &config.spec, &mom)
    } else {
        let model = resolve_model(sample, &config.model)?;
        interior_quantile_guard(request, &model)?;
        model_entry(request, &config.spec, &config.desired, &model)
    }
}

/// Compute a moment-based index from explicit moments (no sample needed).
pub fn moment_entry(
    request: &IndexRequest,
    spec: &SpecLimits,
    mom: &ProcessMoments,
) -> Result<IndexEntry> {
    let idx = basic_indices(spec, mom);
    let defaulted_note = "target defaulted to the spec midpoint";
    let entry = match request {
        IndexRequest::CP => IndexEntry::finite("c_p", idx.c_p),
        IndexRequest::CPk => IndexEntry::finite("c_pk", idx.c_pk),
        IndexRequest::CPm => {
            let mut e = IndexEntry::finite("c_pm", idx.c_pm);
            if idx.target_defaulted {
                e = e.with_note(defaulted_note);
            }
            e
        }
        IndexRequest::CPmk => {
            let mut e = IndexEntry::finite("c_pmk", idx.c_pmk);
            if idx.target_defaulted {
                e = e.with_note(defaulted_note);
            }
            e
        }
        IndexRequest::SPk => IndexEntry::from_value("s_pk", classical::s_pk(spec, mom)),
        IndexRequest::Vannman { u, v } => {
            let mut e = IndexEntry::finite("vannman", classical::vannman(spec, mom, *u, *v)?)
                .with_component("u", *u)
                .with_component("v", *v);
            if *v > 0.0 && idx.target_defaulted {
                e = e.with_note(defaulted_note);
            }
            e
        }
        IndexRequest::SpiringW { w } => {
            let weight = *w;
            let value = classical::spiring_cpw(spec, mom, |d| weight * d * d)?;
            let mut e = IndexEntry::finite("spiring_cpw", value).with_component("w", weight);
            if idx.target_defaulted {
                e = e.with_note(defaulted_note);
            }
            e
        }
        _ => unreachable!("moment_entry called with a model-based request"),
    };
    Ok(entry)
}

/// Compute a model-based index from an explicit model.
pub fn model_entry(
    request: &IndexRequest,
    spec: &SpecLimits,
    desired: &DesiredRegion,
    model: &ProcessModel,
) -> Result<IndexEntry> {
    let entry = match request {
        IndexRequest::Clements { a } => {
            IndexEntry::finite("clements_cp", yield_based::clements_cp(spec, model, *a)?)
                .with_component("a", *a)
        }
        IndexRequest::Mukherjee { alpha1, alpha2 } => IndexEntry::finite(
            "mukherjee_i",
            yield_based::mukherjee_i(spec, model, *alpha1, *alpha2)?,
        )
        .with_component("alpha1", *alpha1)
        .with_component("alpha2", *alpha2),
        IndexRequest::YbRatio { p0_nc } => {
            let v = yield_based::yb_ratio(*p0_nc, model, spec)?;
            IndexEntry::from_value("yb_ratio", v).with_component("p0_nc", *p0_nc)
        }
        IndexRequest::YbCf { alpha0_lower, alpha0_upper } => {
            let ys = yield_based::yield_summary(model, spec);
            let v = yield_based::yb_cf(*alpha0_lower, *alpha0_upper, model, spec)?;
            IndexEntry::from_value("yb_cf", v)
                .with_component("alpha_l", ys.lower_nc)
                .with_component("alpha_u", ys.upper_nc)
        }
        IndexRequest::BorgesHo => {
            IndexEntry::from_value("borges_ho_c", yield_based::borges_ho_c(model, spec))
        }
        IndexRequest::Perakis { p0 } => {
            let v = yield_based::perakis_cpc(*p0, model, spec)?;
            IndexEntry::from_value("perakis_cpc", v).with_component("p0", *p0)
        }
        IndexRequest::CPy => {
            let ys = yield_based::yield_summary(model, spec);
            let p0 = desired.desired_yield(model);
            IndexEntry::finite("c_py", generalized::c_py(model, spec, desired)?)
                .with_component("p", ys.p)
                .with_component("p0", p0)
        }
        IndexRequest::CPyk => {
            let k = generalized::c_pyk(model, spec, desired)?;
            IndexEntry::finite("c_pyk", k.value)
                .with_component("c_pyu", k.upper)
                .with_component("c_pyl", k.lower)
        }
        IndexRequest::CPTk => {
            let t = generalized::c_ptk(model, spec, desired)?;
            IndexEntry::finite("c_ptk", t.value)
                .with_component("upper", t.upper)
                .with_component("lower", t.lower)
        }
        _ => unreachable!("model_entry called with a moment-based request"),
    };
    Ok(entry)
}

/// Interval-estimation method tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CiMethod {
    PercentileBootstrap,
}

impl CiMethod {
    pub fn name(&self) -> &'static str {
        match self {
            CiMethod::PercentileBootstrap => "percentile_bootstrap",
        }
    }
}

/// A bootstrap confidence interval around a plug-in point estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalEstimate {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub method: CiMethod,
    pub replicates: usize,
    pub seed: u64,
    /// Set when the point estimate falls outside the interval (possible for
    /// percentile intervals on pathological resamples); the bounds are
    /// reported as computed rather than silently reordered.
    pub point_outside: bool,
}

/// Percentile bootstrap interval for one index.
///
/// Resamples with replacement `replicates >= 200` times, recomputes the
/// plug-in estimate on each resample (child seed derived from `seed` and the
/// replicate number), and takes the empirical `(1±level)/2` quantiles.
pub fn bootstrap_ci(
    sample: &Sample,
    request: &IndexRequest,
    config: &EstimateConfig,
    replicates: usize,
    level: f64,
    seed: u64,
) -> Result<IntervalEstimate> {
    if replicates < 200 {
        return Err(Error::domain(format!(
            "bootstrap requires at least 200 replicates (got {replicates})"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!(
            "confidence level must lie strictly between 0 and 1 (got {level})"
        )));
    }
    let base = estimate_index(sample, request, config)?;
    let Some(point) = base.value else {
        return Err(Error::numeric(format!(
            "cannot bootstrap '{}': the point estimate is flagged infinite",
            request.name()
        )));
    };
    let n = sample.len();
    let mut stats = Vec::with_capacity(replicates);
    let mut failures = 0usize;
    let mut first_failure: Option<String> = None;
    for b in 0..replicates {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, b as u64));
        let resample: Vec<f64> =
            (0..n).map(|_| sample.values()[rng.random_range(0..n)]).collect();
        let resample = Sample::new(resample, format!("{}:bootstrap:{b}", sample.source()))?;
        match estimate_index(&resample, request, config) {
            Ok(entry) => match entry.value {
                Some(v) => stats.push(v),
                None => {
                    failures += 1;
                    first_failure.get_or_insert_with(|| "estimate flagged infinite".to_string());
                }
            },
            Err(e) => {
                failures += 1;
                first_failure.get_or_insert_with(|| e.to_string());
            }
        }
    }
    if failures * 10 > replicates {
        let detail = first_failure.unwrap_or_default();
        return Err(Error::numeric(format!(
            "index '{}' undefined on {failures} of {replicates} bootstrap resamples (first failure: {detail})",
            request.name()
        )));
    }
    stats.sort_by(f64::total_cmp);
    let m = stats.len();
    let tail = 0.5 * (1.0 - level);
    let order = |u: f64| -> f64 {
        let idx = (m as f64 * u).ceil() as usize;
        stats[idx.clamp(1, m) - 1]
    };
    let lower = order(tail);
    let upper = order(1.0 - tail);
    Ok(IntervalEstimate {
        point,
        lower,
        upper,
        level,
        method: CiMethod::PercentileBootstrap,
        replicates,
        seed,
        point_outside: point < lower || point > upper,
    })
}
