//! Distribution kernel: process model families plus the auxiliary
//! distributions (standard normal, chi-square, Fisher F) every index module
//! consumes.
//!
//! All models expose the same small surface — cdf, strict lower probability,
//! quantile, moments, seeded sampling — so the index layers never branch on
//! the family.  Everything is deterministic given explicit inputs (including
//! seeds) and free of global state.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::special;

/// Whether a model places probability on intervals or on lattice points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Continuous,
    Discrete,
}

/// Closed-form (or quantile-derived) location/scale summary of a model.
#[derive(Debug, Clone, Copy)]
pub struct Moments {
    /// Distribution mean.
    pub mean: f64,
    /// Distribution standard deviation.
    pub sd: f64,
    /// Distribution median, `quantile(0.5)` under the model's convention.
    pub median: f64,
}

/// A process distribution: one of the supported parametric families or an
/// empirical model built from observations.
///
/// Constructors validate parameters, so a `ProcessModel` value is always
/// usable.  Quantiles of continuous families invert the CDF exactly (closed
/// form where available, bisection otherwise); discrete quantiles follow the
/// convention `quantile(u) = inf {k : F(k) >= u}`.
#[derive(Debug, Clone)]
pub struct ProcessModel {
    family: Family,
}

#[derive(Debug, Clone)]
enum Family {
    Normal { mean: f64, sd: f64 },
    LogNormal { log_mean: f64, log_sd: f64 },
    Weibull { shape: f64, scale: f64 },
    Gamma { shape: f64, scale: f64 },
    Uniform { lower: f64, upper: f64 },
    Exponential { rate: f64 },
    Poisson { rate: f64 },
    Binomial { trials: u64, prob: f64 },
    Empirical { sorted: Vec<f64>, interpolate: bool },
}

fn require(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(msg.into()))
    }
}

fn require_finite(name: &str, value: f64) -> Result<()> {
    require(value.is_finite(), format!("{name} must be finite (got {value})"))
}

impl ProcessModel {
    /// Normal distribution with the given mean and standard deviation.
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        require_finite("mean", mean)?;
        require_finite("sd", sd)?;
        require(sd > 0.0, format!("normal sd must be > 0 (got {sd})"))?;
        Ok(Self { family: Family::Normal { mean, sd } })
    }

    /// Lognormal distribution parameterized on the log scale.
    pub fn log_normal(log_mean: f64, log_sd: f64) -> Result<Self> {
        require_finite("log_mean", log_mean)?;
        require_finite("log_sd", log_sd)?;
        require(log_sd > 0.0, format!("lognormal log_sd must be > 0 (got {log_sd})"))?;
        Ok(Self { family: Family::LogNormal { log_mean, log_sd } })
    }

    /// Weibull distribution with shape `k` and scale `λ`.
    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        require_finite("shape", shape)?;
        require_finite("scale", scale)?;
        require(shape > 0.0, format!("weibull shape must be > 0 (got {shape})"))?;
        require(scale > 0.0, format!("weibull scale must be > 0 (got {scale})"))?;
        Ok(Self { family: Family::Weibull { shape, scale } })
    }

    /// Gamma distribution with shape `k` and scale `θ`.
    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        require_finite("shape", shape)?;
        require_finite("scale", scale)?;
        require(shape > 0.0, format!("gamma shape must be > 0 (got {shape})"))?;
        require(scale > 0.0, format!("gamma scale must be > 0 (got {scale})"))?;
        Ok(Self { family: Family::Gamma { shape, scale } })
    }

    /// Uniform distribution on `(lower, upper)`.
    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        require_finite("lower", lower)?;
        require_finite("upper", upper)?;
        require(lower < upper, format!("uniform requires lower < upper (got {lower} >= {upper})"))?;
        Ok(Self { family: Family::Uniform { lower, upper } })
    }

    /// Exponential distribution with the given rate.
    pub fn exponential(rate: f64) -> Result<Self> {
        require_finite("rate", rate)?;
        require(rate > 0.0, format!("exponential rate must be > 0 (got {rate})"))?;
        Ok(Self { family: Family::Exponential { rate } })
    }

    /// Poisson distribution with the given rate.
    pub fn poisson(rate: f64) -> Result<Self> {
        require_finite("rate", rate)?;
        require(rate > 0.0, format!("poisson rate must be > 0 (got {rate})"))?;
        Ok(Self { family: Family::Poisson { rate } })
    }

    /// Binomial distribution with `trials >= 1` and success probability in [0, 1].
    pub fn binomial(trials: u64, prob: f64) -> Result<Self> {
        require(trials >= 1, format!("binomial trials must be >= 1 (got {trials})"))?;
        require_finite("prob", prob)?;
        require((0.0..=1.0).contains(&prob), format!("binomial prob must lie in [0, 1] (got {prob})"))?;
        Ok(Self { family: Family::Binomial { trials, prob } })
    }

    /// Empirical model over observed values, with step-function quantiles.
    pub fn empirical(values: &[f64]) -> Result<Self> {
        Self::empirical_impl(values, false)
    }

    /// Empirical model whose quantiles linearly interpolate between order
    /// statistics (the common type-7 convention); the CDF stays a step
    /// function either way.
    pub fn empirical_interpolated(values: &[f64]) -> Result<Self> {
        Self::empirical_impl(values, true)
    }

    fn empirical_impl(values: &[f64], interpolate: bool) -> Result<Self> {
        require(values.len() >= 2, format!(
            "empirical model requires at least 2 observations (got {})",
            values.len()
        ))?;
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("empirical observations must be finite (got {bad})")));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { family: Family::Empirical { sorted, interpolate } })
    }

    /// Short family identifier (`"normal"`, `"poisson"`, ...).
    pub fn family_name(&self) -> &'static str {
        match &self.family {
            Family::Normal { .. } => "normal",
            Family::LogNormal { .. } => "lognormal",
            Family::Weibull { .. } => "weibull",
            Family::Gamma { .. } => "gamma",
            Family::Uniform { .. } => "uniform",
            Family::Exponential { .. } => "exponential",
            Family::Poisson { .. } => "poisson",
            Family::Binomial { .. } => "binomial",
            Family::Empirical { .. } => "empirical",
        }
    }

    /// Named parameters in a fixed order, for reports and fit tables.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match &self.family {
            Family::Normal { mean, sd } => vec![("mean", *mean), ("sd", *sd)],
            Family::LogNormal { log_mean, log_sd } => {
                vec![("log_mean", *log_mean), ("log_sd", *log_sd)]
            }
            Family::Weibull { shape, scale } => vec![("shape", *shape), ("scale", *scale)],
            Family::Gamma { shape, scale } => vec![("shape", *shape), ("scale", *scale)],
            Family::Uniform { lower, upper } => vec![("lower", *lower), ("upper", *upper)],
            Family::Exponential { rate } => vec![("rate", *rate)],
            Family::Poisson { rate } => vec![("rate", *rate)],
            Family::Binomial { trials, prob } => {
                vec![("trials", *trials as f64), ("prob", *prob)]
            }
            Family::Empirical { sorted, .. } => vec![("n", sorted.len() as f64)],
        }
    }

    /// One-line human-readable description, e.g. `normal(mean=23, sd=3)`.
    pub fn describe(&self) -> String {
        let params: Vec<String> =
            self.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})", self.family_name(), params.join(", "))
    }

    /// Continuous or discrete.
    pub fn kind(&self) -> ModelKind {
        match &self.family {
            Family::Poisson { .. } | Family::Binomial { .. } => ModelKind::Discrete,
            _ => ModelKind::Continuous,
        }
    }

    /// Support interval (possibly half-infinite).
    pub fn support(&self) -> (f64, f64) {
        match &self.family {
            Family::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Family::LogNormal { .. } => (0.0, f64::INFINITY),
            Family::Weibull { .. } | Family::Gamma { .. } | Family::Exponential { .. } => {
                (0.0, f64::INFINITY)
            }
            Family::Uniform { lower, upper } => (*lower, *upper),
            Family::Poisson { .. } => (0.0, f64::INFINITY),
            Family::Binomial { trials, .. } => (0.0, *trials as f64),
            Family::Empirical { sorted, .. } => (sorted[0], sorted[sorted.len() - 1]),
        }
    }

    /// Number of observations behind an empirical model, if any.
    pub fn observation_count(&self) -> Option<usize> {
        match &self.family {
            Family::Empirical { sorted, .. } => Some(sorted.len()),
            _ => None,
        }
    }

    /// Uniform bounds when this model is a uniform distribution.
    pub(crate) fn uniform_bounds(&self) -> Option<(f64, f64)> {
        match &self.family {
            Family::Uniform { lower, upper } => Some((*lower, *upper)),
            _ => None,
        }
    }

    /// Cumulative distribution function `P(X <= x)`, clamped to [0, 1].
    pub fn cdf(&self, x: f64) -> f64 {
        match &self.family {
            Family::Normal { mean, sd } => special::normal_cdf((x - mean) / sd),
            Family::LogNormal { log_mean, log_sd } => {
                if x <= 0.0 {
                    0.0
                } else {
                    special::normal_cdf((x.ln() - log_mean) / log_sd)
                }
            }
            Family::Weibull { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(x / scale).powf(*shape)).exp_m1()
                }
            }
            Family::Gamma { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    special::reg_gamma_lower(*shape, x / scale)
                }
            }
            Family::Uniform { lower, upper } => ((x - lower) / (upper - lower)).clamp(0.0, 1.0),
            Family::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Family::Poisson { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    special::reg_gamma_upper(x.floor() + 1.0, *rate)
                }
            }
            Family::Binomial { trials, prob } => {
                let n = *trials as f64;
                if x < 0.0 {
                    0.0
                } else if x >= n {
                    1.0
                } else if *prob == 0.0 {
                    1.0
                } else if *prob == 1.0 {
                    0.0 // all mass at n, and x < n here
                } else {
                    let k = x.floor();
                    special::reg_beta(n - k, k + 1.0, 1.0 - prob)
                }
            }
            Family::Empirical { sorted, .. } => {
                let count = sorted.partition_point(|v| *v <= x);
                count as f64 / sorted.len() as f64
            }
        }
    }

    /// Strict lower probability `P(X < x)`.
    ///
    /// Coincides with [`cdf`](Self::cdf) for continuous models; for discrete
    /// and empirical models it excludes the mass at `x`, which is what
    /// inclusive-endpoint yield computations need.
    pub fn prob_less(&self, x: f64) -> f64 {
        match &self.family {
            Family::Poisson { .. } | Family::Binomial { .. } => self.cdf(x.ceil() - 1.0),
            Family::Empirical { sorted, .. } => {
                let count = sorted.partition_point(|v| *v < x);
                count as f64 / sorted.len() as f64
            }
            _ => self.cdf(x),
        }
    }

    /// Quantile function for `u` strictly inside (0, 1).
    ///
    /// Continuous families return the unique `x` with `F(x) = u`; discrete
    /// families return the smallest support point with `F(k) >= u`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        require(
            u > 0.0 && u < 1.0,
            format!("quantile level must lie strictly between 0 and 1 (got {u})"),
        )?;
        Ok(match &self.family {
            Family::Normal { mean, sd } => mean + sd * special::normal_quantile(u),
            Family::LogNormal { log_mean, log_sd } => {
                (log_mean + log_sd * special::normal_quantile(u)).exp()
            }
            Family::Weibull { shape, scale } => scale * (-(-u).ln_1p()).powf(1.0 / shape),
            Family::Gamma { shape, scale } => {
                let mut hi = shape + 10.0 * shape.sqrt() + 10.0;
                while special::reg_gamma_lower(*shape, hi) < u {
                    hi *= 2.0;
                }
                scale * special::bisect_increasing(|x| special::reg_gamma_lower(*shape, x), u, 0.0, hi)
            }
            Family::Uniform { lower, upper } => lower + u * (upper - lower),
            Family::Exponential { rate } => -(-u).ln_1p() / rate,
            Family::Poisson { rate } => {
                let mut hi = (rate + 10.0 * rate.sqrt() + 20.0).ceil();
                while self.cdf(hi) < u {
                    hi *= 2.0;
                }
                self.discrete_quantile_below(u, hi)
            }
            Family::Binomial { trials, .. } => self.discrete_quantile_below(u, *trials as f64),
            Family::Empirical { sorted, interpolate } => {
                let n = sorted.len();
                if *interpolate {
                    let h = (n - 1) as f64 * u;
                    let i = h.floor() as usize;
                    if i + 1 >= n {
                        sorted[n - 1]
                    } else {
                        sorted[i] + (h - i as f64) * (sorted[i + 1] - sorted[i])
                    }
                } else {
                    let idx = (n as f64 * u).ceil() as usize;
                    sorted[idx.clamp(1, n) - 1]
                }
            }
        })
    }

    /// Smallest integer support point `k <= hi` with `F(k) >= u`, assuming
    /// `F(hi) >= u`.
    fn discrete_quantile_below(&self, u: f64, hi: f64) -> f64 {
        if self.cdf(0.0) >= u {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0f64, hi);
        // invariant: F(lo) < u <= F(hi)
        while hi - lo > 1.0 {
            let mid = ((lo + hi) / 2.0).floor();
            if self.cdf(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// Mean, standard deviation and median.
    pub fn moments(&self) -> Moments {
        match &self.family {
            Family::Normal { mean, sd } => Moments { mean: *mean, sd: *sd, median: *mean },
            Family::LogNormal { log_mean, log_sd } => {
                let s2 = log_sd * log_sd;
                let mean = (log_mean + 0.5 * s2).exp();
                Moments {
                    mean,
                    sd: mean * s2.exp_m1().sqrt(),
                    median: log_mean.exp(),
                }
            }
            Family::Weibull { shape, scale } => {
                let g1 = special::ln_gamma(1.0 + 1.0 / shape).exp();
                let g2 = special::ln_gamma(1.0 + 2.0 / shape).exp();
                Moments {
                    mean: scale * g1,
                    sd: scale * (g2 - g1 * g1).max(0.0).sqrt(),
                    median: scale * std::f64::consts::LN_2.powf(1.0 / shape),
                }
            }
            Family::Gamma { shape, scale } => Moments {
                mean: shape * scale,
                sd: shape.sqrt() * scale,
                median: self.quantile(0.5).expect("0.5 is a valid level"),
            },
            Family::Uniform { lower, upper } => Moments {
                mean: 0.5 * (lower + upper),
                sd: (upper - lower) / 12.0f64.sqrt(),
                median: 0.5 * (lower + upper),
            },
            Family::Exponential { rate } => Moments {
                mean: 1.0 / rate,
                sd: 1.0 / rate,
                median: std::f64::consts::LN_2 / rate,
            },
            Family::Poisson { rate } => Moments {
                mean: *rate,
                sd: rate.sqrt(),
                median: self.quantile(0.5).expect("0.5 is a valid level"),
            },
            Family::Binomial { trials, prob } => Moments {
                mean: *trials as f64 * prob,
                sd: (*trials as f64 * prob * (1.0 - prob)).sqrt(),
                median: self.quantile(0.5).expect("0.5 is a valid level"),
            },
            Family::Empirical { sorted, .. } => {
                let n = sorted.len() as f64;
                let mean = sorted.iter().sum::<f64>() / n;
                let ss = sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
                Moments {
                    mean,
                    sd: (ss / (n - 1.0)).sqrt(),
                    median: self.quantile(0.5).expect("0.5 is a valid level"),
                }
            }
        }
    }

    /// Distribution median, `quantile(0.5)`.
    pub fn median(&self) -> f64 {
        self.moments().median
    }

    /// Draw `n >= 1` values deterministically from `seed`.
    ///
    /// Continuous families invert the CDF on open-interval uniforms (gamma
    /// uses the standard squeeze method instead of a closed-form inverse);
    /// discrete families search the support with the same inf-convention as
    /// [`quantile`](Self::quantile).  Draws are sequential, so the output is
    /// identical regardless of host parallelism.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        require(n >= 1, "sample size must be >= 1")?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        match &self.family {
            Family::Gamma { shape, scale } => {
                for _ in 0..n {
                    out.push(scale * sample_std_gamma(&mut rng, *shape));
                }
            }
            Family::Poisson { rate } if *rate <= 300.0 => {
                for _ in 0..n {
                    out.push(poisson_search(&mut rng, *rate));
                }
            }
            Family::Binomial { trials, prob }
                if *prob > 0.0 && *prob < 1.0 && *trials as f64 * (1.0 - prob).ln() > -700.0 =>
            {
                for _ in 0..n {
                    out.push(binomial_search(&mut rng, *trials, *prob));
                }
            }
            _ => {
                for _ in 0..n {
                    let u: f64 = rng.sample(Open01);
                    out.push(self.quantile(u).expect("Open01 draws are interior"));
                }
            }
        }
        Ok(out)
    }
}

/// One standard gamma(shape, 1) draw by the Marsaglia–Tsang squeeze, with the
/// usual power boost for shape < 1.
fn sample_std_gamma(rng: &mut ChaCha8Rng, shape: f64) -> f64 {
    if shape < 1.0 {
        let u: f64 = rng.sample(Open01);
        return sample_std_gamma_ge1(rng, shape + 1.0) * u.powf(1.0 / shape);
    }
    sample_std_gamma_ge1(rng, shape)
}

fn sample_std_gamma_ge1(rng: &mut ChaCha8Rng, shape: f64) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (3.0 * d.sqrt());
    loop {
        let z = special::normal_quantile(rng.sample(Open01));
        let v = 1.0 + c * z;
        if v <= 0.0 {
            continue;
        }
        let v3 = v * v * v;
        let u: f64 = rng.sample(Open01);
        if u.ln() < 0.5 * z * z + d - d * v3 + d * v3.ln() {
            return d * v3;
        }
    }
}

/// Inverse-CDF Poisson draw by sequential search over the mass recurrence
/// p_{k+1} = p_k · λ/(k+1); valid while exp(-λ) does not underflow.
fn poisson_search(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.sample(Open01);
    let mut k = 0.0f64;
    let mut mass = (-rate).exp();
    let mut cum = mass;
    while cum < u {
        k += 1.0;
        mass *= rate / k;
        cum += mass;
        if mass == 0.0 {
            break; // accumulated the entire representable tail
        }
    }
    k
}

/// Inverse-CDF binomial draw by sequential search over the mass recurrence.
fn binomial_search(rng: &mut ChaCha8Rng, trials: u64, prob: f64) -> f64 {
    let u: f64 = rng.sample(Open01);
    let n = trials as f64;
    let odds = prob / (1.0 - prob);
    let mut k = 0.0f64;
    let mut mass = (n * (1.0 - prob).ln()).exp();
    let mut cum = mass;
    while cum < u && k < n {
        mass *= odds * (n - k) / (k + 1.0);
        k += 1.0;
        cum += mass;
        if mass == 0.0 {
            break;
        }
    }
    k
}

/// Deterministically derive a child seed from a master seed and an index.
///
/// Bootstrap replicates and Monte Carlo partitions each get their own child
/// stream, so results do not depend on how work is batched.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Auxiliary distributions used by index formulas: Φ/Φ⁻¹, chi-square and
/// Fisher F quantiles.
#[derive(Debug, Clone, Copy)]
pub struct AuxDistribution {
    kind: AuxKind,
}

#[derive(Debug, Clone, Copy)]
enum AuxKind {
    StandardNormal,
    ChiSquare { df: f64 },
    FisherF { df1: f64, df2: f64 },
}

impl AuxDistribution {
    /// Standard normal distribution.
    pub fn standard_normal() -> Self {
        Self { kind: AuxKind::StandardNormal }
    }

    /// Chi-square distribution with `df > 0` degrees of freedom.
    pub fn chi_square(df: f64) -> Result<Self> {
        require(df.is_finite() && df > 0.0, format!("chi-square df must be > 0 (got {df})"))?;
        Ok(Self { kind: AuxKind::ChiSquare { df } })
    }

    /// Fisher F distribution with `df1, df2 > 0` degrees of freedom.
    pub fn fisher_f(df1: f64, df2: f64) -> Result<Self> {
        require(
            df1.is_finite() && df1 > 0.0 && df2.is_finite() && df2 > 0.0,
            format!("fisher F dfs must be > 0 (got {df1}, {df2})"),
        )?;
        Ok(Self { kind: AuxKind::FisherF { df1, df2 } })
    }

    /// Cumulative distribution function.
    pub fn cdf(&self, x: f64) -> f64 {
        match self.kind {
            AuxKind::StandardNormal => special::normal_cdf(x),
            AuxKind::ChiSquare { df } => {
                if x <= 0.0 {
                    0.0
                } else {
                    special::reg_gamma_lower(0.5 * df, 0.5 * x)
                }
            }
            AuxKind::FisherF { df1, df2 } => {
                if x <= 0.0 {
                    0.0
                } else {
                    special::reg_beta(0.5 * df1, 0.5 * df2, df1 * x / (df1 * x + df2))
                }
            }
        }
    }

    /// Quantile for `u` strictly inside (0, 1); accurate to bisection
    /// convergence (far below 1e-8 relative).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        require(
            u > 0.0 && u < 1.0,
            format!("quantile level must lie strictly between 0 and 1 (got {u})"),
        )?;
        Ok(match self.kind {
            AuxKind::StandardNormal => special::normal_quantile(u),
            AuxKind::ChiSquare { df } => {
                let mut hi = df + 10.0 * df.sqrt() + 30.0;
                while self.cdf(hi) < u {
                    hi *= 2.0;
                }
                special::bisect_increasing(|x| self.cdf(x), u, 0.0, hi)
            }
            AuxKind::FisherF { .. } => {
                let mut hi = 1.0;
                while self.cdf(hi) < u {
                    hi *= 2.0;
                }
                special::bisect_increasing(|x| self.cdf(x), u, 0.0, hi)
            }
        })
    }
}
