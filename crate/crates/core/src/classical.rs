//! Moment-based capability indices: c_p, c_pk, c_pm, c_pmk, the normal-yield
//! transform s_pk, the two-parameter superstructure, and its weighted-loss
//! generalization.
//!
//! All functions here consume only specification limits and the first two
//! process moments; anything requiring quantiles or a distribution model
//! lives in the yield-based and generalized modules.

use crate::error::{Error, Result};
use crate::report::IndexValue;
use crate::special;

/// Two-sided specification limits with optional target.
///
/// Derived quantities follow the usual conventions: midpoint `M = (L+U)/2`
/// and half-width `d = (U−L)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecLimits {
    lower: f64,
    upper: f64,
    target: Option<f64>,
}

impl SpecLimits {
    /// Limits without a target; indices that need one fall back to the
    /// midpoint (and say so in reports).
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        Self::build(lower, upper, None)
    }

    /// Limits with an explicit target inside `[L, U]`.
    pub fn with_target(lower: f64, upper: f64, target: f64) -> Result<Self> {
        Self::build(lower, upper, Some(target))
    }

    fn build(lower: f64, upper: f64, target: Option<f64>) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() {
            return Err(Error::domain(format!(
                "specification limits must be finite (got L={lower}, U={upper})"
            )));
        }
        if lower >= upper {
            return Err(Error::domain(format!(
                "specification limits must satisfy L < U (got L={lower}, U={upper})"
            )));
        }
        if let Some(t) = target {
            if !t.is_finite() || t < lower || t > upper {
                return Err(Error::domain(format!(
                    "target must lie within [L, U] = [{lower}, {upper}] (got {t})"
                )));
            }
        }
        Ok(Self { lower, upper, target })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn target(&self) -> Option<f64> {
        self.target
    }

    /// Spec midpoint `M = (L+U)/2`.
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    /// Spec half-width `d = (U−L)/2`.
    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }

    /// The target if present, otherwise the midpoint.
    pub fn target_or_midpoint(&self) -> f64 {
        self.target.unwrap_or_else(|| self.midpoint())
    }
}

/// First two process moments (mean and strictly positive standard deviation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessMoments {
    mean: f64,
    sd: f64,
}

impl ProcessMoments {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        if !mean.is_finite() || !sd.is_finite() {
            return Err(Error::domain(format!(
                "process moments must be finite (got mean={mean}, sd={sd})"
            )));
        }
        if sd <= 0.0 {
            return Err(Error::domain(format!("process sd must be > 0 (got {sd})")));
        }
        Ok(Self { mean, sd })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }
}

/// The four basic moment indices, computed together because they share all
/// their ingredients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasicIndices {
    /// `d / (3σ)`.
    pub c_p: f64,
    /// `(d − |μ−M|) / (3σ)`.
    pub c_pk: f64,
    /// `d / (3·√(σ² + (μ−T)²))`.
    pub c_pm: f64,
    /// `(d − |μ−M|) / (3·√(σ² + (μ−T)²))`.
    pub c_pmk: f64,
    /// True when the spec carried no target and `T = M` was assumed.
    pub target_defaulted: bool,
}

/// Compute c_p, c_pk, c_pm and c_pmk.
///
/// The target-penalized denominators use `√(σ² + (μ−T)²)`, i.e. the root of
/// the expected squared deviation from target.
pub fn basic_indices(spec: &SpecLimits, mom: &ProcessMoments) -> BasicIndices {
    let d = spec.half_width();
    let offset = (mom.mean() - spec.midpoint()).abs();
    let t = spec.target_or_midpoint();
    let dev = mom.mean() - t;
    let tau = (mom.sd() * mom.sd() + dev * dev).sqrt();
    BasicIndices {
        c_p: d / (3.0 * mom.sd()),
        c_pk: (d - offset) / (3.0 * mom.sd()),
        c_pm: d / (3.0 * tau),
        c_pmk: (d - offset) / (3.0 * tau),
        target_defaulted: spec.target().is_none(),
    }
}

/// The normal-yield index `s_pk = Φ⁻¹(½Φ((U−μ)/σ) + ½Φ((μ−L)/σ)) / 3`.
///
/// When the argument of Φ⁻¹ rounds to one (process spread negligibly small
/// relative to the spec band) the result is flagged infinite.
pub fn s_pk(spec: &SpecLimits, mom: &ProcessMoments) -> IndexValue {
    let upper = special::normal_cdf((spec.upper() - mom.mean()) / mom.sd());
    let lower = special::normal_cdf((mom.mean() - spec.lower()) / mom.sd());
    let arg = 0.5 * upper + 0.5 * lower;
    if arg >= 1.0 {
        IndexValue::Infinite
    } else {
        IndexValue::Finite(special::normal_quantile(arg) / 3.0)
    }
}

/// Two-parameter superstructure
/// `C_p(u, v) = (d − u·|μ−M|) / (3·√(σ² + v·(μ−T)²))`.
///
/// Specializes to c_p, c_pk, c_pm, c_pmk at (u,v) = (0,0), (1,0), (0,1),
/// (1,1).  Both parameters must be nonnegative.
pub fn vannman(spec: &SpecLimits, mom: &ProcessMoments, u: f64, v: f64) -> Result<f64> {
    if !u.is_finite() || !v.is_finite() || u < 0.0 || v < 0.0 {
        return Err(Error::domain(format!(
            "superstructure parameters must be finite and nonnegative (got u={u}, v={v})"
        )));
    }
    let d = spec.half_width();
    let offset = (mom.mean() - spec.midpoint()).abs();
    let dev = mom.mean() - spec.target_or_midpoint();
    Ok((d - u * offset) / (3.0 * (mom.sd() * mom.sd() + v * dev * dev).sqrt()))
}

/// Weighted-loss index `C_p^(w) = c_p / √(1 + g(δ))` with `δ = (μ−T)/σ`.
///
/// `g` must be a nonnegative penalty with `g(0) = 0`; the choice
/// `g(δ) = w·δ²` reproduces the superstructure member `C_p(0, w)`.
pub fn spiring_cpw(
    spec: &SpecLimits,
    mom: &ProcessMoments,
    g: impl Fn(f64) -> f64,
) -> Result<f64> {
    if g(0.0).abs() > 1.0e-12 {
        return Err(Error::domain(format!(
            "penalty function must vanish at zero (got g(0) = {})",
            g(0.0)
        )));
    }
    let delta = (mom.mean() - spec.target_or_midpoint()) / mom.sd();
    let penalty = g(delta);
    if !penalty.is_finite() || penalty < 0.0 {
        return Err(Error::domain(format!(
            "penalty function must be finite and nonnegative (got g({delta}) = {penalty})"
        )));
    }
    let c_p = spec.half_width() / (3.0 * mom.sd());
    Ok(c_p / (1.0 + penalty).sqrt())
}
