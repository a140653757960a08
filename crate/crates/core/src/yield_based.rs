//! Yield- and quantile-based capability indices for processes of any
//! distributional shape: quantile-spread analogues of c_p, nonconforming
//! ratio indices, the normal-equivalent transform of the defect rate, and
//! the conformance-proportion index.
//!
//! Everything here works through a [`ProcessModel`], so normal, skewed,
//! discrete and empirical processes are all handled by one code path.

use crate::classical::SpecLimits;
use crate::dist::ProcessModel;
use crate::error::{Error, Result};
use crate::report::{IndexValue, DEFAULT_TAIL};
use crate::special;

/// The "natural tolerance" band a capable process is expected to occupy:
/// either explicit limits or tail proportions on the model's own scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DesiredRegion {
    /// Explicit desired limits `LDL < UDL`.
    Limits { ldl: f64, udl: f64 },
    /// Tail proportions: the region between `Q(alpha1)` and `Q(1 - alpha2)`,
    /// so the desired yield is `1 - alpha1 - alpha2` for continuous models.
    TailProportions { alpha1: f64, alpha2: f64 },
}

impl DesiredRegion {
    /// Explicit desired limits.
    pub fn limits(ldl: f64, udl: f64) -> Result<Self> {
        if !ldl.is_finite() || !udl.is_finite() {
            return Err(Error::domain(format!(
                "desired limits must be finite (got LDL={ldl}, UDL={udl})"
            )));
        }
        if ldl >= udl {
            return Err(Error::domain(format!(
                "desired limits must satisfy LDL < UDL (got LDL={ldl}, UDL={udl})"
            )));
        }
        Ok(DesiredRegion::Limits { ldl, udl })
    }

    /// Tail-proportion form; both tails nonnegative with `alpha1 + alpha2 < 1`.
    pub fn tail_proportions(alpha1: f64, alpha2: f64) -> Result<Self> {
        if !alpha1.is_finite() || !alpha2.is_finite() || alpha1 < 0.0 || alpha2 < 0.0 {
            return Err(Error::domain(format!(
                "tail proportions must be finite and nonnegative (got {alpha1}, {alpha2})"
            )));
        }
        if alpha1 + alpha2 >= 1.0 {
            return Err(Error::domain(format!(
                "tail proportions must satisfy alpha1 + alpha2 < 1 (got {alpha1} + {alpha2})"
            )));
        }
        Ok(DesiredRegion::TailProportions { alpha1, alpha2 })
    }

    /// The conventional default: 0.135% in each tail (desired yield 0.9973).
    pub fn default_tails() -> Self {
        DesiredRegion::TailProportions { alpha1: DEFAULT_TAIL, alpha2: DEFAULT_TAIL }
    }

    /// Tail masses `(alpha1, alpha2)` under `model`; for explicit limits
    /// these are `P(X < LDL)` and `1 - F(UDL)`, so that the desired yield is
    /// always `1 - alpha1 - alpha2`.
    pub fn tail_masses(&self, model: &ProcessModel) -> (f64, f64) {
        match self {
            DesiredRegion::Limits { ldl, udl } => {
                (model.prob_less(*ldl), 1.0 - model.cdf(*udl))
            }
            DesiredRegion::TailProportions { alpha1, alpha2 } => (*alpha1, *alpha2),
        }
    }

    /// Desired yield `p0` under `model` (inclusive endpoints for discrete
    /// models, matching [`yield_summary`]).
    pub fn desired_yield(&self, model: &ProcessModel) -> f64 {
        match self {
            DesiredRegion::Limits { ldl, udl } => model.cdf(*udl) - model.prob_less(*ldl),
            DesiredRegion::TailProportions { alpha1, alpha2 } => 1.0 - alpha1 - alpha2,
        }
    }

    /// Short description for report notes.
    pub fn describe(&self) -> String {
        match self {
            DesiredRegion::Limits { ldl, udl } => format!("limits [{ldl}, {udl}]"),
            DesiredRegion::TailProportions { alpha1, alpha2 } => {
                format!("tail proportions ({alpha1}, {alpha2})")
            }
        }
    }
}

/// Process yield and its decomposition into tail masses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldSummary {
    /// Yield `p = P(L <= X <= U)` (endpoints inclusive for discrete models).
    pub p: f64,
    /// Nonconforming fraction `1 - p`.
    pub p_nc: f64,
    /// Lower tail `P(X < L)`.
    pub lower_nc: f64,
    /// Upper tail `P(X > U)`.
    pub upper_nc: f64,
}

/// Yield of `model` against `spec`.
///
/// Endpoints are inclusive: `p = F(U) - P(X < L)`, which for discrete models
/// keeps the mass sitting exactly on a limit inside the conforming count.
pub fn yield_summary(model: &ProcessModel, spec: &SpecLimits) -> YieldSummary {
    let lower_nc = model.prob_less(spec.lower());
    let upper_nc = 1.0 - model.cdf(spec.upper());
    let p = model.cdf(spec.upper()) - lower_nc;
    YieldSummary { p, p_nc: lower_nc + upper_nc, lower_nc, upper_nc }
}

/// Quantile-spread index `(U - L) / (Q(1-a) - Q(a))`, the distribution-free
/// analogue of c_p (default `a` = 0.00135 mirrors the 3σ convention).
pub fn clements_cp(spec: &SpecLimits, model: &ProcessModel, a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 0.5) {
        return Err(Error::domain(format!("tail proportion a must lie in (0, 0.5) (got {a})")));
    }
    mukherjee_i(spec, model, a, a)
}

/// Interquantile-range index `(U - L) / (Q(1-alpha2) - Q(alpha1))`.
///
/// A zero tail uses the corresponding support endpoint; an unbounded support
/// endpoint then sends the index to 0 (infinitely wide natural spread).
pub fn mukherjee_i(
    spec: &SpecLimits,
    model: &ProcessModel,
    alpha1: f64,
    alpha2: f64,
) -> Result<f64> {
    if !alpha1.is_finite() || !alpha2.is_finite() || alpha1 < 0.0 || alpha2 < 0.0 {
        return Err(Error::domain(format!(
            "tail proportions must be finite and nonnegative (got {alpha1}, {alpha2})"
        )));
    }
    if alpha1 + alpha2 >= 1.0 {
        return Err(Error::domain(format!(
            "tail proportions must satisfy alpha1 + alpha2 < 1 (got {alpha1} + {alpha2})"
        )));
    }
    let lo = if alpha1 == 0.0 { model.support().0 } else { model.quantile(alpha1)? };
    let hi = if alpha2 == 0.0 { model.support().1 } else { model.quantile(1.0 - alpha2)? };
    let spread = hi - lo;
    if spread == f64::INFINITY {
        return Ok(0.0);
    }
    if spread <= 0.0 {
        return Err(Error::domain(format!(
            "degenerate quantile spread: Q({}) = Q({}) = {lo}",
            alpha1,
            1.0 - alpha2
        )));
    }
    Ok((spec.upper() - spec.lower()) / spread)
}

/// Benchmark-to-actual nonconforming ratio `p0_nc / p_nc`.
///
/// `p_nc = 0` (no nonconforming mass at all) is flagged infinite.
pub fn yb_ratio(p0_nc: f64, model: &ProcessModel, spec: &SpecLimits) -> Result<IndexValue> {
    if !(p0_nc > 0.0 && p0_nc < 1.0) {
        return Err(Error::domain(format!(
            "benchmark nonconforming fraction must lie in (0, 1) (got {p0_nc})"
        )));
    }
    let ys = yield_summary(model, spec);
    Ok(if ys.p_nc == 0.0 { IndexValue::Infinite } else { IndexValue::Finite(p0_nc / ys.p_nc) })
}

/// Worst-tail tolerance ratio `min(alpha0_L / α_L, alpha0_U / α_U)`.
///
/// A tail with zero actual mass contributes an infinite ratio; the result is
/// flagged infinite only when both tails are empty.
pub fn yb_cf(
    alpha0_lower: f64,
    alpha0_upper: f64,
    model: &ProcessModel,
    spec: &SpecLimits,
) -> Result<IndexValue> {
    for (label, a) in [("lower", alpha0_lower), ("upper", alpha0_upper)] {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::domain(format!(
                "{label} tail tolerance must lie in (0, 1) (got {a})"
            )));
        }
    }
    let ys = yield_summary(model, spec);
    let mut best: Option<f64> = None;
    for (tolerance, actual) in [(alpha0_lower, ys.lower_nc), (alpha0_upper, ys.upper_nc)] {
        if actual > 0.0 {
            let ratio = tolerance / actual;
            best = Some(best.map_or(ratio, |b: f64| b.min(ratio)));
        }
    }
    Ok(best.map_or(IndexValue::Infinite, IndexValue::Finite))
}

/// Normal-equivalent capability `Φ⁻¹(1 - π/2) / 3` of the nonconforming
/// fraction `π`: any process with defect rate 0.27% scores 1 regardless of
/// shape.
pub fn borges_ho_c(model: &ProcessModel, spec: &SpecLimits) -> IndexValue {
    let ys = yield_summary(model, spec);
    let arg = 1.0 - 0.5 * ys.p_nc;
    if arg >= 1.0 {
        IndexValue::Infinite
    } else {
        IndexValue::Finite(special::normal_quantile(arg) / 3.0)
    }
}

/// Conformance-proportion index `(1 - p0) / (1 - p)` against the minimum
/// allowable conforming proportion `p0` (default 0.9973).
pub fn perakis_cpc(p0: f64, model: &ProcessModel, spec: &SpecLimits) -> Result<IndexValue> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::domain(format!(
            "minimum allowable conforming proportion must lie in (0, 1) (got {p0})"
        )));
    }
    let ys = yield_summary(model, spec);
    Ok(if ys.p_nc == 0.0 {
        IndexValue::Infinite
    } else {
        IndexValue::Finite((1.0 - p0) / ys.p_nc)
    })
}
