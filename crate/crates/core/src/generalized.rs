//! The generalized yield-ratio index family: c_py (actual over desired
//! yield), its median-split min-form c_pyk, and the target-split variant
//! c_ptk.
//!
//! These indices are distribution-free: they depend on the model only
//! through CDF values at the spec limits and at the split point, so the
//! probability-space kernels (`*_from_probs`) are exposed for reuse — the
//! multivariate module feeds them CDF values on a transformed scale.
//!
//! The lower spec limit always enters through `P(X < L)`, so for discrete
//! models the mass sitting exactly on the limit counts as conforming,
//! matching [`yield_summary`](crate::yield_based::yield_summary).

use crate::classical::SpecLimits;
use crate::dist::ProcessModel;
use crate::error::{Error, Result};
use crate::yield_based::DesiredRegion;

/// A min-form index with its two one-sided components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinIndex {
    /// `min(upper, lower)`.
    pub value: f64,
    /// Upper-side component (capability above the split point).
    pub upper: f64,
    /// Lower-side component (capability below the split point).
    pub lower: f64,
}

/// Yield-ratio index `c_py = p / p0`.
///
/// `p` is the process yield over the spec limits and `p0` the desired yield
/// of the region in `desired`, both evaluated under `model`.
pub fn c_py(model: &ProcessModel, spec: &SpecLimits, desired: &DesiredRegion) -> Result<f64> {
    let p = model.cdf(spec.upper()) - model.prob_less(spec.lower());
    c_py_from_probs(p, desired.desired_yield(model))
}

/// `c_py` evaluated with the uniform CDF extended linearly beyond its
/// support instead of clamped.
///
/// Only uniform models support this mode.  It exists so that desired limits
/// of the form mean ± 3·sd — which lie outside a uniform support — still
/// reduce to `(U−L)/(6σ)` instead of collapsing to a clamped desired yield
/// of 1.
pub fn c_py_linear_extension(
    model: &ProcessModel,
    spec: &SpecLimits,
    desired: &DesiredRegion,
) -> Result<f64> {
    let (a, b) = model.uniform_bounds().ok_or_else(|| {
        Error::domain(format!(
            "linear-extension evaluation is defined only for uniform models (got {})",
            model.family_name()
        ))
    })?;
    let f = |x: f64| (x - a) / (b - a);
    let p = f(spec.upper()) - f(spec.lower());
    let p0 = match desired {
        DesiredRegion::Limits { ldl, udl } => f(*udl) - f(*ldl),
        DesiredRegion::TailProportions { alpha1, alpha2 } => 1.0 - alpha1 - alpha2,
    };
    c_py_from_probs(p, p0)
}

/// Median-split min-form of the yield ratio:
/// `min{(F(U) − F(μe))/(½ − α2), (F(μe) − P(X<L))/(½ − α1)}`
/// with `μe` the model median.
pub fn c_pyk(model: &ProcessModel, spec: &SpecLimits, desired: &DesiredRegion) -> Result<MinIndex> {
    let (alpha1, alpha2) = desired.tail_masses(model);
    split_form(model, spec, model.median(), alpha1, alpha2)
}

/// Target-split min-form of the yield ratio: as [`c_pyk`] but split at the
/// spec target instead of the median.  Requires the spec to carry a target.
pub fn c_ptk(model: &ProcessModel, spec: &SpecLimits, desired: &DesiredRegion) -> Result<MinIndex> {
    let target = spec
        .target()
        .ok_or_else(|| Error::domain("c_ptk requires a target in the specification"))?;
    let (alpha1, alpha2) = desired.tail_masses(model);
    split_form(model, spec, target, alpha1, alpha2)
}

fn split_form(
    model: &ProcessModel,
    spec: &SpecLimits,
    split: f64,
    alpha1: f64,
    alpha2: f64,
) -> Result<MinIndex> {
    min_form_from_probs(
        model.cdf(spec.upper()),
        model.cdf(split),
        model.prob_less(spec.lower()),
        alpha1,
        alpha2,
    )
}

/// Probability-space kernel of [`c_py`]: the ratio `p / p0`.
pub fn c_py_from_probs(p: f64, p0: f64) -> Result<f64> {
    if p0 <= 0.0 {
        return Err(Error::domain(format!("desired yield must be positive (got {p0})")));
    }
    Ok(p / p0)
}

/// Probability-space kernel of the min-form indices:
/// `upper = (f_upper − f_center)/(½ − α2)`, `lower = (f_center − f_lower)/(½ − α1)`.
///
/// Both tails must be strictly below ½ so the denominators stay positive.
pub fn min_form_from_probs(
    f_upper: f64,
    f_center: f64,
    f_lower: f64,
    alpha1: f64,
    alpha2: f64,
) -> Result<MinIndex> {
    if !(alpha1 < 0.5) || !(alpha2 < 0.5) {
        return Err(Error::domain(format!(
            "min-form denominators require tail proportions below 1/2 (got {alpha1}, {alpha2})"
        )));
    }
    if alpha1 < 0.0 || alpha2 < 0.0 {
        return Err(Error::domain(format!(
            "tail proportions must be nonnegative (got {alpha1}, {alpha2})"
        )));
    }
    let upper = (f_upper - f_center) / (0.5 - alpha2);
    let lower = (f_center - f_lower) / (0.5 - alpha1);
    Ok(MinIndex { value: upper.min(lower), upper, lower })
}
