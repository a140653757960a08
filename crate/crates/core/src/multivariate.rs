//! Multivariate capability analysis.
//!
//! A structural function `N` maps each observation vector to a scalar and
//! induces a conditional ordering (`x₁ ≺ x₂` iff `N(x₁) ≤ N(x₂)`), so the
//! generalized yield indices carry over to the transformed scale.  The module
//! also provides the ellipsoidal volume-ratio index, the distribution-free
//! containment index `MC_p`, the three-component capability vector, and a
//! five-step pipeline that screens candidate models on transformed data.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classical::SpecLimits;
use crate::dist::{AuxDistribution, ProcessModel};
use crate::error::{Error, Result};
use crate::generalized::{self, MinIndex};
use crate::inference::{self, FitFamily, Sample};
use crate::special;
use crate::yield_based::DesiredRegion;

/// Rectangular specification region: per-axis limit vectors with an optional
/// target vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MvSpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
    target: Option<Vec<f64>>,
}

impl MvSpec {
    /// Specification region without a target.  Every axis needs finite
    /// `L_i < U_i`; a single axis is allowed so univariate cases embed.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::domain(format!(
                "limit vectors must be nonempty and of equal length (got {} and {})",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !l.is_finite() || !u.is_finite() || l >= u {
                return Err(Error::domain(format!(
                    "axis {i} requires finite limits with L < U (got L={l}, U={u})"
                )));
            }
        }
        Ok(Self { lower, upper, target: None })
    }

    /// Specification region with a target vector inside the limits.
    pub fn with_target(lower: Vec<f64>, upper: Vec<f64>, target: Vec<f64>) -> Result<Self> {
        let mut spec = Self::new(lower, upper)?;
        if target.len() != spec.dim() {
            return Err(Error::domain(format!(
                "target vector length {} does not match dimension {}",
                target.len(),
                spec.dim()
            )));
        }
        for (i, t) in target.iter().enumerate() {
            if !t.is_finite() || *t < spec.lower[i] || *t > spec.upper[i] {
                return Err(Error::domain(format!(
                    "axis {i} target must lie inside the limits (got T={t})"
                )));
            }
        }
        spec.target = Some(target);
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn target(&self) -> Option<&[f64]> {
        self.target.as_deref()
    }

    /// Per-axis midpoints `M_i = (L_i + U_i)/2`.
    pub fn midpoints(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (l + u)).collect()
    }

    /// Per-axis half-widths `d_i = (U_i − L_i)/2`.
    pub fn half_widths(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (u - l)).collect()
    }
}

/// Scalarizing function applied row-wise to observation vectors.
///
/// All three kinds preserve the componentwise order (for the weighted sum,
/// when the weights are nonnegative), so the ordering they induce is
/// consistent with componentwise dominance.
#[derive(Debug, Clone, PartialEq)]
pub enum StructuralFunction {
    WeightedSum(Vec<f64>),
    Min,
    Max,
}

impl StructuralFunction {
    /// Weighted-sum variant with validated (finite, nonempty) weights.
    pub fn weighted_sum(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::domain("weighted sum needs at least one weight"));
        }
        if let Some(bad) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::domain(format!("weights must be finite (got {bad})")));
        }
        Ok(StructuralFunction::WeightedSum(weights))
    }

    /// Check compatibility with vectors of length `dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if dim == 0 {
            return Err(Error::domain("structural function needs dimension of at least 1"));
        }
        match self {
            StructuralFunction::WeightedSum(w) => {
                if w.len() != dim {
                    return Err(Error::domain(format!(
                        "weighted sum has {} weights but the data has {dim} columns",
                        w.len()
                    )));
                }
                if let Some(bad) = w.iter().find(|x| !x.is_finite()) {
                    return Err(Error::domain(format!("weights must be finite (got {bad})")));
                }
                Ok(())
            }
            StructuralFunction::Min | StructuralFunction::Max => Ok(()),
        }
    }

    /// Apply to one observation vector (assumed already validated).
    pub fn apply(&self, row: &[f64]) -> f64 {
        match self {
            StructuralFunction::WeightedSum(w) => {
                row.iter().zip(w).map(|(x, a)| a * x).sum()
            }
            StructuralFunction::Min => row.iter().copied().fold(f64::INFINITY, f64::min),
            StructuralFunction::Max => row.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Human-readable label for reports.
    pub fn label(&self) -> String {
        match self {
            StructuralFunction::WeightedSum(w) => {
                let parts: Vec<String> = w.iter().map(|x| format!("{x}")).collect();
                format!("weighted_sum({})", parts.join(", "))
            }
            StructuralFunction::Min => "min".to_string(),
            StructuralFunction::Max => "max".to_string(),
        }
    }
}

/// Apply a structural function row-wise to an `n × v` data matrix.
pub fn structural_transform(data: &DMatrix<f64>, n: &StructuralFunction) -> Result<Vec<f64>> {
    n.validate(data.ncols())?;
    let mut out = Vec::with_capacity(data.nrows());
    let mut row = vec![0.0; data.ncols()];
    for i in 0..data.nrows() {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = data[(i, j)];
        }
        out.push(n.apply(&row));
    }
    Ok(out)
}

/// Multivariate normal model with a validated covariance.
#[derive(Debug, Clone)]
pub struct MvNormal {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    chol_lower: DMatrix<f64>,
}

impl MvNormal {
    /// Validate symmetry (to a relative `1e-12`) and positive definiteness
    /// (Cholesky factorization must succeed).
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let v = mean.len();
        if v == 0 {
            return Err(Error::domain("mean vector must be nonempty"));
        }
        if cov.nrows() != v || cov.ncols() != v {
            return Err(Error::domain(format!(
                "covariance must be {v}×{v} to match the mean (got {}×{})",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.iter().any(|x| !x.is_finite()) || cov.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("mean and covariance entries must be finite"));
        }
        for i in 0..v {
            for j in (i + 1)..v {
                let scale = 1.0_f64.max(cov[(i, j)].abs()).max(cov[(j, i)].abs());
                if (cov[(i, j)] - cov[(j, i)]).abs() > 1.0e-12 * scale {
                    return Err(Error::domain(format!(
                        "covariance is not symmetric at ({i}, {j}): {} vs {}",
                        cov[(i, j)],
                        cov[(j, i)]
                    )));
                }
            }
        }
        let chol = Cholesky::new(cov.clone())
            .ok_or_else(|| Error::domain("covariance must be positive definite"))?;
        Ok(Self { mean, cov, chol_lower: chol.l() })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// True when every off-diagonal entry is negligible relative to the
    /// corresponding variances, so the axes can be treated as independent.
    fn is_effectively_diagonal(&self) -> bool {
        let v = self.dim();
        for i in 0..v {
            for j in (i + 1)..v {
                let scale = (self.cov[(i, i)] * self.cov[(j, j)]).sqrt();
                if self.cov[(i, j)].abs() > 1.0e-12 * scale {
                    return false;
                }
            }
        }
        true
    }

    /// Per-axis `(mean, sd)` marginals.
    fn marginals(&self) -> Vec<(f64, f64)> {
        (0..self.dim()).map(|i| (self.mean[i], self.cov[(i, i)].sqrt())).collect()
    }

    /// Draw `n` observations as an `n × v` matrix, deterministic in `seed`.
    pub fn sample_matrix(&self, n: usize, seed: u64) -> Result<DMatrix<f64>> {
        if n == 0 {
            return Err(Error::domain("sample size must be at least 1"));
        }
        let v = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = DMatrix::zeros(n, v);
        let mut z = DVector::zeros(v);
        for i in 0..n {
            for k in 0..v {
                let u: f64 = rng.sample(Open01);
                z[k] = special::normal_quantile(u);
            }
            let x = &self.mean + &self.chol_lower * &z;
            for k in 0..v {
                out[(i, k)] = x[k];
            }
        }
        Ok(out)
    }
}

/// Process description: an assumed multivariate normal or raw observations.
#[derive(Debug, Clone)]
pub enum MvModel {
    Normal(MvNormal),
    Data(DMatrix<f64>),
}

impl MvModel {
    /// Wrap an observed `n × v` data matrix (finite entries, `n ≥ 2`).
    pub fn data(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() < 2 || matrix.ncols() == 0 {
            return Err(Error::domain(format!(
                "data matrix needs at least 2 rows and 1 column (got {}×{})",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("data matrix entries must be finite"));
        }
        Ok(MvModel::Data(matrix))
    }

    fn dim(&self) -> usize {
        match self {
            MvModel::Normal(m) => m.dim(),
            MvModel::Data(d) => d.ncols(),
        }
    }
}

/// Fit a multivariate normal to data: column means and the n−1 sample
/// covariance.  A singular covariance is a numeric error because the data,
/// not the request, is deficient.
pub fn fit_mv_normal(data: &DMatrix<f64>) -> Result<MvNormal> {
    let n = data.nrows();
    let v = data.ncols();
    if n < 2 || v == 0 {
        return Err(Error::domain(format!(
            "fitting needs at least 2 rows and 1 column (got {n}×{v})"
        )));
    }
    let mut mean = DVector::zeros(v);
    for j in 0..v {
        mean[j] = data.column(j).sum() / n as f64;
    }
    let mut cov = DMatrix::zeros(v, v);
    for i in 0..n {
        for j in 0..v {
            let dj = data[(i, j)] - mean[j];
            for k in j..v {
                cov[(j, k)] += dj * (data[(i, k)] - mean[k]);
            }
        }
    }
    for j in 0..v {
        for k in j..v {
            cov[(j, k)] /= n as f64 - 1.0;
            cov[(k, j)] = cov[(j, k)];
        }
    }
    let chol = Cholesky::new(cov.clone())
        .ok_or_else(|| Error::numeric("sample covariance is singular"))?;
    Ok(MvNormal { mean, cov, chol_lower: chol.l() })
}

/// Monte Carlo settings for paths with no closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub draws: usize,
    pub seed: u64,
}

/// Generalized yield indices on the transformed scale.
#[derive(Debug, Clone, PartialEq)]
pub struct MvGeneralizedIndices {
    pub c_py_m: f64,
    pub c_pyk_m: MinIndex,
    /// Present only when the specification carries a target vector.
    pub c_ptk_m: Option<MinIndex>,
    /// How the distribution of `N(X)` was obtained.
    pub method: String,
}

/// Transform the specification limits to the `N` scale.
fn transformed_spec(mv: &MvSpec, n: &StructuralFunction) -> Result<SpecLimits> {
    let y_l = n.apply(mv.lower());
    let y_u = n.apply(mv.upper());
    if !(y_l < y_u) {
        return Err(Error::domain(format!(
            "structural transform collapses the limits (N(L)={y_l}, N(U)={y_u})"
        )));
    }
    match mv.target() {
        Some(t) => SpecLimits::with_target(y_l, y_u, n.apply(t)),
        None => SpecLimits::new(y_l, y_u),
    }
}

/// Generalized indices evaluated through a univariate model of `N(X)`.
fn indices_on_model(
    model: &ProcessModel,
    y_spec: &SpecLimits,
    desired: &DesiredRegion,
    method: String,
) -> Result<MvGeneralizedIndices> {
    let c_py_m = generalized::c_py(model, y_spec, desired)?;
    let c_pyk_m = generalized::c_pyk(model, y_spec, desired)?;
    let c_ptk_m = match y_spec.target() {
        Some(_) => Some(generalized::c_ptk(model, y_spec, desired)?),
        None => None,
    };
    Ok(MvGeneralizedIndices { c_py_m, c_pyk_m, c_ptk_m, method })
}

/// Generalized indices from a closed-form product CDF of independent
/// margins (`max`: `F(y) = Π F_i(y)`; `min`: `F(y) = 1 − Π (1 − F_i(y))`).
fn indices_on_product(
    margins: &[(f64, f64)],
    take_max: bool,
    y_spec: &SpecLimits,
    desired: &DesiredRegion,
    method: String,
) -> Result<MvGeneralizedIndices> {
    let cdf = |y: f64| -> f64 {
        let mut prod = 1.0;
        for (mean, sd) in margins {
            let f = special::normal_cdf((y - mean) / sd);
            prod *= if take_max { f } else { 1.0 - f };
        }
        if take_max {
            prod
        } else {
            1.0 - prod
        }
    };
    let f_u = cdf(y_spec.upper());
    let f_l = cdf(y_spec.lower());
    let (alpha1, alpha2, p0) = match desired {
        DesiredRegion::TailProportions { alpha1, alpha2 } => {
            (*alpha1, *alpha2, 1.0 - alpha1 - alpha2)
        }
        DesiredRegion::Limits { ldl, udl } => {
            let f_ldl = cdf(*ldl);
            let f_udl = cdf(*udl);
            (f_ldl, 1.0 - f_udl, f_udl - f_ldl)
        }
    };
    let c_py_m = generalized::c_py_from_probs(f_u - f_l, p0)?;
    // The median of a continuous strictly increasing CDF sits exactly at
    // probability 1/2, so no root-finding is needed for the center.
    let c_pyk_m = generalized::min_form_from_probs(f_u, 0.5, f_l, alpha1, alpha2)?;
    let c_ptk_m = match y_spec.target() {
        Some(t) => Some(generalized::min_form_from_probs(f_u, cdf(t), f_l, alpha1, alpha2)?),
        None => None,
    };
    Ok(MvGeneralizedIndices { c_py_m, c_pyk_m, c_ptk_m, method })
}

/// Generalized yield indices of `N(X)` against the transformed limits.
///
/// The distribution of `N(X)` is taken in closed form where one exists
/// (weighted sums of a multivariate normal; min/max of independent normal
/// axes); a correlated min/max falls back to a seeded Monte Carlo sample,
/// which is the only path that consults `mc`.  Raw data is transformed
/// row-wise and treated empirically.  The desired region is interpreted on
/// the transformed scale.
pub fn mv_generalized(
    mv: &MvSpec,
    n: &StructuralFunction,
    model: &MvModel,
    desired: &DesiredRegion,
    mc: Option<McConfig>,
) -> Result<MvGeneralizedIndices> {
    n.validate(mv.dim())?;
    if model.dim() != mv.dim() {
        return Err(Error::domain(format!(
            "model dimension {} does not match the specification dimension {}",
            model.dim(),
            mv.dim()
        )));
    }
    let y_spec = transformed_spec(mv, n)?;
    match (model, n) {
        (MvModel::Normal(normal), StructuralFunction::WeightedSum(w)) => {
            let mut mean = 0.0;
            let mut var = 0.0;
            for (i, wi) in w.iter().enumerate() {
                mean += wi * normal.mean[i];
                for (j, wj) in w.iter().enumerate() {
                    var += wi * wj * normal.cov[(i, j)];
                }
            }
            if !(var > 0.0) {
                return Err(Error::domain(
                    "weighted sum has zero variance under this covariance",
                ));
            }
            let y_model = ProcessModel::normal(mean, var.sqrt())?;
            indices_on_model(
                &y_model,
                &y_spec,
                desired,
                "closed form: weighted sum of a multivariate normal".to_string(),
            )
        }
        (MvModel::Normal(normal), kind) if normal.is_effectively_diagonal() => {
            let take_max = matches!(kind, StructuralFunction::Max);
            let label = if take_max { "max" } else { "min" };
            indices_on_product(
                &normal.marginals(),
                take_max,
                &y_spec,
                desired,
                format!("closed form: {label} of independent normal axes"),
            )
        }
        (MvModel::Normal(normal), _) => {
            let cfg = mc.ok_or_else(|| {
                Error::domain(
                    "min/max of a correlated model has no closed form; supply monte carlo draws and a seed",
                )
            })?;
            if cfg.draws < 10_000 {
                return Err(Error::domain(format!(
                    "monte carlo evaluation requires at least 10000 draws (got {})",
                    cfg.draws
                )));
            }
            let draws = normal.sample_matrix(cfg.draws, cfg.seed)?;
            let y = structural_transform(&draws, n)?;
            let y_model = ProcessModel::empirical(&y)?;
            indices_on_model(
                &y_model,
                &y_spec,
                desired,
                format!("monte carlo: {} draws, seed {}", cfg.draws, cfg.seed),
            )
        }
        (MvModel::Data(data), _) => {
            let y = structural_transform(data, n)?;
            let y_model = ProcessModel::empirical(&y)?;
            indices_on_model(
                &y_model,
                &y_spec,
                desired,
                format!("empirical: structural transform of {} observations", data.nrows()),
            )
        }
    }
}

/// Ratio of the volume of the ellipsoid `{x : (x−μ)ᵀΣ⁻¹(x−μ) ≤ U_level}` to
/// the volume at level `R = χ²_{v, 1−p_nc}`.
///
/// Both regions share Σ, and the volume of an ellipsoid at level `c` scales
/// as `c^{v/2}`, so the ratio is `(U_level/R)^{v/2}`.
pub fn ellipsoid_volume_ratio(model: &MvNormal, u_level: f64, p_nc: f64) -> Result<f64> {
    if !(u_level > 0.0) || !u_level.is_finite() {
        return Err(Error::domain(format!("ellipsoid level must be positive (got {u_level})")));
    }
    if !(p_nc > 0.0 && p_nc < 1.0) {
        return Err(Error::domain(format!(
            "nonconforming proportion must lie strictly between 0 and 1 (got {p_nc})"
        )));
    }
    let v = model.dim() as f64;
    let r = AuxDistribution::chi_square(v)?.quantile(1.0 - p_nc)?;
    Ok((u_level / r).powf(0.5 * v))
}

/// Distribution-free containment index `MC_p = 1/R`, where `R` scales the
/// specification region `{x : |x_i − M_i| ≤ R·d_i}` until it holds
/// probability `1 − p_nc`.
///
/// The probability is evaluated by Monte Carlo with one fixed draw set
/// (common random numbers), which makes the coverage monotone in `R` and the
/// bisection reproducible.  A data matrix is first condensed to its fitted
/// multivariate normal so the model is samplable.
pub fn chen_mcp(
    model: &MvModel,
    mv: &MvSpec,
    p_nc: f64,
    mc_draws: usize,
    seed: u64,
) -> Result<f64> {
    if !(p_nc > 0.0 && p_nc < 1.0) {
        return Err(Error::domain(format!(
            "nonconforming proportion must lie strictly between 0 and 1 (got {p_nc})"
        )));
    }
    if mc_draws < 100_000 {
        return Err(Error::domain(format!(
            "containment bisection requires at least 100000 draws (got {mc_draws})"
        )));
    }
    if model.dim() != mv.dim() {
        return Err(Error::domain(format!(
            "model dimension {} does not match the specification dimension {}",
            model.dim(),
            mv.dim()
        )));
    }
    let fitted;
    let normal = match model {
        MvModel::Normal(m) => m,
        MvModel::Data(d) => {
            fitted = fit_mv_normal(d)?;
            &fitted
        }
    };
    let draws = normal.sample_matrix(mc_draws, seed)?;
    let mids = mv.midpoints();
    let half = mv.half_widths();
    let mut w = Vec::with_capacity(mc_draws);
    for i in 0..mc_draws {
        let mut worst = 0.0f64;
        for (j, (m, d)) in mids.iter().zip(&half).enumerate() {
            worst = worst.max((draws[(i, j)] - m).abs() / d);
        }
        w.push(worst);
    }
    w.sort_by(f64::total_cmp);
    let n = w.len() as f64;
    let coverage = |r: f64| w.partition_point(|x| *x <= r) as f64 / n;
    let target = 1.0 - p_nc;
    let mut lo = 0.0f64;
    let mut hi = w[w.len() - 1];
    if coverage(lo) >= target {
        return Err(Error::numeric("containment radius collapsed to zero"));
    }
    let mut converged = false;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            converged = true;
            break;
        }
        if coverage(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if !converged {
        return Err(Error::numeric("containment bisection did not converge in 200 steps"));
    }
    if hi <= f64::MIN_POSITIVE {
        return Err(Error::numeric("containment radius collapsed to zero"));
    }
    Ok(1.0 / hi)
}

/// Three-component capability vector for rectangular specifications.
#[derive(Debug, Clone, PartialEq)]
pub struct ShahriariVector {
    /// Containment index of the fitted multivariate normal.
    pub c1: f64,
    /// Observed significance of the Hotelling T² distance between the data
    /// mean and the specification center.
    pub c2: f64,
    /// Whether the modified process region (the spec-shaped box about the
    /// data mean circumscribing the fitted `1 − p_nc` ellipsoid) fits inside
    /// the specification region.
    pub c3: bool,
}

/// Compute the three-component vector from raw data.
///
/// `c1` reuses the containment index on the fitted normal; `c2` is
/// `P[F_{v,n−v} > ((n−v)/(v(n−1)))·T²]` with `T² = n(x̄−M)ᵀS⁻¹(x̄−M)`; `c3`
/// scales a spec-shaped box about `x̄` until it circumscribes the fitted
/// ellipsoid (per-axis half-width `√(χ²_{v,1−p_nc}·S_ii)`) and checks
/// containment axis-wise.
pub fn shahriari_vector(
    data: &DMatrix<f64>,
    mv: &MvSpec,
    p_nc: f64,
    mc_draws: usize,
    seed: u64,
) -> Result<ShahriariVector> {
    let n = data.nrows();
    let v = data.ncols();
    if v != mv.dim() {
        return Err(Error::domain(format!(
            "data has {v} columns but the specification has dimension {}",
            mv.dim()
        )));
    }
    if n <= v {
        return Err(Error::domain(format!(
            "need more observations than dimensions (got n={n}, v={v})"
        )));
    }
    let fitted = fit_mv_normal(data)?;
    let c1 = chen_mcp(&MvModel::Normal(fitted.clone()), mv, p_nc, mc_draws, seed)?;

    let mids = mv.midpoints();
    let diff = DVector::from_fn(v, |i, _| fitted.mean[i] - mids[i]);
    let chol = Cholesky::new(fitted.cov.clone())
        .ok_or_else(|| Error::numeric("sample covariance is singular"))?;
    let solved = chol.solve(&diff);
    let t2 = n as f64 * diff.dot(&solved);
    let stat = (n - v) as f64 / (v as f64 * (n - 1) as f64) * t2;
    let c2 = 1.0 - AuxDistribution::fisher_f(v as f64, (n - v) as f64)?.cdf(stat);

    let chi = AuxDistribution::chi_square(v as f64)?.quantile(1.0 - p_nc)?;
    let half = mv.half_widths();
    let mut scale = 0.0f64;
    for (i, d) in half.iter().enumerate() {
        scale = scale.max((chi * fitted.cov[(i, i)]).sqrt() / d);
    }
    let mut c3 = true;
    for (i, d) in half.iter().enumerate() {
        let lo = fitted.mean[i] - scale * d;
        let hi = fitted.mean[i] + scale * d;
        if lo < mv.lower()[i] || hi > mv.upper()[i] {
            c3 = false;
            break;
        }
    }
    Ok(ShahriariVector { c1, c2, c3 })
}

/// Settings for the model-screening pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    /// Significance level of the goodness-of-fit screen.
    pub significance: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self { significance: 0.05 }
    }
}

/// One attempted (structural function, family) fit.
#[derive(Debug, Clone)]
pub struct FitRecord {
    pub structural: String,
    pub family: &'static str,
    pub ks: Option<f64>,
    pub error: Option<String>,
}

/// The selected (structural function, family) pair.
#[derive(Debug, Clone)]
pub struct PipelineWinner {
    pub structural: String,
    pub family: &'static str,
    pub ks: f64,
}

/// Full pipeline output: every fit attempt, the winner, the adequacy
/// verdict, and the indices computed on the selected model.
#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub fits: Vec<FitRecord>,
    pub winner: Option<PipelineWinner>,
    /// Whether the winner passed the goodness-of-fit screen.
    pub adequate: bool,
    /// Critical KS distance `√(−ln(α/2)/2)/√n` at the configured
    /// significance.
    pub critical_distance: f64,
    /// The model the indices were computed on.
    pub model_description: String,
    pub indices: MvGeneralizedIndices,
    pub warnings: Vec<String>,
}

/// Screen candidate models on transformed data and compute the generalized
/// indices on the winner.
///
/// Each structural function transforms the data to a univariate sample;
/// each candidate family is fitted by maximum likelihood and scored by its
/// KS distance; the best-scoring pair wins.  A winner whose distance exceeds
/// the critical value — or a board with no successful fit at all — drops to
/// the empirical distribution with a warning rather than failing.
pub fn five_step_pipeline(
    data: &DMatrix<f64>,
    candidate_models: &[FitFamily],
    candidate_ns: &[StructuralFunction],
    mv: &MvSpec,
    desired: &DesiredRegion,
    options: &PipelineOptions,
) -> Result<PipelineReport> {
    let n = data.nrows();
    if n < 30 {
        return Err(Error::domain(format!(
            "model screening needs at least 30 observations (got {n})"
        )));
    }
    if candidate_models.is_empty() {
        return Err(Error::domain("no candidate families supplied"));
    }
    if candidate_ns.is_empty() {
        return Err(Error::domain("no structural functions supplied"));
    }
    if !(options.significance > 0.0 && options.significance < 1.0) {
        return Err(Error::domain(format!(
            "significance must lie strictly between 0 and 1 (got {})",
            options.significance
        )));
    }
    for nf in candidate_ns {
        nf.validate(mv.dim())?;
    }
    if data.ncols() != mv.dim() {
        return Err(Error::domain(format!(
            "data has {} columns but the specification has dimension {}",
            data.ncols(),
            mv.dim()
        )));
    }

    let mut fits = Vec::new();
    let mut best: Option<(usize, inference::FittedModel)> = None;
    let mut samples = Vec::with_capacity(candidate_ns.len());
    for (ni, nf) in candidate_ns.iter().enumerate() {
        let y = structural_transform(data, nf)?;
        let sample = Sample::new(y, format!("transform:{}", nf.label()))?;
        for family in candidate_models {
            match inference::fit_model(&sample, *family) {
                Ok(fit) => {
                    fits.push(FitRecord {
                        structural: nf.label(),
                        family: family.name(),
                        ks: Some(fit.ks),
                        error: None,
                    });
                    if best.as_ref().is_none_or(|(_, b)| fit.ks < b.ks) {
                        best = Some((ni, fit));
                    }
                }
                Err(e) => fits.push(FitRecord {
                    structural: nf.label(),
                    family: family.name(),
                    ks: None,
                    error: Some(e.to_string()),
                }),
            }
        }
        samples.push(sample);
    }

    let alpha = options.significance;
    let critical_distance = (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt();
    let mut warnings = Vec::new();

    let (chosen_n, y_model, winner, adequate) = match best {
        Some((ni, fit)) if fit.ks <= critical_distance => {
            let winner = PipelineWinner {
                structural: candidate_ns[ni].label(),
                family: fit.family.name(),
                ks: fit.ks,
            };
            (ni, fit.model, Some(winner), true)
        }
        Some((ni, fit)) => {
            warnings.push(format!(
                "no adequate model: best fit ({} on {}) has KS distance {:.4} above the critical value {:.4}; using the empirical distribution",
                fit.family.name(),
                candidate_ns[ni].label(),
                fit.ks,
                critical_distance
            ));
            let winner = PipelineWinner {
                structural: candidate_ns[ni].label(),
                family: fit.family.name(),
                ks: fit.ks,
            };
            (ni, inference::empirical_model(&samples[ni]), Some(winner), false)
        }
        None => {
            warnings.push(format!(
                "no candidate family could be fitted; using the empirical distribution of transform '{}'",
                candidate_ns[0].label()
            ));
            (0, inference::empirical_model(&samples[0]), None, false)
        }
    };

    let y_spec = transformed_spec(mv, &candidate_ns[chosen_n])?;
    let model_description = y_model.describe();
    let indices = indices_on_model(
        &y_model,
        &y_spec,
        desired,
        format!("screened model: {model_description}"),
    )?;
    Ok(PipelineReport {
        fits,
        winner,
        adequate,
        critical_distance,
        model_description,
        indices,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::DEFAULT_NONCONFORMING;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn std_bivariate() -> MvNormal {
        MvNormal::new(DVector::from_vec(vec![0.0, 0.0]), DMatrix::identity(2, 2)).unwrap()
    }

    fn cube_spec() -> MvSpec {
        MvSpec::new(vec![-3.0, -3.0], vec![3.0, 3.0]).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(MvSpec::new(vec![], vec![]).is_err());
        assert!(MvSpec::new(vec![0.0], vec![1.0, 2.0]).is_err());
        assert!(MvSpec::new(vec![1.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(MvSpec::with_target(vec![0.0], vec![1.0], vec![2.0]).is_err());
        // A single axis is allowed so univariate checks embed directly.
        let one = MvSpec::new(vec![7.0], vec![13.0]).unwrap();
        assert_eq!(one.dim(), 1);
        let spec = MvSpec::with_target(vec![0.0, 2.0], vec![4.0, 10.0], vec![1.0, 9.0]).unwrap();
        assert_eq!(spec.midpoints(), vec![2.0, 6.0]);
        assert_eq!(spec.half_widths(), vec![2.0, 4.0]);
    }

    #[test]
    fn structural_transform_by_hand() {
        let data = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 0.0]);
        assert_eq!(structural_transform(&data, &StructuralFunction::Max).unwrap(), vec![2.0, 3.0]);
        assert_eq!(structural_transform(&data, &StructuralFunction::Min).unwrap(), vec![1.0, 0.0]);
        let ws = StructuralFunction::weighted_sum(vec![1.0, 1.0]).unwrap();
        assert_eq!(structural_transform(&data, &ws).unwrap(), vec![3.0, 3.0]);
        let short = StructuralFunction::weighted_sum(vec![1.0]).unwrap();
        assert!(structural_transform(&data, &short).is_err());
        assert!(StructuralFunction::weighted_sum(vec![f64::NAN]).is_err());
        assert!(StructuralFunction::weighted_sum(vec![]).is_err());
    }

    #[test]
    fn mv_normal_validation_and_sampling() {
        let bad_dim = MvNormal::new(DVector::from_vec(vec![0.0]), DMatrix::identity(2, 2));
        assert!(bad_dim.is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.2, 1.0]);
        assert!(MvNormal::new(DVector::zeros(2), asym).is_err());
        let indef = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(MvNormal::new(DVector::zeros(2), indef).is_err());

        let m = MvNormal::new(
            DVector::from_vec(vec![1.0, -2.0]),
            DMatrix::from_row_slice(2, 2, &[4.0, 1.2, 1.2, 2.0]),
        )
        .unwrap();
        let draws = m.sample_matrix(20_000, 9).unwrap();
        assert_eq!((draws.nrows(), draws.ncols()), (20_000, 2));
        let again = m.sample_matrix(20_000, 9).unwrap();
        assert_eq!(draws, again);
        let mean0 = draws.column(0).sum() / 20_000.0;
        let mean1 = draws.column(1).sum() / 20_000.0;
        assert!(close(mean0, 1.0, 0.05), "{mean0}");
        assert!(close(mean1, -2.0, 0.05), "{mean1}");
        let cov01 = draws
            .column_iter()
            .next()
            .map(|_| {
                let mut acc = 0.0;
                for i in 0..20_000 {
                    acc += (draws[(i, 0)] - mean0) * (draws[(i, 1)] - mean1);
                }
                acc / 19_999.0
            })
            .unwrap();
        assert!(close(cov01, 1.2, 0.08), "{cov01}");
    }

    #[test]
    fn weighted_sum_of_a_normal_is_exact() {
        let mv = MvSpec::new(vec![-3.0, -3.0], vec![3.0, 3.0]).unwrap();
        let ws = StructuralFunction::weighted_sum(vec![1.0, 1.0]).unwrap();
        let out = mv_generalized(
            &mv,
            &ws,
            &MvModel::Normal(std_bivariate()),
            &DesiredRegion::default_tails(),
            None,
        )
        .unwrap();
        // N(X) ~ normal(0, √2) against limits ±6.
        assert!(close(out.c_py_m, 1.0026851594334718, 1.0e-12), "{}", out.c_py_m);
        assert!(out.method.contains("closed form"));
    }

    #[test]
    fn max_of_independent_axes_matches_the_product_form() {
        let out = mv_generalized(
            &cube_spec(),
            &StructuralFunction::Max,
            &MvModel::Normal(std_bivariate()),
            &DesiredRegion::default_tails(),
            None,
        )
        .unwrap();
        // F(3) = Φ(3)², F(−3) = Φ(−3)², p0 = 0.9973.
        assert!(close(out.c_py_m, 1.0000002044888596, 1.0e-12), "{}", out.c_py_m);
        assert!(close(out.c_pyk_m.upper, 0.9972967535574764, 1.0e-12));
        assert!(close(out.c_pyk_m.lower, 1.002703655420243, 1.0e-12));
        assert_eq!(out.c_pyk_m.value, out.c_pyk_m.upper.min(out.c_pyk_m.lower));
        assert!(out.c_ptk_m.is_none());

        let min_out = mv_generalized(
            &cube_spec(),
            &StructuralFunction::Min,
            &MvModel::Normal(std_bivariate()),
            &DesiredRegion::default_tails(),
            None,
        )
        .unwrap();
        // By symmetry of the setup, min and max give the same yield ratio.
        assert!(close(min_out.c_py_m, 1.0000002044888596, 1.0e-12), "{}", min_out.c_py_m);
    }

    #[test]
    fn single_axis_weighted_sum_reduces_to_the_univariate_index() {
        let mv = MvSpec::new(vec![4.0], vec![16.0]).unwrap();
        let model = MvNormal::new(
            DVector::from_vec(vec![10.0]),
            DMatrix::from_row_slice(1, 1, &[4.0]),
        )
        .unwrap();
        let ws = StructuralFunction::weighted_sum(vec![1.0]).unwrap();
        let out = mv_generalized(
            &mv,
            &ws,
            &MvModel::Normal(model),
            &DesiredRegion::default_tails(),
            None,
        )
        .unwrap();
        let uni = ProcessModel::normal(10.0, 2.0).unwrap();
        let spec = SpecLimits::new(4.0, 16.0).unwrap();
        let direct =
            generalized::c_py(&uni, &spec, &DesiredRegion::default_tails()).unwrap();
        assert_eq!(out.c_py_m, direct);
    }

    #[test]
    fn correlated_max_needs_monte_carlo_and_is_deterministic() {
        let model = MvNormal::new(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]),
        )
        .unwrap();
        let err = mv_generalized(
            &cube_spec(),
            &StructuralFunction::Max,
            &MvModel::Normal(model.clone()),
            &DesiredRegion::default_tails(),
            None,
        )
        .unwrap_err();
        assert!(err.to_string().contains("monte carlo"), "{err}");

        let mc = McConfig { draws: 50_000, seed: 11 };
        let a = mv_generalized(
            &cube_spec(),
            &StructuralFunction::Max,
            &MvModel::Normal(model.clone()),
            &DesiredRegion::default_tails(),
            Some(mc),
        )
        .unwrap();
        let b = mv_generalized(
            &cube_spec(),
            &StructuralFunction::Max,
            &MvModel::Normal(model),
            &DesiredRegion::default_tails(),
            Some(mc),
        )
        .unwrap();
        assert_eq!(a.c_py_m, b.c_py_m);
        assert!(a.method.contains("monte carlo"));
    }

    #[test]
    fn nearly_independent_monte_carlo_approaches_the_closed_form() {
        // Correlation 1e−6 exceeds the diagonality cutoff, so this runs the
        // Monte Carlo path; the answer must still sit near the independent
        // closed form.
        let model = MvNormal::new(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0e-6, 1.0e-6, 1.0]),
        )
        .unwrap();
        let out = mv_generalized(
            &cube_spec(),
            &StructuralFunction::Max,
            &MvModel::Normal(model),
            &DesiredRegion::default_tails(),
            Some(McConfig { draws: 200_000, seed: 4 }),
        )
        .unwrap();
        assert!(close(out.c_py_m, 1.0000002044888596, 1.0e-3), "{}", out.c_py_m);
    }

    #[test]
    fn data_path_is_a_counting_identity() {
        // max of each row: 1, 2, 3, 4, 5; spec [1.5, 4.5] keeps 2, 3, 4.
        let data = DMatrix::from_row_slice(5, 2, &[
            1.0, 0.0, //
            2.0, 1.0, //
            3.0, -1.0, //
            4.0, 2.0, //
            5.0, 0.0,
        ]);
        let mv = MvSpec::new(vec![1.5, 1.5], vec![4.5, 4.5]).unwrap();
        let out = mv_generalized(
            &mv,
            &StructuralFunction::Max,
            &MvModel::data(data).unwrap(),
            &DesiredRegion::default_tails(),
            None,
        )
        .unwrap();
        assert!(close(out.c_py_m, (3.0 / 5.0) / 0.9973, 1.0e-12), "{}", out.c_py_m);
        assert!(out.method.contains("empirical"));
    }

    #[test]
    fn volume_ratio_geometry() {
        let m = std_bivariate();
        // Level equal to the reference level: identical regions.
        let one = ellipsoid_volume_ratio(&m, 11.829007011943707, DEFAULT_NONCONFORMING).unwrap();
        assert!(close(one, 1.0, 1.0e-9), "{one}");
        // v = 2: doubling the level doubles the area.
        let r = 11.829007011943707;
        let two = ellipsoid_volume_ratio(&m, 2.0 * r, DEFAULT_NONCONFORMING).unwrap();
        assert!(close(two, 2.0, 1.0e-9), "{two}");
        // Invert the ratio at u = 1 to recover the χ²₂ quantile.
        let inv = ellipsoid_volume_ratio(&m, 1.0, DEFAULT_NONCONFORMING).unwrap();
        assert!(close(1.0 / inv, 11.829007011943707, 1.0e-8), "{}", 1.0 / inv);
        // Strictly increasing in the level.
        let mut prev = 0.0;
        for k in 1..=20 {
            let u = k as f64;
            let val = ellipsoid_volume_ratio(&m, u, DEFAULT_NONCONFORMING).unwrap();
            assert!(val > prev);
            prev = val;
        }
        assert!(ellipsoid_volume_ratio(&m, 0.0, DEFAULT_NONCONFORMING).is_err());
        assert!(ellipsoid_volume_ratio(&m, 1.0, 1.0).is_err());
    }

    #[test]
    fn containment_index_univariate_reduction() {
        let mv = MvSpec::new(vec![7.0], vec![13.0]).unwrap();
        let model = MvNormal::new(
            DVector::from_vec(vec![10.0]),
            DMatrix::from_row_slice(1, 1, &[4.0]),
        )
        .unwrap();
        let mcp =
            chen_mcp(&MvModel::Normal(model), &mv, DEFAULT_NONCONFORMING, 400_000, 17).unwrap();
        // d/(3σ) = 3/6 = 0.5.
        assert!(close(mcp, 0.5, 0.01), "{mcp}");
    }

    #[test]
    fn containment_index_bivariate_value_and_scaling() {
        let mv = MvSpec::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let model = MvNormal::new(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0 / 9.0, 0.0, 0.0, 1.0 / 9.0]),
        )
        .unwrap();
        let mcp =
            chen_mcp(&MvModel::Normal(model.clone()), &mv, DEFAULT_NONCONFORMING, 400_000, 30)
                .unwrap();
        // Bisection oracle: (2Φ(3R)−1)² = 0.9973 at R ≈ 1.06831.
        assert!(close(mcp, 0.9360553449542657, 0.01), "{mcp}");

        // Halving every d halves the index exactly under common random
        // numbers: every containment ratio doubles bit-for-bit.
        let half = MvSpec::new(vec![-0.5, -0.5], vec![0.5, 0.5]).unwrap();
        let mcp_half =
            chen_mcp(&MvModel::Normal(model.clone()), &half, DEFAULT_NONCONFORMING, 400_000, 30)
                .unwrap();
        assert!(close(mcp_half, 0.5 * mcp, 1.0e-12), "{mcp_half} vs {}", 0.5 * mcp);

        assert!(chen_mcp(
            &MvModel::Normal(model),
            &mv,
            DEFAULT_NONCONFORMING,
            1_000,
            30
        )
        .is_err());
    }

    #[test]
    fn containment_index_accepts_raw_data() {
        let truth = MvNormal::new(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0 / 9.0, 0.0, 0.0, 1.0 / 9.0]),
        )
        .unwrap();
        let data = truth.sample_matrix(4_000, 41).unwrap();
        let mv = MvSpec::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let mcp =
            chen_mcp(&MvModel::data(data).unwrap(), &mv, DEFAULT_NONCONFORMING, 200_000, 42)
                .unwrap();
        assert!(close(mcp, 0.9360553449542657, 0.05), "{mcp}");
    }

    #[test]
    fn capability_vector_components() {
        // Data with mean exactly at the spec center: T² = 0 so c2 = 1.
        let data = DMatrix::from_row_slice(6, 2, &[
            9.0, 19.0, //
            11.0, 21.0, //
            10.0, 20.0, //
            10.0, 20.0, //
            9.5, 20.5, //
            10.5, 19.5,
        ]);
        let mv = MvSpec::new(vec![4.0, 14.0], vec![16.0, 26.0]).unwrap();
        let out = shahriari_vector(&data, &mv, DEFAULT_NONCONFORMING, 100_000, 3).unwrap();
        assert_eq!(out.c2, 1.0);
        assert!(out.c3, "six-sigma-wide spec should contain the tight process");
        assert!(out.c1 > 0.0);

        // A spec tight around a fraction of the spread fails containment.
        let tight = MvSpec::new(vec![9.0, 19.0], vec![11.0, 21.0]).unwrap();
        let out = shahriari_vector(&data, &tight, DEFAULT_NONCONFORMING, 100_000, 3).unwrap();
        assert!(!out.c3);

        // Collinear data has a singular covariance.
        let line = DMatrix::from_row_slice(4, 2, &[
            1.0, 2.0, //
            2.0, 4.0, //
            3.0, 6.0, //
            4.0, 8.0,
        ]);
        let err = shahriari_vector(&line, &mv, DEFAULT_NONCONFORMING, 100_000, 3).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)), "{err}");

        // More dimensions than observations is a request problem.
        let narrow = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert!(shahriari_vector(&narrow, &mv, DEFAULT_NONCONFORMING, 100_000, 3).is_err());
    }

    #[test]
    fn capability_vector_c2_decreases_with_mean_shift() {
        let base = MvNormal::new(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 1.0]),
        )
        .unwrap();
        let centered = base.sample_matrix(200, 13).unwrap();
        let mv = MvSpec::new(vec![-6.0, -6.0], vec![6.0, 6.0]).unwrap();
        let mut prev = f64::INFINITY;
        for shift in [0.0, 0.3, 0.6, 1.2, 2.4] {
            let mut data = centered.clone();
            for i in 0..data.nrows() {
                data[(i, 0)] += shift;
                data[(i, 1)] += shift;
            }
            let out = shahriari_vector(&data, &mv, DEFAULT_NONCONFORMING, 100_000, 13).unwrap();
            assert!(out.c2 >= 0.0 && out.c2 <= 1.0);
            assert!(out.c2 <= prev, "c2 should not rise with the shift");
            prev = out.c2;
        }
        assert!(prev < 1.0e-6, "a 2.4σ shift on n=200 is overwhelming evidence");
    }

    #[test]
    fn capability_vector_c1_consistent_with_containment_index() {
        // Process matched to the spec: 6σ_i spans U_i − L_i exactly.
        let truth = MvNormal::new(
            DVector::from_vec(vec![10.0, 20.0]),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0]),
        )
        .unwrap();
        let data = truth.sample_matrix(2_000, 19).unwrap();
        let mv = MvSpec::new(vec![7.0, 14.0], vec![13.0, 26.0]).unwrap();
        let out = shahriari_vector(&data, &mv, DEFAULT_NONCONFORMING, 200_000, 20).unwrap();
        let direct =
            chen_mcp(&MvModel::Normal(truth), &mv, DEFAULT_NONCONFORMING, 200_000, 20).unwrap();
        assert!(close(out.c1, direct, 0.05), "{} vs {direct}", out.c1);
    }

    #[test]
    fn pipeline_contracts() {
        let truth = std_bivariate();
        let tiny = truth.sample_matrix(10, 51).unwrap();
        let mv = cube_spec();
        let err = five_step_pipeline(
            &tiny,
            &[FitFamily::Normal],
            &[StructuralFunction::Max],
            &mv,
            &DesiredRegion::default_tails(),
            &PipelineOptions::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("at least 30"), "{err}");

        let data = truth.sample_matrix(1_000, 51).unwrap();
        assert!(five_step_pipeline(
            &data,
            &[],
            &[StructuralFunction::Max],
            &mv,
            &DesiredRegion::default_tails(),
            &PipelineOptions::default(),
        )
        .is_err());
        assert!(five_step_pipeline(
            &data,
            &[FitFamily::Normal],
            &[],
            &mv,
            &DesiredRegion::default_tails(),
            &PipelineOptions::default(),
        )
        .is_err());
    }

    #[test]
    fn pipeline_selects_a_model_and_reports_rejected_fits() {
        let data = std_bivariate().sample_matrix(1_000, 52).unwrap();
        let report = five_step_pipeline(
            &data,
            &[FitFamily::Normal, FitFamily::LogNormal, FitFamily::Weibull],
            &[StructuralFunction::Max],
            &cube_spec(),
            &DesiredRegion::default_tails(),
            &PipelineOptions::default(),
        )
        .unwrap();
        // max(X) has negative observations, so the positive-support
        // families must appear as recorded failures.
        let failed: Vec<&str> = report
            .fits
            .iter()
            .filter(|f| f.error.is_some())
            .map(|f| f.family)
            .collect();
        assert!(failed.contains(&"lognormal") && failed.contains(&"weibull"), "{failed:?}");
        let winner = report.winner.expect("normal should fit");
        assert_eq!(winner.family, "normal");
        assert!(close(report.indices.c_py_m, 1.0, 0.01), "{}", report.indices.c_py_m);
    }

    #[test]
    fn pipeline_scores_identical_transforms_identically() {
        // Rows with equal coordinates: min and max transforms coincide.
        let base = ProcessModel::normal(5.0, 1.0).unwrap().sample(60, 53).unwrap();
        let mut data = DMatrix::zeros(60, 2);
        for (i, x) in base.iter().enumerate() {
            data[(i, 0)] = *x;
            data[(i, 1)] = *x;
        }
        let mv = MvSpec::new(vec![1.0, 1.0], vec![9.0, 9.0]).unwrap();
        let report = five_step_pipeline(
            &data,
            &[FitFamily::Normal],
            &[StructuralFunction::Min, StructuralFunction::Max],
            &mv,
            &DesiredRegion::default_tails(),
            &PipelineOptions::default(),
        )
        .unwrap();
        assert_eq!(report.fits.len(), 2);
        assert_eq!(report.fits[0].ks, report.fits[1].ks);
    }

    #[test]
    fn pipeline_falls_back_to_empirical_when_nothing_fits() {
        let data = std_bivariate().sample_matrix(200, 54).unwrap();
        let report = five_step_pipeline(
            &data,
            &[FitFamily::LogNormal, FitFamily::Weibull],
            &[StructuralFunction::Min],
            &cube_spec(),
            &DesiredRegion::default_tails(),
            &PipelineOptions::default(),
        )
        .unwrap();
        assert!(report.winner.is_none());
        assert!(!report.adequate);
        assert!(!report.warnings.is_empty());
        assert!(report.model_description.contains("empirical"), "{}", report.model_description);
        assert!(report.indices.c_py_m > 0.0);
    }
}
