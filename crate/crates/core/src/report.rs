//! Index registry and report building blocks shared by the estimation layer
//! and front ends.

use crate::error::{Error, Result};

/// Default tail proportion (the lower/upper 0.135% convention).
pub const DEFAULT_TAIL: f64 = 0.00135;
/// Default benchmark yield (the ±3σ normal convention).
pub const DEFAULT_DESIRED_YIELD: f64 = 0.9973;
/// Default benchmark nonconforming fraction, `1 - DEFAULT_DESIRED_YIELD`.
pub const DEFAULT_NONCONFORMING: f64 = 0.0027;

/// A computed index value that may be infinite (e.g. a ratio against a zero
/// nonconforming fraction).  Infinities are flagged, never emitted as
/// floating-point overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndexValue {
    Finite(f64),
    Infinite,
}

impl IndexValue {
    /// The numeric value, or `None` when flagged infinite.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            IndexValue::Finite(v) => Some(*v),
            IndexValue::Infinite => None,
        }
    }

    /// True when the value is flagged infinite.
    pub fn is_infinite(&self) -> bool {
        matches!(self, IndexValue::Infinite)
    }

    /// Unwrap a finite value, panicking on the infinite flag (test helper).
    pub fn unwrap_finite(&self) -> f64 {
        match self {
            IndexValue::Finite(v) => *v,
            IndexValue::Infinite => panic!("index value flagged infinite"),
        }
    }
}

/// Named sub-value of an index (e.g. the upper/lower pieces of a min-form).
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub name: String,
    pub value: f64,
}

/// One computed index in a report: value or infinite flag, plus any
/// components and explanatory notes (applied defaults, conventions used).
#[derive(Debug, Clone, PartialEq)]
pub struct IndexEntry {
    pub name: String,
    /// Numeric value; `None` exactly when `infinite` is set.
    pub value: Option<f64>,
    pub infinite: bool,
    pub components: Vec<Component>,
    pub notes: Vec<String>,
}

impl IndexEntry {
    /// Entry with a finite value.
    pub fn finite(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), value: Some(value), infinite: false, components: Vec::new(), notes: Vec::new() }
    }

    /// Entry from a possibly-infinite value.
    pub fn from_value(name: impl Into<String>, value: IndexValue) -> Self {
        match value {
            IndexValue::Finite(v) => Self::finite(name, v),
            IndexValue::Infinite => Self {
                name: name.into(),
                value: None,
                infinite: true,
                components: Vec::new(),
                notes: Vec::new(),
            },
        }
    }

    /// Append a named component.
    pub fn with_component(mut self, name: impl Into<String>, value: f64) -> Self {
        self.components.push(Component { name: name.into(), value });
        self
    }

    /// Append a note.
    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

/// Parameter slot of a registered index.
#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    /// Default value, or `None` when the parameter must be supplied.
    pub default: Option<f64>,
}

/// Registry entry describing one computable index.
#[derive(Debug, Clone, Copy)]
pub struct IndexDescriptor {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: &'static [ParamSpec],
}

const REGISTRY: &[IndexDescriptor] = &[
    IndexDescriptor {
        name: "c_p",
        summary: "spec half-width over three standard deviations, d/(3σ)",
        params: &[],
    },
    IndexDescriptor {
        name: "c_pk",
        summary: "location-penalized spread index, (d − |μ−M|)/(3σ)",
        params: &[],
    },
    IndexDescriptor {
        name: "c_pm",
        summary: "target-penalized spread index, d/(3·√(σ² + (μ−T)²))",
        params: &[],
    },
    IndexDescriptor {
        name: "c_pmk",
        summary: "location- and target-penalized hybrid, (d − |μ−M|)/(3·√(σ² + (μ−T)²))",
        params: &[],
    },
    IndexDescriptor {
        name: "s_pk",
        summary: "normal-quantile transform of the two-sided conforming probability",
        params: &[],
    },
    IndexDescriptor {
        name: "vannman",
        summary: "two-parameter superstructure (d − u·|μ−M|)/(3·√(σ² + v·(μ−T)²))",
        params: &[
            ParamSpec { name: "u", default: None },
            ParamSpec { name: "v", default: None },
        ],
    },
    IndexDescriptor {
        name: "spiring_cpw",
        summary: "weighted-loss variant c_p/√(1 + w·δ²) with δ = (μ−T)/σ",
        params: &[ParamSpec { name: "w", default: None }],
    },
    IndexDescriptor {
        name: "clements_cp",
        summary: "quantile-spread analogue of c_p, (U−L)/(Q(1−a) − Q(a))",
        params: &[ParamSpec { name: "a", default: Some(DEFAULT_TAIL) }],
    },
    IndexDescriptor {
        name: "mukherjee_i",
        summary: "interquantile-range index (U−L)/(Q(1−α2) − Q(α1))",
        params: &[
            ParamSpec { name: "alpha1", default: Some(DEFAULT_TAIL) },
            ParamSpec { name: "alpha2", default: Some(DEFAULT_TAIL) },
        ],
    },
    IndexDescriptor {
        name: "yb_ratio",
        summary: "benchmark-to-actual nonconforming ratio p0_nc/p_nc",
        params: &[ParamSpec { name: "p0_nc", default: Some(DEFAULT_NONCONFORMING) }],
    },
    IndexDescriptor {
        name: "yb_cf",
        summary: "worst-tail tolerance ratio min(α0_L/α_L, α0_U/α_U)",
        params: &[
            ParamSpec { name: "alpha0_l", default: Some(DEFAULT_TAIL) },
            ParamSpec { name: "alpha0_u", default: Some(DEFAULT_TAIL) },
        ],
    },
    IndexDescriptor {
        name: "borges_ho_c",
        summary: "normal-equivalent capability Φ⁻¹(1 − π/2)/3 from the nonconforming fraction π",
        params: &[],
    },
    IndexDescriptor {
        name: "perakis_cpc",
        summary: "conformance-proportion index (1 − p0)/(1 − p)",
        params: &[ParamSpec { name: "p0", default: Some(DEFAULT_DESIRED_YIELD) }],
    },
    IndexDescriptor {
        name: "c_py",
        summary: "yield ratio p/p0 against the desired region",
        params: &[],
    },
    IndexDescriptor {
        name: "c_pyk",
        summary: "median-split min-form of the yield ratio, with upper/lower components",
        params: &[],
    },
    IndexDescriptor {
        name: "c_ptk",
        summary: "target-split min-form of the yield ratio (requires a target)",
        params: &[],
    },
];

/// All registered univariate indices, in canonical order.
pub fn registry() -> &'static [IndexDescriptor] {
    REGISTRY
}

/// Look up a registry entry by name.
pub fn descriptor(name: &str) -> Option<&'static IndexDescriptor> {
    REGISTRY.iter().find(|d| d.name == name)
}

/// A fully parameterized request for one index.
#[derive(Debug, Clone, PartialEq)]
pub enum IndexRequest {
    CP,
    CPk,
    CPm,
    CPmk,
    SPk,
    Vannman { u: f64, v: f64 },
    SpiringW { w: f64 },
    Clements { a: f64 },
    Mukherjee { alpha1: f64, alpha2: f64 },
    YbRatio { p0_nc: f64 },
    YbCf { alpha0_lower: f64, alpha0_upper: f64 },
    BorgesHo,
    Perakis { p0: f64 },
    CPy,
    CPyk,
    CPTk,
}

impl IndexRequest {
    /// Registry name of this request.
    pub fn name(&self) -> &'static str {
        match self {
            IndexRequest::CP => "c_p",
            IndexRequest::CPk => "c_pk",
            IndexRequest::CPm => "c_pm",
            IndexRequest::CPmk => "c_pmk",
            IndexRequest::SPk => "s_pk",
            IndexRequest::Vannman { .. } => "vannman",
            IndexRequest::SpiringW { .. } => "spiring_cpw",
            IndexRequest::Clements { .. } => "clements_cp",
            IndexRequest::Mukherjee { .. } => "mukherjee_i",
            IndexRequest::YbRatio { .. } => "yb_ratio",
            IndexRequest::YbCf { .. } => "yb_cf",
            IndexRequest::BorgesHo => "borges_ho_c",
            IndexRequest::Perakis { .. } => "perakis_cpc",
            IndexRequest::CPy => "c_py",
            IndexRequest::CPyk => "c_pyk",
            IndexRequest::CPTk => "c_ptk",
        }
    }

    /// True when the index is computed from process moments only; false when
    /// it needs a distribution model (quantiles or yield).
    pub fn is_moment_based(&self) -> bool {
        matches!(
            self,
            IndexRequest::CP
                | IndexRequest::CPk
                | IndexRequest::CPm
                | IndexRequest::CPmk
                | IndexRequest::SPk
                | IndexRequest::Vannman { .. }
                | IndexRequest::SpiringW { .. }
        )
    }

    /// Build a request from a registry name plus a parameter lookup
    /// (typically backed by a config file).  Returns the request and a list
    /// of "name.param = value (default)" strings for every default applied.
    pub fn from_name(name: &str, param: &dyn Fn(&str) -> Option<f64>) -> Result<(Self, Vec<String>)> {
        let desc = descriptor(name).ok_or_else(|| {
            let valid: Vec<&str> = REGISTRY.iter().map(|d| d.name).collect();
            Error::domain(format!("unknown index '{name}'; valid indices: {}", valid.join(", ")))
        })?;
        let mut defaults = Vec::new();
        let mut fetch = |p: &ParamSpec| -> Result<f64> {
            if let Some(v) = param(p.name) {
                if !v.is_finite() {
                    return Err(Error::domain(format!(
                        "index '{name}' parameter '{}' must be finite (got {v})",
                        p.name
                    )));
                }
                Ok(v)
            } else if let Some(d) = p.default {
                defaults.push(format!("{name}.{} = {d} (default)", p.name));
                Ok(d)
            } else {
                Err(Error::domain(format!("index '{name}' requires parameter '{}'", p.name)))
            }
        };
        let mut values = Vec::with_capacity(desc.params.len());
        for p in desc.params {
            values.push(fetch(p)?);
        }
        let request = match name {
            "c_p" => IndexRequest::CP,
            "c_pk" => IndexRequest::CPk,
            "c_pm" => IndexRequest::CPm,
            "c_pmk" => IndexRequest::CPmk,
            "s_pk" => IndexRequest::SPk,
            "vannman" => IndexRequest::Vannman { u: values[0], v: values[1] },
            "spiring_cpw" => IndexRequest::SpiringW { w: values[0] },
            "clements_cp" => IndexRequest::Clements { a: values[0] },
            "mukherjee_i" => IndexRequest::Mukherjee { alpha1: values[0], alpha2: values[1] },
            "yb_ratio" => IndexRequest::YbRatio { p0_nc: values[0] },
            "yb_cf" => IndexRequest::YbCf { alpha0_lower: values[0], alpha0_upper: values[1] },
            "borges_ho_c" => IndexRequest::BorgesHo,
            "perakis_cpc" => IndexRequest::Perakis { p0: values[0] },
            "c_py" => IndexRequest::CPy,
            "c_pyk" => IndexRequest::CPyk,
            "c_ptk" => IndexRequest::CPTk,
            _ => unreachable!("descriptor lookup covers the registry"),
        };
        request.validate_params()?;
        Ok((request, defaults))
    }

    /// Range checks on request parameters, so misconfiguration is caught
    /// before any data is touched.
    pub fn validate_params(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Domain(msg));
        match self {
            IndexRequest::Vannman { u, v } => {
                if *u < 0.0 || *v < 0.0 {
                    return bad(format!("vannman parameters must be nonnegative (got u={u}, v={v})"));
                }
            }
            IndexRequest::SpiringW { w } => {
                if *w < 0.0 {
                    return bad(format!("spiring_cpw weight must be nonnegative (got w={w})"));
                }
            }
            IndexRequest::Clements { a } => {
                if !(*a > 0.0 && *a < 0.5) {
                    return bad(format!("clements_cp tail a must lie in (0, 0.5) (got {a})"));
                }
            }
            IndexRequest::Mukherjee { alpha1, alpha2 } => {
                if *alpha1 < 0.0 || *alpha2 < 0.0 || alpha1 + alpha2 >= 1.0 {
                    return bad(format!(
                        "mukherjee_i tails must be nonnegative with alpha1 + alpha2 < 1 (got {alpha1}, {alpha2})"
                    ));
                }
            }
            IndexRequest::YbRatio { p0_nc } => {
                if !(*p0_nc > 0.0 && *p0_nc < 1.0) {
                    return bad(format!("yb_ratio benchmark p0_nc must lie in (0, 1) (got {p0_nc})"));
                }
            }
            IndexRequest::YbCf { alpha0_lower, alpha0_upper } => {
                for (label, a) in [("alpha0_l", alpha0_lower), ("alpha0_u", alpha0_upper)] {
                    if !(*a > 0.0 && *a < 1.0) {
                        return bad(format!("yb_cf tolerance {label} must lie in (0, 1) (got {a})"));
                    }
                }
            }
            IndexRequest::Perakis { p0 } => {
                if !(*p0 > 0.0 && *p0 < 1.0) {
                    return bad(format!("perakis_cpc benchmark p0 must lie in (0, 1) (got {p0})"));
                }
            }
            _ => {}
        }
        Ok(())
    }
}
