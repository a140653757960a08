//! Report structures and rendering.
//!
//! JSON reports keep a fixed key order (struct declaration order), carry no
//! timestamps, and serialize every floating-point value with 17 significant
//! digits, so identical analyses produce byte-identical files and a generic
//! parser recovers the exact bits.  Values flagged infinite are emitted as
//! `null` with `"infinite": true`.

use std::io::Write as _;
use std::path::Path;

use capq_core::generalized::MinIndex;
use capq_core::multivariate::{MvGeneralizedIndices, PipelineReport, ShahriariVector};
use capq_core::report::IndexEntry;
use serde::ser::{Error as _, SerializeSeq};
use serde::{Serialize, Serializer};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Copy, Clone, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

// --- float serialization ----------------------------------------------------

fn number_17(x: f64) -> Result<serde_json::Number, String> {
    if !x.is_finite() {
        return Err(format!("non-finite value {x} must be flagged, not serialized"));
    }
    let text = format!("{x:.16e}");
    text.parse().map_err(|e| format!("cannot encode {text}: {e}"))
}

pub fn sig17<S: Serializer>(x: &f64, ser: S) -> Result<S::Ok, S::Error> {
    number_17(*x).map_err(S::Error::custom)?.serialize(ser)
}

pub fn sig17_opt<S: Serializer>(x: &Option<f64>, ser: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => sig17(v, ser),
        None => ser.serialize_none(),
    }
}

struct Sig17(f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        sig17(&self.0, ser)
    }
}

pub fn sig17_slice<S: Serializer>(xs: &[f64], ser: S) -> Result<S::Ok, S::Error> {
    let mut seq = ser.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&Sig17(*x))?;
    }
    seq.end()
}

pub fn sig17_opt_vec<S: Serializer>(xs: &Option<Vec<f64>>, ser: S) -> Result<S::Ok, S::Error> {
    match xs {
        Some(v) => sig17_slice(v, ser),
        None => ser.serialize_none(),
    }
}

// --- shared echo structs ----------------------------------------------------

#[derive(Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl ToolInfo {
    pub fn current() -> Self {
        Self { name: "capq", version: env!("CARGO_PKG_VERSION") }
    }
}

#[derive(Serialize)]
pub struct DataEcho {
    pub path: String,
    pub observations: usize,
}

#[derive(Serialize)]
pub struct MvDataEcho {
    pub path: String,
    pub observations: usize,
    pub dimensions: usize,
}

#[derive(Serialize)]
pub struct SpecEcho {
    #[serde(serialize_with = "sig17")]
    pub lower: f64,
    #[serde(serialize_with = "sig17")]
    pub upper: f64,
    #[serde(serialize_with = "sig17_opt")]
    pub target: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DesiredEcho {
    pub kind: &'static str,
    #[serde(serialize_with = "sig17_opt")]
    pub alpha1: Option<f64>,
    #[serde(serialize_with = "sig17_opt")]
    pub alpha2: Option<f64>,
    #[serde(serialize_with = "sig17_opt")]
    pub ldl: Option<f64>,
    #[serde(serialize_with = "sig17_opt")]
    pub udl: Option<f64>,
}

#[derive(Serialize)]
pub struct SeedsEcho {
    pub monte_carlo: Option<u64>,
    pub bootstrap: Option<u64>,
}

#[derive(Serialize)]
pub struct ModelSummary {
    pub description: String,
    /// "configured", "fitted", or "empirical".
    pub source: &'static str,
    #[serde(serialize_with = "sig17_opt")]
    pub ks: Option<f64>,
}

// --- analyze ----------------------------------------------------------------

#[derive(Serialize)]
pub struct ComponentOut {
    pub name: String,
    #[serde(serialize_with = "sig17")]
    pub value: f64,
}

#[derive(Serialize)]
pub struct IndexEntryOut {
    pub name: String,
    #[serde(serialize_with = "sig17_opt")]
    pub value: Option<f64>,
    pub infinite: bool,
    pub components: Vec<ComponentOut>,
    pub notes: Vec<String>,
}

impl From<IndexEntry> for IndexEntryOut {
    fn from(e: IndexEntry) -> Self {
        Self {
            name: e.name,
            value: e.value,
            infinite: e.infinite,
            components: e
                .components
                .into_iter()
                .map(|c| ComponentOut { name: c.name, value: c.value })
                .collect(),
            notes: e.notes,
        }
    }
}

#[derive(Serialize)]
pub struct IntervalOut {
    pub index: String,
    #[serde(serialize_with = "sig17")]
    pub point: f64,
    #[serde(serialize_with = "sig17")]
    pub lower: f64,
    #[serde(serialize_with = "sig17")]
    pub upper: f64,
    #[serde(serialize_with = "sig17")]
    pub level: f64,
    pub replicates: usize,
    pub seed: u64,
    pub method: &'static str,
    pub point_outside: bool,
}

#[derive(Serialize)]
pub struct AnalyzeInput {
    pub data: Option<DataEcho>,
    pub spec: SpecEcho,
    pub desired: DesiredEcho,
    pub model: String,
    pub seeds: SeedsEcho,
}

#[derive(Serialize)]
pub struct AnalyzeReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub command: &'static str,
    pub input: AnalyzeInput,
    pub defaults_applied: Vec<String>,
    pub model: ModelSummary,
    pub indices: Vec<IndexEntryOut>,
    pub bootstrap: Option<Vec<IntervalOut>>,
}

// --- fit --------------------------------------------------------------------

#[derive(Serialize)]
pub struct FitInput {
    pub data: DataEcho,
    pub families: Vec<String>,
}

#[derive(Serialize)]
pub struct FitRow {
    pub family: String,
    pub model: Option<String>,
    #[serde(serialize_with = "sig17_opt")]
    pub ks: Option<f64>,
    pub error: Option<String>,
}

#[derive(Serialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub command: &'static str,
    pub input: FitInput,
    pub defaults_applied: Vec<String>,
    pub fits: Vec<FitRow>,
    pub best: Option<String>,
}

// --- oracle -----------------------------------------------------------------

#[derive(Serialize)]
pub struct OracleInput {
    pub spec: SpecEcho,
    pub model: String,
    pub draws: usize,
    pub seed: u64,
}

#[derive(Serialize)]
pub struct OracleEstimate {
    #[serde(serialize_with = "sig17")]
    pub monte_carlo_yield: f64,
    #[serde(serialize_with = "sig17")]
    pub standard_error: f64,
    #[serde(serialize_with = "sig17")]
    pub analytic_yield: f64,
    #[serde(serialize_with = "sig17")]
    pub gap: f64,
    #[serde(serialize_with = "sig17_opt")]
    pub gap_in_standard_errors: Option<f64>,
}

#[derive(Serialize)]
pub struct OracleReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub command: &'static str,
    pub input: OracleInput,
    pub defaults_applied: Vec<String>,
    pub model: ModelSummary,
    pub estimate: OracleEstimate,
}

// --- mv-analyze -------------------------------------------------------------

#[derive(Serialize)]
pub struct MvSpecEcho {
    #[serde(serialize_with = "sig17_slice")]
    pub lower: Vec<f64>,
    #[serde(serialize_with = "sig17_slice")]
    pub upper: Vec<f64>,
    #[serde(serialize_with = "sig17_opt_vec")]
    pub target: Option<Vec<f64>>,
}

#[derive(Serialize)]
pub struct MvInput {
    pub data: MvDataEcho,
    pub spec: MvSpecEcho,
    pub structural: Vec<String>,
    pub candidates: Vec<String>,
    #[serde(serialize_with = "sig17")]
    pub significance: f64,
    #[serde(serialize_with = "sig17")]
    pub nonconforming: f64,
    pub desired: DesiredEcho,
    pub seeds: SeedsEcho,
}

#[derive(Serialize)]
pub struct PipelineFitOut {
    pub structural: String,
    pub family: String,
    #[serde(serialize_with = "sig17_opt")]
    pub ks: Option<f64>,
    pub error: Option<String>,
}

#[derive(Serialize)]
pub struct PipelineWinnerOut {
    pub structural: String,
    pub family: String,
    #[serde(serialize_with = "sig17")]
    pub ks: f64,
}

#[derive(Serialize)]
pub struct MinIndexOut {
    #[serde(serialize_with = "sig17")]
    pub value: f64,
    #[serde(serialize_with = "sig17")]
    pub upper: f64,
    #[serde(serialize_with = "sig17")]
    pub lower: f64,
}

impl From<&MinIndex> for MinIndexOut {
    fn from(m: &MinIndex) -> Self {
        Self { value: m.value, upper: m.upper, lower: m.lower }
    }
}

#[derive(Serialize)]
pub struct MvIndicesOut {
    #[serde(serialize_with = "sig17")]
    pub c_py_m: f64,
    pub c_pyk_m: MinIndexOut,
    pub c_ptk_m: Option<MinIndexOut>,
    pub method: String,
}

impl From<&MvGeneralizedIndices> for MvIndicesOut {
    fn from(idx: &MvGeneralizedIndices) -> Self {
        Self {
            c_py_m: idx.c_py_m,
            c_pyk_m: (&idx.c_pyk_m).into(),
            c_ptk_m: idx.c_ptk_m.as_ref().map(MinIndexOut::from),
            method: idx.method.clone(),
        }
    }
}

#[derive(Serialize)]
pub struct PipelineOut {
    pub fits: Vec<PipelineFitOut>,
    pub winner: Option<PipelineWinnerOut>,
    pub adequate: bool,
    #[serde(serialize_with = "sig17")]
    pub critical_distance: f64,
    pub model: String,
    pub warnings: Vec<String>,
    pub indices: MvIndicesOut,
}

impl From<&PipelineReport> for PipelineOut {
    fn from(r: &PipelineReport) -> Self {
        Self {
            fits: r
                .fits
                .iter()
                .map(|f| PipelineFitOut {
                    structural: f.structural.clone(),
                    family: f.family.to_string(),
                    ks: f.ks,
                    error: f.error.clone(),
                })
                .collect(),
            winner: r.winner.as_ref().map(|w| PipelineWinnerOut {
                structural: w.structural.clone(),
                family: w.family.to_string(),
                ks: w.ks,
            }),
            adequate: r.adequate,
            critical_distance: r.critical_distance,
            model: r.model_description.clone(),
            warnings: r.warnings.clone(),
            indices: (&r.indices).into(),
        }
    }
}

#[derive(Serialize)]
pub struct ShahriariOut {
    #[serde(serialize_with = "sig17")]
    pub c1: f64,
    #[serde(serialize_with = "sig17")]
    pub c2: f64,
    pub c3: bool,
}

impl From<&ShahriariVector> for ShahriariOut {
    fn from(v: &ShahriariVector) -> Self {
        Self { c1: v.c1, c2: v.c2, c3: v.c3 }
    }
}

#[derive(Serialize)]
pub struct StructuralIndicesOut {
    pub structural: String,
    pub indices: MvIndicesOut,
}

#[derive(Serialize)]
pub struct NormalExtrasOut {
    pub description: String,
    #[serde(serialize_with = "sig17")]
    pub chen_containment: f64,
    pub shahriari: ShahriariOut,
    pub generalized: Vec<StructuralIndicesOut>,
}

#[derive(Serialize)]
pub struct MvReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub command: &'static str,
    pub input: MvInput,
    pub defaults_applied: Vec<String>,
    pub notes: Vec<String>,
    pub pipeline: PipelineOut,
    pub fitted_normal: Option<NormalExtrasOut>,
}

// --- list-indices -----------------------------------------------------------

#[derive(Serialize)]
pub struct ParamOut {
    pub name: &'static str,
    #[serde(serialize_with = "sig17_opt")]
    pub default: Option<f64>,
}

#[derive(Serialize)]
pub struct IndexInfoOut {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: Vec<ParamOut>,
}

#[derive(Serialize)]
pub struct ListReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub command: &'static str,
    pub indices: Vec<IndexInfoOut>,
}

// --- text rendering ---------------------------------------------------------

/// Display form of one value: fixed notation in a comfortable range,
/// scientific outside it.
pub fn display_value(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs();
    if (1.0e-3..1.0e7).contains(&magnitude) {
        format!("{x:.6}")
    } else {
        format!("{x:.6e}")
    }
}

fn display_entry_value(value: Option<f64>, infinite: bool) -> String {
    match value {
        Some(v) => display_value(v),
        None if infinite => "inf".to_string(),
        None => "undefined".to_string(),
    }
}

fn header(command: &str) -> String {
    format!("capq {} ({command})\n\n", env!("CARGO_PKG_VERSION"))
}

fn push_defaults(text: &mut String, defaults: &[String]) {
    if defaults.is_empty() {
        return;
    }
    text.push_str("defaults applied\n");
    for d in defaults {
        text.push_str("  - ");
        text.push_str(d);
        text.push('\n');
    }
    text.push('\n');
}

fn describe_desired(echo: &DesiredEcho) -> String {
    match echo.kind {
        "limits" => format!(
            "desired limits ldl = {}, udl = {}",
            display_value(echo.ldl.unwrap()),
            display_value(echo.udl.unwrap())
        ),
        _ => format!(
            "tail proportions alpha1 = {}, alpha2 = {}",
            display_value(echo.alpha1.unwrap()),
            display_value(echo.alpha2.unwrap())
        ),
    }
}

fn describe_seeds(seeds: &SeedsEcho) -> String {
    let show = |s: Option<u64>| s.map_or("none".to_string(), |v| v.to_string());
    format!("monte_carlo = {}, bootstrap = {}", show(seeds.monte_carlo), show(seeds.bootstrap))
}

pub fn text_analyze(report: &AnalyzeReport) -> String {
    let mut text = header("analyze");
    text.push_str("input\n");
    match &report.input.data {
        Some(d) => {
            text.push_str(&format!("  data:    {} ({} observations)\n", d.path, d.observations))
        }
        None => text.push_str("  data:    none (model fully specified)\n"),
    }
    let spec = &report.input.spec;
    let target = spec.target.map_or("midpoint".to_string(), display_value);
    text.push_str(&format!(
        "  spec:    L = {}, U = {}, T = {}\n",
        display_value(spec.lower),
        display_value(spec.upper),
        target
    ));
    text.push_str(&format!("  desired: {}\n", describe_desired(&report.input.desired)));
    text.push_str(&format!(
        "  model:   {} ({}): {}\n",
        report.input.model, report.model.source, report.model.description
    ));
    if let Some(ks) = report.model.ks {
        text.push_str(&format!("           KS distance {}\n", display_value(ks)));
    }
    text.push_str(&format!("  seeds:   {}\n\n", describe_seeds(&report.input.seeds)));
    push_defaults(&mut text, &report.defaults_applied);

    text.push_str("indices\n");
    let width = report.indices.iter().map(|e| e.name.len()).max().unwrap_or(4).max(5);
    for entry in &report.indices {
        text.push_str(&format!(
            "  {:width$}  {}\n",
            entry.name,
            display_entry_value(entry.value, entry.infinite)
        ));
        for c in &entry.components {
            text.push_str(&format!("  {:width$}    {} = {}\n", "", c.name, display_value(c.value)));
        }
        for note in &entry.notes {
            text.push_str(&format!("  {:width$}    note: {note}\n", ""));
        }
    }
    if let Some(intervals) = &report.bootstrap {
        text.push('\n');
        text.push_str("bootstrap intervals (percentile)\n");
        for ci in intervals {
            text.push_str(&format!(
                "  {:width$}  point {}  [{}, {}]  level {}  replicates {}  seed {}{}\n",
                ci.index,
                display_value(ci.point),
                display_value(ci.lower),
                display_value(ci.upper),
                display_value(ci.level),
                ci.replicates,
                ci.seed,
                if ci.point_outside { "  (point outside interval)" } else { "" }
            ));
        }
    }
    text
}

pub fn text_fit(report: &FitReport) -> String {
    let mut text = header("fit");
    text.push_str(&format!(
        "input\n  data: {} ({} observations)\n\n",
        report.input.data.path, report.input.data.observations
    ));
    push_defaults(&mut text, &report.defaults_applied);
    text.push_str("fits\n");
    let width = report.fits.iter().map(|f| f.family.len()).max().unwrap_or(6);
    for row in &report.fits {
        match (&row.model, row.ks, &row.error) {
            (Some(model), Some(ks), _) => text.push_str(&format!(
                "  {:width$}  KS {}  {}\n",
                row.family,
                display_value(ks),
                model
            )),
            (_, _, Some(error)) => {
                text.push_str(&format!("  {:width$}  failed: {error}\n", row.family))
            }
            _ => {}
        }
    }
    text.push('\n');
    match &report.best {
        Some(best) => text.push_str(&format!("best fit: {best}\n")),
        None => text.push_str("best fit: none (every candidate failed)\n"),
    }
    text
}

pub fn text_oracle(report: &OracleReport) -> String {
    let mut text = header("oracle");
    let spec = &report.input.spec;
    text.push_str(&format!(
        "input\n  spec:  L = {}, U = {}\n  model: {}\n  draws: {}  seed: {}\n\n",
        display_value(spec.lower),
        display_value(spec.upper),
        report.model.description,
        report.input.draws,
        report.input.seed
    ));
    push_defaults(&mut text, &report.defaults_applied);
    let est = &report.estimate;
    text.push_str(&format!(
        "monte carlo yield: {}  (standard error {})\n",
        display_value(est.monte_carlo_yield),
        display_value(est.standard_error)
    ));
    text.push_str(&format!("analytic yield:    {}\n", display_value(est.analytic_yield)));
    let gap_se = est
        .gap_in_standard_errors
        .map_or("n/a (zero standard error)".to_string(), display_value);
    text.push_str(&format!(
        "gap:               {} ({} standard errors)\n",
        display_value(est.gap),
        gap_se
    ));
    text
}

pub fn text_mv(report: &MvReport) -> String {
    let mut text = header("mv-analyze");
    let input = &report.input;
    text.push_str(&format!(
        "input\n  data:         {} ({} observations, {} axes)\n",
        input.data.path, input.data.observations, input.data.dimensions
    ));
    let fmt_vec = |v: &[f64]| {
        let parts: Vec<String> = v.iter().map(|x| display_value(*x)).collect();
        format!("[{}]", parts.join(", "))
    };
    text.push_str(&format!("  lower:        {}\n", fmt_vec(&input.spec.lower)));
    text.push_str(&format!("  upper:        {}\n", fmt_vec(&input.spec.upper)));
    if let Some(target) = &input.spec.target {
        text.push_str(&format!("  target:       {}\n", fmt_vec(target)));
    }
    text.push_str(&format!("  structural:   {}\n", input.structural.join("; ")));
    text.push_str(&format!("  candidates:   {}\n", input.candidates.join(", ")));
    text.push_str(&format!(
        "  significance: {}  nonconforming: {}\n",
        display_value(input.significance),
        display_value(input.nonconforming)
    ));
    text.push_str(&format!("  desired:      {}\n", describe_desired(&input.desired)));
    text.push_str(&format!("  seeds:        {}\n\n", describe_seeds(&input.seeds)));
    push_defaults(&mut text, &report.defaults_applied);
    for note in &report.notes {
        text.push_str(&format!("note: {note}\n"));
    }
    if !report.notes.is_empty() {
        text.push('\n');
    }

    let p = &report.pipeline;
    text.push_str("model screening\n");
    for fit in &p.fits {
        match (fit.ks, &fit.error) {
            (Some(ks), _) => text.push_str(&format!(
                "  {} / {}: KS {}\n",
                fit.structural,
                fit.family,
                display_value(ks)
            )),
            (None, Some(error)) => {
                text.push_str(&format!("  {} / {}: failed: {error}\n", fit.structural, fit.family))
            }
            _ => {}
        }
    }
    match &p.winner {
        Some(w) => text.push_str(&format!(
            "  winner: {} / {} (KS {}, critical {}, {})\n",
            w.structural,
            w.family,
            display_value(w.ks),
            display_value(p.critical_distance),
            if p.adequate { "adequate" } else { "inadequate" }
        )),
        None => text.push_str("  winner: none\n"),
    }
    text.push_str(&format!("  model: {}\n", p.model));
    for warning in &p.warnings {
        text.push_str(&format!("  warning: {warning}\n"));
    }
    text.push('\n');
    text.push_str("indices\n");
    push_mv_indices(&mut text, &p.indices, "  ");
    if let Some(normal) = &report.fitted_normal {
        text.push('\n');
        text.push_str(&format!("fitted normal model ({})\n", normal.description));
        text.push_str(&format!(
            "  chen containment: {}\n",
            display_value(normal.chen_containment)
        ));
        text.push_str(&format!(
            "  shahriari vector: c1 = {}, c2 = {}, c3 = {}\n",
            display_value(normal.shahriari.c1),
            display_value(normal.shahriari.c2),
            if normal.shahriari.c3 { "inside" } else { "outside" }
        ));
        for block in &normal.generalized {
            text.push_str(&format!("  indices under {}\n", block.structural));
            push_mv_indices(&mut text, &block.indices, "    ");
        }
    }
    text
}

fn push_mv_indices(text: &mut String, idx: &MvIndicesOut, pad: &str) {
    text.push_str(&format!("{pad}c_py_M  {}\n", display_value(idx.c_py_m)));
    text.push_str(&format!(
        "{pad}c_pyk_M {} (upper {}, lower {})\n",
        display_value(idx.c_pyk_m.value),
        display_value(idx.c_pyk_m.upper),
        display_value(idx.c_pyk_m.lower)
    ));
    if let Some(t) = &idx.c_ptk_m {
        text.push_str(&format!(
            "{pad}c_pTk_M {} (upper {}, lower {})\n",
            display_value(t.value),
            display_value(t.upper),
            display_value(t.lower)
        ));
    }
    text.push_str(&format!("{pad}method  {}\n", idx.method));
}

pub fn text_list(report: &ListReport) -> String {
    let mut text = header("list-indices");
    let width = report.indices.iter().map(|i| i.name.len()).max().unwrap_or(4);
    for info in &report.indices {
        text.push_str(&format!("{:width$}  {}\n", info.name, info.summary));
        if !info.params.is_empty() {
            let parts: Vec<String> = info
                .params
                .iter()
                .map(|p| match p.default {
                    Some(d) => format!("{} (default {})", p.name, display_value(d)),
                    None => format!("{} (required)", p.name),
                })
                .collect();
            text.push_str(&format!("{:width$}  parameters: {}\n", "", parts.join(", ")));
        }
    }
    text
}

// --- emission ---------------------------------------------------------------

/// Render the report in the requested format and write it to the output
/// target (stdout by default).
pub fn emit<T: Serialize>(
    report: &T,
    text: String,
    format: Format,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let bytes = match format {
        Format::Json => {
            let mut json = serde_json::to_string_pretty(report)
                .map_err(|e| CliError::Io(format!("cannot serialize the report: {e}")))?;
            json.push('\n');
            json.into_bytes()
        }
        Format::Text => text.into_bytes(),
    };
    match out {
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|e| CliError::Io(format!("cannot write '{}': {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&bytes)
                .and_then(|()| stdout.flush())
                .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_serialize_with_17_significant_digits() {
        #[derive(Serialize)]
        struct Probe {
            #[serde(serialize_with = "sig17")]
            x: f64,
        }
        let json = serde_json::to_string(&Probe { x: 10.0 / 9.0 }).unwrap();
        assert!(json.contains("1.1111111111111112e"), "{json}");
        let round: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(round["x"].as_f64().unwrap(), 10.0 / 9.0);
    }

    #[test]
    fn tiny_and_negative_values_round_trip() {
        for x in [-3.5, 1.0e-12, -2.2250738585072014e-308, 0.0, 6.02e23] {
            let n = number_17(x).unwrap();
            let text = serde_json::to_string(&n).unwrap();
            let back: f64 = serde_json::from_str(&text).unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} via {text}");
        }
    }

    #[test]
    fn non_finite_values_refuse_to_serialize() {
        assert!(number_17(f64::INFINITY).is_err());
        assert!(number_17(f64::NAN).is_err());
    }

    #[test]
    fn display_switches_notation_by_magnitude() {
        assert_eq!(display_value(1.25), "1.250000");
        assert_eq!(display_value(0.0), "0");
        assert!(display_value(1.0e-9).contains('e'));
        assert!(display_value(4.0e9).contains('e'));
    }
}
