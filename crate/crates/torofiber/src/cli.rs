//! Deterministic command-line front end: input parsing, subcommands and
//! report emission.
//!
//! Input documents are JSON (see `docs/input_schema.json`); ray and cone
//! indices are 1-based in files and rendered output. Machine output is a
//! single JSON document per run with sorted keys and no timestamps; the
//! version is printed as a separate header line.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::exact_linalg::IntMatrix;
use crate::fan_geometry::{make_fan, Fan};
use crate::fiber_space::{ChartModel, FiberError, ToricFiberSpace};
use crate::log_sheaves::{
    circle_cohomology, log_poincare_solve, monodromy_op, relative_pushforward_check,
    LogSeries1, LogStalkModule, DEFAULT_SERIES_ORDER, DEFAULT_TRUNCATION_K,
};
use crate::rob_combinatorics::{blowup_chart_map, fiber_invariants};
use crate::special_fiber::{dual_complex, mv_cohomology, strata};
use crate::weight_ss::{
    degeneration_check_f, degeneration_check_w, filtration_length_report, WeightError,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Schema(String),
    Index(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Schema(s) => write!(f, "schema error: {s}"),
            CliError::Index(s) => write!(f, "index error: {s}"),
        }
    }
}

impl std::error::Error for CliError {}

fn error_code(e: &FiberError) -> &'static str {
    match e {
        FiberError::NotToric => "NotToric",
        FiberError::NotEquidimensional => "NotEquidimensional",
        FiberError::NotReduced => "NotReduced",
        FiberError::NotProper => "NotProper",
        FiberError::TargetNotSmooth => "TargetNotSmooth",
        FiberError::IncompatibleDegrees(_) => "IncompatibleDegrees",
        FiberError::NonSimplicial => "NonSimplicial",
        FiberError::ConeNotInFan(_) => "ConeNotInFan",
        FiberError::InvalidChart(_) => "InvalidChart",
    }
}

#[derive(Debug, Deserialize)]
struct RawFan {
    rank: usize,
    rays: Vec<Vec<i64>>,
    #[serde(default)]
    max_cones: Vec<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
struct RawOptions {
    #[serde(default)]
    truncation_k: Option<usize>,
    #[serde(default)]
    series_order: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct RawDocument {
    mode: String,
    #[serde(default)]
    source: Option<RawFan>,
    #[serde(default)]
    target: Option<RawFan>,
    #[serde(default)]
    map: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    tau: Option<Vec<usize>>,
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    m: Option<usize>,
    #[serde(default)]
    n_prime: Option<usize>,
    #[serde(default)]
    m_prime: Option<usize>,
    #[serde(default)]
    blocks: Option<Vec<usize>>,
    #[serde(default)]
    exponents: Option<Vec<i64>>,
    #[serde(default)]
    options: Option<RawOptions>,
}

/// A validated, canonicalized input document.
#[derive(Debug, Clone)]
pub struct InputDocument {
    pub chart: Option<ChartModel>,
    pub fan_mode: Option<FanModeData>,
    /// Base cone as 0-based target ray indices.
    pub tau: Option<Vec<usize>>,
    pub truncation_k: usize,
    pub series_order: usize,
}

#[derive(Debug, Clone)]
pub struct FanModeData {
    pub source: Fan,
    pub target: Fan,
    pub map: IntMatrix,
}

impl InputDocument {
    pub fn is_chart_mode(&self) -> bool {
        self.chart.is_some()
    }

    /// The fiber space of the document: either the fan-mode data or the
    /// local model of the chart.
    pub fn fiber_space(&self) -> Result<ToricFiberSpace, CliError> {
        if let Some(fm) = &self.fan_mode {
            Ok(ToricFiberSpace::new(fm.source.clone(), fm.target.clone(), fm.map.clone()))
        } else {
            let chart = self.chart.as_ref().unwrap();
            ToricFiberSpace::from_chart(chart)
                .map_err(|e| CliError::Schema(format!("invalid chart: {e}")))
        }
    }

    pub fn tau_or_default(&self, fs: &ToricFiberSpace) -> Vec<usize> {
        self.tau.clone().unwrap_or_else(|| fs.default_tau())
    }
}

// desk-scale input bounds; larger data would push exact enumeration past
// any reasonable runtime
const MAX_RANK: usize = 12;
const MAX_RAYS: usize = 48;
const MAX_CONE_SIZE: usize = 20;
const MAX_TRUNCATION: usize = 12;
const MAX_SERIES_ORDER: usize = 24;

fn convert_fan(raw: &RawFan, which: &str) -> Result<Fan, CliError> {
    if raw.rank > MAX_RANK {
        return Err(CliError::Schema(format!("{which}: rank exceeds {MAX_RANK}")));
    }
    if raw.rays.len() > MAX_RAYS {
        return Err(CliError::Schema(format!("{which}: more than {MAX_RAYS} rays")));
    }
    if raw.max_cones.iter().any(|c| c.len() > MAX_CONE_SIZE) {
        return Err(CliError::Schema(format!(
            "{which}: a cone has more than {MAX_CONE_SIZE} rays"
        )));
    }
    let rays: Vec<Vec<BigInt>> = raw
        .rays
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let mut cones = Vec::new();
    for c in &raw.max_cones {
        let mut s = Vec::new();
        for &i in c {
            if i == 0 || i > raw.rays.len() {
                return Err(CliError::Index(format!(
                    "{which}: ray index {i} out of range 1..={}",
                    raw.rays.len()
                )));
            }
            s.push(i - 1);
        }
        s.sort_unstable();
        s.dedup();
        cones.push(s);
    }
    make_fan(raw.rank, rays, cones)
        .map_err(|e| CliError::Schema(format!("{which} fan invalid: {e}")))
}

/// Parse and validate an input document. Parse errors carry the line and
/// column reported by the JSON parser.
pub fn parse(text: &str) -> Result<InputDocument, CliError> {
    let raw: RawDocument = serde_json::from_str(text)
        .map_err(|e| CliError::Schema(format!("{e} (line {}, column {})", e.line(), e.column())))?;
    let truncation_k = raw
        .options
        .as_ref()
        .and_then(|o| o.truncation_k)
        .unwrap_or(DEFAULT_TRUNCATION_K);
    let series_order = raw
        .options
        .as_ref()
        .and_then(|o| o.series_order)
        .unwrap_or(DEFAULT_SERIES_ORDER);
    if truncation_k > MAX_TRUNCATION {
        return Err(CliError::Schema(format!("truncation_k exceeds {MAX_TRUNCATION}")));
    }
    if series_order > MAX_SERIES_ORDER {
        return Err(CliError::Schema(format!("series_order exceeds {MAX_SERIES_ORDER}")));
    }
    match raw.mode.as_str() {
        "fan" => {
            let source = raw
                .source
                .as_ref()
                .ok_or_else(|| CliError::Schema("fan mode needs a source fan".into()))?;
            let target = raw
                .target
                .as_ref()
                .ok_or_else(|| CliError::Schema("fan mode needs a target fan".into()))?;
            let map = raw
                .map
                .as_ref()
                .ok_or_else(|| CliError::Schema("fan mode needs a lattice map".into()))?;
            let source = convert_fan(source, "source")?;
            let target = convert_fan(target, "target")?;
            if map.len() != target.rank() {
                return Err(CliError::Schema(format!(
                    "map must have {} rows (target rank)",
                    target.rank()
                )));
            }
            for row in map {
                if row.len() != source.rank() {
                    return Err(CliError::Schema(format!(
                        "map rows must have {} entries (source rank)",
                        source.rank()
                    )));
                }
            }
            let map = IntMatrix::from_rows(map);
            let tau = match &raw.tau {
                None => None,
                Some(t) => {
                    let mut s = Vec::new();
                    for &i in t {
                        if i == 0 || i > target.rays().len() {
                            return Err(CliError::Index(format!(
                                "tau ray index {i} out of range 1..={}",
                                target.rays().len()
                            )));
                        }
                        s.push(i - 1);
                    }
                    s.sort_unstable();
                    s.dedup();
                    if !target.contains_cone(&s) {
                        return Err(CliError::Index(format!("tau {t:?} is not a target cone")));
                    }
                    Some(s)
                }
            };
            Ok(InputDocument {
                chart: None,
                fan_mode: Some(FanModeData { source, target, map }),
                tau,
                truncation_k,
                series_order,
            })
        }
        "chart" => {
            let get = |name: &str, v: Option<usize>| {
                v.ok_or_else(|| CliError::Schema(format!("chart mode needs '{name}'")))
            };
            let n = get("n", raw.n)?;
            let m = get("m", raw.m)?;
            let n_prime = get("n_prime", raw.n_prime)?;
            let m_prime = get("m_prime", raw.m_prime)?;
            let blocks = raw.blocks.clone().unwrap_or_default();
            let exponents: Vec<BigInt> = raw
                .exponents
                .clone()
                .unwrap_or_default()
                .iter()
                .map(|&x| BigInt::from(x))
                .collect();
            let chart = ChartModel::new(n, m, n_prime, m_prime, blocks, exponents)
                .map_err(|e| CliError::Schema(format!("{e}")))?;
            Ok(InputDocument {
                chart: Some(chart),
                fan_mode: None,
                tau: None,
                truncation_k,
                series_order,
            })
        }
        other => Err(CliError::Schema(format!("unknown mode '{other}'"))),
    }
}

fn ray_list(v: &[usize]) -> Value {
    Value::Array(v.iter().map(|&i| json!(i + 1)).collect())
}

// integers that fit in i64 render as numbers, anything larger as a string
fn big_to_value(x: &BigInt) -> Value {
    let s = x.to_string();
    match s.parse::<i64>() {
        Ok(v) => json!(v),
        Err(_) => json!(s),
    }
}

fn fan_to_value(fan: &Fan) -> Value {
    json!({
        "rank": fan.rank(),
        "rays": Value::Array(
            fan.rays()
                .iter()
                .map(|r| Value::Array(r.iter().map(big_to_value).collect()))
                .collect()
        ),
        "max_cones": Value::Array(fan.max_cones().iter().map(|c| ray_list(c)).collect()),
    })
}

fn matrix_to_value(m: &IntMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array((0..m.cols()).map(|j| big_to_value(m.get(i, j))).collect()))
            .collect(),
    )
}

fn chart_to_value(c: &ChartModel) -> Value {
    json!({
        "n": c.n,
        "m": c.m,
        "n_prime": c.n_prime,
        "m_prime": c.m_prime,
        "blocks": c.blocks,
        "exponents": c.exponents.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
    })
}

fn validate_section(fs: &ToricFiberSpace) -> Value {
    let toroidal = fs.check_toric_morphism();
    let equidimensional = fs.check_equidimensional();
    let reduced: Value = match fs.check_reduced() {
        Ok(b) => json!(b),
        Err(e) => json!({ "unavailable": error_code(&e) }),
    };
    let mut witnesses = Map::new();
    if let Some(w) = fs.toric_morphism_witness() {
        witnesses.insert("toroidal".into(), ray_list(&w));
    } else if let Some(w) = fs.equidimensional_witness() {
        witnesses.insert("equidimensional".into(), ray_list(&w));
    }
    json!({
        "toroidal": toroidal,
        "equidimensional": equidimensional,
        "reduced": reduced,
        "proper": fs.check_proper(),
        "witnesses": Value::Object(witnesses),
        "source": {
            "simplicial": fs.source().is_simplicial(),
            "unimodular": fs.source().is_unimodular(),
            "complete": fs.source().is_complete(),
        },
        "target": {
            "simplicial": fs.target().is_simplicial(),
            "unimodular": fs.target().is_unimodular(),
            "complete": fs.target().is_complete(),
        },
    })
}

fn reduce_section(fs: &ToricFiberSpace) -> Result<Value, FiberError> {
    let degrees = fs.reduction_degrees()?;
    let reduced = fs.kummer_base_change(&degrees)?;
    let document = json!({
        "mode": "fan",
        "source": fan_to_value(reduced.source()),
        "target": fan_to_value(reduced.target()),
        "map": matrix_to_value(reduced.map()),
    });
    Ok(json!({
        "degrees": degrees.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        "cover_connected": fs.cover_connected(&degrees),
        "source_lattice_index": reduced
            .source_lattice_index()
            .map(|i| i.to_string())
            .unwrap_or_else(|| "1".into()),
        "reduced_check": matches!(reduced.check_reduced(), Ok(true)),
        "document": document,
    }))
}

fn fiber_section(fs: &ToricFiberSpace, tau: &[usize], dot: bool) -> Result<Value, FiberError> {
    let st = strata(fs, tau)?;
    let dc = dual_complex(&st);
    let strata_rows: Vec<Value> = st
        .strata
        .iter()
        .map(|s| {
            json!({
                "index_set": ray_list(&s.index_set),
                "cone": ray_list(&s.cone),
                "dim": s.dim,
            })
        })
        .collect();
    let identifications: Vec<Value> = st
        .identification_classes()
        .iter()
        .map(|(cone, sets)| {
            json!({
                "cone": ray_list(cone),
                "index_sets": Value::Array(sets.iter().map(|s| ray_list(s)).collect()),
            })
        })
        .collect();
    let cohomology: Value = match mv_cohomology(fs, &st) {
        Ok(h) => json!(h),
        Err(e) => json!({ "unavailable": error_code(&e) }),
    };
    let mut out = Map::new();
    out.insert("tau".into(), ray_list(tau));
    out.insert(
        "components".into(),
        Value::Array(st.components.iter().map(|c| ray_list(c)).collect()),
    );
    out.insert("strata".into(), Value::Array(strata_rows));
    out.insert("identifications".into(), Value::Array(identifications));
    out.insert(
        "dual_complex".into(),
        json!({
            "vertices": dc.vertex_count,
            "connected_components": dc.connected_components(),
            "edges": Value::Array(
                dc.simplices
                    .iter()
                    .filter(|(s, _)| s.len() == 2)
                    .map(|(s, _)| ray_list(s))
                    .collect()
            ),
        }),
    );
    out.insert("cohomology".into(), cohomology);
    if dot {
        out.insert("dot".into(), json!(dc.to_dot()));
    }
    Ok(Value::Object(out))
}

fn rob_section(doc: &InputDocument, fs: &ToricFiberSpace) -> Result<Value, FiberError> {
    let mut charts = Vec::new();
    if let Some(chart) = &doc.chart {
        let map = blowup_chart_map(chart);
        let inv = fiber_invariants(chart).map_err(|_| FiberError::InvalidChart("invariants".into()))?;
        charts.push(json!({
            "cone": Value::Array(vec![]),
            "chart": chart_to_value(chart),
            "invariants": { "interval": inv.interval, "circle": inv.circle, "disc": inv.disc },
            "angular": matrix_to_value(&map.angular),
        }));
    } else {
        for c in fs.source().max_cones() {
            let chart = fs.chart_model(c)?;
            let map = blowup_chart_map(&chart);
            let inv = fiber_invariants(&chart)
                .map_err(|_| FiberError::InvalidChart("invariants".into()))?;
            charts.push(json!({
                "cone": ray_list(c),
                "chart": chart_to_value(&chart),
                "invariants": { "interval": inv.interval, "circle": inv.circle, "disc": inv.disc },
                "angular": matrix_to_value(&map.angular),
            }));
        }
    }
    Ok(json!({ "charts": Value::Array(charts) }))
}

fn logcheck_section(k: usize, s: usize) -> Value {
    let mut checks: Vec<(String, bool)> = Vec::new();

    // stalk cohomology of the reduced one-variable module
    let module = LogStalkModule::new(1, k.max(3));
    let m = monodromy_op(&module, 0).expect("one variable");
    let coh = circle_cohomology(&m.on_reduced_module());
    match coh {
        Ok(c) => {
            let h0_ok = c.h0_basis.len() == 1 && {
                let v = &c.h0_basis[0];
                !v[0].is_zero() && v[1..].iter().all(|x| x.is_zero())
            };
            checks.push(("circle_h0_is_e1".into(), h0_ok));
            checks.push(("circle_h1_stable_vanishes".into(), c.stable_h1_dim == 0));
        }
        Err(_) => {
            checks.push(("circle_h0_is_e1".into(), false));
            checks.push(("circle_h1_stable_vanishes".into(), false));
        }
    }

    // relative pushforward ranks
    match relative_pushforward_check(k.max(2)) {
        Ok(rep) => {
            checks.push(("pushforward_full".into(), rep.pushforward_full));
            checks.push(("pushforward_pullback".into(), rep.pushforward_pullback));
            checks.push(("r1_pullback".into(), rep.r1_pullback));
            checks.push(("r1_full_vanishes".into(), rep.r1_full_vanishes));
            checks
                .push(("kernel_is_comparison_image".into(), rep.kernel_is_comparison_image));
        }
        Err(_) => checks.push(("relative_pushforward".into(), false)),
    }

    // a solver roundtrip inside the window
    {
        let mut h = LogSeries1::zero(s, k);
        for kk in 0..k.min(3) {
            for j in 0..s.min(3) {
                h.set(kk, j, num_rational::BigRational::from(BigInt::from((kk + j) as i64 + 1)));
            }
        }
        let ok = match log_poincare_solve(&h) {
            Ok(res) => res.primitive.is_some(),
            Err(_) => false,
        };
        checks.push(("log_poincare_roundtrip".into(), ok));
    }

    let all = checks.iter().all(|(_, b)| *b);
    json!({
        "truncation_k": k,
        "series_order": s,
        "checks": checks
            .iter()
            .map(|(n, b)| json!({ "name": n, "pass": b }))
            .collect::<Vec<_>>(),
        "pass": all,
    })
}

fn weights_section(fs: &ToricFiberSpace, tau: &[usize]) -> Result<Value, WeightError> {
    let (mut page, report) = degeneration_check_w(fs, tau)?;
    let e2 = crate::weight_ss::e2_page(&mut page);
    let e1_rows: Vec<Value> = page
        .entries
        .iter()
        .map(|((p, q), labels)| json!({ "p": p, "q": q, "dim": labels.len() }))
        .collect();
    let e2_rows: Vec<Value> = e2
        .iter()
        .filter(|(_, d)| **d > 0)
        .map(|((p, q), d)| json!({ "p": p, "q": q, "dim": d }))
        .collect();
    let degeneration = match report.matches {
        Some(true) => "PASS",
        Some(false) => "FAIL",
        None => "UNCHECKED",
    };
    let length = filtration_length_report(fs, tau).map_err(WeightError::Fiber)?;
    Ok(json!({
        "tau": ray_list(tau),
        "e1": Value::Array(e1_rows),
        "e2": Value::Array(e2_rows),
        "totals": report.totals,
        "oracle": report.oracle,
        "degeneration": degeneration,
        "filtration_length": length,
        "weight_levels": page.weight_levels(),
    }))
}

fn hodge_section(fs: &ToricFiberSpace, tau: &[usize]) -> Result<Value, WeightError> {
    let (table, report) = degeneration_check_f(fs, tau)?;
    let rows: Vec<Value> = table
        .table
        .iter()
        .map(|((p, q), d)| json!({ "p": p, "q": q, "dim": d }))
        .collect();
    let status = match report.matches {
        Some(true) => "PASS",
        Some(false) => "FAIL",
        None => "UNCHECKED",
    };
    Ok(json!({
        "tau": ray_list(tau),
        "table": Value::Array(rows),
        "totals": report.totals,
        "oracle": report.oracle,
        "degeneration": status,
    }))
}

fn weight_error_value(e: &WeightError) -> Value {
    match e {
        WeightError::Fiber(f) => json!({ "unavailable": error_code(f) }),
        WeightError::SignConventionFailure { p, q } => {
            json!({ "error": "SignConventionFailure", "p": p, "q": q })
        }
    }
}

/// Outcome of one CLI run.
pub struct RunOutcome {
    pub human: String,
    pub json: Value,
    pub exit_code: i32,
}

// inline rendering for scalars and short flat arrays
fn inline_value(v: &Value) -> Option<String> {
    match v {
        Value::Array(items) => {
            let parts: Vec<String> = items
                .iter()
                .map(|x| match x {
                    Value::Object(_) | Value::Array(_) => None,
                    other => Some(other.to_string()),
                })
                .collect::<Option<_>>()?;
            Some(format!("[{}]", parts.join(", ")))
        }
        Value::Object(_) => None,
        other => Some(other.to_string()),
    }
}

// arrays of flat objects with a common key set become markdown tables
fn try_table(items: &[Value], indent: usize, out: &mut String) -> bool {
    if items.is_empty() {
        return false;
    }
    let mut keys: Option<Vec<&String>> = None;
    for v in items {
        let Value::Object(map) = v else { return false };
        let these: Vec<&String> = map.keys().collect();
        if map.values().any(|x| inline_value(x).is_none()) {
            return false;
        }
        match &keys {
            None => keys = Some(these),
            Some(k) if *k == these => {}
            _ => return false,
        }
    }
    let keys = keys.unwrap();
    let pad = "  ".repeat(indent);
    let header: Vec<String> = keys.iter().map(|k| k.to_string()).collect();
    let mut rows: Vec<Vec<String>> = Vec::new();
    for v in items {
        let Value::Object(map) = v else { unreachable!() };
        rows.push(keys.iter().map(|k| inline_value(&map[k.as_str()]).unwrap()).collect());
    }
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let line = |cells: &[String], out: &mut String| {
        out.push_str(&pad);
        out.push('|');
        for (i, c) in cells.iter().enumerate() {
            out.push_str(&format!(" {:<w$} |", c, w = widths[i]));
        }
        out.push('\n');
    };
    line(&header, out);
    out.push_str(&pad);
    out.push('|');
    for w in &widths {
        out.push_str(&format!("{}|", "-".repeat(w + 2)));
    }
    out.push('\n');
    for row in &rows {
        line(row, out);
    }
    true
}

fn render_human(value: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                if let Some(s) = inline_value(v) {
                    out.push_str(&format!("{pad}{k}: {s}\n"));
                    continue;
                }
                out.push_str(&format!("{pad}{k}:\n"));
                render_human(v, indent + 1, out);
            }
        }
        Value::Array(items) => {
            if try_table(items, indent, out) {
                return;
            }
            for v in items {
                match inline_value(v) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}-\n"));
                        render_human(v, indent + 1, out);
                    }
                }
            }
        }
        _ => out.push_str(&format!("{pad}{value}\n")),
    }
}

/// Execute a subcommand on a parsed document.
pub fn run(subcommand: &str, doc: &InputDocument, dot: bool) -> RunOutcome {
    let fs = match doc.fiber_space() {
        Ok(fs) => fs,
        Err(e) => {
            let json = json!({ "command": subcommand, "error": format!("{e}") });
            return finish(subcommand, json, EXIT_INPUT_ERROR);
        }
    };
    let tau = doc.tau_or_default(&fs);

    match subcommand {
        "validate" => {
            let section = validate_section(&fs);
            finish(subcommand, json!({ "command": "validate", "validate": section }), EXIT_OK)
        }
        "reduce" => match reduce_section(&fs) {
            Ok(section) => {
                let ok = section["reduced_check"].as_bool() == Some(true);
                let code = if ok { EXIT_OK } else { EXIT_CHECK_FAILED };
                finish(subcommand, json!({ "command": "reduce", "reduce": section }), code)
            }
            Err(e) => finish(
                subcommand,
                json!({ "command": "reduce", "error": error_code(&e), "message": format!("{e}") }),
                EXIT_CHECK_FAILED,
            ),
        },
        "fiber" => match fiber_section(&fs, &tau, dot) {
            Ok(section) => {
                finish(subcommand, json!({ "command": "fiber", "fiber": section }), EXIT_OK)
            }
            Err(e) => finish(
                subcommand,
                json!({ "command": "fiber", "error": error_code(&e), "message": format!("{e}") }),
                EXIT_CHECK_FAILED,
            ),
        },
        "rob" => match rob_section(doc, &fs) {
            Ok(section) => finish(subcommand, json!({ "command": "rob", "rob": section }), EXIT_OK),
            Err(e) => finish(
                subcommand,
                json!({ "command": "rob", "error": error_code(&e), "message": format!("{e}") }),
                EXIT_CHECK_FAILED,
            ),
        },
        "logcheck" => {
            let section = logcheck_section(doc.truncation_k, doc.series_order);
            let code = if section["pass"].as_bool() == Some(true) {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            };
            finish(subcommand, json!({ "command": "logcheck", "logcheck": section }), code)
        }
        "weights" => match weights_section(&fs, &tau) {
            Ok(section) => {
                let code = if section["degeneration"] == json!("FAIL") {
                    EXIT_CHECK_FAILED
                } else {
                    EXIT_OK
                };
                finish(subcommand, json!({ "command": "weights", "weights": section }), code)
            }
            Err(e) => finish(
                subcommand,
                json!({ "command": "weights", "weights": weight_error_value(&e) }),
                EXIT_CHECK_FAILED,
            ),
        },
        "hodge" => match hodge_section(&fs, &tau) {
            Ok(section) => {
                let code = if section["degeneration"] == json!("FAIL") {
                    EXIT_CHECK_FAILED
                } else {
                    EXIT_OK
                };
                finish(subcommand, json!({ "command": "hodge", "hodge": section }), code)
            }
            Err(e) => finish(
                subcommand,
                json!({ "command": "hodge", "hodge": weight_error_value(&e) }),
                EXIT_CHECK_FAILED,
            ),
        },
        "report" => {
            let mut root = Map::new();
            root.insert("command".into(), json!("report"));
            root.insert("validate".into(), validate_section(&fs));
            match reduce_section(&fs) {
                Ok(v) => root.insert("reduce".into(), v),
                Err(e) => root.insert("reduce".into(), json!({ "unavailable": error_code(&e) })),
            };
            match fiber_section(&fs, &tau, dot) {
                Ok(v) => root.insert("fiber".into(), v),
                Err(e) => root.insert("fiber".into(), json!({ "unavailable": error_code(&e) })),
            };
            match rob_section(doc, &fs) {
                Ok(v) => root.insert("rob".into(), v),
                Err(e) => root.insert("rob".into(), json!({ "unavailable": error_code(&e) })),
            };
            root.insert("logcheck".into(), logcheck_section(doc.truncation_k, doc.series_order));
            let mut failed = root["logcheck"]["pass"].as_bool() != Some(true);
            match weights_section(&fs, &tau) {
                Ok(v) => {
                    if v["degeneration"] == json!("FAIL") {
                        failed = true;
                    }
                    root.insert("weights".into(), v);
                }
                Err(e) => {
                    root.insert("weights".into(), weight_error_value(&e));
                }
            };
            match hodge_section(&fs, &tau) {
                Ok(v) => {
                    if v["degeneration"] == json!("FAIL") {
                        failed = true;
                    }
                    root.insert("hodge".into(), v);
                }
                Err(e) => {
                    root.insert("hodge".into(), weight_error_value(&e));
                }
            };
            let code = if failed { EXIT_CHECK_FAILED } else { EXIT_OK };
            finish(subcommand, Value::Object(root), code)
        }
        other => finish(
            other,
            json!({ "error": format!("unknown subcommand '{other}'") }),
            EXIT_INPUT_ERROR,
        ),
    }
}

fn finish(_subcommand: &str, json: Value, exit_code: i32) -> RunOutcome {
    let mut human = String::new();
    render_human(&json, 0, &mut human);
    RunOutcome { human, json, exit_code }
}

/// Full pipeline used by the binary and the tests: parse, run, render.
/// `machine` selects the single-JSON-document output; both modes carry the
/// version on a separate header line.
pub fn execute(
    subcommand: &str,
    input: &str,
    tau_override: Option<Vec<usize>>,
    k_override: Option<usize>,
    s_override: Option<usize>,
    machine: bool,
    dot: bool,
) -> (String, i32) {
    let header = format!("torofiber {}", env!("CARGO_PKG_VERSION"));
    let mut doc = match parse(input) {
        Ok(d) => d,
        Err(e) => {
            let body = if machine {
                serde_json::to_string(&json!({ "error": format!("{e}") })).unwrap()
            } else {
                format!("error: {e}")
            };
            return (format!("{header}\n{body}\n"), EXIT_INPUT_ERROR);
        }
    };
    if let Some(t) = tau_override {
        // 1-based on the command line
        let Some(fm) = &doc.fan_mode else {
            let msg = "tau override applies to fan-mode documents only";
            let body = if machine {
                serde_json::to_string(&json!({ "error": msg })).unwrap()
            } else {
                format!("error: {msg}")
            };
            return (format!("{header}\n{body}\n"), EXIT_INPUT_ERROR);
        };
        let mut s = Vec::new();
        for i in t {
            if i == 0 || i > fm.target.rays().len() {
                let msg = format!("tau ray index {i} out of range");
                let body = if machine {
                    serde_json::to_string(&json!({ "error": msg })).unwrap()
                } else {
                    format!("error: {msg}")
                };
                return (format!("{header}\n{body}\n"), EXIT_INPUT_ERROR);
            }
            s.push(i - 1);
        }
        s.sort_unstable();
        s.dedup();
        if !fm.target.contains_cone(&s) {
            let body = if machine {
                serde_json::to_string(&json!({ "error": "tau is not a target cone" })).unwrap()
            } else {
                "error: tau is not a target cone".to_string()
            };
            return (format!("{header}\n{body}\n"), EXIT_INPUT_ERROR);
        }
        doc.tau = Some(s);
    }
    for (value, cap, name) in [
        (k_override, MAX_TRUNCATION, "truncation"),
        (s_override, MAX_SERIES_ORDER, "series order"),
    ] {
        if let Some(v) = value {
            if v > cap {
                let msg = format!("{name} exceeds {cap}");
                let body = if machine {
                    serde_json::to_string(&json!({ "error": msg })).unwrap()
                } else {
                    format!("error: {msg}")
                };
                return (format!("{header}\n{body}\n"), EXIT_INPUT_ERROR);
            }
        }
    }
    if let Some(k) = k_override {
        doc.truncation_k = k;
    }
    if let Some(s) = s_override {
        doc.series_order = s;
    }
    let outcome = run(subcommand, &doc, dot);
    let body = if machine {
        serde_json::to_string(&outcome.json).unwrap()
    } else {
        outcome.human
    };
    (format!("{header}\n{body}\n"), outcome.exit_code)
}

/// Documents for the shipped fixture library, as JSON text.
pub fn fixture_documents() -> BTreeMap<&'static str, String> {
    let mut out = BTreeMap::new();
    let render = |fs: &ToricFiberSpace| -> String {
        serde_json::to_string_pretty(&json!({
            "mode": "fan",
            "source": fan_to_value(fs.source()),
            "target": fan_to_value(fs.target()),
            "map": matrix_to_value(fs.map()),
        }))
        .unwrap()
    };
    use crate::fiber_space::fixtures as fx;
    out.insert("a1", render(&fx::a1()));
    out.insert("nonred", render(&fx::nonred()));
    out.insert("mixed23", render(&fx::mixed23()));
    out.insert("quad", render(&fx::quad()));
    out.insert("chain2", render(&fx::chain2()));
    out.insert("chain2xchain2", render(&fx::chain2_x_chain2()));
    out.insert("chain2xp1", render(&fx::chain2_x_p1()));
    out.insert(
        "mixed23_chart",
        serde_json::to_string_pretty(&json!({
            "mode": "chart",
            "n": 2, "m": 1, "n_prime": 2, "m_prime": 1,
            "blocks": [2], "exponents": [2, 3],
        }))
        .unwrap(),
    );
    out.insert(
        "nonred_chart",
        serde_json::to_string_pretty(&json!({
            "mode": "chart",
            "n": 1, "m": 1, "n_prime": 1, "m_prime": 1,
            "blocks": [1], "exponents": [2],
        }))
        .unwrap(),
    );
    out
}
