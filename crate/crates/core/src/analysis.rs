//! Batch analysis: a JSON document naming inputs and conditions is validated
//! into an [`AnalysisSpec`], evaluated into a [`Bundle`] of reports keyed by
//! input label and condition tag, and rendered as JSON, CSV or plot tables.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::assoc::WeightFunction;
use crate::conditions::{
    admissibility_bundle, beta_gamma, condv_propagation, equlemma_check, growth_flags, matrix_mg,
    mg_battery, moderate_growth_index, quotient_root_comparison, DEFAULT_D_MAX,
};
use crate::counterexample::{
    build_counterexample, materialize, validate_schedule, witness_divergence,
    PiecewiseLinearLogSpec, ScheduleVariant,
};
use crate::error::{Error, Result, SchemaError, SchemaErrors};
use crate::matrix::{build_associated_matrix, quotient_identity_suite, WeightMatrix};
use crate::report::{ConditionId, ConditionReport, MatrixVariant, MgLevel, Verdict};
use crate::sequence::{make_family, Family, WeightSequence, DEFAULT_HORIZON};

/// Smallest horizon accepted in a spec.
pub const MIN_HORIZON: usize = 4;

/// Index grid of the Roumieu-type matrix built from a sequence or weight.
pub const ROUMIEU_GRID: [f64; 4] = [1.0, 2.0, 3.0, 4.0];
/// Index grid of the Beurling-type matrix built from a sequence or weight.
pub const BEURLING_GRID: [f64; 4] = [0.25, 1.0 / 3.0, 0.5, 1.0];

/// Significant digits of every float written by the emitters.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// One input of an analysis.
#[derive(Debug, Clone)]
pub enum InputSpec {
    Family {
        family: Family,
        horizon: Option<usize>,
    },
    Sequence {
        label: String,
        log_values: Vec<f64>,
    },
    Counterexample {
        levels: usize,
        variant: Vec<ScheduleVariant>,
        b1: f64,
    },
    Schedule(PiecewiseLinearLogSpec),
    Matrix(WeightMatrix),
    LogPower {
        s: f64,
        horizon: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InputKind {
    Sequence,
    Counterexample,
    Matrix,
    Weight,
}

impl InputSpec {
    fn kind(&self) -> InputKind {
        match self {
            InputSpec::Family { .. } | InputSpec::Sequence { .. } => InputKind::Sequence,
            InputSpec::Counterexample { .. } | InputSpec::Schedule(_) => InputKind::Counterexample,
            InputSpec::Matrix(_) => InputKind::Matrix,
            InputSpec::LogPower { .. } => InputKind::Weight,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            InputSpec::Family { family, horizon } => {
                let mut v = json!({"family": family.id(), "params": family.params()});
                if let Some(h) = horizon {
                    v["horizon"] = json!(h);
                }
                v
            }
            InputSpec::Sequence { label, log_values } => {
                json!({"label": label, "log_values": log_values})
            }
            InputSpec::Counterexample {
                levels,
                variant,
                b1,
            } => json!({
                "counterexample": {"levels": levels, "variant": variant, "b1": b1}
            }),
            InputSpec::Schedule(s) => {
                json!({"breakpoints": s.breakpoints, "slopes": s.slopes, "variant": s.variant})
            }
            InputSpec::Matrix(m) => m.to_json(),
            InputSpec::LogPower { s, horizon } => {
                let mut v = json!({"log_power": {"s": s}});
                if let Some(h) = horizon {
                    v["horizon"] = json!(h);
                }
                v
            }
        }
    }
}

/// Conditions an analysis can request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AnalysisCondition {
    Lc,
    MgBattery,
    GrowthFlags,
    BetaGamma,
    Genmg,
    Equlemma,
    Admissibility,
    WeightConditions,
    Schedule,
    MatrixMg,
    Rstrange,
    Bstrange,
    QuotientIdentities,
    CondvPropagation,
}

impl AnalysisCondition {
    pub const ALL: [AnalysisCondition; 14] = [
        AnalysisCondition::Lc,
        AnalysisCondition::MgBattery,
        AnalysisCondition::GrowthFlags,
        AnalysisCondition::BetaGamma,
        AnalysisCondition::Genmg,
        AnalysisCondition::Equlemma,
        AnalysisCondition::Admissibility,
        AnalysisCondition::WeightConditions,
        AnalysisCondition::Schedule,
        AnalysisCondition::MatrixMg,
        AnalysisCondition::Rstrange,
        AnalysisCondition::Bstrange,
        AnalysisCondition::QuotientIdentities,
        AnalysisCondition::CondvPropagation,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            AnalysisCondition::Lc => "lc",
            AnalysisCondition::MgBattery => "mg_battery",
            AnalysisCondition::GrowthFlags => "growth_flags",
            AnalysisCondition::BetaGamma => "beta_gamma",
            AnalysisCondition::Genmg => "genmg",
            AnalysisCondition::Equlemma => "equlemma",
            AnalysisCondition::Admissibility => "admissibility",
            AnalysisCondition::WeightConditions => "weight_conditions",
            AnalysisCondition::Schedule => "schedule",
            AnalysisCondition::MatrixMg => "matrix_mg",
            AnalysisCondition::Rstrange => "rstrange",
            AnalysisCondition::Bstrange => "bstrange",
            AnalysisCondition::QuotientIdentities => "quotient_identities",
            AnalysisCondition::CondvPropagation => "condv_propagation",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.tag() == s)
    }

    /// Accepted parameter names.
    fn params(self) -> &'static [&'static str] {
        match self {
            AnalysisCondition::BetaGamma => &["Q", "beta"],
            AnalysisCondition::Genmg => &["d_max"],
            AnalysisCondition::Equlemma => &["d"],
            AnalysisCondition::QuotientIdentities => &["c"],
            AnalysisCondition::CondvPropagation => &["x", "c", "Q", "beta"],
            _ => &[],
        }
    }

    fn applies_to(self, kind: InputKind) -> bool {
        use AnalysisCondition::*;
        match self {
            Lc | MgBattery | GrowthFlags | BetaGamma | Genmg | Equlemma | Admissibility => {
                matches!(kind, InputKind::Sequence | InputKind::Counterexample)
            }
            Schedule => kind == InputKind::Counterexample,
            WeightConditions => kind != InputKind::Matrix,
            MatrixMg | Rstrange | Bstrange | QuotientIdentities | CondvPropagation => true,
        }
    }
}

impl fmt::Display for AnalysisCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A requested condition with its numeric parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionSpec {
    pub condition: AnalysisCondition,
    pub params: BTreeMap<String, f64>,
}

impl ConditionSpec {
    pub fn new(condition: AnalysisCondition) -> Self {
        ConditionSpec {
            condition,
            params: BTreeMap::new(),
        }
    }

    fn param(&self, name: &str, default: f64) -> f64 {
        self.params.get(name).copied().unwrap_or(default)
    }

    fn to_json(&self) -> Value {
        if self.params.is_empty() {
            return json!(self.condition.tag());
        }
        let mut m = Map::new();
        m.insert("id".into(), json!(self.condition.tag()));
        for (k, v) in &self.params {
            m.insert(k.clone(), json!(v));
        }
        Value::Object(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Plotdata,
}

impl OutputFormat {
    pub fn tag(self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
            OutputFormat::Plotdata => "plotdata",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "json" => Some(OutputFormat::Json),
            "csv" => Some(OutputFormat::Csv),
            "plotdata" => Some(OutputFormat::Plotdata),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub format: OutputFormat,
    pub path: Option<String>,
}

/// A validated analysis request.
#[derive(Debug, Clone)]
pub struct AnalysisSpec {
    pub inputs: Vec<InputSpec>,
    pub conditions: Vec<ConditionSpec>,
    /// Horizon for builtin families and weights that do not set their own.
    pub horizon: Option<usize>,
    /// Largest `d` scanned by `genmg`.
    pub d_max: Option<usize>,
    /// Index grid for matrices built from sequences and weights; when absent
    /// the Roumieu and Beurling grids are used for the respective variants.
    pub grid: Option<Vec<f64>>,
    pub output: Option<OutputSpec>,
}

impl AnalysisSpec {
    /// Canonical JSON form; [`parse_spec`] reads it back to the same spec.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert(
            "inputs".into(),
            Value::Array(self.inputs.iter().map(InputSpec::to_json).collect()),
        );
        m.insert(
            "conditions".into(),
            Value::Array(self.conditions.iter().map(ConditionSpec::to_json).collect()),
        );
        if let Some(h) = self.horizon {
            m.insert("horizon".into(), json!(h));
        }
        if let Some(d) = self.d_max {
            m.insert("d_max".into(), json!(d));
        }
        if let Some(g) = &self.grid {
            m.insert("grid".into(), json!(g));
        }
        if let Some(o) = &self.output {
            let mut out = json!({"format": o.format.tag()});
            if let Some(p) = &o.path {
                out["path"] = json!(p);
            }
            m.insert("output".into(), out);
        }
        Value::Object(m)
    }
}

/// Collects schema errors while walking a document.
struct Checker {
    errors: Vec<SchemaError>,
}

impl Checker {
    fn err(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.errors.push(SchemaError {
            path: path.into(),
            message: message.into(),
        });
    }

    fn unknown_keys(&mut self, obj: &Map<String, Value>, path: &str, allowed: &[&str]) {
        for k in obj.keys() {
            if !allowed.contains(&k.as_str()) {
                self.err(format!("{path}/{k}"), format!("unknown field '{k}'"));
            }
        }
    }

    fn horizon(&mut self, v: Option<&Value>, path: &str) -> Option<usize> {
        let v = v?;
        match v.as_u64() {
            Some(h) if h as usize >= MIN_HORIZON => Some(h as usize),
            _ => {
                self.err(path, format!("horizon must be an integer >= {MIN_HORIZON}"));
                None
            }
        }
    }

    fn numbers(&mut self, v: &Value, path: &str) -> Option<Vec<f64>> {
        let arr = match v.as_array() {
            Some(a) => a,
            None => {
                self.err(path, "expected an array of numbers");
                return None;
            }
        };
        let mut out = Vec::with_capacity(arr.len());
        for (i, x) in arr.iter().enumerate() {
            match x.as_f64() {
                Some(f) => out.push(f),
                None => {
                    self.err(format!("{path}/{i}"), "expected a number");
                    return None;
                }
            }
        }
        Some(out)
    }

    fn variants(&mut self, v: Option<&Value>, path: &str) -> Vec<ScheduleVariant> {
        let Some(v) = v else { return Vec::new() };
        let Some(arr) = v.as_array() else {
            self.err(path, "expected an array of schedule variants");
            return Vec::new();
        };
        let mut out = Vec::new();
        for (i, x) in arr.iter().enumerate() {
            match x.as_str().and_then(ScheduleVariant::parse) {
                Some(s) => out.push(s),
                None => self.err(
                    format!("{path}/{i}"),
                    format!("unknown schedule variant {x} (expected minimal, quasianalytic or strong_b)"),
                ),
            }
        }
        out
    }

    fn input(&mut self, v: &Value, path: &str) -> Option<InputSpec> {
        let Some(obj) = v.as_object() else {
            self.err(path, "input must be an object");
            return None;
        };
        if let Some(f) = obj.get("family") {
            self.unknown_keys(obj, path, &["family", "params", "horizon"]);
            let Some(id) = f.as_str() else {
                self.err(format!("{path}/family"), "family must be a string");
                return None;
            };
            let mut params = BTreeMap::new();
            if let Some(p) = obj.get("params") {
                match p.as_object() {
                    Some(pm) => {
                        for (k, x) in pm {
                            match x.as_f64() {
                                Some(f) => {
                                    params.insert(k.clone(), f);
                                }
                                None => self.err(
                                    format!("{path}/params/{k}"),
                                    "parameter must be a number",
                                ),
                            }
                        }
                    }
                    None => self.err(format!("{path}/params"), "params must be an object"),
                }
            }
            let horizon = self.horizon(obj.get("horizon"), &format!("{path}/horizon"));
            return match Family::from_parts(id, &params) {
                Ok(family) => Some(InputSpec::Family { family, horizon }),
                Err(e @ Error::UnknownFamily(_)) => {
                    self.err(format!("{path}/family"), e.to_string());
                    None
                }
                Err(e) => {
                    self.err(format!("{path}/params"), e.to_string());
                    None
                }
            };
        }
        if let Some(lv) = obj.get("log_values") {
            self.unknown_keys(obj, path, &["label", "horizon", "log_values"]);
            let values = self.numbers(lv, &format!("{path}/log_values"))?;
            let label = match obj.get("label") {
                None => format!("sequence@{path}"),
                Some(Value::String(s)) => s.clone(),
                Some(_) => {
                    self.err(format!("{path}/label"), "label must be a string");
                    return None;
                }
            };
            if let Some(h) = obj.get("horizon") {
                if h.as_u64() != Some(values.len() as u64 - 1) {
                    self.err(
                        format!("{path}/horizon"),
                        "horizon must equal the number of log_values minus one",
                    );
                }
            }
            if values.len() < MIN_HORIZON + 1 {
                self.err(
                    format!("{path}/log_values"),
                    format!("need a horizon >= {MIN_HORIZON}"),
                );
                return None;
            }
            if let Err(e) = WeightSequence::from_log_values(label.clone(), values.clone()) {
                self.err(format!("{path}/log_values"), e.to_string());
                return None;
            }
            return Some(InputSpec::Sequence {
                label,
                log_values: values,
            });
        }
        if let Some(c) = obj.get("counterexample") {
            self.unknown_keys(obj, path, &["counterexample"]);
            let cpath = format!("{path}/counterexample");
            let Some(co) = c.as_object() else {
                self.err(cpath, "counterexample must be an object");
                return None;
            };
            self.unknown_keys(co, &cpath, &["levels", "variant", "b1"]);
            let levels = match co.get("levels").and_then(Value::as_u64) {
                Some(l) if l >= 4 => l as usize,
                _ => {
                    self.err(format!("{cpath}/levels"), "levels must be an integer >= 4");
                    return None;
                }
            };
            let variant = self.variants(co.get("variant"), &format!("{cpath}/variant"));
            let b1 = match co.get("b1") {
                None => 1.0,
                Some(x) => match x.as_f64() {
                    Some(f) if f > 0.0 => f,
                    _ => {
                        self.err(format!("{cpath}/b1"), "b1 must be a positive number");
                        return None;
                    }
                },
            };
            return Some(InputSpec::Counterexample {
                levels,
                variant,
                b1,
            });
        }
        if let Some(bp) = obj.get("breakpoints") {
            self.unknown_keys(obj, path, &["breakpoints", "slopes", "variant"]);
            let breakpoints: Option<Vec<u64>> = bp
                .as_array()
                .and_then(|a| a.iter().map(Value::as_u64).collect());
            let Some(breakpoints) = breakpoints else {
                self.err(
                    format!("{path}/breakpoints"),
                    "breakpoints must be nonnegative integers",
                );
                return None;
            };
            let Some(sv) = obj.get("slopes") else {
                self.err(format!("{path}/slopes"), "missing slopes");
                return None;
            };
            let slopes = self.numbers(sv, &format!("{path}/slopes"))?;
            let variant = self.variants(obj.get("variant"), &format!("{path}/variant"));
            if breakpoints.len() < 2 || slopes.len() + 1 < breakpoints.len() {
                self.err(
                    path,
                    "need at least two breakpoints and one slope per block",
                );
                return None;
            }
            return Some(InputSpec::Schedule(PiecewiseLinearLogSpec::from_slopes(
                breakpoints,
                slopes,
                variant,
            )));
        }
        if obj.contains_key("members") {
            self.unknown_keys(obj, path, &["indices", "horizon", "members", "origin"]);
            return match WeightMatrix::from_json(v) {
                Ok(m) if m.horizon() >= MIN_HORIZON => Some(InputSpec::Matrix(m)),
                Ok(_) => {
                    self.err(
                        format!("{path}/horizon"),
                        format!("horizon must be >= {MIN_HORIZON}"),
                    );
                    None
                }
                Err(e) => {
                    self.err(path, e.to_string());
                    None
                }
            };
        }
        if let Some(lp) = obj.get("log_power") {
            self.unknown_keys(obj, path, &["log_power", "horizon"]);
            let s = match lp.get("s").and_then(Value::as_f64) {
                Some(s) if s > 1.0 && s.is_finite() => s,
                _ => {
                    self.err(format!("{path}/log_power/s"), "s must be a number > 1");
                    return None;
                }
            };
            let horizon = self.horizon(obj.get("horizon"), &format!("{path}/horizon"));
            return Some(InputSpec::LogPower { s, horizon });
        }
        self.err(
            path,
            "input must contain one of family, log_values, counterexample, breakpoints, members, log_power",
        );
        None
    }

    fn condition(&mut self, v: &Value, path: &str) -> Option<ConditionSpec> {
        let (id, params_obj) = match v {
            Value::String(s) => (s.as_str(), None),
            Value::Object(o) => match o.get("id").and_then(Value::as_str) {
                Some(id) => (id, Some(o)),
                None => {
                    self.err(format!("{path}/id"), "condition object needs a string 'id'");
                    return None;
                }
            },
            _ => {
                self.err(path, "condition must be a string or an object with 'id'");
                return None;
            }
        };
        let Some(condition) = AnalysisCondition::parse(id) else {
            self.err(path, format!("unknown condition-id '{id}'"));
            return None;
        };
        let mut spec = ConditionSpec::new(condition);
        if let Some(o) = params_obj {
            for (k, x) in o {
                if k == "id" {
                    continue;
                }
                if !condition.params().contains(&k.as_str()) {
                    self.err(
                        format!("{path}/{k}"),
                        format!("'{id}' takes no parameter '{k}'"),
                    );
                    continue;
                }
                match x.as_f64() {
                    Some(f) if f.is_finite() => {
                        spec.params.insert(k.clone(), f);
                    }
                    _ => self.err(format!("{path}/{k}"), "parameter must be a finite number"),
                }
            }
        }
        Some(spec)
    }
}

/// Validates a spec document. Every violation is reported with its JSON path.
pub fn parse_spec(document: &str) -> Result<AnalysisSpec> {
    let doc: Value = serde_json::from_str(document)?;
    let mut ck = Checker { errors: Vec::new() };
    let Some(obj) = doc.as_object() else {
        return Err(Error::Schema(SchemaErrors(vec![SchemaError {
            path: String::new(),
            message: "spec must be a JSON object".into(),
        }])));
    };
    ck.unknown_keys(
        obj,
        "",
        &["inputs", "conditions", "horizon", "d_max", "grid", "output"],
    );

    let mut inputs = Vec::new();
    match obj.get("inputs").and_then(Value::as_array) {
        Some(arr) => {
            for (i, v) in arr.iter().enumerate() {
                if let Some(inp) = ck.input(v, &format!("/inputs/{i}")) {
                    inputs.push((i, inp));
                }
            }
        }
        None => ck.err("/inputs", "missing array 'inputs'"),
    }

    let mut conditions = Vec::new();
    match obj.get("conditions") {
        None => {}
        Some(Value::Array(arr)) => {
            for (j, v) in arr.iter().enumerate() {
                let path = format!("/conditions/{j}");
                if let Some(c) = ck.condition(v, &path) {
                    if conditions
                        .iter()
                        .any(|(_, o): &(usize, ConditionSpec)| o.condition == c.condition)
                    {
                        ck.err(path, format!("duplicate condition '{}'", c.condition));
                        continue;
                    }
                    conditions.push((j, c));
                }
            }
        }
        Some(_) => ck.err("/conditions", "conditions must be an array"),
    }

    for (i, inp) in &inputs {
        for (j, c) in &conditions {
            if !c.condition.applies_to(inp.kind()) {
                ck.err(
                    format!("/conditions/{j}"),
                    format!(
                        "condition '{}' does not apply to input /inputs/{i}",
                        c.condition
                    ),
                );
            }
        }
    }

    let horizon = ck.horizon(obj.get("horizon"), "/horizon");
    let d_max = match obj.get("d_max") {
        None => None,
        Some(v) => match v.as_u64() {
            Some(d) if d >= 1 => Some(d as usize),
            _ => {
                ck.err("/d_max", "d_max must be an integer >= 1");
                None
            }
        },
    };
    let grid = match obj.get("grid") {
        None => None,
        Some(v) => match ck.numbers(v, "/grid") {
            Some(g) if !g.is_empty() && g.iter().all(|x| *x > 0.0 && x.is_finite()) => Some(g),
            Some(_) => {
                ck.err("/grid", "grid must be a nonempty array of positive numbers");
                None
            }
            None => None,
        },
    };
    let output = match obj.get("output") {
        None => None,
        Some(Value::Object(o)) => {
            ck.unknown_keys(o, "/output", &["format", "path"]);
            let format = match o.get("format").and_then(Value::as_str) {
                None => Some(OutputFormat::Json),
                Some(f) => {
                    let parsed = OutputFormat::parse(f);
                    if parsed.is_none() {
                        ck.err(
                            "/output/format",
                            format!("unknown format '{f}' (expected json, csv or plotdata)"),
                        );
                    }
                    parsed
                }
            };
            let path = match o.get("path") {
                None => None,
                Some(Value::String(s)) => Some(s.clone()),
                Some(_) => {
                    ck.err("/output/path", "path must be a string");
                    None
                }
            };
            format.map(|format| OutputSpec { format, path })
        }
        Some(_) => {
            ck.err("/output", "output must be an object");
            None
        }
    };

    if !ck.errors.is_empty() {
        return Err(Error::Schema(SchemaErrors(ck.errors)));
    }
    Ok(AnalysisSpec {
        inputs: inputs.into_iter().map(|(_, i)| i).collect(),
        conditions: conditions.into_iter().map(|(_, c)| c).collect(),
        horizon,
        d_max,
        grid,
        output,
    })
}

/// Reports keyed by input label, then by condition tag.
pub type Bundle = BTreeMap<String, BTreeMap<String, ConditionReport>>;

enum Object {
    Sequence {
        seq: WeightSequence,
        schedule: Option<PiecewiseLinearLogSpec>,
    },
    Matrix(WeightMatrix),
    Weight {
        w: WeightFunction,
        horizon: usize,
    },
}

struct Resolved {
    label: String,
    object: Object,
}

fn resolve(input: &InputSpec, spec: &AnalysisSpec) -> Result<Resolved> {
    let default_horizon = spec.horizon.unwrap_or(DEFAULT_HORIZON);
    Ok(match input {
        InputSpec::Family { family, horizon } => {
            let seq = make_family(*family, horizon.unwrap_or(default_horizon))?;
            Resolved {
                label: seq.label().to_string(),
                object: Object::Sequence {
                    seq,
                    schedule: None,
                },
            }
        }
        InputSpec::Sequence { label, log_values } => Resolved {
            label: label.clone(),
            object: Object::Sequence {
                seq: WeightSequence::from_log_values(label.clone(), log_values.clone())?,
                schedule: None,
            },
        },
        InputSpec::Counterexample {
            levels,
            variant,
            b1,
        } => {
            let (schedule, seq) = build_counterexample(*levels, variant, *b1)?;
            Resolved {
                label: seq.label().to_string(),
                object: Object::Sequence {
                    seq,
                    schedule: Some(schedule),
                },
            }
        }
        InputSpec::Schedule(s) => {
            let seq = materialize(s)?;
            Resolved {
                label: seq.label().to_string(),
                object: Object::Sequence {
                    seq,
                    schedule: Some(s.clone()),
                },
            }
        }
        InputSpec::Matrix(m) => Resolved {
            label: format!(
                "matrix[{}]",
                m.indices()
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            object: Object::Matrix(m.clone()),
        },
        InputSpec::LogPower { s, horizon } => {
            let w = WeightFunction::log_power(*s)?;
            Resolved {
                label: w.label(),
                object: Object::Weight {
                    w,
                    horizon: horizon.unwrap_or(default_horizon),
                },
            }
        }
    })
}

/// Matrix of `object` on `grid`: from-omega with the largest horizon allowed by
/// the exact range for sequences, the weight's horizon for closed forms.
fn omega_matrix(object: &Object, grid: &[f64]) -> Result<WeightMatrix> {
    match object {
        Object::Matrix(m) => Ok(m.clone()),
        Object::Sequence { seq, .. } => {
            let w = WeightFunction::associated(seq.clone())?;
            let max = grid.iter().cloned().fold(0.0f64, f64::max);
            let horizon = (seq.horizon() as f64 / max).floor() as usize;
            build_associated_matrix(&w, grid, horizon)
        }
        Object::Weight { w, horizon } => build_associated_matrix(w, grid, *horizon),
    }
}

fn variant_matrix(
    object: &Object,
    spec: &AnalysisSpec,
    variant: MatrixVariant,
) -> Result<WeightMatrix> {
    match (&spec.grid, variant) {
        (Some(g), _) => omega_matrix(object, g),
        (None, MatrixVariant::Roumieu) => omega_matrix(object, &ROUMIEU_GRID),
        (None, MatrixVariant::Beurling) => omega_matrix(object, &BEURLING_GRID),
    }
}

fn positive_int(c: &ConditionSpec, name: &str, default: usize) -> Result<usize> {
    let v = c.param(name, default as f64);
    if v < 1.0 || v.fract() != 0.0 {
        return Err(Error::param(name, v, "need a positive integer"));
    }
    Ok(v as usize)
}

fn evaluate(r: &Resolved, c: &ConditionSpec, spec: &AnalysisSpec) -> Result<Vec<ConditionReport>> {
    use AnalysisCondition as A;
    let seq = match &r.object {
        Object::Sequence { seq, .. } => Some(seq),
        _ => None,
    };
    let need_seq = || {
        seq.ok_or_else(|| {
            Error::InvalidSequence(format!("'{}' needs a sequence input", c.condition))
        })
    };
    Ok(match c.condition {
        A::Lc => vec![need_seq()?.validate_lc()],
        A::MgBattery => mg_battery(need_seq()?)?.into_values().collect(),
        A::GrowthFlags => growth_flags(need_seq()?)?.into_values().collect(),
        A::BetaGamma => {
            let q = positive_int(c, "Q", 2)?;
            beta_gamma(need_seq()?, q, c.param("beta", 1.0))?
                .into_values()
                .collect()
        }
        A::Genmg => {
            let d_max = positive_int(c, "d_max", spec.d_max.unwrap_or(DEFAULT_D_MAX))?;
            let s = need_seq()?;
            let mut report = moderate_growth_index(s, d_max)?;
            if let Object::Sequence {
                schedule: Some(sched),
                ..
            } = &r.object
            {
                for d in 2..=d_max {
                    if d >= sched.levels() {
                        break;
                    }
                    let values = witness_divergence(sched, s, d)?;
                    let series = values
                        .iter()
                        .enumerate()
                        .map(|(k, v)| ((d + k) as f64, *v))
                        .collect();
                    report.sub_reports.push(
                        ConditionReport::new(
                            ConditionId::WitnessDivergence,
                            Verdict::HoldsOnHorizon,
                        )
                        .with_constant("d", d as f64)
                        .with_series(series)
                        .with_note(format!("forced log A at level starts, d = {d}")),
                    );
                }
            }
            vec![report]
        }
        A::Equlemma => vec![equlemma_check(need_seq()?, positive_int(c, "d", 2)?, true)?],
        A::Admissibility => vec![admissibility_bundle(need_seq()?)?],
        A::WeightConditions => {
            let w = match &r.object {
                Object::Sequence { seq, .. } => WeightFunction::associated(seq.clone())?,
                Object::Weight { w, .. } => w.clone(),
                Object::Matrix(_) => {
                    return Err(Error::InvalidSequence(
                        "weight conditions need a weight".into(),
                    ))
                }
            };
            let which = [
                ConditionId::Om1,
                ConditionId::Om3,
                ConditionId::Om4,
                ConditionId::Om6,
                ConditionId::StrongNq,
            ];
            crate::assoc::check_weight_conditions(&w, &which)?
                .into_values()
                .collect()
        }
        A::Schedule => match &r.object {
            Object::Sequence {
                schedule: Some(s), ..
            } => vec![validate_schedule(s)],
            _ => return Err(Error::InvalidSchedule("input has no schedule".into())),
        },
        A::MatrixMg => {
            let mut out = Vec::new();
            for variant in [MatrixVariant::Roumieu, MatrixVariant::Beurling] {
                let m = variant_matrix(&r.object, spec, variant)?;
                for level in MgLevel::ALL {
                    out.push(matrix_mg(&m, variant, level)?);
                }
            }
            out
        }
        A::Rstrange => {
            let m = variant_matrix(&r.object, spec, MatrixVariant::Roumieu)?;
            vec![quotient_root_comparison(&m, MatrixVariant::Roumieu)?]
        }
        A::Bstrange => {
            let m = variant_matrix(&r.object, spec, MatrixVariant::Beurling)?;
            vec![quotient_root_comparison(&m, MatrixVariant::Beurling)?]
        }
        A::QuotientIdentities => {
            let m = variant_matrix(&r.object, spec, MatrixVariant::Roumieu)?;
            vec![quotient_identity_suite(&m, positive_int(c, "c", 2)?)?]
        }
        A::CondvPropagation => {
            let x = c.param("x", 1.0);
            if !(x > 0.0) {
                return Err(Error::param("x", x, "need x > 0"));
            }
            let cc = positive_int(c, "c", 2)?;
            let q = positive_int(c, "Q", 2)?;
            let m = match &r.object {
                Object::Matrix(m) => m.clone(),
                other => {
                    let cf = cc as f64;
                    let mut grid = vec![x / cf, x, x * cf];
                    grid.dedup();
                    omega_matrix(other, &grid)?
                }
            };
            vec![condv_propagation(&m, x, cc, q, c.param("beta", 1.0))?]
        }
    })
}

/// Evaluates every (input, condition) pair. Pairs run in parallel; the bundle
/// is assembled in input order afterwards, so the result does not depend on
/// scheduling. Labels repeated across inputs get a `#k` suffix.
pub fn run_analysis(spec: &AnalysisSpec) -> Result<Bundle> {
    let mut resolved = Vec::with_capacity(spec.inputs.len());
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (i, input) in spec.inputs.iter().enumerate() {
        let mut r = resolve(input, spec).map_err(|e| e.annotate(format!("/inputs/{i}")))?;
        let count = seen.entry(r.label.clone()).or_insert(0);
        *count += 1;
        if *count > 1 {
            r.label = format!("{}#{}", r.label, count);
        }
        resolved.push(r);
    }

    let tasks: Vec<(usize, usize)> = (0..resolved.len())
        .flat_map(|i| (0..spec.conditions.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<Result<Vec<ConditionReport>>> = tasks
        .par_iter()
        .map(|&(i, j)| {
            evaluate(&resolved[i], &spec.conditions[j], spec).map_err(|e| {
                e.annotate(format!(
                    "{} / {}",
                    resolved[i].label, spec.conditions[j].condition
                ))
            })
        })
        .collect();

    let mut bundle = Bundle::new();
    for r in &resolved {
        bundle.insert(r.label.clone(), BTreeMap::new());
    }
    for (&(i, _), result) in tasks.iter().zip(results) {
        let entry = bundle
            .get_mut(&resolved[i].label)
            .expect("label registered");
        for report in result? {
            entry.insert(report.condition.tag(), report);
        }
    }
    if spec.conditions.is_empty() {
        bundle.clear();
    }
    Ok(bundle)
}

/// `x` rounded to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

/// Text form of a float in emitted files.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{}", round_significant(x))
    }
}

fn canonicalize(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(x) = n.as_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round_significant(x)) {
                        *n = r;
                    }
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(canonicalize),
        Value::Object(o) => o.values_mut().for_each(canonicalize),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to [`SIGNIFICANT_DIGITS`] digits.
pub fn to_canonical_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    canonicalize(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn render_json(bundle: &Bundle) -> Result<String> {
    to_canonical_json(bundle)
}

/// Reads a bundle written by [`render_json`].
pub fn parse_bundle(text: &str) -> Result<Bundle> {
    Ok(serde_json::from_str(text)?)
}

fn flatten<'a>(tag: String, r: &'a ConditionReport, out: &mut Vec<(String, &'a ConditionReport)>) {
    for (k, s) in r.sub_reports.iter().enumerate() {
        flatten(format!("{tag}[{}]", k + 1), s, out);
    }
    out.insert(out.len() - count_nested(r), (tag, r));
}

fn count_nested(r: &ConditionReport) -> usize {
    r.sub_reports.iter().map(|s| 1 + count_nested(s)).sum()
}

/// Every report of the bundle with its path-like condition name
/// (`genmg`, `genmg[2]`, ...), in bundle order.
fn report_rows(bundle: &Bundle) -> Vec<(&str, String, &ConditionReport)> {
    let mut rows = Vec::new();
    for (label, reports) in bundle {
        for (tag, r) in reports {
            let mut flat = Vec::new();
            flatten(tag.clone(), r, &mut flat);
            rows.extend(flat.into_iter().map(|(t, r)| (label.as_str(), t, r)));
        }
    }
    rows
}

/// CSV with columns `label, condition, prefix, value, verdict`: one row per
/// witness-series point, or one row with empty prefix and value for reports
/// without a series. Sub-reports appear as `condition[k]`.
pub fn render_csv(bundle: &Bundle) -> Result<String> {
    if bundle.values().all(BTreeMap::is_empty) {
        return Err(Error::EmptyBundle);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["label", "condition", "prefix", "value", "verdict"])
        .map_err(csv_error)?;
    for (label, cond, r) in report_rows(bundle) {
        let verdict = r.verdict.to_string();
        if r.witness_series.is_empty() {
            w.write_record([label, cond.as_str(), "", "", verdict.as_str()])
                .map_err(csv_error)?;
        }
        for &(x, y) in &r.witness_series {
            w.write_record([
                label,
                cond.as_str(),
                &format_float(x),
                &format_float(y),
                verdict.as_str(),
            ])
            .map_err(csv_error)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn file_stem(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// One two-column `x y` table per witness series, keyed by file name. Each
/// table lists the change points of the running-max series (the first prefix
/// of every new value), which is all a step plot needs.
pub fn render_plotdata(bundle: &Bundle) -> Result<BTreeMap<String, String>> {
    if bundle.values().all(BTreeMap::is_empty) {
        return Err(Error::EmptyBundle);
    }
    let mut files = BTreeMap::new();
    for (label, cond, r) in report_rows(bundle) {
        if r.witness_series.is_empty() {
            continue;
        }
        let mut text = format!(
            "# label: {label}\n# condition: {cond}\n# verdict: {}\n",
            r.verdict
        );
        for n in &r.notes {
            text.push_str(&format!("# note: {n}\n"));
        }
        text.push_str("# x y\n");
        let mut last: Option<f64> = None;
        for &(x, y) in &r.witness_series {
            if last.is_some_and(|l| l == y) {
                continue;
            }
            last = Some(y);
            text.push_str(&format!("{} {}\n", format_float(x), format_float(y)));
        }
        let name = format!("{}.{}.dat", file_stem(label), file_stem(&cond));
        files.insert(name, text);
    }
    Ok(files)
}

/// Writes the bundle in `format`: a file at `out` for json and csv, a
/// directory of tables for plotdata. Returns the written paths.
pub fn emit_report(bundle: &Bundle, format: OutputFormat, out: &Path) -> Result<Vec<PathBuf>> {
    match format {
        OutputFormat::Json => {
            std::fs::write(out, render_json(bundle)?)?;
            Ok(vec![out.to_path_buf()])
        }
        OutputFormat::Csv => {
            std::fs::write(out, render_csv(bundle)?)?;
            Ok(vec![out.to_path_buf()])
        }
        OutputFormat::Plotdata => {
            let files = render_plotdata(bundle)?;
            std::fs::create_dir_all(out)?;
            let mut written = Vec::with_capacity(files.len());
            for (name, text) in files {
                let p = out.join(name);
                std::fs::write(&p, text)?;
                written.push(p);
            }
            Ok(written)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_examples() {
        let ok = parse_spec(r#"{"inputs":[{"family":"gevrey","params":{"s":1},"horizon":256}],"conditions":["mg_battery"]}"#)
            .unwrap();
        assert_eq!(ok.inputs.len(), 1);
        assert_eq!(ok.conditions[0].condition, AnalysisCondition::MgBattery);

        let err = parse_spec(r#"{"inputs":[{"family":"nope"}]}"#).unwrap_err();
        assert!(err.is_schema());
        assert!(err.to_string().contains("unknown family 'nope'"), "{err}");
        assert!(err.to_string().contains("/inputs/0/family"), "{err}");

        let ce = parse_spec(r#"{"inputs":[{"counterexample":{"levels":8,"variant":["minimal"]}}],"conditions":["genmg"]}"#)
            .unwrap();
        assert!(matches!(
            ce.inputs[0],
            InputSpec::Counterexample { levels: 8, .. }
        ));
    }

    #[test]
    fn schema_errors_are_collected_with_paths() {
        let err = parse_spec(
            r#"{"inputs":[{"family":"gevrey","params":{"s":1},"horizon":2},{"log_power":{"s":0.5}}],
               "conditions":["mg_battery","nope",{"id":"beta_gamma","R":3}],"extra":1}"#,
        )
        .unwrap_err();
        let Error::Schema(list) = err else {
            panic!("expected schema errors")
        };
        let paths: Vec<&str> = list.0.iter().map(|e| e.path.as_str()).collect();
        for p in [
            "/extra",
            "/inputs/0/horizon",
            "/inputs/1/log_power/s",
            "/conditions/1",
            "/conditions/2/R",
        ] {
            assert!(paths.contains(&p), "{p} missing from {paths:?}");
        }
    }

    #[test]
    fn inapplicable_condition_is_a_schema_error() {
        let err = parse_spec(r#"{"inputs":[{"log_power":{"s":2}}],"conditions":["mg_battery"]}"#)
            .unwrap_err();
        assert!(err.is_schema());
    }

    #[test]
    fn empty_condition_list_gives_empty_bundle() {
        let spec =
            parse_spec(r#"{"inputs":[{"family":"gevrey","params":{"s":1}}],"conditions":[]}"#)
                .unwrap();
        assert!(run_analysis(&spec).unwrap().is_empty());
    }

    #[test]
    fn spec_round_trip() {
        let text = r#"{"inputs":[{"family":"q_gevrey","params":{"q":2,"n":2},"horizon":64},
            {"counterexample":{"levels":5,"variant":["strong_b"],"b1":2}},
            {"log_power":{"s":2},"horizon":32},
            {"label":"x","log_values":[0,0,1,3,6,10]},
            {"breakpoints":[0,1,4],"slopes":[1,3],"variant":["minimal"]}],
            "conditions":["weight_conditions",{"id":"condv_propagation","Q":3,"beta":0.5}],
            "horizon":128,"d_max":4,"grid":[1,2],"output":{"format":"csv","path":"o.csv"}}"#;
        let a = parse_spec(text).unwrap();
        let again = parse_spec(&a.to_json().to_string()).unwrap();
        assert_eq!(a.to_json(), again.to_json());
        assert_eq!(again.conditions[1].params["Q"], 3.0);
        assert_eq!(
            again.output,
            Some(OutputSpec {
                format: OutputFormat::Csv,
                path: Some("o.csv".into())
            })
        );
    }

    #[test]
    fn round_significant_keeps_twelve_digits() {
        assert_eq!(round_significant(0.1 + 0.2), 0.3);
        assert_eq!(round_significant(1.0 / 7.0), 0.142857142857);
        assert_eq!(format_float(f64::INFINITY), "inf");
    }

    #[test]
    fn bundle_json_round_trip_keeps_infinities() {
        let spec = parse_spec(
            r#"{"inputs":[{"counterexample":{"levels":6}}],"conditions":["genmg"],"d_max":2}"#,
        )
        .unwrap();
        let bundle = run_analysis(&spec).unwrap();
        let text = render_json(&bundle).unwrap();
        let back = parse_bundle(&text).unwrap();
        let g = &back["counterexample(J=6,minimal)"]["genmg"];
        assert_eq!(g.constant("g"), Some(f64::INFINITY));
        assert_eq!(render_json(&back).unwrap(), text);
    }
}
