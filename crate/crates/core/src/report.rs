//! Condition reports and the finite-horizon verdict convention.
//!
//! Every growth condition handled by this crate is asymptotic, so a verdict is
//! always relative to the horizon it was computed on. Sup-type conditions
//! ("there is a constant C such that ...") are judged from the prefix-optimal
//! constant evaluated on a prefix schedule (dyadic by default): the increments
//! of that nondecreasing series are either dying out (the constant is
//! converging: `HoldsOnHorizon`) or not (`FailsOnHorizon`).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Relative size below which two consecutive prefix constants count as equal.
pub const PLATEAU_REL_TOL: f64 = 1e-6;
/// Growth-jump ratio at or above which the constant is declared divergent.
pub const DIVERGENT_RATIO: f64 = 1.0 - 1e-3;
/// Growth-jump ratio at or below which the constant is declared convergent.
pub const CONVERGENT_RATIO: f64 = 0.9;
/// Multiplicative margin used for strict inequalities such as `liminf > Q`.
pub const STRICT_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    HoldsOnHorizon,
    FailsOnHorizon,
    Inconclusive,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::HoldsOnHorizon
    }

    pub fn fails(self) -> bool {
        self == Verdict::FailsOnHorizon
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::HoldsOnHorizon
        } else {
            Verdict::FailsOnHorizon
        }
    }

    /// Conjunction: fails if any fails, inconclusive if any is, else holds.
    pub fn all<I: IntoIterator<Item = Verdict>>(it: I) -> Verdict {
        let mut out = Verdict::HoldsOnHorizon;
        for v in it {
            match v {
                Verdict::FailsOnHorizon => return Verdict::FailsOnHorizon,
                Verdict::Inconclusive => out = Verdict::Inconclusive,
                Verdict::HoldsOnHorizon => {}
            }
        }
        out
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::HoldsOnHorizon => "HoldsOnHorizon",
            Verdict::FailsOnHorizon => "FailsOnHorizon",
            Verdict::Inconclusive => "Inconclusive",
        })
    }
}

/// Roumieu (witness index above the source) or Beurling (below).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MatrixVariant {
    Roumieu,
    Beurling,
}

impl MatrixVariant {
    pub fn tag(self) -> &'static str {
        match self {
            MatrixVariant::Roumieu => "R",
            MatrixVariant::Beurling => "B",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MgLevel {
    I,
    II,
    III,
    IV,
    V,
}

impl MgLevel {
    pub const ALL: [MgLevel; 5] = [
        MgLevel::I,
        MgLevel::II,
        MgLevel::III,
        MgLevel::IV,
        MgLevel::V,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            MgLevel::I => "I",
            MgLevel::II => "II",
            MgLevel::III => "III",
            MgLevel::IV => "IV",
            MgLevel::V => "V",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationMode {
    Roumieu,
    Beurling,
    QuotientRoumieu,
    QuotientBeurling,
}

impl RelationMode {
    pub fn tag(self) -> &'static str {
        match self {
            RelationMode::Roumieu => "roumieu",
            RelationMode::Beurling => "beurling",
            RelationMode::QuotientRoumieu => "quotient-roumieu",
            RelationMode::QuotientBeurling => "quotient-beurling",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "roumieu" => RelationMode::Roumieu,
            "beurling" => RelationMode::Beurling,
            "quotient-roumieu" => RelationMode::QuotientRoumieu,
            "quotient-beurling" => RelationMode::QuotientBeurling,
            _ => return None,
        })
    }
}

/// Identifier of a checked property. Serialized as a short string tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConditionId {
    Lc,
    Compare,
    MgI,
    MgII,
    MgIII,
    MgIV,
    MgV,
    MgVI,
    MgCoincide,
    Dc,
    MuAlmost,
    Quasianalytic,
    Beta1,
    Beta3,
    Condv,
    Gamma1,
    Genmg,
    Equlemma,
    Admissibility,
    Om1,
    Om3,
    Om4,
    Om6,
    StrongNq,
    MatrixMg(MatrixVariant, MgLevel),
    Rstrange,
    Bstrange,
    Relation(RelationMode),
    QuotientIdentities,
    CondvPropagation,
    DoublingIndexMg,
    OmegaSandwich,
    ShiftQuotient,
    Schedule,
    WitnessDivergence,
}

impl ConditionId {
    pub fn tag(&self) -> String {
        let s = match self {
            ConditionId::Lc => "lc",
            ConditionId::Compare => "compare",
            ConditionId::MgI => "mg_i",
            ConditionId::MgII => "mg_ii",
            ConditionId::MgIII => "mg_iii",
            ConditionId::MgIV => "mg_iv",
            ConditionId::MgV => "mg_v",
            ConditionId::MgVI => "mg_vi",
            ConditionId::MgCoincide => "mg_coincide",
            ConditionId::Dc => "dc",
            ConditionId::MuAlmost => "mualmost",
            ConditionId::Quasianalytic => "quasianalytic",
            ConditionId::Beta1 => "beta1",
            ConditionId::Beta3 => "beta3",
            ConditionId::Condv => "condv",
            ConditionId::Gamma1 => "gamma1",
            ConditionId::Genmg => "genmg",
            ConditionId::Equlemma => "equlemma",
            ConditionId::Admissibility => "admissibility",
            ConditionId::Om1 => "om1",
            ConditionId::Om3 => "om3",
            ConditionId::Om4 => "om4",
            ConditionId::Om6 => "om6",
            ConditionId::StrongNq => "strong_nq",
            ConditionId::MatrixMg(v, l) => return format!("matrix_mg_{}_{}", l.tag(), v.tag()),
            ConditionId::Rstrange => "rstrange",
            ConditionId::Bstrange => "bstrange",
            ConditionId::Relation(m) => return format!("relation_{}", m.tag()),
            ConditionId::QuotientIdentities => "quotient_identities",
            ConditionId::CondvPropagation => "condv_propagation",
            ConditionId::DoublingIndexMg => "doubling_index_mg",
            ConditionId::OmegaSandwich => "omega_sandwich",
            ConditionId::ShiftQuotient => "shift_quotient",
            ConditionId::Schedule => "schedule",
            ConditionId::WitnessDivergence => "witness_divergence",
        };
        s.to_string()
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for ConditionId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        use ConditionId::*;
        let simple = [
            Lc,
            Compare,
            MgI,
            MgII,
            MgIII,
            MgIV,
            MgV,
            MgVI,
            MgCoincide,
            Dc,
            MuAlmost,
            Quasianalytic,
            Beta1,
            Beta3,
            Condv,
            Gamma1,
            Genmg,
            Equlemma,
            Admissibility,
            Om1,
            Om3,
            Om4,
            Om6,
            StrongNq,
            Rstrange,
            Bstrange,
            QuotientIdentities,
            CondvPropagation,
            DoublingIndexMg,
            OmegaSandwich,
            ShiftQuotient,
            Schedule,
            WitnessDivergence,
        ];
        if let Some(id) = simple.iter().find(|id| id.tag() == s) {
            return Ok(*id);
        }
        if let Some(rest) = s.strip_prefix("relation_") {
            return RelationMode::parse(rest)
                .map(Relation)
                .ok_or_else(|| format!("unknown condition-id '{s}'"));
        }
        if let Some(rest) = s.strip_prefix("matrix_mg_") {
            let (level, variant) = rest
                .rsplit_once('_')
                .ok_or_else(|| format!("unknown condition-id '{s}'"))?;
            let level = MgLevel::ALL
                .iter()
                .find(|l| l.tag() == level)
                .ok_or_else(|| format!("unknown condition-id '{s}'"))?;
            let variant = match variant {
                "R" => MatrixVariant::Roumieu,
                "B" => MatrixVariant::Beurling,
                _ => return Err(format!("unknown condition-id '{s}'")),
            };
            return Ok(MatrixMg(variant, *level));
        }
        Err(format!("unknown condition-id '{s}'"))
    }
}

impl Serialize for ConditionId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.tag())
    }
}

impl<'de> Deserialize<'de> for ConditionId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `f64` that serializes non-finite values as the strings `"inf"`, `"-inf"`
/// and `"nan"`, which JSON cannot represent as numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JsonFloat(pub f64);

impl Serialize for JsonFloat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_finite() {
            s.serialize_f64(x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for JsonFloat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(JsonFloat(x)),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(JsonFloat(f64::INFINITY)),
                "-inf" => Ok(JsonFloat(f64::NEG_INFINITY)),
                "nan" => Ok(JsonFloat(f64::NAN)),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number, got '{other}'"
                ))),
            },
        }
    }
}

mod float_map {
    use super::JsonFloat;
    use serde::{Deserialize, Deserializer, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(m.iter().map(|(k, v)| (k, JsonFloat(*v))))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        let m = BTreeMap::<String, JsonFloat>::deserialize(d)?;
        Ok(m.into_iter().map(|(k, v)| (k, v.0)).collect())
    }
}

mod float_pairs {
    use super::JsonFloat;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[(f64, f64)], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|&(a, b)| (JsonFloat(a), JsonFloat(b))))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(f64, f64)>, D::Error> {
        let v = Vec::<(JsonFloat, JsonFloat)>::deserialize(d)?;
        Ok(v.into_iter().map(|(a, b)| (a.0, b.0)).collect())
    }
}

/// Verdict plus the evidence it was derived from.
///
/// `witness_series` holds `(prefix, value)` pairs. For sup-type conditions the
/// value is the natural log of the prefix-optimal constant (constants such as
/// `C` in `M_{p+q} <= C^{p+q} M_p M_q` overflow any linear-scale float for
/// fast-growing sequences). `constants` uses the same log convention for keys
/// prefixed with `log_`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: ConditionId,
    pub verdict: Verdict,
    #[serde(default, with = "float_map")]
    pub constants: BTreeMap<String, f64>,
    #[serde(default, with = "float_pairs")]
    pub witness_series: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sub_reports: Vec<ConditionReport>,
}

impl ConditionReport {
    pub fn new(condition: ConditionId, verdict: Verdict) -> Self {
        ConditionReport {
            condition,
            verdict,
            constants: BTreeMap::new(),
            witness_series: Vec::new(),
            witness_index: None,
            window: None,
            notes: Vec::new(),
            sub_reports: Vec::new(),
        }
    }

    pub fn with_constant(mut self, key: &str, value: f64) -> Self {
        self.constants.insert(key.to_string(), value);
        self
    }

    pub fn with_series(mut self, series: Vec<(f64, f64)>) -> Self {
        self.witness_series = series;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn constant(&self, key: &str) -> Option<f64> {
        self.constants.get(key).copied()
    }

    pub fn sub(&self, id: ConditionId) -> Option<&ConditionReport> {
        self.sub_reports.iter().find(|r| r.condition == id)
    }

    /// Value of the witness series at its last prefix.
    pub fn last_value(&self) -> Option<f64> {
        self.witness_series.last().map(|&(_, v)| v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Bounded,
    Divergent,
    Unclear,
}

impl Trend {
    pub fn sup_verdict(self) -> Verdict {
        match self {
            Trend::Bounded => Verdict::HoldsOnHorizon,
            Trend::Divergent => Verdict::FailsOnHorizon,
            Trend::Unclear => Verdict::Inconclusive,
        }
    }
}

/// Classifies a nondecreasing series of prefix values.
///
/// Increments between consecutive prefixes below `PLATEAU_REL_TOL` (relative)
/// count as flat. With the positive increments ("jumps") in hand:
/// no jump, or a single jump followed by a flat tail, is bounded; otherwise the
/// ratio of the last jump to the one before decides: `>= DIVERGENT_RATIO` means
/// the growth is not dying out, `<= CONVERGENT_RATIO` means it decays at least
/// geometrically, anything in between is unclear.
pub fn classify_growth(values: &[f64]) -> Trend {
    if values.iter().any(|v| v.is_infinite() && *v > 0.0) {
        return Trend::Divergent;
    }
    if values.len() < 2 {
        return Trend::Unclear;
    }
    let jumps: Vec<(usize, f64)> = values
        .windows(2)
        .enumerate()
        .filter_map(|(i, w)| {
            let inc = w[1] - w[0];
            let scale = w[0].abs().max(w[1].abs()).max(1.0);
            (inc > PLATEAU_REL_TOL * scale).then_some((i + 1, inc))
        })
        .collect();
    let last_flat = jumps.last().is_none_or(|&(i, _)| i < values.len() - 1);
    match jumps.len() {
        0 => Trend::Bounded,
        1 => {
            if last_flat {
                Trend::Bounded
            } else {
                Trend::Unclear
            }
        }
        n => {
            let r = jumps[n - 1].1 / jumps[n - 2].1;
            if r >= DIVERGENT_RATIO {
                Trend::Divergent
            } else if r <= CONVERGENT_RATIO {
                Trend::Bounded
            } else {
                Trend::Unclear
            }
        }
    }
}

/// [`classify_growth`] for a series of logarithms of constants.
///
/// A flat log series is bounded outright; otherwise the decision is taken on the
/// constants themselves, where polynomial growth shows up as growing jumps
/// rather than as the constant jumps of its logarithm. Overflow to `+inf`
/// counts as divergence.
pub fn classify_log_growth(log_values: &[f64]) -> Trend {
    if log_values.len() >= 2 && classify_growth(log_values) == Trend::Bounded {
        let flat = log_values
            .windows(2)
            .all(|w| w[1] - w[0] <= PLATEAU_REL_TOL * w[0].abs().max(w[1].abs()).max(1.0));
        if flat {
            return Trend::Bounded;
        }
    }
    let linear: Vec<f64> = log_values.iter().map(|v| v.exp()).collect();
    classify_growth(&linear)
}

/// Prefix schedule `ceil(end / 2^k)`, `k = ..., 2, 1, 0`, ascending: every
/// prefix is (up to rounding) twice the previous one and the last is `end`.
pub fn dyadic_prefixes(end: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut p = end;
    while p >= 1 {
        out.push(p);
        if p == 1 {
            break;
        }
        p = p.div_ceil(2);
    }
    out.reverse();
    out
}

/// `count` dyadic prefixes `end / 2^(count-1), ..., end / 2, end` of a real range.
pub fn dyadic_prefixes_f64(end: f64, count: usize) -> Vec<f64> {
    (0..count)
        .rev()
        .map(|j| end / 2f64.powi(j as i32))
        .collect()
}

/// Running maximum of `profile[first..=prefix]` at each prefix of the schedule.
/// Entries equal to `NEG_INFINITY` are ignored; a prefix with no entry yet
/// reports `NEG_INFINITY`.
pub fn prefix_max_series(profile: &[f64], first: usize, prefixes: &[usize]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(prefixes.len());
    let mut best = f64::NEG_INFINITY;
    let mut next = first;
    for &end in prefixes {
        while next <= end && next < profile.len() {
            best = best.max(profile[next]);
            next += 1;
        }
        out.push((end as f64, best));
    }
    out
}

/// Index (>= `first`) of the largest profile entry, ties to the smallest index.
pub fn argmax_from(profile: &[f64], first: usize) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in profile.iter().enumerate().skip(first) {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Builds a sup-type report: witness series from the running max of `profile`
/// on the dyadic schedule up to `end`, verdict from [`classify_log_growth`].
pub fn sup_report(
    condition: ConditionId,
    constant_name: &str,
    profile: &[f64],
    first: usize,
    end: usize,
) -> ConditionReport {
    let prefixes: Vec<usize> = dyadic_prefixes(end)
        .into_iter()
        .filter(|&p| p >= first)
        .collect();
    let series = prefix_max_series(profile, first, &prefixes);
    let values: Vec<f64> = series
        .iter()
        .map(|&(_, v)| v)
        .filter(|v| v.is_finite() || *v > 0.0)
        .collect();
    let trend = classify_log_growth(&values);
    let last = series.last().map_or(f64::NEG_INFINITY, |&(_, v)| v);
    let mut report = ConditionReport::new(condition, trend.sup_verdict())
        .with_constant(&format!("log_{constant_name}"), last)
        .with_series(series);
    report.witness_index = argmax_from(&profile[..profile.len().min(end + 1)], first);
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_series_is_bounded() {
        assert_eq!(classify_growth(&[0.0, 0.0, 0.0, 0.0]), Trend::Bounded);
    }

    #[test]
    fn geometric_growth_is_divergent() {
        let v: Vec<f64> = (0..8).map(|k| 2f64.powi(k)).collect();
        assert_eq!(classify_growth(&v), Trend::Divergent);
    }

    #[test]
    fn shrinking_increments_are_bounded() {
        let v: Vec<f64> = (0..10).map(|k| 2.0 - 0.5f64.powi(k)).collect();
        assert_eq!(classify_growth(&v), Trend::Bounded);
    }

    #[test]
    fn linear_growth_is_divergent() {
        let v: Vec<f64> = (0..10).map(|k| k as f64).collect();
        assert_eq!(classify_growth(&v), Trend::Divergent);
    }

    #[test]
    fn sparse_growing_jumps_are_divergent() {
        assert_eq!(
            classify_growth(&[1.0, 1.0, 3.0, 3.0, 3.0, 8.0, 8.0, 8.0, 8.0]),
            Trend::Divergent
        );
    }

    #[test]
    fn single_jump_then_flat_is_bounded() {
        assert_eq!(classify_growth(&[0.0, 1.0, 1.0, 1.0]), Trend::Bounded);
        assert_eq!(classify_growth(&[0.0, 0.0, 0.0, 1.0]), Trend::Unclear);
    }

    #[test]
    fn dyadic_schedule_ends_at_horizon() {
        assert_eq!(dyadic_prefixes(12), vec![1, 2, 3, 6, 12]);
        assert_eq!(dyadic_prefixes(16), vec![1, 2, 4, 8, 16]);
        assert_eq!(dyadic_prefixes(8), vec![1, 2, 4, 8]);
    }

    #[test]
    fn condition_ids_round_trip() {
        for id in [
            ConditionId::MgIII,
            ConditionId::MatrixMg(MatrixVariant::Beurling, MgLevel::IV),
            ConditionId::Relation(RelationMode::QuotientRoumieu),
            ConditionId::StrongNq,
        ] {
            assert_eq!(id.tag().parse::<ConditionId>().unwrap(), id);
        }
        assert!("nope".parse::<ConditionId>().is_err());
    }

    #[test]
    fn conjunction_of_verdicts() {
        use Verdict::*;
        assert_eq!(
            Verdict::all([HoldsOnHorizon, HoldsOnHorizon]),
            HoldsOnHorizon
        );
        assert_eq!(Verdict::all([HoldsOnHorizon, Inconclusive]), Inconclusive);
        assert_eq!(Verdict::all([Inconclusive, FailsOnHorizon]), FailsOnHorizon);
    }
}
