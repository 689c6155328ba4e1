//! Weight matrices: associated matrices `W^(l)_p = exp(phi*(l p) / l)`, the
//! shifted matrix `(M^(x)_{4p})^{1/4}`, the union of both, and matrix-level
//! order relations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::assoc::{AssociatedFunction, WeightFunction};
use crate::error::{Error, Result};
use crate::report::{
    classify_log_growth, dyadic_prefixes, prefix_max_series, ConditionId, ConditionReport,
    RelationMode, Verdict,
};
use crate::sequence::{compare, WeightSequence};

/// Default index grid `{2^k : -4 <= k <= 4}`.
pub fn dyadic_grid() -> Vec<f64> {
    (-4..=4).map(|k| 2f64.powi(k)).collect()
}

/// Identity tolerance for log-domain comparisons, scaled by `max(1, |value|)`.
pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixOrigin {
    #[serde(rename = "from-omega")]
    FromOmega,
    #[serde(rename = "from-sequence")]
    FromSequence,
    #[serde(rename = "shifted")]
    Shifted,
    #[serde(rename = "union")]
    Union,
}

impl MatrixOrigin {
    pub fn tag(self) -> &'static str {
        match self {
            MatrixOrigin::FromOmega => "from-omega",
            MatrixOrigin::FromSequence => "from-sequence",
            MatrixOrigin::Shifted => "shifted",
            MatrixOrigin::Union => "union",
        }
    }
}

/// Members `M^(x)` for a sorted index grid, all on a common horizon.
///
/// Indices of a union may repeat: the shifted copy of a member follows the
/// original at the same index.
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    indices: Vec<f64>,
    horizon: usize,
    members: Vec<WeightSequence>,
    shifted_flags: Vec<bool>,
    origin: MatrixOrigin,
    weight: Option<WeightFunction>,
}

impl WeightMatrix {
    /// Matrix from explicit members; sorted by index.
    pub fn from_members(
        indices: Vec<f64>,
        members: Vec<WeightSequence>,
        origin: MatrixOrigin,
    ) -> Result<Self> {
        if indices.is_empty() || members.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        if indices.len() != members.len() {
            return Err(Error::InvalidSequence(format!(
                "{} indices but {} members",
                indices.len(),
                members.len()
            )));
        }
        if let Some(&x) = indices.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::param("index", x, "indices must be positive"));
        }
        let horizon = members[0].horizon();
        if let Some(m) = members.iter().find(|m| m.horizon() != horizon) {
            return Err(Error::HorizonMismatch(horizon, m.horizon()));
        }
        let mut pairs: Vec<(f64, WeightSequence)> = indices.into_iter().zip(members).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let (indices, members): (Vec<f64>, Vec<WeightSequence>) = pairs.into_iter().unzip();
        let n = indices.len();
        Ok(WeightMatrix {
            indices,
            horizon,
            members,
            shifted_flags: vec![origin == MatrixOrigin::Shifted; n],
            origin,
            weight: None,
        })
    }

    /// The constant matrix `{M}` at index 1.
    pub fn singleton(seq: WeightSequence) -> Self {
        WeightMatrix {
            indices: vec![1.0],
            horizon: seq.horizon(),
            members: vec![seq],
            shifted_flags: vec![false],
            origin: MatrixOrigin::FromSequence,
            weight: None,
        }
    }

    pub fn indices(&self) -> &[f64] {
        &self.indices
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn members(&self) -> &[WeightSequence] {
        &self.members
    }

    pub fn origin(&self) -> MatrixOrigin {
        self.origin
    }

    /// The weight function a from-omega matrix was built from.
    pub fn weight(&self) -> Option<&WeightFunction> {
        self.weight.as_ref()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// First member with the given index.
    pub fn member(&self, x: f64) -> Option<&WeightSequence> {
        self.position(x).map(|i| &self.members[i])
    }

    fn position(&self, x: f64) -> Option<usize> {
        self.indices
            .iter()
            .position(|&y| (y - x).abs() <= 1e-12 * x.abs().max(1.0))
    }

    pub fn truncated(&self, horizon: usize) -> Result<Self> {
        let members = self
            .members
            .iter()
            .map(|m| m.truncated(horizon))
            .collect::<Result<Vec<_>>>()?;
        Ok(WeightMatrix {
            indices: self.indices.clone(),
            horizon,
            members,
            shifted_flags: self.shifted_flags.clone(),
            origin: self.origin,
            weight: self.weight.clone(),
        })
    }

    /// `log M^(x)_p <= log M^(y)_p` for `x <= y` and all `p`.
    pub fn is_pointwise_ordered(&self) -> bool {
        self.members.windows(2).all(|w| {
            (0..=self.horizon).all(|p| {
                w[0].log_value(p)
                    <= w[1].log_value(p) + IDENTITY_TOL * w[1].log_value(p).abs().max(1.0)
            })
        })
    }

    /// `log mu^(x)_p <= log mu^(y)_p` for `x <= y` and all `p`.
    pub fn is_quotient_ordered(&self) -> bool {
        self.members.windows(2).all(|w| {
            (1..=self.horizon).all(|p| {
                let (a, b) = (w[0].log_quotient(p), w[1].log_quotient(p));
                a <= b + IDENTITY_TOL * b.abs().max(1.0)
            })
        })
    }

    /// JSON document `{"indices", "horizon", "members": {index -> log values}, "origin"}`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut members = BTreeMap::new();
        for (i, (x, m)) in self.indices.iter().zip(&self.members).enumerate() {
            let mut key = index_key(*x);
            if self.shifted_flags[i] && self.origin == MatrixOrigin::Union {
                key.push('~');
            }
            members.insert(key, m.log_values().to_vec());
        }
        serde_json::json!({
            "indices": self.indices,
            "horizon": self.horizon,
            "members": members,
            "origin": self.origin,
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            horizon: usize,
            members: BTreeMap<String, Vec<f64>>,
            origin: MatrixOrigin,
        }
        let doc: Doc = serde_json::from_value(value.clone())?;
        let mut entries = Vec::new();
        for (key, values) in doc.members {
            let (raw, shifted) = match key.strip_suffix('~') {
                Some(k) => (k.to_string(), true),
                None => (key.clone(), false),
            };
            let x: f64 = raw.parse().map_err(|_| {
                Error::InvalidSequence(format!("matrix member key '{key}' is not an index"))
            })?;
            let seq = WeightSequence::from_log_values(format!("M^({raw})"), values)?;
            if seq.horizon() != doc.horizon {
                return Err(Error::HorizonMismatch(doc.horizon, seq.horizon()));
            }
            entries.push((x, shifted, seq));
        }
        if entries.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        Ok(WeightMatrix {
            indices: entries.iter().map(|e| e.0).collect(),
            horizon: doc.horizon,
            shifted_flags: entries.iter().map(|e| e.1).collect(),
            members: entries.into_iter().map(|e| e.2).collect(),
            origin: doc.origin,
            weight: None,
        })
    }
}

/// Shortest decimal rendering of an index, used as a JSON key.
pub fn index_key(x: f64) -> String {
    format!("{x}")
}

/// Members `log W^(l)_p = phi*(l p) / l` for each grid index `l`.
pub fn build_associated_matrix(
    w: &WeightFunction,
    indices: &[f64],
    horizon: usize,
) -> Result<WeightMatrix> {
    if indices.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    if horizon < 2 {
        return Err(Error::HorizonTooSmall {
            got: horizon,
            need: 2,
        });
    }
    let mut grid: Vec<f64> = indices.to_vec();
    if let Some(&x) = grid.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::param("index", x, "indices must be positive"));
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    let max_index = *grid.last().unwrap();
    let need = max_index * horizon as f64;
    if need > w.conjugate_range() * (1.0 + 1e-12) {
        return Err(Error::OutOfExactRange {
            what: "max index * horizon",
            value: need,
            limit: w.conjugate_range(),
        });
    }
    let label = w.label();
    let members = grid
        .iter()
        .map(|&l| {
            let values = (0..=horizon)
                .map(|p| {
                    if p == 0 {
                        Ok(0.0)
                    } else {
                        Ok(w.conjugate((l * p as f64).min(w.conjugate_range()))? / l)
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            WeightSequence::from_log_values(format!("W^({})[{label}]", index_key(l)), values)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = grid.len();
    Ok(WeightMatrix {
        indices: grid,
        horizon,
        members,
        shifted_flags: vec![false; n],
        origin: MatrixOrigin::FromOmega,
        weight: Some(w.clone()),
    })
}

fn shift_member(m: &WeightSequence) -> Result<WeightSequence> {
    let h = m.horizon() / 4;
    let values = (0..=h).map(|p| 0.25 * m.log_value(4 * p)).collect();
    WeightSequence::from_log_values(format!("~{}", m.label()), values)
}

/// `log M~^(x)_p = (1/4) log M^(x)_{4p}` on horizon `floor(P/4)`.
pub fn shifted_matrix(m: &WeightMatrix) -> Result<WeightMatrix> {
    if m.horizon < 8 {
        return Err(Error::HorizonTooSmall {
            got: m.horizon,
            need: 8,
        });
    }
    let members = m
        .members
        .iter()
        .map(shift_member)
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightMatrix {
        indices: m.indices.clone(),
        horizon: m.horizon / 4,
        members,
        shifted_flags: vec![true; m.len()],
        origin: MatrixOrigin::Shifted,
        weight: None,
    })
}

/// `M ∪ M~` on horizon `floor(P/4)`.
///
/// For from-omega matrices `M~^(x) = W^(4x)`, so shifted members are
/// re-indexed to `4x` and dropped where `4x` is already on the grid.
pub fn mg_union(m: &WeightMatrix) -> Result<WeightMatrix> {
    let shifted = shifted_matrix(m)?;
    let base = m.truncated(shifted.horizon)?;
    let mut entries: Vec<(f64, bool, WeightSequence)> = base
        .indices
        .iter()
        .zip(base.members)
        .map(|(&x, s)| (x, false, s))
        .collect();
    let from_omega = m.origin == MatrixOrigin::FromOmega;
    for (&x, s) in shifted.indices.iter().zip(shifted.members) {
        if from_omega {
            let y = 4.0 * x;
            if base.indices.iter().any(|&z| (z - y).abs() <= 1e-12 * y) {
                continue;
            }
            entries.push((y, false, s));
        } else {
            entries.push((x, true, s));
        }
    }
    entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    Ok(WeightMatrix {
        indices: entries.iter().map(|e| e.0).collect(),
        horizon: shifted.horizon,
        shifted_flags: entries.iter().map(|e| e.1).collect(),
        members: entries.into_iter().map(|e| e.2).collect(),
        origin: MatrixOrigin::Union,
        weight: None,
    })
}

/// Positions of the source indices used by mixed (source, witness) checks.
///
/// On a finite grid the largest (Roumieu) resp. smallest (Beurling) indices
/// have no room above resp. below them for a witness, so sources are limited
/// to those with a factor-4 span of witnesses available. Small grids use every
/// index.
pub(crate) fn source_positions(indices: &[f64], roumieu: bool) -> Vec<usize> {
    let (lo, hi) = (indices[0], *indices.last().unwrap());
    let picked: Vec<usize> = (0..indices.len())
        .filter(|&i| {
            let x = indices[i];
            if roumieu {
                4.0 * x <= hi * (1.0 + 1e-12)
            } else {
                x / 4.0 >= lo * (1.0 - 1e-12)
            }
        })
        .collect();
    if picked.is_empty() {
        (0..indices.len()).collect()
    } else {
        picked
    }
}

/// `sup_p (log mu_p - log nu_p)` as a prefix series report.
pub fn quotient_compare(m: &WeightSequence, n: &WeightSequence) -> Result<ConditionReport> {
    if m.horizon() != n.horizon() {
        return Err(Error::HorizonMismatch(m.horizon(), n.horizon()));
    }
    let h = m.horizon();
    let mut profile = vec![f64::NEG_INFINITY; h + 1];
    for p in 1..=h {
        profile[p] = m.log_quotient(p) - n.log_quotient(p);
    }
    let series = prefix_max_series(&profile, 1, &dyadic_prefixes(h));
    let values: Vec<f64> = series.iter().map(|s| s.1).collect();
    let trend = classify_log_growth(&values);
    let mut r = ConditionReport::new(ConditionId::Compare, trend.sup_verdict())
        .with_constant("log_A", *values.last().unwrap())
        .with_series(series)
        .with_note(format!("quotients of {} vs {}", m.label(), n.label()));
    r.witness_index = crate::report::argmax_from(&profile, 1);
    Ok(r)
}

/// One direction of a matrix relation: `a {<=} b` (Roumieu: for every `x`
/// some `b^(y)` dominates `a^(x)`) or `a (<=) b` (Beurling: for every `x`
/// some `a^(y)` is dominated by `b^(x)`).
pub fn matrix_order(
    a: &WeightMatrix,
    b: &WeightMatrix,
    mode: RelationMode,
) -> Result<ConditionReport> {
    if a.horizon != b.horizon {
        return Err(Error::HorizonMismatch(a.horizon, b.horizon));
    }
    let roumieu = matches!(mode, RelationMode::Roumieu | RelationMode::QuotientRoumieu);
    let quotient = matches!(
        mode,
        RelationMode::QuotientRoumieu | RelationMode::QuotientBeurling
    );
    let (sources, targets) = if roumieu { (a, b) } else { (b, a) };
    let check = |small: &WeightSequence, big: &WeightSequence| -> Result<ConditionReport> {
        if quotient {
            quotient_compare(small, big)
        } else {
            compare(small, big)
        }
    };
    let mut report = ConditionReport::new(ConditionId::Relation(mode), Verdict::HoldsOnHorizon);
    let mut verdicts = Vec::new();
    for i in source_positions(&sources.indices, roumieu) {
        let x = sources.indices[i];
        let mut best: Option<(f64, ConditionReport)> = None;
        let mut found = None;
        for (j, &y) in targets.indices.iter().enumerate() {
            let r = if roumieu {
                check(&sources.members[i], &targets.members[j])?
            } else {
                check(&targets.members[j], &sources.members[i])?
            };
            if r.verdict.holds() {
                found = Some((y, r));
                break;
            }
            let score = r.last_value().unwrap_or(f64::INFINITY);
            if best
                .as_ref()
                .is_none_or(|b| score < b.1.last_value().unwrap_or(f64::INFINITY))
            {
                best = Some((y, r));
            }
        }
        let key = index_key(x);
        match found {
            Some((y, r)) => {
                report.constants.insert(format!("witness@{key}"), y);
                report
                    .sub_reports
                    .push(r.with_note(format!("source {key}: witness {}", index_key(y))));
                verdicts.push(Verdict::HoldsOnHorizon);
            }
            None => {
                let (y, r) = best.expect("target grid is nonempty");
                let v = if r.verdict == Verdict::Inconclusive {
                    Verdict::Inconclusive
                } else {
                    Verdict::FailsOnHorizon
                };
                report.sub_reports.push(r.with_note(format!(
                    "source {key}: no witness, best candidate {}",
                    index_key(y)
                )));
                verdicts.push(v);
            }
        }
    }
    report.verdict = Verdict::all(verdicts);
    Ok(report)
}

/// Matrix equivalence for the given mode: `a <= b` and `b <= a`, each reported
/// as a sub-report.
pub fn matrix_relation(
    a: &WeightMatrix,
    b: &WeightMatrix,
    mode: RelationMode,
) -> Result<ConditionReport> {
    let forward = matrix_order(a, b, mode)?.with_note("forward");
    let backward = matrix_order(b, a, mode)?.with_note("backward");
    let verdict = Verdict::all([forward.verdict, backward.verdict]);
    let mut r = ConditionReport::new(ConditionId::Relation(mode), verdict);
    r.sub_reports = vec![forward, backward];
    Ok(r)
}

/// Base data `M = W^(1)` of a from-omega matrix on a larger horizon.
fn base_sequence(m: &WeightMatrix, horizon: usize) -> Result<WeightSequence> {
    match &m.weight {
        Some(WeightFunction::Associated(a)) => {
            let h = horizon.min(a.horizon());
            a.sequence().truncated(h)
        }
        Some(w) => {
            let values = (0..=horizon)
                .map(|p| w.conjugate(p as f64))
                .collect::<Result<Vec<_>>>()?;
            WeightSequence::from_log_values("W^(1)", values)
        }
        None => match m.member(1.0) {
            Some(s) => Ok(s.clone()),
            None => Err(Error::MissingIndex(1.0)),
        },
    }
}

/// Exact quotient identities of a from-omega matrix:
/// `mu^(x)_p = (mu_{xp-x+1} ... mu_{xp})^{1/x}` and `mu^(x)_p <= mu_{xp}` for
/// integer `x`, `mu^(1/y)_{yp} >= mu_p` for integer `y`, and
/// `mu^(cx)_p = (mu^(x)_{c(p-1)+1} ... mu^(x)_{cp})^{1/c}` whenever `x` and
/// `cx` are both on the grid.
pub fn quotient_identity_suite(m: &WeightMatrix, c: usize) -> Result<ConditionReport> {
    if m.origin != MatrixOrigin::FromOmega {
        return Err(Error::GridPattern(
            "quotient identities need a from-omega matrix".into(),
        ));
    }
    if c == 0 {
        return Err(Error::param("c", 0.0, "need c >= 1"));
    }
    let h = m.horizon;
    let max_int = m
        .indices
        .iter()
        .filter(|x| is_integer(**x))
        .fold(1.0f64, |a, &b| a.max(b)) as usize;
    let base = base_sequence(m, max_int * h)?;
    let mut identity_residual = 0.0f64;
    let mut upper_excess = f64::NEG_INFINITY;
    let mut lower_deficit = f64::NEG_INFINITY;
    let mut checked = 0usize;
    for (x, member) in m.indices.iter().zip(&m.members) {
        if is_integer(*x) {
            let xi = x.round() as usize;
            for p in 1..=h {
                if xi * p > base.horizon() {
                    break;
                }
                let lhs = member.log_quotient(p);
                let block: f64 = (xi * p - xi + 1..=xi * p)
                    .map(|k| base.log_quotient(k))
                    .sum::<f64>()
                    / xi as f64;
                identity_residual = identity_residual.max((lhs - block).abs() / lhs.abs().max(1.0));
                upper_excess =
                    upper_excess.max((lhs - base.log_quotient(xi * p)) / lhs.abs().max(1.0));
                checked += 1;
            }
        }
        let recip = 1.0 / x;
        if *x < 1.0 && is_integer(recip) {
            let y = recip.round() as usize;
            for p in 1..=h / y {
                if p > base.horizon() {
                    break;
                }
                let lhs = member.log_quotient(y * p);
                let rhs = base.log_quotient(p);
                lower_deficit = lower_deficit.max((rhs - lhs) / rhs.abs().max(1.0));
                checked += 1;
            }
        }
    }
    let mut cx_residual = 0.0f64;
    let mut pairs = 0usize;
    for (x, member) in m.indices.iter().zip(&m.members) {
        let Some(big) = m.member(c as f64 * x) else {
            continue;
        };
        pairs += 1;
        for p in 1..=h / c {
            let lhs = big.log_quotient(p);
            let rhs: f64 = (c * (p - 1) + 1..=c * p)
                .map(|k| member.log_quotient(k))
                .sum::<f64>()
                / c as f64;
            cx_residual = cx_residual.max((lhs - rhs).abs() / lhs.abs().max(1.0));
        }
    }
    if pairs == 0 {
        return Err(Error::MissingIndex(c as f64));
    }
    let ok = identity_residual <= IDENTITY_TOL
        && upper_excess <= IDENTITY_TOL
        && lower_deficit <= IDENTITY_TOL
        && cx_residual <= IDENTITY_TOL;
    Ok(
        ConditionReport::new(ConditionId::QuotientIdentities, Verdict::from_bool(ok))
            .with_constant("max_block_identity_residual", identity_residual)
            .with_constant("max_upper_bound_excess", upper_excess.max(0.0))
            .with_constant("max_lower_bound_deficit", lower_deficit.max(0.0))
            .with_constant("max_cx_identity_residual", cx_residual)
            .with_constant("c", c as f64)
            .with_constant("checked", checked as f64),
    )
}

pub(crate) fn is_integer(x: f64) -> bool {
    (x - x.round()).abs() <= 1e-12 * x.abs().max(1.0) && x >= 1.0 - 1e-12
}

/// `log W^(l)_{p+q} <= log W^(2l)_p + log W^(2l)_q` for every grid pair
/// `(l, 2l)` and all `p + q <= max_n`; reports the largest excess.
pub fn doubling_index_mg_check(m: &WeightMatrix, max_n: usize) -> ConditionReport {
    let n_max = max_n.min(m.horizon);
    let mut worst = f64::NEG_INFINITY;
    let mut pairs = 0;
    for (l, small) in m.indices.iter().zip(&m.members) {
        let Some(big) = m.member(2.0 * l) else {
            continue;
        };
        pairs += 1;
        for n in 1..=n_max {
            for p in 0..=n {
                let lhs = small.log_value(n);
                let rhs = big.log_value(p) + big.log_value(n - p);
                worst = worst.max((lhs - rhs) / lhs.abs().max(1.0));
            }
        }
    }
    let verdict = if pairs == 0 {
        Verdict::Inconclusive
    } else {
        Verdict::from_bool(worst <= IDENTITY_TOL)
    };
    ConditionReport::new(ConditionId::DoublingIndexMg, verdict)
        .with_constant("max_excess", worst)
        .with_constant("pairs", pairs as f64)
        .with_note("W^(l)_{p+q} <= W^(2l)_p W^(2l)_q")
}

/// `l omega_{W^(l)}(t) <= omega(t)` and `omega(t) <= 2l omega_{W^(l)}(t) + D_l`
/// on sampled `t` for each member; `D_l` is the smallest constant that works
/// on the samples.
pub fn omega_sandwich_check(m: &WeightMatrix, samples: usize) -> Result<ConditionReport> {
    let w = m
        .weight
        .as_ref()
        .ok_or_else(|| Error::GridPattern("sandwich check needs a from-omega matrix".into()))?;
    let mut report = ConditionReport::new(ConditionId::OmegaSandwich, Verdict::HoldsOnHorizon)
        .with_note("l omega_W(t) <= omega(t) <= 2l omega_W(t) + D_l");
    let mut all_ok = true;
    for (l, member) in m.indices.iter().zip(&m.members) {
        let af = AssociatedFunction::new(member.clone())?;
        let y_max = af.max_log_t().min(w.max_log_t());
        if !(y_max > 0.0) {
            continue;
        }
        let mut lower_excess = f64::NEG_INFINITY;
        let mut d = f64::NEG_INFINITY;
        for i in 1..=samples {
            let y = y_max * i as f64 / samples as f64;
            let om = w.phi(y)?;
            let om_l = af.omega_at_log(y)?;
            lower_excess = lower_excess.max(l * om_l - om);
            d = d.max(om - 2.0 * l * om_l);
        }
        let ok = lower_excess <= 1e-6 && d.is_finite();
        all_ok &= ok;
        let key = index_key(*l);
        report.constants.insert(format!("D@{key}"), d.max(0.0));
        report
            .constants
            .insert(format!("lower_excess@{key}"), lower_excess);
    }
    report.verdict = Verdict::from_bool(all_ok);
    Ok(report)
}

/// `mu^(x)_{2p} <= A mu~^(x)_p` for `2 <= p <= floor(P/4)` with
/// `A = max(1, mu^(x)_2 / mu~^(x)_1)`, for every member.
pub fn shift_quotient_check(m: &WeightMatrix) -> Result<ConditionReport> {
    let shifted = shifted_matrix(m)?;
    let mut worst = f64::NEG_INFINITY;
    let mut report = ConditionReport::new(ConditionId::ShiftQuotient, Verdict::HoldsOnHorizon)
        .with_note("mu_{2p} <= A mu~_p");
    for ((x, member), sh) in m.indices.iter().zip(&m.members).zip(&shifted.members) {
        let log_a = (member.log_quotient(2) - sh.log_quotient(1)).max(0.0);
        report
            .constants
            .insert(format!("log_A@{}", index_key(*x)), log_a);
        for p in 2..=sh.horizon() {
            let lhs = member.log_quotient(2 * p);
            let rhs = log_a + sh.log_quotient(p);
            worst = worst.max((lhs - rhs) / lhs.abs().max(1.0));
        }
    }
    report.verdict = Verdict::from_bool(worst <= IDENTITY_TOL);
    Ok(report.with_constant("max_excess", worst))
}
