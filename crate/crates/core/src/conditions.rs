//! Growth-condition checkers for sequences and matrices.
//!
//! Every sup-type condition is reported through its prefix-optimal constant:
//! the least constant that works for all indices up to a prefix, on a schedule
//! of doubling prefixes. The verdict is read off that series.

use std::collections::BTreeMap;

use crate::assoc::{self, min_log_shift, AssociatedFunction, WeightFunction};
use crate::error::{Error, Result};
use crate::matrix::{index_key, is_integer, source_positions, WeightMatrix, IDENTITY_TOL};
use crate::report::{
    classify_growth, dyadic_prefixes, sup_report, ConditionId, ConditionReport, MatrixVariant,
    MgLevel, Trend, Verdict, STRICT_MARGIN,
};
use crate::sequence::WeightSequence;

/// `C` values tried by [`equlemma_check`].
pub const EQULEMMA_C_GRID: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

/// Default largest `d` for the moderate growth index.
pub const DEFAULT_D_MAX: usize = 8;

fn require_horizon(m: &WeightSequence, need: usize) -> Result<()> {
    if m.horizon() < need {
        return Err(Error::HorizonTooSmall {
            got: m.horizon(),
            need,
        });
    }
    Ok(())
}

fn require_lc(m: &WeightSequence) -> Result<()> {
    if let Some(p) = m.first_lc_violation() {
        return Err(Error::NotLogConvex(p));
    }
    Ok(())
}

/// `n -> max_{p+q=n} (log big_n - log small_p - log small_q) / n`, `n >= 1`.
///
/// For log-convex `small` the balanced split minimizes `log small_p + log small_q`,
/// so only `p = floor(n/2)` is evaluated; otherwise all splits are scanned.
pub fn mg_sum_profile(big: &WeightSequence, small: &WeightSequence) -> Vec<f64> {
    if !small.is_log_convex() {
        return mg_sum_profile_brute(big, small);
    }
    let h = big.horizon().min(small.horizon());
    let mut out = vec![f64::NEG_INFINITY; h + 1];
    for n in 1..=h {
        let p = n / 2;
        out[n] = (big.log_value(n) - small.log_value(p) - small.log_value(n - p)) / n as f64;
    }
    out
}

/// [`mg_sum_profile`] by scanning every split.
pub fn mg_sum_profile_brute(big: &WeightSequence, small: &WeightSequence) -> Vec<f64> {
    let h = big.horizon().min(small.horizon());
    let mut out = vec![f64::NEG_INFINITY; h + 1];
    for n in 1..=h {
        let mut best = f64::NEG_INFINITY;
        for p in 0..=n {
            best = best.max(big.log_value(n) - small.log_value(p) - small.log_value(n - p));
        }
        out[n] = best / n as f64;
    }
    out
}

/// `p -> (log big_{2p} - 2 log small_p) / (2p)`, `2p <= P`.
pub fn mg_double_profile(big: &WeightSequence, small: &WeightSequence) -> Vec<f64> {
    let h = (big.horizon() / 2).min(small.horizon());
    let mut out = vec![f64::NEG_INFINITY; h + 1];
    for p in 1..=h {
        out[p] = (big.log_value(2 * p) - 2.0 * small.log_value(p)) / (2 * p) as f64;
    }
    out
}

/// `p -> log mu^big_{2p} - log mu^small_p`, `2p <= P`.
pub fn quotient_double_profile(big: &WeightSequence, small: &WeightSequence) -> Vec<f64> {
    let h = (big.horizon() / 2).min(small.horizon());
    let mut out = vec![f64::NEG_INFINITY; h + 1];
    for p in 1..=h {
        out[p] = big.log_quotient(2 * p) - small.log_quotient(p);
    }
    out
}

/// `p -> log mu^q_p - log r_{dp} / (dp)`, `dp <= P`.
pub fn root_profile(q: &WeightSequence, r: &WeightSequence, d: usize) -> Vec<f64> {
    let h = (r.horizon() / d).min(q.horizon());
    let mut out = vec![f64::NEG_INFINITY; h + 1];
    for p in 1..=h {
        out[p] = q.log_quotient(p) - r.log_value(d * p) / (d * p) as f64;
    }
    out
}

fn relabel(mut r: ConditionReport, id: ConditionId) -> ConditionReport {
    r.condition = id;
    r
}

/// `2 omega_small(t) <= omega_big(H t) + H`, prefix-optimal `log H` on sampled `log t`.
fn omega_pair_report(
    id: ConditionId,
    small: &AssociatedFunction,
    big: &AssociatedFunction,
) -> ConditionReport {
    let ws = WeightFunction::Associated(small.clone());
    let wb = WeightFunction::Associated(big.clone());
    let y_range = big.max_log_t();
    let y_max = 0.5 * small.max_log_t().min(y_range);
    if !(y_max > 0.0) {
        return ConditionReport::new(id, Verdict::Inconclusive).with_note("exact range too short");
    }
    let ys = assoc::sample_logs(&ws, y_max);
    let values: Vec<f64> = ys
        .iter()
        .map(|&y| assoc::om6_log_h_pair(&ws, &wb, y, y_range))
        .collect();
    let mut r = assoc::finish_sup(
        id,
        "log_H",
        assoc::log_prefix_series(&ws, &ys, &values, y_max),
    );
    if values.iter().any(|v| v.is_infinite()) {
        r.verdict = Verdict::FailsOnHorizon;
        r = r.with_note("no admissible H inside the exact range");
    }
    r
}

/// `2 Sigma(t) <= Sigma(H t) + H` for one sequence.
fn sigma_om6_report(a: &AssociatedFunction) -> ConditionReport {
    let id = ConditionId::MgV;
    let y_range = a.max_log_t();
    let y_max = 0.5 * y_range;
    let w = WeightFunction::Associated(a.clone());
    let ys = assoc::sample_logs(&w, y_max);
    let values: Vec<f64> = ys
        .iter()
        .map(|&y| {
            let target = 2.0 * a.sigma_unchecked(y) as f64;
            min_log_shift(
                |h| a.sigma_unchecked(y + h) as f64 + h.exp() >= target,
                y_range - y,
            )
        })
        .collect();
    let mut r = assoc::finish_sup(
        id,
        "log_H",
        assoc::log_prefix_series(&w, &ys, &values, y_max),
    );
    if values.iter().any(|v| v.is_infinite()) {
        r.verdict = Verdict::FailsOnHorizon;
        r = r.with_note("no admissible H inside the exact range");
    }
    r
}

/// `2 Sigma_small(t) <= Sigma_big(A t)`, prefix-optimal `log A` on sampled `log t`.
fn sigma_pair_report(
    id: ConditionId,
    small: &AssociatedFunction,
    big: &AssociatedFunction,
) -> ConditionReport {
    let y_range = big.max_log_t();
    let y_max = small.max_log_t().min(y_range);
    let ws = WeightFunction::Associated(small.clone());
    let ys: Vec<f64> = assoc::sample_logs(&ws, y_max)
        .into_iter()
        .filter(|&y| 2 * small.sigma_unchecked(y) <= big.horizon())
        .collect();
    if ys.is_empty() {
        return ConditionReport::new(id, Verdict::Inconclusive).with_note("exact range too short");
    }
    let y_last = *ys.last().unwrap();
    let values: Vec<f64> = ys
        .iter()
        .map(|&y| {
            let target = 2 * small.sigma_unchecked(y);
            min_log_shift(|a| big.sigma_unchecked(y + a) >= target, y_range - y)
        })
        .collect();
    let mut r = assoc::finish_sup(
        id,
        "log_A",
        assoc::log_prefix_series(&ws, &ys, &values, y_last),
    );
    if values.iter().any(|v| v.is_infinite()) {
        r.verdict = Verdict::FailsOnHorizon;
        r = r.with_note("no admissible A inside the exact range");
    }
    r
}

/// The six equivalent formulations of moderate growth plus a seventh report
/// stating whether their verdicts coincide.
pub fn mg_battery(m: &WeightSequence) -> Result<BTreeMap<ConditionId, ConditionReport>> {
    require_horizon(m, 4)?;
    require_lc(m)?;
    let h = m.horizon();
    let a = AssociatedFunction::new(m.clone())?;
    let w = WeightFunction::Associated(a.clone());
    let mut out = BTreeMap::new();

    let item_i = sup_report(ConditionId::MgI, "C", &mg_sum_profile(m, m), 1, h);
    let log_c = item_i.constant("log_C").unwrap_or(f64::NAN);
    out.insert(ConditionId::MgI, item_i.with_constant("C", log_c.exp()));
    out.insert(
        ConditionId::MgII,
        sup_report(ConditionId::MgII, "A", &mg_double_profile(m, m), 1, h / 2),
    );
    out.insert(
        ConditionId::MgIII,
        sup_report(
            ConditionId::MgIII,
            "A",
            &quotient_double_profile(m, m),
            1,
            h / 2,
        ),
    );
    out.insert(
        ConditionId::MgIV,
        relabel(assoc::check_om6(&w, a.max_log_t()), ConditionId::MgIV),
    );
    out.insert(ConditionId::MgV, sigma_om6_report(&a));
    out.insert(
        ConditionId::MgVI,
        sup_report(ConditionId::MgVI, "A", &root_profile(m, m, 1), 1, h),
    );

    let verdicts: Vec<Verdict> = out.values().map(|r| r.verdict).collect();
    let agree = verdicts.windows(2).all(|v| v[0] == v[1]);
    let mut meta = ConditionReport::new(ConditionId::MgCoincide, Verdict::from_bool(agree));
    for (id, r) in &out {
        meta = meta.with_note(format!("{id}: {}", r.verdict));
    }
    out.insert(ConditionId::MgCoincide, meta);
    Ok(out)
}

/// Derivation closedness, `mu_{p+1} <= A mu_p`, and quasianalyticity.
pub fn growth_flags(m: &WeightSequence) -> Result<BTreeMap<ConditionId, ConditionReport>> {
    require_horizon(m, 2)?;
    let h = m.horizon();
    let mut out = BTreeMap::new();

    // (M_{p+1}/M_p)^{1/(p+1)} = mu_{p+1}^{1/(p+1)}, indexed by p + 1
    let mut dc = vec![f64::NEG_INFINITY; h + 1];
    for p in 1..=h {
        dc[p] = m.log_quotient(p) / p as f64;
    }
    out.insert(ConditionId::Dc, sup_report(ConditionId::Dc, "D", &dc, 1, h));

    let mut almost = vec![f64::NEG_INFINITY; h + 1];
    for p in 1..h {
        almost[p] = m.log_quotient(p + 1) - m.log_quotient(p);
    }
    let mut r = sup_report(ConditionId::MuAlmost, "A", &almost, 1, h - 1);
    let log_a = r.constant("log_A").unwrap_or(f64::NAN);
    r = r.with_constant("A", log_a.exp());
    out.insert(ConditionId::MuAlmost, r);

    let mut partial = vec![0.0; h + 1];
    for p in 1..=h {
        partial[p] = partial[p - 1] + (-m.log_quotient(p)).exp();
    }
    let series: Vec<(f64, f64)> = dyadic_prefixes(h)
        .into_iter()
        .map(|q| (q as f64, partial[q]))
        .collect();
    let values: Vec<f64> = series.iter().map(|s| s.1).collect();
    let verdict = match classify_growth(&values) {
        Trend::Divergent => Verdict::HoldsOnHorizon,
        Trend::Bounded => Verdict::FailsOnHorizon,
        Trend::Unclear => Verdict::Inconclusive,
    };
    out.insert(
        ConditionId::Quasianalytic,
        ConditionReport::new(ConditionId::Quasianalytic, verdict)
            .with_constant("partial_sum", partial[h])
            .with_series(series)
            .with_note("partial sums of 1/mu_p; divergence means quasianalytic"),
    );
    Ok(out)
}

/// Tail window `[ceil(P/(2Q)), floor(P/Q)]` for liminf estimates.
pub fn liminf_window(horizon: usize, q: usize) -> Result<(usize, usize)> {
    let lo = horizon.div_ceil(2 * q).max(1);
    let hi = horizon / q;
    if q == 0 || lo > hi {
        return Err(Error::EmptyWindow(format!(
            "[P/(2Q), P/Q] with P = {horizon}, Q = {q}"
        )));
    }
    Ok((lo, hi))
}

/// `min_{p in window} log(mu_{Qp} / mu_p)` together with the window.
pub fn liminf_log_ratio(m: &WeightSequence, q: usize) -> Result<(f64, (usize, usize))> {
    let window = liminf_window(m.horizon(), q)?;
    let est = (window.0..=window.1)
        .map(|p| m.log_quotient(q * p) - m.log_quotient(p))
        .fold(f64::INFINITY, f64::min);
    Ok((est, window))
}

fn strict_report(
    id: ConditionId,
    log_est: f64,
    log_bound: f64,
    window: (usize, usize),
) -> ConditionReport {
    let ok = log_est > log_bound + STRICT_MARGIN.ln_1p();
    let mut r = ConditionReport::new(id, Verdict::from_bool(ok))
        .with_constant("log_liminf", log_est)
        .with_constant("log_bound", log_bound);
    r.window = Some(window);
    r
}

/// `(beta_1)`, `(beta_3)`, `liminf mu_{Qp}/mu_p > Q^beta` and `(gamma_1)`.
pub fn beta_gamma(
    m: &WeightSequence,
    q: usize,
    beta: f64,
) -> Result<BTreeMap<ConditionId, ConditionReport>> {
    if q < 2 {
        return Err(Error::param("Q", q as f64, "need Q >= 2"));
    }
    if !(beta >= 0.0) {
        return Err(Error::param("beta", beta, "need beta >= 0"));
    }
    let (est, window) = liminf_log_ratio(m, q)?;
    let lq = (q as f64).ln();
    let mut out = BTreeMap::new();
    out.insert(
        ConditionId::Beta1,
        strict_report(ConditionId::Beta1, est, lq, window).with_constant("Q", q as f64),
    );
    out.insert(
        ConditionId::Beta3,
        strict_report(ConditionId::Beta3, est, 0.0, window).with_constant("Q", q as f64),
    );
    out.insert(
        ConditionId::Condv,
        strict_report(ConditionId::Condv, est, beta * lq, window)
            .with_constant("Q", q as f64)
            .with_constant("beta", beta),
    );
    out.insert(ConditionId::Gamma1, gamma1_report(m));
    Ok(out)
}

/// Prefix-optimal `sup_{p <= P'} (mu_p / p) sum_{p <= k <= P'} 1/mu_k`, in log.
fn gamma1_report(m: &WeightSequence) -> ConditionReport {
    let h = m.horizon();
    let prefixes = dyadic_prefixes(h);
    let mut series = Vec::with_capacity(prefixes.len());
    let mut witness = None;
    for &end in &prefixes {
        // log of the tail sums, accumulated backwards with log-sum-exp
        let mut tail = f64::NEG_INFINITY;
        let mut best = f64::NEG_INFINITY;
        let mut arg = 1;
        for p in (1..=end).rev() {
            let t = -m.log_quotient(p);
            tail = if tail == f64::NEG_INFINITY {
                t
            } else {
                let (a, b) = if tail > t { (tail, t) } else { (t, tail) };
                a + (b - a).exp().ln_1p()
            };
            let v = m.log_quotient(p) - (p as f64).ln() + tail;
            if v >= best {
                best = v;
                arg = p;
            }
        }
        series.push((end as f64, best));
        witness = Some(arg);
    }
    let values: Vec<f64> = series.iter().map(|s| s.1).collect();
    let trend = crate::report::classify_log_growth(&values);
    let mut r = ConditionReport::new(ConditionId::Gamma1, trend.sup_verdict())
        .with_constant("log_C", *values.last().unwrap())
        .with_constant("truncation_index", h as f64)
        .with_series(series)
        .with_note("tail sums truncated at the prefix end");
    r.witness_index = witness;
    r
}

/// Moderate growth index: for each `d <= d_max` the prefix-optimal
/// `A_min(P', d) = max_{p <= P'} mu_p / (M_{dp})^{1/(dp)}`; `g` is the least
/// `d` whose series is bounded.
pub fn moderate_growth_index(m: &WeightSequence, d_max: usize) -> Result<ConditionReport> {
    if d_max == 0 {
        return Err(Error::param("d_max", 0.0, "need d_max >= 1"));
    }
    require_horizon(m, 2 * d_max)?;
    let mut subs = Vec::with_capacity(d_max);
    let mut g = None;
    let mut all_fail = true;
    let mut report = ConditionReport::new(ConditionId::Genmg, Verdict::Inconclusive);
    for d in 1..=d_max {
        let profile = root_profile(m, m, d);
        let end = profile.len() - 1;
        let r = sup_report(ConditionId::Genmg, "A_min", &profile, 1, end)
            .with_constant("d", d as f64)
            .with_note(format!("d = {d}"));
        report.constants.insert(
            format!("log_A_min@{d}"),
            r.constant("log_A_min").unwrap_or(f64::NAN),
        );
        if r.verdict.holds() && g.is_none() {
            g = Some(d);
        }
        all_fail &= r.verdict.fails();
        subs.push(r);
    }
    report.sub_reports = subs;
    match g {
        Some(d) => {
            report.verdict = Verdict::HoldsOnHorizon;
            report.constants.insert("g".into(), d as f64);
            let log_a = report.sub_reports[d - 1]
                .constant("log_A_min")
                .unwrap_or(f64::NAN);
            report.witness_series = report.sub_reports[d - 1].witness_series.clone();
            report.witness_index = report.sub_reports[d - 1].witness_index;
            report.constants.insert("log_A".into(), log_a);
        }
        None => {
            report.constants.insert("g".into(), f64::INFINITY);
            report.verdict = if all_fail {
                Verdict::FailsOnHorizon
            } else {
                Verdict::Inconclusive
            };
            report = report.with_note(format!("no bounded A for any d <= {d_max}"));
        }
    }
    report.constants.insert("d_max".into(), d_max as f64);
    Ok(report)
}

/// One (big, small) comparison of a matrix moderate-growth level.
fn level_pair(
    level: MgLevel,
    id: ConditionId,
    big: &WeightSequence,
    small: &WeightSequence,
) -> Result<ConditionReport> {
    let h = big.horizon();
    Ok(match level {
        MgLevel::I => relabel(sup_report(id, "C", &mg_sum_profile(big, small), 1, h), id),
        MgLevel::II => sup_report(id, "C", &mg_double_profile(big, small), 1, h / 2),
        MgLevel::III => omega_pair_report(
            id,
            &AssociatedFunction::new(small.clone())?,
            &AssociatedFunction::new(big.clone())?,
        ),
        MgLevel::IV => sup_report(id, "A", &quotient_double_profile(big, small), 1, h / 2),
        MgLevel::V => sigma_pair_report(
            id,
            &AssociatedFunction::new(small.clone())?,
            &AssociatedFunction::new(big.clone())?,
        ),
    })
}

/// Shared witness search for mixed matrix conditions. `pair(source, witness)`
/// evaluates one candidate; witnesses are scanned from the source index
/// upwards (Roumieu) or downwards (Beurling).
fn witness_search<F>(
    id: ConditionId,
    indices: &[f64],
    roumieu: bool,
    mut pair: F,
) -> Result<ConditionReport>
where
    F: FnMut(usize, usize) -> Result<ConditionReport>,
{
    let mut report = ConditionReport::new(id, Verdict::HoldsOnHorizon);
    let mut verdicts = Vec::new();
    for i in source_positions(indices, roumieu) {
        let x = indices[i];
        let mut candidates: Vec<usize> = (0..indices.len())
            .filter(|&j| {
                if roumieu {
                    indices[j] >= x
                } else {
                    indices[j] <= x
                }
            })
            .collect();
        if !roumieu {
            candidates.reverse();
        }
        let mut found = None;
        let mut best: Option<(usize, ConditionReport)> = None;
        let mut any_inconclusive = false;
        for j in candidates {
            let r = pair(i, j)?;
            if r.verdict.holds() {
                found = Some((j, r));
                break;
            }
            any_inconclusive |= r.verdict == Verdict::Inconclusive;
            let score = r.last_value().unwrap_or(f64::INFINITY);
            if best
                .as_ref()
                .is_none_or(|b| score < b.1.last_value().unwrap_or(f64::INFINITY))
            {
                best = Some((j, r));
            }
        }
        let key = index_key(x);
        match found {
            Some((j, r)) => {
                report
                    .constants
                    .insert(format!("witness@{key}"), indices[j]);
                if let Some(v) = r.last_value() {
                    report.constants.insert(format!("constant@{key}"), v);
                }
                report
                    .sub_reports
                    .push(r.with_note(format!("source {key}: witness {}", index_key(indices[j]))));
                verdicts.push(Verdict::HoldsOnHorizon);
            }
            None => {
                let (j, r) = best.ok_or(Error::EmptyIndexSet)?;
                report.sub_reports.push(r.with_note(format!(
                    "source {key}: no witness, best candidate {}",
                    index_key(indices[j])
                )));
                verdicts.push(if any_inconclusive {
                    Verdict::Inconclusive
                } else {
                    Verdict::FailsOnHorizon
                });
            }
        }
    }
    report.verdict = Verdict::all(verdicts);
    Ok(report)
}

/// Matrix moderate growth at one of the levels I-V, Roumieu or Beurling type.
pub fn matrix_mg(
    m: &WeightMatrix,
    variant: MatrixVariant,
    level: MgLevel,
) -> Result<ConditionReport> {
    if m.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    if m.horizon() < 4 {
        return Err(Error::HorizonTooSmall {
            got: m.horizon(),
            need: 4,
        });
    }
    if matches!(level, MgLevel::III | MgLevel::V) {
        for s in m.members() {
            require_lc(s)?;
        }
    }
    let id = ConditionId::MatrixMg(variant, level);
    let roumieu = variant == MatrixVariant::Roumieu;
    let members = m.members();
    witness_search(id, m.indices(), roumieu, |i, j| {
        // Roumieu: source x is the larger side; Beurling: the witness is
        if roumieu {
            level_pair(level, id, &members[i], &members[j])
        } else {
            level_pair(level, id, &members[j], &members[i])
        }
    })
}

/// `mu^(x)_p <= A (M^(y)_p)^{1/p}`: Roumieu over the integer indices with
/// `y >= x`, Beurling over the reciprocal-integer indices with `y <= x`.
pub fn quotient_root_comparison(
    m: &WeightMatrix,
    variant: MatrixVariant,
) -> Result<ConditionReport> {
    let roumieu = variant == MatrixVariant::Roumieu;
    let keep: Vec<usize> = (0..m.len())
        .filter(|&i| {
            let x = m.indices()[i];
            if roumieu {
                is_integer(x)
            } else {
                x <= 1.0 + 1e-12 && is_integer(1.0 / x)
            }
        })
        .collect();
    if keep.is_empty() {
        return Err(Error::GridPattern(if roumieu {
            "Roumieu comparison needs integer indices".into()
        } else {
            "Beurling comparison needs reciprocal-integer indices".into()
        }));
    }
    let indices: Vec<f64> = keep.iter().map(|&i| m.indices()[i]).collect();
    let members: Vec<&WeightSequence> = keep.iter().map(|&i| &m.members()[i]).collect();
    let id = if roumieu {
        ConditionId::Rstrange
    } else {
        ConditionId::Bstrange
    };
    let h = m.horizon();
    witness_search(id, &indices, roumieu, |i, j| {
        let (q, r) = if roumieu {
            (members[i], members[j])
        } else {
            (members[j], members[i])
        };
        Ok(sup_report(id, "A", &root_profile(q, r, 1), 1, h))
    })
}

/// `nu_p <= A C^{2p} (N_{dp})^{1/(dp)}` for `C` in [`EQULEMMA_C_GRID`]; holds if
/// some `C` gives a bounded `A`. Without `witness_on` the per-`C` series are
/// dropped from the sub-reports.
pub fn equlemma_check(n: &WeightSequence, d: usize, witness_on: bool) -> Result<ConditionReport> {
    if d == 0 {
        return Err(Error::param("d", 0.0, "need d >= 1"));
    }
    require_horizon(n, 2 * d)?;
    let base = root_profile(n, n, d);
    let end = base.len() - 1;
    let mut subs = Vec::new();
    let mut verdicts = Vec::new();
    let mut holding_c = None;
    for &c in &EQULEMMA_C_GRID {
        let lc = c.ln();
        let profile: Vec<f64> = base
            .iter()
            .enumerate()
            .map(|(p, v)| if p == 0 { *v } else { v - 2.0 * p as f64 * lc })
            .collect();
        let mut r = sup_report(ConditionId::Equlemma, "A", &profile, 1, end)
            .with_constant("C", c)
            .with_constant("d", d as f64);
        if r.verdict.holds() && holding_c.is_none() {
            holding_c = Some(c);
        }
        verdicts.push(r.verdict);
        if !witness_on {
            r.witness_series.clear();
        }
        subs.push(r);
    }
    let verdict = if holding_c.is_some() {
        Verdict::HoldsOnHorizon
    } else if verdicts.iter().all(|v| v.fails()) {
        Verdict::FailsOnHorizon
    } else {
        Verdict::Inconclusive
    };
    let mut r = ConditionReport::new(ConditionId::Equlemma, verdict).with_constant("d", d as f64);
    if let Some(c) = holding_c {
        r = r.with_constant("C", c);
    }
    r.sub_reports = subs;
    Ok(r)
}

/// `(beta_1)`, `(genmg)` and `mu_{p+1} <= A mu_p` together, plus the derived
/// bound `mu^(c)_{p+1} <= A^c mu^(c)_p` for `M^(c)_p = (M_{cp})^{1/c}`, `c = 2, 3, 4`.
pub fn admissibility_bundle(m: &WeightSequence) -> Result<ConditionReport> {
    let beta = beta_gamma(m, 2, 1.0)?
        .remove(&ConditionId::Beta1)
        .expect("beta1 present");
    let d_max = DEFAULT_D_MAX.min(m.horizon() / 2).max(1);
    let genmg = moderate_growth_index(m, d_max)?;
    let almost = growth_flags(m)?
        .remove(&ConditionId::MuAlmost)
        .expect("mualmost present");
    let log_a = almost.constant("log_A").unwrap_or(f64::NAN);

    let mut worst = f64::NEG_INFINITY;
    for c in 2..=4usize {
        let h = m.horizon() / c;
        let q = |p: usize| (m.log_value(c * p) - m.log_value(c * (p - 1))) / c as f64;
        for p in 1..h {
            let excess = q(p + 1) - q(p) - c as f64 * log_a;
            worst = worst.max(excess / q(p + 1).abs().max(1.0));
        }
    }
    let derived = ConditionReport::new(
        ConditionId::MuAlmost,
        Verdict::from_bool(!(worst > IDENTITY_TOL)),
    )
    .with_constant("max_excess", worst)
    .with_note("members M^(c), c = 2..4, inherit the bound with A^c");
    let verdict = Verdict::all([beta.verdict, genmg.verdict, almost.verdict, derived.verdict]);
    let mut r = ConditionReport::new(ConditionId::Admissibility, verdict);
    r.sub_reports = vec![beta, genmg, almost, derived];
    Ok(r)
}

/// Liminf estimates for `W^(x)` (with `Q`, `beta`), `W^(cx)` (same `Q`, `beta`)
/// and `W^(x/c)` (`4Q`, `beta = 0`), the identity
/// `theta^(cx)_p = (theta^(x)_{c(p-1)+1} ... theta^(x)_{cp})^{1/c}` and the
/// inequality `theta^(x)_{Qp}/theta^(x)_p <= theta^(x/c)_{2Qc(p-1)}/theta^(x/c)_{c(p-1)}`.
pub fn condv_propagation(
    m: &WeightMatrix,
    x: f64,
    c: usize,
    q: usize,
    beta: f64,
) -> Result<ConditionReport> {
    if c == 0 {
        return Err(Error::param("c", 0.0, "need c >= 1"));
    }
    let cf = c as f64;
    let wx = m.member(x).ok_or(Error::MissingIndex(x))?;
    let wcx = m.member(cf * x).ok_or(Error::MissingIndex(cf * x))?;
    let wxc = m.member(x / cf).ok_or(Error::MissingIndex(x / cf))?;
    let lq = (q as f64).ln();

    let estimate =
        |s: &WeightSequence, q: usize, beta: f64, label: &str| -> Result<ConditionReport> {
            let (est, window) = liminf_log_ratio(s, q)?;
            Ok(
                strict_report(ConditionId::Condv, est, beta * (q as f64).ln(), window)
                    .with_constant("Q", q as f64)
                    .with_constant("beta", beta)
                    .with_note(label.to_string()),
            )
        };
    let base = estimate(wx, q, beta, "base W^(x)")?;
    let up = estimate(wcx, q, beta, "W^(cx)")?;
    let down = estimate(wxc, 4 * q, 0.0, "W^(x/c), Q' = 4Q, beta = 0")?;

    let h = m.horizon();
    let mut residual = 0.0f64;
    for p in 1..=h / c {
        let lhs = wcx.log_quotient(p);
        let rhs: f64 = (c * (p - 1) + 1..=c * p)
            .map(|k| wx.log_quotient(k))
            .sum::<f64>()
            / cf;
        residual = residual.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    let identity = ConditionReport::new(
        ConditionId::QuotientIdentities,
        Verdict::from_bool(residual <= IDENTITY_TOL),
    )
    .with_constant("max_residual", residual);

    let mut excess = f64::NEG_INFINITY;
    let mut checked = 0usize;
    for p in 2..=h {
        let far = 2 * q * c * (p - 1);
        if q * p > h || far > h {
            break;
        }
        let lhs = wx.log_quotient(q * p) - wx.log_quotient(p);
        let rhs = wxc.log_quotient(far) - wxc.log_quotient(c * (p - 1));
        excess = excess.max((lhs - rhs) / rhs.abs().max(1.0));
        checked += 1;
    }
    let inequality = ConditionReport::new(
        ConditionId::CondvPropagation,
        if checked == 0 {
            Verdict::Inconclusive
        } else {
            Verdict::from_bool(excess <= IDENTITY_TOL)
        },
    )
    .with_constant("max_excess", excess)
    .with_constant("checked", checked as f64);

    let verdict = Verdict::all([
        base.verdict,
        up.verdict,
        down.verdict,
        identity.verdict,
        inequality.verdict,
    ]);
    let mut r = ConditionReport::new(ConditionId::CondvPropagation, verdict)
        .with_constant("x", x)
        .with_constant("c", cf)
        .with_constant("Q", q as f64)
        .with_constant("beta", beta)
        .with_constant("log_Q_beta", beta * lq);
    r.sub_reports = vec![base, up, down, identity, inequality];
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexample::{build_counterexample, ScheduleVariant};
    use crate::sequence::{make_family, Family};

    fn fam(f: Family, h: usize) -> WeightSequence {
        make_family(f, h).unwrap()
    }

    #[test]
    fn balanced_split_matches_brute_force() {
        for f in [
            Family::Gevrey { s: 1.0 },
            Family::QGevrey { q: 2.0, n: 2 },
            Family::Gevrey { s: 0.5 },
        ] {
            let m = fam(f, 64);
            let a = mg_sum_profile(&m, &m);
            let b = mg_sum_profile_brute(&m, &m);
            for n in 1..=64 {
                assert!(
                    (a[n] - b[n]).abs() <= 1e-12 * b[n].abs().max(1.0),
                    "{f:?} n = {n}"
                );
            }
        }
    }

    #[test]
    fn battery_gevrey_holds() {
        let r = mg_battery(&fam(Family::Gevrey { s: 1.0 }, 512)).unwrap();
        for (id, rep) in &r {
            assert_eq!(rep.verdict, Verdict::HoldsOnHorizon, "{id}: {rep:?}");
        }
        assert!(r[&ConditionId::MgI].constant("C").unwrap() <= 2.0);
    }

    #[test]
    fn battery_q_gevrey_fails() {
        let r = mg_battery(&fam(Family::QGevrey { q: 2.0, n: 2 }, 512)).unwrap();
        for id in [
            ConditionId::MgI,
            ConditionId::MgII,
            ConditionId::MgIII,
            ConditionId::MgIV,
            ConditionId::MgV,
            ConditionId::MgVI,
        ] {
            assert_eq!(
                r[&id].verdict,
                Verdict::FailsOnHorizon,
                "{id}: {:?}",
                r[&id]
            );
        }
        assert_eq!(r[&ConditionId::MgCoincide].verdict, Verdict::HoldsOnHorizon);
    }

    #[test]
    fn flags_examples() {
        let g = growth_flags(&fam(Family::Gevrey { s: 1.0 }, 512)).unwrap();
        assert_eq!(g[&ConditionId::Dc].verdict, Verdict::HoldsOnHorizon);
        assert_eq!(
            g[&ConditionId::Quasianalytic].verdict,
            Verdict::HoldsOnHorizon
        );
        let d = growth_flags(&fam(Family::DoubleExp, 512)).unwrap();
        assert_eq!(d[&ConditionId::Dc].verdict, Verdict::FailsOnHorizon);
        let q = growth_flags(&fam(Family::QGevrey { q: 2.0, n: 2 }, 512)).unwrap();
        let a = &q[&ConditionId::MuAlmost];
        assert_eq!(a.verdict, Verdict::HoldsOnHorizon);
        assert!((a.constant("A").unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn beta_examples() {
        let p2 = fam(Family::ConstantOne, 512).pi_transform(2.0).unwrap();
        let r = beta_gamma(&p2, 2, 1.0).unwrap();
        assert_eq!(r[&ConditionId::Beta1].verdict, Verdict::HoldsOnHorizon);
        let g = beta_gamma(&fam(Family::Gevrey { s: 1.0 }, 512), 2, 1.0).unwrap();
        assert_eq!(g[&ConditionId::Beta1].verdict, Verdict::FailsOnHorizon);
        assert_eq!(g[&ConditionId::Beta3].verdict, Verdict::HoldsOnHorizon);
        assert!(beta_gamma(&fam(Family::Gevrey { s: 1.0 }, 3), 4, 1.0).is_err());
    }

    #[test]
    fn index_examples() {
        let g = moderate_growth_index(&fam(Family::Gevrey { s: 1.0 }, 512), 4).unwrap();
        assert_eq!(g.constant("g"), Some(1.0));
        let q = moderate_growth_index(&fam(Family::QGevrey { q: 2.0, n: 2 }, 512), 4).unwrap();
        assert_eq!(q.constant("g"), Some(2.0));
        assert!(q.constant("log_A").unwrap() <= 1e-12);
        let d = moderate_growth_index(&fam(Family::DoubleExp, 512), 4).unwrap();
        assert_eq!(d.constant("g"), Some(2.0));
    }

    #[test]
    fn equlemma_examples() {
        let d = equlemma_check(&fam(Family::DoubleExp, 512), 2, true).unwrap();
        assert_eq!(d.verdict, Verdict::HoldsOnHorizon);
        assert_eq!(d.constant("C"), Some(1.0));
        let g = equlemma_check(&fam(Family::Gevrey { s: 1.0 }, 512), 1, false).unwrap();
        assert_eq!(g.verdict, Verdict::HoldsOnHorizon);
        assert!(g.sub_reports.iter().all(|s| s.witness_series.is_empty()));
    }

    #[test]
    fn admissibility_examples() {
        assert_eq!(
            admissibility_bundle(&fam(Family::QGevrey { q: 2.0, n: 2 }, 512))
                .unwrap()
                .verdict,
            Verdict::HoldsOnHorizon
        );
        assert_eq!(
            admissibility_bundle(&fam(Family::Gevrey { s: 1.0 }, 512))
                .unwrap()
                .verdict,
            Verdict::FailsOnHorizon
        );
    }

    #[test]
    fn counterexample_fails_genmg() {
        let (_, n) = build_counterexample(7, &[ScheduleVariant::Minimal], 1.0).unwrap();
        let r = moderate_growth_index(&n, 4).unwrap();
        assert_eq!(r.verdict, Verdict::FailsOnHorizon, "{r:?}");
    }
}
