//! Associated weight function `omega_M`, counting function `Sigma_M`, the Young
//! conjugate of `phi(y) = omega(e^y)`, and checks of weight-function conditions.
//!
//! All evaluations take `log t` rather than `t`: the quotients of fast-growing
//! sequences (e.g. `M_p = e^{e^p}`) leave the range of `f64` long before the
//! horizon does.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::report::{
    classify_growth, classify_log_growth, dyadic_prefixes, dyadic_prefixes_f64, ConditionId,
    ConditionReport, Verdict,
};
use crate::sequence::WeightSequence;

/// Slack for range checks on `log t` (relative).
const RANGE_SLACK: f64 = 1e-12;

/// `omega_M` and friends for one normalized log-convex sequence.
#[derive(Debug, Clone)]
pub struct AssociatedFunction {
    seq: WeightSequence,
    log_mu: Vec<f64>,
}

impl AssociatedFunction {
    pub fn new(seq: WeightSequence) -> Result<Self> {
        if !seq.is_normalized() {
            return Err(Error::InvalidSequence(format!(
                "{} is not normalized",
                seq.label()
            )));
        }
        if let Some(p) = seq.first_lc_violation() {
            return Err(Error::NotLogConvex(p));
        }
        let log_mu = seq.quotients().log_quotients;
        if log_mu[seq.horizon()] <= 0.0 {
            return Err(Error::OutOfExactRange {
                what: "log mu_P",
                value: log_mu[seq.horizon()],
                limit: 0.0,
            });
        }
        Ok(AssociatedFunction { seq, log_mu })
    }

    pub fn sequence(&self) -> &WeightSequence {
        &self.seq
    }

    pub fn horizon(&self) -> usize {
        self.seq.horizon()
    }

    pub fn log_mu(&self, p: usize) -> f64 {
        self.log_mu[p]
    }

    /// `log mu_P`: evaluations are exact for `log t` up to this value.
    pub fn max_log_t(&self) -> f64 {
        self.log_mu[self.horizon()]
    }

    fn check_log_t(&self, log_t: f64) -> Result<()> {
        let limit = self.max_log_t();
        if log_t.is_nan() || log_t > limit + RANGE_SLACK * limit.abs().max(1.0) {
            return Err(Error::OutOfExactRange {
                what: "log t",
                value: log_t,
                limit,
            });
        }
        Ok(())
    }

    /// `omega_M(t) = max_p (p log t - log M_p)` by direct maximization, together
    /// with the largest maximizing index.
    pub fn omega_with_argmax(&self, log_t: f64) -> Result<(f64, usize)> {
        self.check_log_t(log_t)?;
        let mut best = 0.0;
        let mut arg = 0;
        for (p, &lm) in self.seq.log_values().iter().enumerate().skip(1) {
            let v = p as f64 * log_t - lm;
            if v >= best {
                best = v;
                arg = p;
            }
        }
        Ok((best, arg))
    }

    pub fn omega_at_log(&self, log_t: f64) -> Result<f64> {
        Ok(self.omega_with_argmax(log_t)?.0)
    }

    pub fn omega_eval(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        self.omega_at_log(t.ln())
    }

    /// `Sigma_M(t) = #{p >= 1 : mu_p <= t}` by binary search on the quotients.
    pub fn sigma_at_log(&self, log_t: f64) -> Result<usize> {
        self.check_log_t(log_t)?;
        Ok(self.sigma_unchecked(log_t))
    }

    pub fn sigma_count(&self, t: f64) -> Result<usize> {
        if t <= 0.0 {
            return Ok(0);
        }
        self.sigma_at_log(t.ln())
    }

    pub(crate) fn sigma_unchecked(&self, log_t: f64) -> usize {
        self.log_mu[1..].partition_point(|&q| q <= log_t)
    }

    /// `omega` through the counting function: `Sigma(t) log t - log M_{Sigma(t)}`.
    /// Only valid inside the exact range; callers check.
    pub(crate) fn omega_fast(&self, log_t: f64) -> f64 {
        let k = self.sigma_unchecked(log_t);
        if k == 0 {
            0.0
        } else {
            k as f64 * log_t - self.seq.log_value(k)
        }
    }

    /// `int_0^t Sigma(u)/u du` as the exact step sum `sum_{mu_p <= t} (log t - log mu_p)`.
    pub fn omega_integral_at_log(&self, log_t: f64) -> Result<f64> {
        self.check_log_t(log_t)?;
        Ok(self.log_mu[1..]
            .iter()
            .take_while(|&&q| q <= log_t)
            .map(|&q| log_t - q)
            .sum())
    }

    pub fn omega_integral_form(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        self.omega_integral_at_log(t.ln())
    }

    /// `phi*_{omega_M}(x)`: linear interpolation of `p -> log M_p` at integer nodes.
    pub fn young_conjugate(&self, x: f64) -> Result<f64> {
        let horizon = self.horizon() as f64;
        if !(0.0..=horizon).contains(&x) {
            return Err(Error::OutOfExactRange {
                what: "x",
                value: x,
                limit: horizon,
            });
        }
        let k = x.floor() as usize;
        let frac = x - k as f64;
        if frac == 0.0 {
            return Ok(self.seq.log_value(k));
        }
        let a = self.seq.log_value(k);
        let b = self.seq.log_value(k + 1);
        Ok(a + frac * (b - a))
    }

    /// `log sup_t t^p / exp(omega_M(t))`, maximizing over the quotient
    /// breakpoints and the midpoints between them.
    pub fn reconstruct_sequence(&self, p: usize) -> Result<f64> {
        if 2 * p > self.horizon() {
            return Err(Error::OutOfExactRange {
                what: "p",
                value: p as f64,
                limit: (self.horizon() / 2) as f64,
            });
        }
        let mut candidates = vec![0.0];
        for k in 1..=self.horizon() {
            candidates.push(self.log_mu[k]);
            if k < self.horizon() {
                candidates.push(0.5 * (self.log_mu[k] + self.log_mu[k + 1]));
            }
        }
        let mut best = f64::NEG_INFINITY;
        for y in candidates {
            if y < 0.0 {
                continue;
            }
            self.check_log_t(y)?;
            let v = p as f64 * y - self.omega_fast(y);
            best = best.max(v);
        }
        Ok(best)
    }
}

/// A weight function: either `omega_M` of a sequence or the closed form
/// `omega_s(t) = max{0, (log t)^s}`, `s > 1`.
#[derive(Debug, Clone)]
pub enum WeightFunction {
    Associated(AssociatedFunction),
    LogPower { s: f64 },
}

/// Range of `log t` used when sampling the closed-form weights.
pub const LOG_POWER_SAMPLE_RANGE: f64 = 1024.0;

impl WeightFunction {
    pub fn associated(seq: WeightSequence) -> Result<Self> {
        Ok(WeightFunction::Associated(AssociatedFunction::new(seq)?))
    }

    pub fn log_power(s: f64) -> Result<Self> {
        if !(s > 1.0 && s.is_finite()) {
            return Err(Error::param("s", s, "need s > 1"));
        }
        Ok(WeightFunction::LogPower { s })
    }

    pub fn label(&self) -> String {
        match self {
            WeightFunction::Associated(a) => format!("omega[{}]", a.sequence().label()),
            WeightFunction::LogPower { s } => format!("omega_{s}"),
        }
    }

    /// Largest `log t` at which evaluation is exact.
    pub fn max_log_t(&self) -> f64 {
        match self {
            WeightFunction::Associated(a) => a.max_log_t(),
            WeightFunction::LogPower { .. } => f64::INFINITY,
        }
    }

    /// `phi(y) = omega(e^y)`.
    pub fn phi(&self, y: f64) -> Result<f64> {
        match self {
            WeightFunction::Associated(a) => {
                if y <= 0.0 {
                    Ok(0.0)
                } else {
                    a.omega_at_log(y)
                }
            }
            WeightFunction::LogPower { s } => Ok(if y <= 0.0 { 0.0 } else { y.powf(*s) }),
        }
    }

    /// `phi` without range checks, for internal sampling loops.
    pub(crate) fn phi_fast(&self, y: f64) -> f64 {
        match self {
            WeightFunction::Associated(a) => {
                if y <= 0.0 {
                    0.0
                } else {
                    a.omega_fast(y)
                }
            }
            WeightFunction::LogPower { s } => {
                if y <= 0.0 {
                    0.0
                } else {
                    y.powf(*s)
                }
            }
        }
    }

    /// Largest `x` at which the conjugate is exact.
    pub fn conjugate_range(&self) -> f64 {
        match self {
            WeightFunction::Associated(a) => a.horizon() as f64,
            WeightFunction::LogPower { .. } => f64::INFINITY,
        }
    }

    /// `phi*(x)`: interpolation for sequences, `(s-1)(x/s)^{s/(s-1)}` for `omega_s`.
    pub fn conjugate(&self, x: f64) -> Result<f64> {
        match self {
            WeightFunction::Associated(a) => a.young_conjugate(x),
            WeightFunction::LogPower { s } => {
                if x < 0.0 {
                    return Err(Error::OutOfExactRange {
                        what: "x",
                        value: x,
                        limit: 0.0,
                    });
                }
                Ok((s - 1.0) * (x / s).powf(s / (s - 1.0)))
            }
        }
    }
}

/// Brute-force `sup { x y - phi(y) : y >= 0 }` over a grid in `y`, refined by
/// golden-section search around the best grid point.
///
/// `phi` is convex, so `x y - phi(y)` is concave and its maximizer lies between
/// the neighbours of the best grid point. Every returned value is attained at
/// an actual `y`, hence a lower bound on the conjugate.
pub fn young_conjugate_oracle(w: &WeightFunction, x: f64, grid: usize) -> Result<f64> {
    if grid == 0 {
        return Err(Error::EmptyGrid);
    }
    if grid < 64 {
        return Err(Error::param(
            "grid",
            grid as f64,
            "need at least 64 grid points",
        ));
    }
    if !(x >= 0.0) {
        return Err(Error::param("x", x, "need x >= 0"));
    }
    let g = |y: f64| -> Result<f64> { Ok(x * y - w.phi(y)?) };
    let y_max = match w {
        WeightFunction::Associated(a) => a.max_log_t(),
        WeightFunction::LogPower { .. } => {
            // g(0) = 0 and g concave: once g < 0 the maximizer is behind us.
            let mut y = 1.0;
            while g(y)? >= 0.0 {
                y *= 2.0;
                if y > 1e300 {
                    return Err(Error::EmptyGrid);
                }
            }
            y
        }
    };
    if !(y_max > 0.0) {
        return Err(Error::EmptyGrid);
    }
    let mut ys: Vec<f64> = Vec::with_capacity(2 * grid + 1);
    ys.push(0.0);
    for i in 1..=grid {
        ys.push(y_max * i as f64 / grid as f64);
    }
    // geometric part, down to 2^-60 below min(1, range); huge ranges (double
    // exponential growth) put the maximizer many octaves below y_max
    let octaves = 60.0 + y_max.log2().max(0.0);
    for i in 0..grid {
        ys.push(y_max * (-(octaves * i as f64) / grid as f64 * std::f64::consts::LN_2).exp());
    }
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.dedup();
    let values: Vec<f64> = ys.iter().map(|&y| g(y)).collect::<Result<_>>()?;
    let (i_best, &v_best) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .ok_or(Error::EmptyGrid)?;
    let mut lo = ys[i_best.saturating_sub(1)];
    let mut hi = ys[(i_best + 1).min(ys.len() - 1)];
    let mut best = v_best;
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut gc = g(c)?;
    let mut gd = g(d)?;
    for _ in 0..300 {
        if hi - lo <= 1e-15 * hi.abs().max(1e-300) {
            break;
        }
        if gc >= gd {
            hi = d;
            d = c;
            gd = gc;
            c = hi - inv_phi * (hi - lo);
            gc = g(c)?;
        } else {
            lo = c;
            c = d;
            gc = gd;
            d = lo + inv_phi * (hi - lo);
            gd = g(d)?;
        }
        best = best.max(gc).max(gd);
    }
    Ok(best)
}

/// Number of log-spaced sample points used by the weight-condition checks.
pub const WEIGHT_SAMPLES: usize = 256;
/// Number of prefixes (in `log t`) for the weight-condition series.
const WEIGHT_PREFIXES: usize = 9;
/// Truncation target for the strong non-quasianalyticity integral.
const STRONG_NQ_TAIL: f64 = 1e-6;

/// Checks the requested weight-function conditions among `om1`, `om3`,
/// `om4`, `om6` and `strong_nq`.
pub fn check_weight_conditions(
    w: &WeightFunction,
    which: &[ConditionId],
) -> Result<BTreeMap<ConditionId, ConditionReport>> {
    let y_range = match w {
        WeightFunction::Associated(a) => a.max_log_t(),
        WeightFunction::LogPower { .. } => LOG_POWER_SAMPLE_RANGE,
    };
    if !(y_range > 0.0) {
        return Err(Error::OutOfExactRange {
            what: "log t range",
            value: y_range,
            limit: 0.0,
        });
    }
    let mut out = BTreeMap::new();
    for &id in which {
        let report = match id {
            ConditionId::Om1 => check_om1(w, y_range),
            ConditionId::Om3 => check_om3(w, y_range),
            ConditionId::Om4 => check_om4(w, y_range),
            ConditionId::Om6 => check_om6(w, y_range),
            ConditionId::StrongNq => check_strong_nq(w, y_range),
            other => {
                return Err(Error::Schema(crate::error::SchemaErrors(vec![
                    crate::error::SchemaError {
                        path: "which".into(),
                        message: format!("'{other}' is not a weight-function condition"),
                    },
                ])))
            }
        };
        out.insert(id, report);
    }
    Ok(out)
}

/// Uniform samples of `log t` on `(0, y_max]`, merged with the quotient
/// breakpoints of an associated function that fall in range.
pub(crate) fn sample_logs(w: &WeightFunction, y_max: f64) -> Vec<f64> {
    let mut ys: Vec<f64> = (1..=WEIGHT_SAMPLES)
        .map(|i| y_max * i as f64 / WEIGHT_SAMPLES as f64)
        .collect();
    if let WeightFunction::Associated(a) = w {
        ys.extend(
            (1..=a.horizon())
                .map(|k| a.log_mu(k))
                .filter(|&y| y > 0.0 && y <= y_max),
        );
    }
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.dedup();
    ys
}

/// Prefix bounds in `log t` up to `y_max`. For an associated function these
/// sit at the quotients `log mu_p` with `p` on the dyadic schedule of
/// `Sigma(y_max)`, so each step doubles the number of active terms; for
/// `(log t)^s` they are dyadic in `log t`. Samples beyond the last quotient
/// below `y_max` add nothing new and are left out.
pub(crate) fn weight_prefixes(w: &WeightFunction, y_max: f64) -> Vec<f64> {
    match w {
        WeightFunction::Associated(a) => {
            let n = a.sigma_unchecked(y_max);
            if n == 0 {
                return vec![y_max];
            }
            let mut out: Vec<f64> = dyadic_prefixes(n)
                .into_iter()
                .map(|p| a.log_mu(p))
                .collect();
            // quotients inside one linear block agree only up to rounding
            out.dedup_by(|b, a| *b - *a <= 1e-9 * a.abs().max(1.0));
            out
        }
        WeightFunction::LogPower { .. } => dyadic_prefixes_f64(y_max, WEIGHT_PREFIXES),
    }
}

/// Running max of `value(y)` at the [`weight_prefixes`] of `y_max`.
pub(crate) fn log_prefix_series(
    w: &WeightFunction,
    ys: &[f64],
    values: &[f64],
    y_max: f64,
) -> Vec<(f64, f64)> {
    weight_prefixes(w, y_max)
        .into_iter()
        .map(|bound| {
            let v = ys
                .iter()
                .zip(values)
                .filter(|(&y, _)| y <= bound)
                .map(|(_, &v)| v)
                .fold(f64::NEG_INFINITY, f64::max);
            (bound, v)
        })
        .collect()
}

/// Sup-type report; names starting with `log_` hold logarithms of constants.
pub(crate) fn finish_sup(id: ConditionId, name: &str, series: Vec<(f64, f64)>) -> ConditionReport {
    let values: Vec<f64> = series
        .iter()
        .map(|s| s.1)
        .filter(|v| *v > f64::NEG_INFINITY)
        .collect();
    let trend = if name.starts_with("log_") {
        classify_log_growth(&values)
    } else {
        classify_growth(&values)
    };
    let last = values.last().copied().unwrap_or(f64::NEG_INFINITY);
    ConditionReport::new(id, trend.sup_verdict())
        .with_constant(name, last)
        .with_series(series)
}

fn check_om1(w: &WeightFunction, y_range: f64) -> ConditionReport {
    let y_max = y_range - std::f64::consts::LN_2;
    if y_max <= 0.0 {
        return ConditionReport::new(ConditionId::Om1, Verdict::Inconclusive)
            .with_note("exact range too short");
    }
    let ys = sample_logs(w, y_max);
    let values: Vec<f64> = ys
        .iter()
        .map(|&y| w.phi_fast(y + std::f64::consts::LN_2) / (w.phi_fast(y) + 1.0))
        .collect();
    finish_sup(
        ConditionId::Om1,
        "L",
        log_prefix_series(w, &ys, &values, y_max),
    )
}

fn check_om3(w: &WeightFunction, y_range: f64) -> ConditionReport {
    // ratio log t / omega(t) at the dyadic prefixes; must decrease towards 0
    let series: Vec<(f64, f64)> = dyadic_prefixes_f64(y_range, WEIGHT_PREFIXES)
        .into_iter()
        .map(|y| {
            let om = w.phi_fast(y);
            (y, if om > 0.0 { y / om } else { f64::INFINITY })
        })
        .collect();
    let n = series.len();
    let tail = &series[n.saturating_sub(3)..];
    let decreasing = tail.windows(2).all(|p| p[1].1 < p[0].1);
    let verdict = if decreasing && tail.last().is_some_and(|t| t.1 < 1.0) {
        Verdict::HoldsOnHorizon
    } else if decreasing {
        Verdict::Inconclusive
    } else {
        Verdict::FailsOnHorizon
    };
    let last = series.last().map_or(f64::INFINITY, |s| s.1);
    ConditionReport::new(ConditionId::Om3, verdict)
        .with_constant("ratio", last)
        .with_series(series)
}

fn check_om4(w: &WeightFunction, y_range: f64) -> ConditionReport {
    let ys = sample_logs(w, y_range);
    let mut worst = 0.0f64;
    let mut worst_at = None;
    let mut points = vec![0.0];
    points.extend(ys.iter().copied());
    for (i, tri) in points.windows(3).enumerate() {
        for (a, b) in [(tri[0], tri[1]), (tri[0], tri[2]), (tri[1], tri[2])] {
            let mid = 0.5 * (a + b);
            let lhs = w.phi_fast(mid);
            let rhs = 0.5 * (w.phi_fast(a) + w.phi_fast(b));
            let residual = (lhs - rhs) / rhs.abs().max(1.0);
            if residual > worst {
                worst = residual;
                worst_at = Some(i);
            }
        }
    }
    let mut report = ConditionReport::new(ConditionId::Om4, Verdict::from_bool(worst <= 1e-9))
        .with_constant("max_midpoint_residual", worst);
    report.witness_index = worst_at;
    report
}

/// Smallest `h >= 0` with `ok(h)`, for `ok` monotone in `h`, searched up to
/// `h_cap`; `+inf` if `ok(h_cap)` is false.
pub(crate) fn min_log_shift<F: Fn(f64) -> bool>(ok: F, h_cap: f64) -> f64 {
    if ok(0.0) {
        return 0.0;
    }
    if !(h_cap > 0.0) {
        return f64::INFINITY;
    }
    let mut hi = 1.0f64.min(h_cap);
    while !ok(hi) {
        if hi >= h_cap {
            return f64::INFINITY;
        }
        hi = (2.0 * hi).min(h_cap);
    }
    let mut lo = hi / 2.0;
    if ok(lo) {
        lo = 0.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Smallest `h = log H >= 0` with `2 phi_small(y) <= phi_big(y + h) + e^h` and
/// `y + h <= y_range`; `+inf` if none exists in range.
pub(crate) fn om6_log_h_pair(
    small: &WeightFunction,
    big: &WeightFunction,
    y: f64,
    y_range: f64,
) -> f64 {
    let target = 2.0 * small.phi_fast(y);
    min_log_shift(|h| big.phi_fast(y + h) + h.exp() >= target, y_range - y)
}

fn om6_log_h(w: &WeightFunction, y: f64, y_range: f64) -> f64 {
    om6_log_h_pair(w, w, y, y_range)
}

pub(crate) fn check_om6(w: &WeightFunction, y_range: f64) -> ConditionReport {
    let y_max = 0.5 * y_range;
    let ys = sample_logs(w, y_max);
    let values: Vec<f64> = ys.iter().map(|&y| om6_log_h(w, y, y_range)).collect();
    let mut report = finish_sup(
        ConditionId::Om6,
        "log_H",
        log_prefix_series(w, &ys, &values, y_max),
    );
    if values.iter().any(|v| v.is_infinite()) {
        report.verdict = Verdict::FailsOnHorizon;
        report = report.with_note("no admissible H inside the exact range");
    }
    report
}

/// `int_1^T omega(y t)/t^2 dt` with `log y = ly`, computed in `u = log t` as
/// `int_0^U phi(ly + u) e^{-u} du`. Returns `(value, U)`, or `None` when the
/// truncation criterion cannot be met inside the exact range.
fn strong_nq_integral(w: &WeightFunction, ly: f64, y_range: f64) -> Option<(f64, f64)> {
    let base = w.phi_fast(ly).max(1.0);
    let mut u_max = 1.0;
    loop {
        if ly + u_max > y_range {
            return None;
        }
        if w.phi_fast(ly + u_max) * (-u_max).exp() <= STRONG_NQ_TAIL * base {
            break;
        }
        u_max *= 1.25;
    }
    let value = match w {
        WeightFunction::Associated(a) => piecewise_exp_integral(a, ly, u_max),
        WeightFunction::LogPower { .. } => {
            simpson(|u| w.phi_fast(ly + u) * (-u).exp(), 0.0, u_max, 4096)
        }
    };
    Some((value, u_max))
}

/// Exact `int_0^U phi(ly + u) e^{-u} du` for the piecewise-linear `phi` of an
/// associated function.
fn piecewise_exp_integral(a: &AssociatedFunction, ly: f64, u_max: f64) -> f64 {
    // breakpoints of phi(ly + u) in u
    let mut cuts = vec![0.0];
    for k in 1..=a.horizon() {
        let u = a.log_mu(k) - ly;
        if u > 0.0 && u < u_max {
            cuts.push(u);
        }
    }
    cuts.push(u_max);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut total = 0.0;
    for seg in cuts.windows(2) {
        let (u0, u1) = (seg[0], seg[1]);
        if u1 <= u0 {
            continue;
        }
        // phi is affine on the segment: phi(ly+u) = c + s (u - u0)
        let c = a.omega_fast(ly + u0);
        let s = (a.omega_fast(ly + u1) - c) / (u1 - u0);
        // int_{u0}^{u1} (c + s (u-u0)) e^{-u} du
        let e0 = (-u0).exp();
        let e1 = (-u1).exp();
        let d = u1 - u0;
        total += c * (e0 - e1) + s * (e0 - e1 * (1.0 + d));
    }
    total
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    s * h / 3.0
}

fn check_strong_nq(w: &WeightFunction, y_range: f64) -> ConditionReport {
    let ys = sample_logs(w, y_range);
    let mut used_ys = Vec::new();
    let mut values = Vec::new();
    let mut max_u: f64 = 0.0;
    for &ly in &ys {
        match strong_nq_integral(w, ly, y_range) {
            Some((kappa, u)) => {
                used_ys.push(ly);
                values.push(kappa / (w.phi_fast(ly) + 1.0));
                max_u = max_u.max(u);
            }
            None => break,
        }
    }
    if used_ys.len() < 2 {
        return ConditionReport::new(ConditionId::StrongNq, Verdict::Inconclusive).with_note(
            "integrand tail does not fall below the truncation target inside the exact range",
        );
    }
    let y_last = *used_ys.last().unwrap();
    let mut report = finish_sup(
        ConditionId::StrongNq,
        "C",
        log_prefix_series(w, &used_ys, &values, y_last),
    )
    .with_constant("log_truncation_T", max_u);
    report.witness_index = Some(used_ys.len());
    report
}
