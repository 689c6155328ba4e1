//! Sequences `N_p = exp(f(p))` with `f` convex and piecewise linear through
//! integer breakpoints `a_1 = 0 < a_2 < ...` with slopes `b_1 < b_2 < ...`.
//!
//! The schedule is chosen so that `N` is log-convex while `mu_p <= A (N_{dp})^{1/(dp)}`
//! fails for every `d` and `A`: at `p = a_l + 1` the forced `log A` grows with `l`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{ConditionId, ConditionReport, Verdict};
use crate::sequence::{WeightSequence, MAX_LOG_VALUE};

/// Gap enforced between consecutive slopes when the slope constraint is slack.
pub const SLOPE_GAP: f64 = 1.0;

/// Largest horizon materialized as a sequence.
pub const MAX_COUNTEREXAMPLE_HORIZON: u64 = 1 << 24;

const SCHEDULE_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleVariant {
    /// Breakpoints and slopes meet their lower bounds with equality.
    Minimal,
    /// Breakpoints also satisfy `a_{j+1} >= b_j / j - a_j`.
    Quasianalytic,
    /// Slopes satisfy the stronger bound that also defeats the `C^{2p}` factor.
    StrongB,
}

impl ScheduleVariant {
    pub fn tag(self) -> &'static str {
        match self {
            ScheduleVariant::Minimal => "minimal",
            ScheduleVariant::Quasianalytic => "quasianalytic",
            ScheduleVariant::StrongB => "strong_b",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "minimal" => Some(ScheduleVariant::Minimal),
            "quasianalytic" => Some(ScheduleVariant::Quasianalytic),
            "strong_b" => Some(ScheduleVariant::StrongB),
            _ => None,
        }
    }
}

/// Breakpoints `a_1..a_J`, slopes `b_1..b_{J-1}` and values `f(a_1)..f(a_J)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearLogSpec {
    pub breakpoints: Vec<u64>,
    pub slopes: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub f_values: Vec<f64>,
    #[serde(default)]
    pub variant: Vec<ScheduleVariant>,
}

impl PiecewiseLinearLogSpec {
    /// Spec from breakpoints and slopes, with `f` recomputed from `f(0) = 0`.
    pub fn from_slopes(
        breakpoints: Vec<u64>,
        slopes: Vec<f64>,
        variant: Vec<ScheduleVariant>,
    ) -> Self {
        let mut f_values = vec![0.0];
        for (j, &b) in slopes.iter().enumerate() {
            if j + 1 >= breakpoints.len() {
                break;
            }
            let gap = breakpoints[j + 1] as f64 - breakpoints[j] as f64;
            f_values.push(f_values[j] + b * gap);
        }
        PiecewiseLinearLogSpec {
            breakpoints,
            slopes,
            f_values,
            variant,
        }
    }

    pub fn levels(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn has(&self, v: ScheduleVariant) -> bool {
        self.variant.contains(&v)
    }

    /// `a_j`, 1-based.
    pub fn a(&self, j: usize) -> u64 {
        self.breakpoints[j - 1]
    }

    /// `b_j`, 1-based.
    pub fn b(&self, j: usize) -> f64 {
        self.slopes[j - 1]
    }

    /// `f(a_j)`, 1-based.
    pub fn f_at(&self, j: usize) -> f64 {
        self.f_values[j - 1]
    }

    /// `f(p)` by linear interpolation, `p <= a_J`.
    pub fn f(&self, p: u64) -> f64 {
        let j = self.breakpoints.partition_point(|&a| a <= p).max(1);
        if j == self.levels() {
            return self.f_at(j);
        }
        self.f_at(j) + self.b(j) * (p - self.a(j)) as f64
    }

    /// Right-hand side of the plain slope bound `(j^2 (a_j+1) + f(a_j)) / a_j`.
    pub fn slope_bound(&self, j: usize) -> f64 {
        plain_bound(j, self.a(j), self.f_at(j))
    }

    /// Right-hand side of the strong slope bound.
    pub fn strong_slope_bound(&self, j: usize) -> f64 {
        strong_bound(j, self.a(j), self.f_at(j))
    }

    /// `sum_{j<J} (a_{j+1} - a_j) / b_j`: the sum of reciprocal quotients when
    /// `nu_p` is read as the slope `b_j` on block `j`.
    pub fn reciprocal_slope_sum(&self) -> f64 {
        (1..self.levels())
            .map(|j| (self.a(j + 1) - self.a(j)) as f64 / self.b(j))
            .sum()
    }

    /// `sum_{j<J} (a_{j+1} - a_j) e^{-b_j}`: the sum of `1/nu_p` over the
    /// horizon for `nu_p = exp(b_j)` on block `j`.
    pub fn reciprocal_quotient_sum(&self) -> f64 {
        (1..self.levels())
            .map(|j| (self.a(j + 1) - self.a(j)) as f64 * (-self.b(j)).exp())
            .sum()
    }
}

fn plain_bound(j: usize, a: u64, f: f64) -> f64 {
    let j2 = (j * j) as f64;
    (j2 * (a as f64 + 1.0) + f) / a as f64
}

fn strong_bound(j: usize, a: u64, f: f64) -> f64 {
    let j2 = (j * j) as f64;
    let a1 = a as f64 + 1.0;
    (f + j2 * a1 + 2.0 * j2 * a1 * a1) / a as f64
}

/// Builds the schedule for `levels` breakpoints and the sequence `N`.
pub fn build_counterexample(
    levels: usize,
    variant: &[ScheduleVariant],
    b1: f64,
) -> Result<(PiecewiseLinearLogSpec, WeightSequence)> {
    if levels < 4 {
        return Err(Error::param(
            "levels",
            levels as f64,
            "need at least 4 levels",
        ));
    }
    if !(b1 > 0.0 && b1.is_finite()) {
        return Err(Error::param("b1", b1, "need b1 > 0"));
    }
    let mut variant: Vec<ScheduleVariant> = variant.to_vec();
    if variant.is_empty() {
        variant.push(ScheduleVariant::Minimal);
    }
    variant.sort();
    variant.dedup();
    let strong = variant.contains(&ScheduleVariant::StrongB);
    let quasi = variant.contains(&ScheduleVariant::Quasianalytic);

    let mut a: Vec<u64> = vec![0];
    let mut b: Vec<f64> = Vec::new();
    let mut f: Vec<f64> = vec![0.0];
    for j in 1..levels {
        let aj = a[j - 1];
        let fj = f[j - 1];
        let bj = if j == 1 {
            b1
        } else {
            let rhs = if strong {
                strong_bound(j, aj, fj)
            } else {
                plain_bound(j, aj, fj)
            };
            (b[j - 2] + SLOPE_GAP).max(rhs)
        };
        let mut next = (j as u64)
            .checked_mul(aj + 1)
            .ok_or_else(|| Error::Overflow(format!("breakpoint a_{} overflows", j + 1)))?;
        if quasi {
            let amod = (bj / j as f64 - aj as f64).ceil();
            if amod > next as f64 {
                next = amod as u64;
            }
        }
        if next > MAX_COUNTEREXAMPLE_HORIZON {
            return Err(Error::Overflow(format!(
                "breakpoint a_{} = {next} exceeds the horizon guard {MAX_COUNTEREXAMPLE_HORIZON}; reduce levels",
                j + 1
            )));
        }
        let f_next = fj + bj * (next - aj) as f64;
        if !(f_next.is_finite() && f_next <= MAX_LOG_VALUE) {
            return Err(Error::Overflow(format!(
                "f(a_{}) exceeds the representable range; reduce levels",
                j + 1
            )));
        }
        a.push(next);
        b.push(bj);
        f.push(f_next);
    }
    let spec = PiecewiseLinearLogSpec {
        breakpoints: a,
        slopes: b,
        f_values: f,
        variant,
    };
    let seq = materialize(&spec)?;
    Ok((spec, seq))
}

/// `log N_p = f(p)` for `0 <= p <= a_J`.
pub fn materialize(spec: &PiecewiseLinearLogSpec) -> Result<WeightSequence> {
    let j_max = spec.levels();
    if j_max < 2 || spec.slopes.len() + 1 < j_max || spec.f_values.len() < j_max {
        return Err(Error::InvalidSchedule(
            "breakpoints, slopes and f values have inconsistent lengths".into(),
        ));
    }
    let horizon = spec.a(j_max);
    if horizon > MAX_COUNTEREXAMPLE_HORIZON {
        return Err(Error::Overflow(format!(
            "horizon {horizon} exceeds the guard {MAX_COUNTEREXAMPLE_HORIZON}"
        )));
    }
    let mut values = Vec::with_capacity(horizon as usize + 1);
    values.push(0.0);
    for j in 1..j_max {
        let (a0, a1) = (spec.a(j), spec.a(j + 1));
        for p in a0 + 1..=a1 {
            values.push(spec.f_at(j) + spec.b(j) * (p - a0) as f64);
        }
    }
    let label = format!(
        "counterexample(J={},{})",
        j_max,
        spec.variant
            .iter()
            .map(|v| v.tag())
            .collect::<Vec<_>>()
            .join("+")
    );
    WeightSequence::from_log_values(label, values)
}

fn violation(report: ConditionReport, index: usize, note: String) -> ConditionReport {
    let mut r = report.with_note(note);
    r.verdict = Verdict::FailsOnHorizon;
    r.witness_index = Some(index);
    r
}

fn below(lhs: f64, rhs: f64) -> bool {
    lhs < rhs - SCHEDULE_REL_TOL * lhs.abs().max(rhs.abs()).max(1.0)
}

/// Checks every schedule constraint and reports the first violation.
pub fn validate_schedule(spec: &PiecewiseLinearLogSpec) -> ConditionReport {
    let report = ConditionReport::new(ConditionId::Schedule, Verdict::HoldsOnHorizon);
    let j_max = spec.levels();
    if j_max < 2 || spec.slopes.len() + 1 != j_max || spec.f_values.len() != j_max {
        return violation(
            report,
            0,
            format!(
                "length mismatch: {} breakpoints, {} slopes, {} f values",
                j_max,
                spec.slopes.len(),
                spec.f_values.len()
            ),
        );
    }
    if spec.a(1) != 0 {
        return violation(report, 1, format!("a_1 = {} but must be 0", spec.a(1)));
    }
    if spec.f_at(1) != 0.0 {
        return violation(
            report,
            1,
            format!("f(a_1) = {} but must be 0", spec.f_at(1)),
        );
    }
    for j in 1..j_max {
        let need = j as u64 * (spec.a(j) + 1);
        if spec.a(j + 1) < need {
            return violation(
                report,
                j + 1,
                format!("a_{} = {} < {j}(a_{j}+1) = {need}", j + 1, spec.a(j + 1)),
            );
        }
    }
    for j in 1..j_max {
        if !(spec.b(j) > 0.0) {
            return violation(
                report,
                j,
                format!("slope b_{j} = {} is not positive", spec.b(j)),
            );
        }
        if j >= 2 && spec.b(j) <= spec.b(j - 1) {
            return violation(
                report,
                j,
                format!(
                    "slopes not strictly increasing: b_{j} = {} <= b_{} = {}",
                    spec.b(j),
                    j - 1,
                    spec.b(j - 1)
                ),
            );
        }
    }
    for j in 1..j_max {
        let want = spec.f_at(j) + spec.b(j) * (spec.a(j + 1) - spec.a(j)) as f64;
        let got = spec.f_at(j + 1);
        if (got - want).abs() > 1e-9 * want.abs().max(1.0) {
            return violation(
                report,
                j + 1,
                format!(
                    "f(a_{}) = {got} but the slope recursion gives {want}",
                    j + 1
                ),
            );
        }
    }
    let strong = spec.has(ScheduleVariant::StrongB);
    for j in 2..j_max {
        let rhs = if strong {
            spec.strong_slope_bound(j)
        } else {
            spec.slope_bound(j)
        };
        if below(spec.b(j), rhs) {
            let which = if strong {
                "strong slope bound"
            } else {
                "slope bound"
            };
            return violation(
                report,
                j,
                format!("{which} violated: b_{j} = {} < {rhs}", spec.b(j)),
            );
        }
    }
    if spec.has(ScheduleVariant::Quasianalytic) {
        for j in 1..j_max {
            let rhs = spec.b(j) / j as f64 - spec.a(j) as f64;
            if below(spec.a(j + 1) as f64, rhs) {
                return violation(
                    report,
                    j + 1,
                    format!(
                        "a_{} = {} < b_{j}/{j} - a_{j} = {rhs}",
                        j + 1,
                        spec.a(j + 1)
                    ),
                );
            }
        }
    }
    report
        .with_constant("levels", j_max as f64)
        .with_constant("horizon", spec.a(j_max) as f64)
}

/// For `l = d, ..., J-1`, the least `log A` with `nu_p <= A (N_{dp})^{1/(dp)}`
/// at `p = a_l + 1`, read off the sequence `n`.
pub fn witness_divergence(
    spec: &PiecewiseLinearLogSpec,
    n: &WeightSequence,
    d: usize,
) -> Result<Vec<f64>> {
    if d < 2 {
        return Err(Error::param("d", d as f64, "need d >= 2"));
    }
    let j_max = spec.levels();
    if d >= j_max {
        return Err(Error::EmptyWindow(format!(
            "no level l with {d} <= l <= {}",
            j_max - 1
        )));
    }
    let mut out = Vec::with_capacity(j_max - d);
    for l in d..j_max {
        let p = spec.a(l) as usize + 1;
        let dp = d * p;
        if dp as u64 > spec.a(l + 1) {
            return Err(Error::InvalidSchedule(format!(
                "d(a_{l}+1) = {dp} exceeds a_{} = {}",
                l + 1,
                spec.a(l + 1)
            )));
        }
        if dp > n.horizon() {
            return Err(Error::HorizonTooSmall {
                got: n.horizon(),
                need: dp,
            });
        }
        out.push(n.log_quotient(p) - n.log_value(dp) / dp as f64);
    }
    Ok(out)
}
