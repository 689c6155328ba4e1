//! Weight sequences stored in natural-log domain.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{
    classify_log_growth, dyadic_prefixes, prefix_max_series, ConditionId, ConditionReport, Verdict,
};
use crate::special::ln_gamma;

/// Largest log value accepted as a raw real.
pub const MAX_LOG_VALUE: f64 = 1e300;

/// Default horizon for builtin families.
pub const DEFAULT_HORIZON: usize = 512;

/// Relative slack used when testing monotonicity of log quotients.
const LC_REL_TOL: f64 = 1e-12;

/// A positive sequence `M_0 = 1, M_1, ..., M_P` stored as `log M_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSequence {
    label: String,
    horizon: usize,
    log_values: Vec<f64>,
}

impl WeightSequence {
    pub fn from_log_values(label: impl Into<String>, log_values: Vec<f64>) -> Result<Self> {
        if log_values.len() < 3 {
            return Err(Error::HorizonTooSmall {
                got: log_values.len().saturating_sub(1),
                need: 2,
            });
        }
        if log_values[0] != 0.0 {
            return Err(Error::InvalidSequence(format!(
                "log_values[0] must be 0 (M_0 = 1), got {}",
                log_values[0]
            )));
        }
        if let Some(p) = log_values
            .iter()
            .position(|v| !v.is_finite() || v.abs() > MAX_LOG_VALUE)
        {
            return Err(Error::InvalidSequence(format!(
                "log_values[{p}] = {} is not a representable finite real",
                log_values[p]
            )));
        }
        Ok(WeightSequence {
            label: label.into(),
            horizon: log_values.len() - 1,
            log_values,
        })
    }

    /// Builds from quotient logs `log mu_1, ..., log mu_P` (entry 0 is ignored).
    pub fn from_log_quotients(label: impl Into<String>, log_quotients: &[f64]) -> Result<Self> {
        let mut acc = 0.0;
        let mut values = Vec::with_capacity(log_quotients.len());
        values.push(0.0);
        for &q in log_quotients.iter().skip(1) {
            acc += q;
            values.push(acc);
        }
        Self::from_log_values(label, values)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    pub fn log_value(&self, p: usize) -> f64 {
        self.log_values[p]
    }

    /// `log mu_p`, with `log mu_0 = 0`.
    pub fn log_quotient(&self, p: usize) -> f64 {
        if p == 0 {
            0.0
        } else {
            self.log_values[p] - self.log_values[p - 1]
        }
    }

    /// `(log M_p) / p` for `p >= 1`.
    pub fn log_root(&self, p: usize) -> f64 {
        self.log_values[p] / p as f64
    }

    pub fn quotients(&self) -> QuotientView {
        QuotientView {
            log_quotients: (0..=self.horizon).map(|p| self.log_quotient(p)).collect(),
        }
    }

    pub fn truncated(&self, horizon: usize) -> Result<Self> {
        if horizon > self.horizon {
            return Err(Error::HorizonTooSmall {
                got: self.horizon,
                need: horizon,
            });
        }
        Self::from_log_values(self.label.clone(), self.log_values[..=horizon].to_vec())
    }

    pub fn is_normalized(&self) -> bool {
        self.log_values[0] == 0.0 && self.log_values[1] >= 0.0
    }

    /// First index `p >= 2` with `log mu_p < log mu_{p-1}` (beyond rounding slack).
    pub fn first_lc_violation(&self) -> Option<usize> {
        (2..=self.horizon).find(|&p| {
            let a = self.log_quotient(p - 1);
            let b = self.log_quotient(p);
            // differencing loses ~eps * |log M_p| in each quotient
            let slack = LC_REL_TOL * a.abs().max(b.abs()).max(1.0)
                + 8.0 * f64::EPSILON * self.log_values[p].abs();
            b < a - slack
        })
    }

    pub fn is_log_convex(&self) -> bool {
        self.first_lc_violation().is_none()
    }

    /// `pi^s`: multiplies `M_p` by `p!^s`.
    pub fn pi_transform(&self, s: f64) -> Result<Self> {
        let values = self
            .log_values
            .iter()
            .enumerate()
            .map(|(p, v)| {
                if p == 0 {
                    0.0
                } else {
                    v + s * ln_gamma(p as f64 + 1.0)
                }
            })
            .collect();
        let label = if s == 0.0 {
            self.label.clone()
        } else {
            format!("pi^{s}({})", self.label)
        };
        Self::from_log_values(label, values)
    }

    /// Checks membership in LC on the horizon: normalization, monotone
    /// quotients, and strictly increasing roots on the tail `[P/2, P]`.
    pub fn validate_lc(&self) -> ConditionReport {
        let mut report = ConditionReport::new(ConditionId::Lc, Verdict::HoldsOnHorizon);
        report.window = Some((self.horizon / 2, self.horizon));
        if !self.is_normalized() {
            report.verdict = Verdict::FailsOnHorizon;
            report.witness_index = Some(1);
            return report.with_note("not normalized: M_1 < 1");
        }
        if let Some(p) = self.first_lc_violation() {
            report.verdict = Verdict::FailsOnHorizon;
            report.witness_index = Some(p);
            return report.with_note("quotients decrease: not log-convex");
        }
        let start = (self.horizon / 2).max(1);
        report.witness_series = (start..=self.horizon)
            .map(|p| (p as f64, self.log_root(p)))
            .collect();
        if let Some(p) =
            (start + 1..=self.horizon).find(|&p| self.log_root(p) <= self.log_root(p - 1))
        {
            report.verdict = Verdict::FailsOnHorizon;
            report.witness_index = Some(p);
            return report.with_note("roots (M_p)^(1/p) do not increase on the tail window");
        }
        report
    }
}

/// Quotient logs `log mu_0 = 0, log mu_1, ..., log mu_P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientView {
    pub log_quotients: Vec<f64>,
}

impl QuotientView {
    pub fn horizon(&self) -> usize {
        self.log_quotients.len() - 1
    }

    /// Recomposes `log M_p = sum_{i <= p} log mu_i`.
    pub fn recompose(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.log_quotients
            .iter()
            .enumerate()
            .map(|(p, q)| {
                if p > 0 {
                    acc += q;
                }
                acc
            })
            .collect()
    }
}

/// Builtin sequence families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `M_p = p!^s`, `s > 0`.
    Gevrey {
        s: f64,
    },
    /// `M_p = q^{p^n}`, `q > 1`, `n >= 2`.
    QGevrey {
        q: f64,
        n: u32,
    },
    /// `M_0 = 1`, `M_p = e^{e^p}`.
    DoubleExp,
    ConstantOne,
}

impl Family {
    pub fn id(&self) -> &'static str {
        match self {
            Family::Gevrey { .. } => "gevrey",
            Family::QGevrey { .. } => "q_gevrey",
            Family::DoubleExp => "double_exp",
            Family::ConstantOne => "constant_one",
        }
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        match *self {
            Family::Gevrey { s } => {
                m.insert("s".to_string(), s);
            }
            Family::QGevrey { q, n } => {
                m.insert("q".to_string(), q);
                m.insert("n".to_string(), n as f64);
            }
            Family::DoubleExp | Family::ConstantOne => {}
        }
        m
    }

    /// Parses a family id plus parameter map, validating parameter ranges.
    pub fn from_parts(id: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |k: &str| {
            params
                .get(k)
                .copied()
                .ok_or_else(|| Error::MissingParam(k.to_string()))
        };
        match id {
            "gevrey" => {
                let s = get("s")?;
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::param("s", s, "need s > 0"));
                }
                Ok(Family::Gevrey { s })
            }
            "q_gevrey" => {
                let q = get("q")?;
                if !(q > 1.0 && q.is_finite()) {
                    return Err(Error::param("q", q, "need q > 1"));
                }
                let n = params.get("n").copied().unwrap_or(2.0);
                if n < 2.0 || n.fract() != 0.0 || n > 16.0 {
                    return Err(Error::param("n", n, "need an integer 2 <= n <= 16"));
                }
                Ok(Family::QGevrey { q, n: n as u32 })
            }
            "double_exp" => Ok(Family::DoubleExp),
            "constant_one" => Ok(Family::ConstantOne),
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Family::Gevrey { s } => format!("gevrey({s})"),
            Family::QGevrey { q, n } => format!("q_gevrey({q},{n})"),
            Family::DoubleExp => "double_exp".to_string(),
            Family::ConstantOne => "constant_one".to_string(),
        }
    }

    fn log_value(&self, p: usize) -> f64 {
        if p == 0 {
            return 0.0;
        }
        let x = p as f64;
        match *self {
            Family::Gevrey { s } => s * ln_gamma(x + 1.0),
            Family::QGevrey { q, n } => x.powi(n as i32) * q.ln(),
            Family::DoubleExp => x.exp(),
            Family::ConstantOne => 0.0,
        }
    }
}

/// Builds a builtin family on `0..=horizon`.
pub fn make_family(family: Family, horizon: usize) -> Result<WeightSequence> {
    if horizon < 2 {
        return Err(Error::HorizonTooSmall {
            got: horizon,
            need: 2,
        });
    }
    let values: Vec<f64> = (0..=horizon).map(|p| family.log_value(p)).collect();
    if let Some(p) = values
        .iter()
        .position(|v| !v.is_finite() || *v > MAX_LOG_VALUE)
    {
        return Err(Error::Overflow(format!(
            "{} exceeds the representable range at p = {p}; reduce the horizon",
            family.label()
        )));
    }
    WeightSequence::from_log_values(family.label(), values)
}

/// Compares `M` against `N` for the relation `sup_p (M_p/N_p)^{1/p} < inf`.
///
/// The witness series holds `log C_min(P') = max_{1<=p<=P'} (log M_p - log N_p)/p`
/// on the dyadic schedule.
pub fn compare(m: &WeightSequence, n: &WeightSequence) -> Result<ConditionReport> {
    if m.horizon() != n.horizon() {
        return Err(Error::HorizonMismatch(m.horizon(), n.horizon()));
    }
    let horizon = m.horizon();
    let mut profile = vec![f64::NEG_INFINITY; horizon + 1];
    for p in 1..=horizon {
        profile[p] = (m.log_value(p) - n.log_value(p)) / p as f64;
    }
    let series = prefix_max_series(&profile, 1, &dyadic_prefixes(horizon));
    let values: Vec<f64> = series.iter().map(|s| s.1).collect();
    let trend = classify_log_growth(&values);
    let log_c = *values.last().unwrap();
    let mut report = ConditionReport::new(ConditionId::Compare, trend.sup_verdict())
        .with_constant("log_C", log_c)
        .with_constant("C", log_c.exp())
        .with_series(series)
        .with_note(format!("{} vs {}", m.label(), n.label()));
    report.witness_index = crate::report::argmax_from(&profile, 1);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gevrey(s: f64, h: usize) -> WeightSequence {
        make_family(Family::Gevrey { s }, h).unwrap()
    }

    fn qg(q: f64, n: u32, h: usize) -> WeightSequence {
        make_family(Family::QGevrey { q, n }, h).unwrap()
    }

    #[test]
    fn q_gevrey_value_and_quotients() {
        let m = qg(2.0, 2, 16);
        assert!((m.log_value(3) - 9.0 * 2f64.ln()).abs() < 1e-12);
        let q = m.quotients();
        for p in 1..=16 {
            let want = (2.0 * p as f64 - 1.0) * 2f64.ln();
            assert!((q.log_quotients[p] - want).abs() < 1e-10, "p = {p}");
        }
    }

    #[test]
    fn constant_one_is_zero() {
        let m = make_family(Family::ConstantOne, 10).unwrap();
        assert!(m.log_values().iter().all(|&v| v == 0.0));
        assert!(m.quotients().log_quotients.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn double_exp_first_value() {
        let m = make_family(Family::DoubleExp, 10).unwrap();
        assert_eq!(m.log_value(0), 0.0);
        assert!((m.log_value(1) - std::f64::consts::E).abs() < 1e-15);
        assert!(make_family(Family::DoubleExp, 800).is_err());
    }

    #[test]
    fn gevrey_quotients_match_log_gamma_differences() {
        let m = gevrey(1.0, 64);
        for p in 1..=64 {
            let oracle: f64 = (1..=p).map(|k| (k as f64).ln()).sum::<f64>()
                - (1..p).map(|k| (k as f64).ln()).sum::<f64>();
            assert!((m.log_quotient(p) - oracle).abs() < 1e-10);
            assert!((m.log_quotient(p) - (p as f64).ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn family_errors() {
        let mut params = BTreeMap::new();
        assert!(matches!(
            Family::from_parts("nope", &params),
            Err(Error::UnknownFamily(_))
        ));
        params.insert("s".into(), -1.0);
        assert!(Family::from_parts("gevrey", &params).is_err());
        params.insert("q".into(), 0.5);
        assert!(Family::from_parts("q_gevrey", &params).is_err());
        assert!(make_family(Family::ConstantOne, 1).is_err());
    }

    #[test]
    fn pi_transform_examples() {
        let m = gevrey(1.0, 32);
        assert_eq!(m.pi_transform(0.0).unwrap().log_values(), m.log_values());
        let one = make_family(Family::ConstantOne, 8).unwrap();
        let sq = one.pi_transform(2.0).unwrap();
        assert!((sq.log_value(2) - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert!(!gevrey(1.0, 16).pi_transform(-2.0).unwrap().is_log_convex());
    }

    #[test]
    fn validate_lc_examples() {
        assert_eq!(
            gevrey(1.0, 128).validate_lc().verdict,
            Verdict::HoldsOnHorizon
        );
        let r = gevrey(1.0, 128).pi_transform(-2.0).unwrap().validate_lc();
        assert_eq!(r.verdict, Verdict::FailsOnHorizon);
        let r = make_family(Family::ConstantOne, 64).unwrap().validate_lc();
        assert_eq!(r.verdict, Verdict::FailsOnHorizon);
    }

    #[test]
    fn compare_examples() {
        let g1 = gevrey(1.0, 256);
        let g2 = gevrey(2.0, 256);
        let r = compare(&g1, &g1).unwrap();
        assert_eq!(r.verdict, Verdict::HoldsOnHorizon);
        assert_eq!(r.constant("C"), Some(1.0));
        assert_eq!(compare(&g1, &g2).unwrap().verdict, Verdict::HoldsOnHorizon);
        assert_eq!(
            compare(&qg(2.0, 2, 256), &g1).unwrap().verdict,
            Verdict::FailsOnHorizon
        );
        assert!(matches!(
            compare(&g1, &gevrey(1.0, 10)),
            Err(Error::HorizonMismatch(..))
        ));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(WeightSequence::from_log_values("x", vec![1.0, 2.0, 3.0]).is_err());
        assert!(WeightSequence::from_log_values("x", vec![0.0, f64::NAN, 3.0]).is_err());
        assert!(WeightSequence::from_log_values("x", vec![0.0, 1.0]).is_err());
    }
}
