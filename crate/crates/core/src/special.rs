//! Special functions.

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `log p!`.
pub fn ln_factorial(p: usize) -> f64 {
    if p < 2 {
        0.0
    } else {
        ln_gamma(p as f64 + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_summed_logs() {
        let mut acc = 0.0f64;
        for p in 1..=2000usize {
            acc += (p as f64).ln();
            let got = ln_factorial(p);
            let tol = 1e-12 * acc.abs().max(1.0);
            assert!((got - acc).abs() <= tol, "p = {p}: {got} vs {acc}");
        }
    }

    #[test]
    fn half_integer_value() {
        // Gamma(1/2) = sqrt(pi)
        let want = std::f64::consts::PI.sqrt().ln();
        assert!((ln_gamma(0.5) - want).abs() < 1e-13);
    }
}
