//! Euler–Maclaurin tail sums of `c * ln(x+1)^kappa * x^(-a)`.

use crate::bracket::Bracket;
use crate::numeric::{gauss_legendre, integrate_panels};

/// `coef * ln(x + 1)^kappa * x^(-a)` on `x >= 1`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PowerLogTerm {
    pub coef: f64,
    pub kappa: f64,
    pub a: f64,
}

impl PowerLogTerm {
    pub fn power(coef: f64, a: f64) -> Self {
        Self { coef, kappa: 0.0, a }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coef * (x + 1.0).ln().powf(self.kappa) * x.powf(-self.a)
    }

    /// `(f, f', f''')` at `x`, from the derivatives of `phi = ln f`.
    fn derivatives(&self, x: f64) -> (f64, f64, f64) {
        let f = self.eval(x);
        let a = self.a;
        let (mut p1, mut p2, mut p3) = (-a / x, a / (x * x), -2.0 * a / (x * x * x));
        if self.kappa != 0.0 {
            let y = x + 1.0;
            let l = y.ln();
            let k = self.kappa;
            p1 += k / (y * l);
            p2 -= k * (l + 1.0) / (y * y * l * l);
            p3 -= k * (l - 2.0 * (l + 1.0) * (l + 1.0)) / (y * y * y * l * l * l);
        }
        (f, f * p1, f * (p3 + 3.0 * p1 * p2 + p1 * p1 * p1))
    }

    /// `∫_m^∞ f` with an error estimate (zero for the closed form).
    fn integral(&self, m: f64) -> (f64, f64) {
        assert!(self.a > 1.0, "integral diverges for a = {}", self.a);
        let base = self.coef * m.powf(1.0 - self.a) / (self.a - 1.0);
        if self.kappa == 0.0 {
            return (base, 0.0);
        }
        // x = m e^y turns the integrand into ln(m e^y + 1)^kappa e^{-(a-1) y}
        let r = self.a - 1.0;
        let lm = m.ln();
        let y_max = (60.0 + self.kappa.abs() * (lm + 60.0 / r + 1.0).ln()) / r;
        let g = |y: f64| (m * y.exp() + 1.0).ln().powf(self.kappa) * (-r * y).exp();
        let rule = gauss_legendre(16);
        let panels = y_max.ceil() as usize;
        let coarse = integrate_panels(g, 0.0, y_max, panels, &rule);
        let fine = integrate_panels(g, 0.0, y_max, 2 * panels, &rule);
        // the neglected tail beyond y_max is below e^{-60} of the leading size
        let tail = g(y_max) / r * 2.0;
        let scale = self.coef * m.powf(1.0 - self.a);
        (scale * fine, scale * ((fine - coarse).abs() + tail))
    }

    /// Bracket on `Σ_{t ≥ m} f(t)`.
    ///
    /// Fourth-order Euler–Maclaurin; the remainder is at most `|f'''(m)|/720`
    /// when `f''''` keeps one sign on `[m, ∞)`, which holds for these terms at
    /// the cutoffs we accept.
    pub fn sum_from(&self, m: u64) -> Bracket {
        let x = m as f64;
        let (f, f1, f3) = self.derivatives(x);
        let (int, int_err) = self.integral(x);
        let est = int + 0.5 * f - f1 / 12.0 + f3 / 720.0;
        let err = f3.abs() / 720.0 + int_err + 4.0 * f64::EPSILON * est.abs();
        Bracket::new(est - err, est + err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(term: &PowerLogTerm, m: u64, n: u64) -> f64 {
        crate::numeric::compensated_sum((m..n).rev().map(|t| term.eval(t as f64)))
    }

    #[test]
    fn power_sum_matches_brute_force_plus_tail() {
        let term = PowerLogTerm::power(1.0, 2.5);
        let m = 1000;
        let n = 2_000_000;
        let head = brute(&term, m, n);
        let tail = term.sum_from(n);
        let total = term.sum_from(m);
        assert!(total.lo <= head + tail.hi && head + tail.lo <= total.hi);
        assert!(total.width() < 1e-12 * total.hi);
    }

    #[test]
    fn log_power_sum_matches_brute_force_plus_tail() {
        for kappa in [-1.5, 1.0, 3.0] {
            let term = PowerLogTerm { coef: 2.0, kappa, a: 1.7 };
            let m = 1000;
            let n = 3_000_000;
            let head = brute(&term, m, n);
            let tail = term.sum_from(n).mid();
            let total = term.sum_from(m);
            let rel = ((head + tail) - total.mid()).abs() / total.mid();
            assert!(rel < 1e-11, "kappa={kappa} rel={rel}");
        }
    }

    #[test]
    fn derivative_formulas_match_finite_differences() {
        let term = PowerLogTerm { coef: 1.0, kappa: 2.0, a: 3.2 };
        let x = 37.0;
        let h = 1e-3;
        let (_, d1, d3) = term.derivatives(x);
        let fd1 = (term.eval(x + h) - term.eval(x - h)) / (2.0 * h);
        let fd3 = (term.eval(x + 2.0 * h) - 2.0 * term.eval(x + h) + 2.0 * term.eval(x - h)
            - term.eval(x - 2.0 * h))
            / (2.0 * h * h * h);
        assert!((d1 - fd1).abs() < 1e-6 * d1.abs());
        assert!((d3 - fd3).abs() < 1e-3 * d3.abs());
    }
}
