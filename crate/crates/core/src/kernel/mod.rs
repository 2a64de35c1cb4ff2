//! The inter-arrival kernel `K(t) = L(t) / (norm * t^(2+α))`, `t >= 2`.
//!
//! A jump of the bivariate renewal is `(i, j)` with probability `K(i + j)`, so
//! the law of the total length `t = i + j` is `(t - 1) K(t)`. The kernel is
//! normalized so that this law has mass one.

mod em;
mod tails;

pub use tails::TailSumTable;

pub(crate) use em::PowerLogTerm;

use serde::{Deserialize, Serialize};

use crate::bracket::Bracket;
use crate::error::{invalid, Result};
use crate::numeric::{gamma_n, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SvFamily {
    Constant,
    LogPower,
}

/// The slowly varying factor `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowlyVarying {
    pub family: SvFamily,
    pub c0: f64,
    /// Only used by [`SvFamily::LogPower`]: `L(n) = c0 * ln(n + 1)^kappa`.
    pub kappa: f64,
}

impl SlowlyVarying {
    pub const fn constant(c0: f64) -> Self {
        Self { family: SvFamily::Constant, c0, kappa: 0.0 }
    }

    pub const fn log_power(c0: f64, kappa: f64) -> Self {
        Self { family: SvFamily::LogPower, c0, kappa }
    }

    /// Exponent of the logarithm actually in use.
    pub fn effective_kappa(&self) -> f64 {
        match self.family {
            SvFamily::Constant => 0.0,
            SvFamily::LogPower => self.kappa,
        }
    }

    pub fn value(&self, n: f64) -> f64 {
        self.c0 * (n + 1.0).ln().powf(self.effective_kappa())
    }

    pub fn ln_value(&self, n: f64) -> f64 {
        self.c0.ln() + self.effective_kappa() * (n + 1.0).ln().ln()
    }

    fn validate(&self) -> Result<()> {
        if !(self.c0.is_finite() && self.c0 > 0.0) {
            return invalid(format!("c0 must be positive and finite, got {}", self.c0));
        }
        if !self.kappa.is_finite() || self.kappa.abs() > 10.0 {
            return invalid(format!("kappa must lie in [-10, 10], got {}", self.kappa));
        }
        Ok(())
    }
}

impl Default for SlowlyVarying {
    fn default() -> Self {
        Self::constant(1.0)
    }
}

#[derive(Debug, Clone)]
pub struct Kernel {
    alpha: f64,
    sv: SlowlyVarying,
    norm: f64,
    t_max: usize,
    k: Vec<f64>,
    ln_k: Vec<f64>,
    /// `tail_mass[s] = Σ_{t > s} (t - 1) K(t)` for `s <= t_max`.
    tail_mass: Vec<f64>,
    mass_remainder: Bracket,
    mu: Bracket,
}

/// Largest remainder-bracket width accepted, relative to the total mass.
const REMAINDER_TOLERANCE: f64 = 1e-9;

impl Kernel {
    pub const MIN_T_MAX: usize = 1000;
    pub const DEFAULT_T_MAX: usize = 100_000;
    const MAX_T_MAX: usize = 50_000_000;

    pub fn new(alpha: f64, sv: SlowlyVarying, t_max: usize) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return invalid(format!("alpha must be positive, got {alpha}"));
        }
        if (alpha - 1.0).abs() < 1e-12 {
            return invalid("alpha = 1 is not supported");
        }
        sv.validate()?;
        if t_max < Self::MIN_T_MAX {
            return invalid(format!("t_max must be at least {}, got {t_max}", Self::MIN_T_MAX));
        }
        if t_max > Self::MAX_T_MAX {
            return invalid(format!("t_max must be at most {}, got {t_max}", Self::MAX_T_MAX));
        }

        let kappa = sv.effective_kappa();
        let c0 = sv.c0;
        let raw: Vec<f64> = (0..=t_max)
            .map(|t| if t < 2 { 0.0 } else { sv.value(t as f64) * (t as f64).powf(-(2.0 + alpha)) })
            .collect();

        // (t-1) t^{-(2+α)} = t^{-(1+α)} - t^{-(2+α)}
        let rem_hi_term = PowerLogTerm { coef: c0, kappa, a: 1.0 + alpha }.sum_from(t_max as u64 + 1);
        let rem_lo_term = PowerLogTerm { coef: c0, kappa, a: 2.0 + alpha }.sum_from(t_max as u64 + 1);
        let raw_remainder = Bracket::new(rem_hi_term.lo - rem_lo_term.hi, rem_hi_term.hi - rem_lo_term.lo);

        let mut head = CompensatedSum::new();
        for t in (2..=t_max).rev() {
            head.add((t - 1) as f64 * raw[t]);
        }
        let head = head.value();
        // the upper end keeps the total law a (sub-)probability
        let norm = head + raw_remainder.hi;
        let width_rel = raw_remainder.width() / norm + gamma_n(4);
        if width_rel > REMAINDER_TOLERANCE {
            return invalid(format!(
                "t_max = {t_max} leaves a normalization remainder bracket of relative width {width_rel:.3e}"
            ));
        }

        let k: Vec<f64> = raw.iter().map(|w| w / norm).collect();
        let ln_norm = norm.ln();
        let ln_k: Vec<f64> = (0..=t_max)
            .map(|t| {
                if t < 2 {
                    f64::NEG_INFINITY
                } else {
                    sv.ln_value(t as f64) - (2.0 + alpha) * (t as f64).ln() - ln_norm
                }
            })
            .collect();

        let mass_remainder = raw_remainder.scale(1.0 / norm);
        let mut tail_mass = vec![0.0; t_max + 1];
        let mut acc = CompensatedSum::new();
        acc.add(mass_remainder.hi);
        for s in (0..=t_max).rev() {
            tail_mass[s] = acc.value();
            if s >= 2 {
                acc.add((s - 1) as f64 * k[s]);
            }
        }

        let mut kernel = Self {
            alpha,
            sv,
            norm,
            t_max,
            k,
            ln_k,
            tail_mass,
            mass_remainder,
            mu: Bracket::infinite(),
        };
        kernel.mu = kernel.mean_via_marginal();
        Ok(kernel)
    }

    pub fn with_default_cutoff(alpha: f64, sv: SlowlyVarying) -> Result<Self> {
        Self::new(alpha, sv, Self::DEFAULT_T_MAX)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sv(&self) -> SlowlyVarying {
        self.sv
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    /// `K(t)`; zero for `t < 2`, evaluated in closed form beyond the table.
    pub fn k(&self, t: usize) -> f64 {
        if t <= self.t_max {
            self.k[t]
        } else {
            self.ln_k(t).exp()
        }
    }

    pub fn ln_k(&self, t: usize) -> f64 {
        if t <= self.t_max {
            self.ln_k[t]
        } else {
            let x = t as f64;
            self.sv.ln_value(x) - (2.0 + self.alpha) * x.ln() - self.norm.ln()
        }
    }

    /// Cached `K(t)` for `t in 0..=t_max` (entries below 2 are zero).
    pub fn table(&self) -> &[f64] {
        &self.k
    }

    /// `K(0..=t)` as a fresh vector, extending the cache if needed.
    pub fn values_up_to(&self, t: usize) -> Vec<f64> {
        (0..=t).map(|s| self.k(s)).collect()
    }

    /// `Σ_{t > s} (t - 1) K(t)`: probability that a jump has total length above `s`.
    pub fn tail_mass(&self, s: usize) -> f64 {
        if s <= self.t_max {
            return self.tail_mass[s];
        }
        self.tail_mass_beyond(s).hi
    }

    /// Bracket on `Σ_{t > s} (t - 1) K(t)` from the analytic remainder, `s >= t_max`.
    fn tail_mass_beyond(&self, s: usize) -> Bracket {
        let kappa = self.sv.effective_kappa();
        let c = self.sv.c0 / self.norm;
        let a = PowerLogTerm { coef: c, kappa, a: 1.0 + self.alpha }.sum_from(s as u64 + 1);
        let b = PowerLogTerm { coef: c, kappa, a: 2.0 + self.alpha }.sum_from(s as u64 + 1);
        Bracket::new((a.lo - b.hi).max(0.0), a.hi - b.lo)
    }

    /// Bracket on the mass beyond the table, `Σ_{t > t_max} (t - 1) K(t)`.
    pub fn mass_remainder(&self) -> Bracket {
        self.mass_remainder
    }

    /// `Σ_{t=2}^{t_max} (t - 1) K(t)`, summed afresh.
    pub fn head_mass(&self) -> f64 {
        let mut s = CompensatedSum::new();
        for t in (2..=self.t_max).rev() {
            s.add((t - 1) as f64 * self.k[t]);
        }
        s.value()
    }

    /// `μ = E[τ₁⁽¹⁾]`; `+inf` for `α < 1`.
    pub fn mu(&self) -> f64 {
        self.mu.mid()
    }

    pub fn mu_bracket(&self) -> Bracket {
        self.mu
    }

    /// `½ Σ_t t (t - 1) K(t)` with a rigorous bracket; `+inf` for `α < 1`.
    pub fn half_second_factorial_moment(&self) -> Bracket {
        if self.alpha < 1.0 {
            return Bracket::infinite();
        }
        let mut s = CompensatedSum::new();
        for t in (2..=self.t_max).rev() {
            let x = t as f64;
            s.add(0.5 * x * (x - 1.0) * self.k[t]);
        }
        self.with_moment_remainder(s.value())
    }

    /// Mean of the first coordinate from its marginal law
    /// `P(τ₁⁽¹⁾ = n) = Σ_{t > n} K(t)`, i.e. `μ = Σ_n n P(τ₁⁽¹⁾ = n)`.
    fn mean_via_marginal(&self) -> Bracket {
        if self.alpha < 1.0 {
            return Bracket::infinite();
        }
        // contributions of t <= t_max; larger t go to the analytic remainder
        let mut suffix = 0.0;
        let mut s = CompensatedSum::new();
        for n in (1..self.t_max).rev() {
            suffix += self.k[n + 1];
            s.add(n as f64 * suffix);
        }
        self.with_moment_remainder(s.value())
    }

    fn with_moment_remainder(&self, head: f64) -> Bracket {
        // t (t-1)/2 K(t) = c/2 (t^{-α} - t^{-(1+α)}) ln(t+1)^κ
        let kappa = self.sv.effective_kappa();
        let c = 0.5 * self.sv.c0 / self.norm;
        let m = self.t_max as u64 + 1;
        let a = PowerLogTerm { coef: c, kappa, a: self.alpha }.sum_from(m);
        let b = PowerLogTerm { coef: c, kappa, a: 1.0 + self.alpha }.sum_from(m);
        let round = gamma_n(2 * self.t_max) * head;
        Bracket::new(head + a.lo - b.hi - round, head + a.hi - b.lo + round)
    }

    /// Smallest `K(t)` over `2 <= t <= t_hi`.
    pub fn min_k(&self, t_hi: usize) -> f64 {
        (2..=t_hi.max(2)).map(|t| self.k(t)).fold(f64::INFINITY, f64::min)
    }

    /// `max L(t) / min L(t)` over `2 <= t <= t_hi`.
    pub fn sv_ratio(&self, t_hi: usize) -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for t in 2..=t_hi.max(2) {
            let v = self.sv.value(t as f64);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        hi / lo
    }

    /// Rigorous upper bound on `L(x)` for all `x >= t`, `t >= 2`.
    ///
    /// For a positive log exponent `ln(x+1)^κ` is unbounded, so this returns the
    /// envelope constant `Lbar` and growth exponent `η` with
    /// `L(x) <= Lbar (x/t)^η` on `[t, ∞)`.
    pub(crate) fn sv_envelope(&self, t: usize) -> (f64, f64) {
        let kappa = self.sv.effective_kappa();
        let x = t as f64;
        if kappa <= 0.0 {
            // ln(x+1)^κ is non-increasing
            return (self.sv.value(x), 0.0);
        }
        // d/du ln ln(e^u + 1) <= 1/ln(t+1) for u >= ln t, so
        // ln(x+1) <= ln(t+1) (x/t)^{1/ln(t+1)}
        (self.sv.value(x), kappa / (x + 1.0).ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k15() -> Kernel {
        Kernel::new(1.5, SlowlyVarying::constant(1.0), 10_000).unwrap()
    }

    #[test]
    fn rejects_invalid_parameters() {
        let sv = SlowlyVarying::constant(1.0);
        assert!(Kernel::new(0.0, sv, 10_000).is_err());
        assert!(Kernel::new(-1.0, sv, 10_000).is_err());
        assert!(Kernel::new(1.0, sv, 10_000).is_err());
        assert!(Kernel::new(1.5, sv, 999).is_err());
        assert!(Kernel::new(1.5, SlowlyVarying::constant(0.0), 10_000).is_err());
        assert!(Kernel::new(f64::NAN, sv, 10_000).is_err());
    }

    #[test]
    fn normalization_within_tolerance() {
        for alpha in [0.3, 0.5, 1.5, 3.0] {
            for sv in [SlowlyVarying::constant(2.0), SlowlyVarying::log_power(1.0, 1.5)] {
                let k = Kernel::new(alpha, sv, 5_000).unwrap();
                let total = k.head_mass() + k.mass_remainder().hi;
                assert!((total - 1.0).abs() < 1e-12, "alpha={alpha} total={total}");
            }
        }
    }

    #[test]
    fn small_alpha_at_minimal_cutoff_is_accepted() {
        // the remainder itself is large, but its bracket is tight
        let k = Kernel::new(0.5, SlowlyVarying::constant(1.0), 1000).unwrap();
        assert!(k.mass_remainder().lo > 0.01);
        assert!(k.mass_remainder().width() < 1e-12);
    }

    #[test]
    fn mean_is_infinite_below_one() {
        let k = Kernel::new(0.5, SlowlyVarying::constant(1.0), 2000).unwrap();
        assert!(k.mu().is_infinite());
        assert!(k.half_second_factorial_moment().lo.is_infinite());
    }

    #[test]
    fn mean_matches_half_second_factorial_moment() {
        for alpha in [1.5, 2.5] {
            let k = Kernel::new(alpha, SlowlyVarying::constant(1.0), 20_000).unwrap();
            let a = k.mu_bracket();
            let b = k.half_second_factorial_moment();
            assert!(a.lo <= b.hi && b.lo <= a.hi, "{a:?} {b:?}");
            assert!((a.mid() - b.mid()).abs() < 1e-9);
        }
    }

    #[test]
    fn table_and_closed_form_agree() {
        let k = k15();
        let t = k.t_max();
        let inside = k.k(t);
        let outside_ratio = k.k(t + 1) / inside;
        let expect = (t as f64 / (t + 1) as f64).powf(3.5);
        assert!((outside_ratio / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tail_mass_is_continuous_across_cutoff() {
        let k = k15();
        let t = k.t_max();
        let inside = k.tail_mass(t);
        let outside = k.tail_mass(t + 1) + t as f64 * k.k(t + 1);
        assert!((inside / outside - 1.0).abs() < 1e-10);
        assert_eq!(k.tail_mass(1), k.tail_mass(0));
        assert!((k.tail_mass(1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regular_variation_slope() {
        let k = Kernel::new(1.5, SlowlyVarying::constant(1.0), 100_000).unwrap();
        let slope = (k.k(100_000).ln() - k.k(1000).ln()) / (100f64).ln();
        assert!((slope + 3.5).abs() < 0.01);
    }

    #[test]
    fn sv_envelope_dominates() {
        let k = Kernel::new(1.5, SlowlyVarying::log_power(1.0, 2.0), 2000).unwrap();
        let t = 100;
        let (lbar, eta) = k.sv_envelope(t);
        for x in [100.0, 150.0, 1e3, 1e5, 1e9] {
            assert!(k.sv().value(x) <= lbar * (x / t as f64).powf(eta) * (1.0 + 1e-12));
        }
    }
}
