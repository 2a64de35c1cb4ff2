//! Upper bounds on the tail sums of `K(t)^δ`.

use super::{Kernel, PowerLogTerm};
use crate::error::{invalid, Result};
use crate::numeric::gamma_n;

/// `T1(s) >= Σ_{t >= s} K(t)^δ` and `T2(s) >= Σ_{t >= s} (t - s + 1) K(t)^δ`
/// for `0 <= s <= s_max`.
#[derive(Debug, Clone)]
pub struct TailSumTable {
    delta: f64,
    t1: Vec<f64>,
    t2: Vec<f64>,
    truncated_at: Option<usize>,
}

impl TailSumTable {
    /// Rigorous upper bounds for the full kernel.
    pub fn build(kernel: &Kernel, delta: f64, s_max: usize) -> Result<Self> {
        check_delta(kernel, delta)?;
        let t_max = kernel.t_max();
        if s_max > t_max {
            return invalid(format!("s_max = {s_max} exceeds the kernel cutoff {t_max}"));
        }
        let (r1, r2) = remainders_beyond(kernel, delta)?;
        Ok(Self::from_terms(kernel, delta, s_max, t_max, r1, r2, None))
    }

    /// Exact sums of the kernel cut at `t <= t_cut` (no remainder).
    ///
    /// Used to compare against brute-force sums over the same finite range.
    pub fn truncated(kernel: &Kernel, delta: f64, s_max: usize, t_cut: usize) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return invalid(format!("delta must lie in (0, 1], got {delta}"));
        }
        if t_cut > kernel.t_max() || s_max > t_cut {
            return invalid(format!(
                "need s_max <= t_cut <= t_max, got {s_max}, {t_cut}, {}",
                kernel.t_max()
            ));
        }
        Ok(Self::from_terms(kernel, delta, s_max, t_cut, 0.0, 0.0, Some(t_cut)))
    }

    fn from_terms(
        kernel: &Kernel,
        delta: f64,
        s_max: usize,
        t_hi: usize,
        r1: f64,
        r2: f64,
        truncated_at: Option<usize>,
    ) -> Self {
        let inflate = if truncated_at.is_some() { 1.0 } else { 1.0 + gamma_n(2 * t_hi + 16) };
        let mut t1 = vec![0.0; s_max + 1];
        let mut t2 = vec![0.0; s_max + 1];
        // T1(s) = T1(s+1) + g(s), T2(s) = T2(s+1) + T1(s): both pure sums of
        // positive terms, so the rounding is covered by the final inflation
        let mut a1 = r1;
        let mut a2 = r2;
        for s in (0..=t_hi).rev() {
            if s >= 2 {
                a1 += (delta * kernel.ln_k(s)).exp();
            }
            a2 += a1;
            if s <= s_max {
                t1[s] = a1 * inflate;
                t2[s] = a2 * inflate;
            }
        }
        Self { delta, t1, t2, truncated_at }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn s_max(&self) -> usize {
        self.t1.len() - 1
    }

    pub fn truncated_at(&self) -> Option<usize> {
        self.truncated_at
    }

    pub fn t1(&self, s: usize) -> f64 {
        self.t1[s]
    }

    pub fn t2(&self, s: usize) -> f64 {
        self.t2[s]
    }
}

fn check_delta(kernel: &Kernel, delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return invalid(format!("delta must lie in (0, 1], got {delta}"));
    }
    let p = (2.0 + kernel.alpha()) * delta;
    if p <= 2.0 {
        return invalid(format!(
            "(2 + alpha) * delta = {p} must exceed 2 for the second tail sum to converge"
        ));
    }
    Ok(())
}

/// Upper bounds on `Σ_{t > T} g(t)` and `Σ_{t > T} (t - T) g(t)`, `g = K^δ`,
/// from a pure-power majorant of `K` beyond the cutoff `T`.
fn remainders_beyond(kernel: &Kernel, delta: f64) -> Result<(f64, f64)> {
    let m = kernel.t_max() + 1;
    let (lbar, eta) = kernel.sv_envelope(m);
    let alpha = kernel.alpha();
    // K(x) <= lbar (x/m)^η / (norm x^{2+α}) = c x^{-(2+α-η)} on [m, ∞)
    let c = (lbar * (m as f64).powf(-eta) / kernel.norm()).powf(delta);
    let p = (2.0 + alpha - eta) * delta;
    if p <= 2.0 {
        return invalid(format!(
            "the log factor leaves a tail exponent {p} <= 2 at cutoff {}; raise t_max or delta",
            kernel.t_max()
        ));
    }
    let s0 = PowerLogTerm::power(c, p).sum_from(m as u64);
    let s1 = PowerLogTerm::power(c, p - 1.0).sum_from(m as u64);
    // Σ_{t>=m} (t - m + 1) t^{-p} = Σ t^{1-p} - (m - 1) Σ t^{-p}
    let r2 = s1.hi - (m as f64 - 1.0) * s0.lo;
    Ok((s0.hi, r2.max(0.0)))
}
