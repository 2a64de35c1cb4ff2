//! The intersection renewal `σ = τ ∩ τ'` of two independent copies.
//!
//! `P((n, m) ∈ σ) = v(n, m) = u(n, m)²`. The collapsed one-dimensional renewal
//! `σ̱ = {n + m : (n, m) ∈ σ}` has mass `ū_k = Σ_{n+m=k} v(n, m)`, which gives
//! the law of `σ̱₁` up to `k = min(N, M)` with only `O(N²)` work; the full 2-D
//! inter-arrival law `q` is obtained by inversion on a (smaller) box.

use serde::{Deserialize, Serialize};

use crate::bracket::Bracket;
use crate::conv2d::{solve_causal, Table2};
use crate::error::{invalid, Error, Result};
use crate::fit::ExponentFit;
use crate::kernel::Kernel;
use crate::numeric::dyadic_points;
use crate::renewal::RenewalMassGrid;

/// Largest negative `q` entry attributed to cancellation and clamped to zero.
pub const NEGATIVE_CLAMP: f64 = -1e-14;

#[derive(Debug, Clone)]
pub struct IntersectionTables {
    v: Table2,
    /// `U(N', M') = Σ_{n<=N', m<=M'} v(n, m)`.
    u_prefix: Table2,
    /// `ū_k` for `k <= min(N, M)`.
    ubar: Vec<f64>,
    /// `q̱_k = P(σ̱₁ = k)` for `k <= min(N, M)`.
    qbar: Vec<f64>,
    /// 2-D inter-arrival law on `[0, q_extent]²`.
    q: Table2,
    q_prefix: Table2,
    clamped: usize,
}

/// Build the tables; `q_extent` bounds the box of the 2-D inversion.
pub fn intersection_tables(grid: &RenewalMassGrid, q_extent: usize) -> Result<IntersectionTables> {
    let (n_max, m_max) = (grid.n_max(), grid.m_max());
    let v = Table2::from_fn(n_max, m_max, |n, m| {
        let u = grid.u(n, m);
        u * u
    });
    let u_prefix = v.prefix_sums();

    let side = n_max.min(m_max);
    let ubar: Vec<f64> = (0..=side)
        .map(|k| (0..=k).filter(|&n| n <= n_max && k - n <= m_max).map(|n| v.get(n, k - n)).sum())
        .collect();
    let mut qbar = vec![0.0; side + 1];
    for k in 1..=side {
        let mut s = ubar[k];
        for j in 1..k {
            s -= qbar[j] * ubar[k - j];
        }
        qbar[k] = s;
    }

    let qe = q_extent.min(side);
    let vq = Table2::from_fn(qe, qe, |n, m| v.get(n, m));
    let mut clamped = 0usize;
    let q = solve_causal(&vq, -1.0, &vq, |n, row| {
        for (m, x) in row.iter_mut().enumerate().skip(1) {
            if *x < 0.0 {
                if *x < NEGATIVE_CLAMP {
                    return Err(Error::Numerical(format!("inter-arrival law q({n}, {m}) = {x:e} < 0")));
                }
                *x = 0.0;
                clamped += 1;
            }
        }
        Ok(())
    })?;
    let q_prefix = q.prefix_sums();
    Ok(IntersectionTables { v, u_prefix, ubar, qbar, q, q_prefix, clamped })
}

/// Bracketed termination diagnostics of `σ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TerminationReport {
    pub persistent: bool,
    /// `E|σ|`, origin included; infinite when persistent.
    pub e_abs_sigma: Bracket,
    /// `P(σ₁ < ∞) = 1 - 1/E|σ|`.
    pub p_sigma1_finite: Bracket,
    /// Ratio of the last two dyadic increments of `U_{N,N}`.
    pub increment_ratio: f64,
}

/// One row of the tail-constant check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailConstantPoint {
    pub n: usize,
    pub u_nn: f64,
    pub tail: f64,
    pub product: f64,
}

/// `2^ρ sin(πρ) / (πρ)`.
pub fn tail_constant_target(rho: f64) -> f64 {
    let x = std::f64::consts::PI * rho;
    2f64.powf(rho) * x.sin() / x
}

impl IntersectionTables {
    pub fn n_max(&self) -> usize {
        self.v.n_max()
    }

    pub fn m_max(&self) -> usize {
        self.v.m_max()
    }

    pub fn q_extent(&self) -> usize {
        self.q.n_max()
    }

    pub fn v(&self, n: usize, m: usize) -> f64 {
        self.v.get(n, m)
    }

    pub fn q(&self, n: usize, m: usize) -> f64 {
        self.q.get(n, m)
    }

    /// Number of cancellation negatives set to zero during inversion.
    pub fn clamped_count(&self) -> usize {
        self.clamped
    }

    /// `U_{N', M'}` (origin included).
    pub fn u_box(&self, n: usize, m: usize) -> f64 {
        self.u_prefix.get(n, m)
    }

    /// `Σ q` over the inversion box.
    pub fn sigma_total_mass(&self) -> f64 {
        let e = self.q_extent();
        self.q_prefix.get(e, e)
    }

    /// `P(σ̱₁ = k)`, `k <= min(N, M)`.
    pub fn qbar(&self, k: usize) -> f64 {
        self.qbar[k]
    }

    pub fn ubar(&self, k: usize) -> f64 {
        self.ubar[k]
    }

    /// `P(σ̱₁ > s)`, `s <= min(N, M)`.
    pub fn tail(&self, s: usize) -> f64 {
        1.0 - self.qbar[1..=s].iter().sum::<f64>()
    }

    /// `E[e^{λ |σ ∩ (0,N] x (0,M]|}]` for each requested box; `+inf` when the
    /// value exceeds the `f64` range.
    ///
    /// The tilted mass `ŭ = δ₀ + e^λ q ⊛ ŭ` does not depend on the box, so it
    /// is solved once on the largest box; each value is then
    /// `Σ ŭ(n, m) P(next arrival leaves the box)`.
    pub fn overlap_mgf_many(&self, lambda: f64, boxes: &[(usize, usize)]) -> Result<Vec<f64>> {
        if !lambda.is_finite() {
            return invalid(format!("lambda must be finite, got {lambda}"));
        }
        if boxes.is_empty() {
            return Ok(Vec::new());
        }
        if lambda == 0.0 {
            return Ok(vec![1.0; boxes.len()]);
        }
        let n_top = boxes.iter().map(|b| b.0).max().unwrap_or(0);
        let m_top = boxes.iter().map(|b| b.1).max().unwrap_or(0);
        let e = self.q_extent();
        if n_top > e || m_top > e {
            return invalid(format!("box ({n_top}, {m_top}) exceeds the inversion extent {e}"));
        }
        let z = lambda.exp();
        let qa = Table2::from_fn(n_top, m_top, |n, m| z * self.q.get(n, m));
        // rows from the first overflowing one on are unusable
        let mut bad_row = usize::MAX;
        let uv = solve_causal(&qa, z, &self.q, |n, row| {
            if bad_row == usize::MAX && row.iter().any(|x| !x.is_finite()) {
                bad_row = n;
            }
            Ok(())
        })?;
        let mut out = Vec::with_capacity(boxes.len());
        for &(bn, bm) in boxes {
            if bn >= bad_row {
                out.push(f64::INFINITY);
                continue;
            }
            // the origin contributes 1 * P(σ₁ leaves the box)
            let mut total = 1.0 - self.q_prefix.get(bn, bm);
            for n in 1..=bn {
                for m in 1..=bm {
                    total += uv.get(n, m) * (1.0 - self.q_prefix.get(bn - n, bm - m));
                }
            }
            out.push(if total.is_nan() { f64::INFINITY } else { total });
        }
        Ok(out)
    }

    pub fn overlap_mgf(&self, lambda: f64, n: usize, m: usize) -> Result<f64> {
        Ok(self.overlap_mgf_many(lambda, &[(n, m)])?[0])
    }

    /// `(U_n - U_{n/2}) / U_n` on the diagonal.
    pub fn u_increment_ratio(&self, n: usize) -> f64 {
        let a = self.u_box(n, n);
        let b = self.u_box(n / 2, n / 2);
        (a - b) / a
    }

    /// Bracket `E|σ|` and `P(σ₁ < ∞)`; `rel_tol` caps the relative bracket width.
    pub fn sigma_termination_report(&self, kernel: &Kernel, rel_tol: f64) -> Result<TerminationReport> {
        let side = self.n_max().min(self.m_max());
        let l = 1usize << (usize::BITS - 1 - side.leading_zeros());
        if l < 8 {
            return invalid("termination report needs a grid of side at least 8");
        }
        let d1 = self.u_box(l, l) - self.u_box(l / 2, l / 2);
        let d0 = self.u_box(l / 2, l / 2) - self.u_box(l / 4, l / 4);
        let r = d1 / d0;
        if kernel.alpha() > 1.0 {
            return Ok(TerminationReport {
                persistent: true,
                e_abs_sigma: Bracket::infinite(),
                p_sigma1_finite: Bracket::point(1.0),
                increment_ratio: r,
            });
        }
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Inconclusive(format!("U increments not contracting (ratio {r})")));
        }
        let lo = self.u_box(l, l);
        // geometric extrapolation of the dyadic increments, doubled for safety
        let hi = lo + 2.0 * d1 * r / (1.0 - r);
        if (hi - lo) / lo > rel_tol {
            return Err(Error::Inconclusive(format!(
                "E|σ| bracket [{lo}, {hi}] wider than {rel_tol} relative at N = {l}"
            )));
        }
        Ok(TerminationReport {
            persistent: false,
            e_abs_sigma: Bracket::new(lo, hi),
            p_sigma1_finite: Bracket::new(1.0 - 1.0 / lo, 1.0 - 1.0 / hi),
            increment_ratio: r,
        })
    }

    /// `P(σ̱₁ > N) U_{N,N}` at each `N`.
    pub fn tail_constant_check(&self, n_list: &[usize]) -> Result<Vec<TailConstantPoint>> {
        let side = self.n_max().min(self.m_max());
        n_list
            .iter()
            .map(|&n| {
                if n > side {
                    return invalid(format!("N = {n} exceeds grid side {side}"));
                }
                let u_nn = self.u_box(n, n);
                let tail = self.tail(n);
                Ok(TailConstantPoint { n, u_nn, tail, product: tail * u_nn })
            })
            .collect()
    }

    /// Slope of `log U_{N,N}` against `log N` over the dyadic points of `window`.
    pub fn fit_u_exponent(&self, window: (usize, usize)) -> Result<ExponentFit> {
        let side = self.n_max().min(self.m_max());
        if window.1 > side || window.0 == 0 {
            return invalid(format!("window {window:?} outside grid of side {side}"));
        }
        let pts = dyadic_points(window.0, window.1).into_iter().map(|n| (n as f64, self.u_box(n, n))).collect();
        ExponentFit::from_points(pts)
    }

    /// Slope of the dyadic increments `U_{N,N} - U_{N/2,N/2}` against `N`.
    /// Removes the additive constant in `U` that biases the direct fit at
    /// moderate `N`; reported next to [`Self::fit_u_exponent`].
    pub fn fit_u_increment_exponent(&self, window: (usize, usize)) -> Result<ExponentFit> {
        let side = self.n_max().min(self.m_max());
        if window.1 > side || window.0 < 2 {
            return invalid(format!("window {window:?} outside grid of side {side}"));
        }
        let pts = dyadic_points(window.0, window.1)
            .into_iter()
            .map(|n| (n as f64, self.u_box(n, n) - self.u_box(n / 2, n / 2)))
            .collect();
        ExponentFit::from_points(pts)
    }
}
