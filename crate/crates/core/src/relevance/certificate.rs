//! Fractional-moment delocalization certificate.
//!
//! With `A_{i,j}` replaced by deterministic upper bounds and the kernel tail
//! sums by upper bounds, `ρ₁ + ρ₂ + ρ₃ <= 1` implies zero quenched free
//! energy at `(β, h)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{invalid, Result};
use crate::kernel::{Kernel, TailSumTable};
use crate::numeric::gamma_n;
use crate::parallel::map_indexed;
use crate::polymer::{DisorderLaw, Pinning};

use super::frac_moment::{frac_moment_jensen_bounds, frac_moment_tilt_bounds, max_tilt, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoTerms {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
}

impl RhoTerms {
    pub fn sum(&self) -> f64 {
        self.rho1 + self.rho2 + self.rho3
    }
}

/// Grouped `ρ` sums from a `k x k` grid `A[i][j]`, `0 <= i, j < k`:
///
/// ```text
/// ρ₁ = E z^δ Σ_{i,j<k} A_{i,j} T2(2k - i - j)
/// ρ₂ = E z^δ Σ_{n=1}^{k-1} Σ_{i<n} Σ_{j<k} A_{i,j} T1(n - i + k - j)
/// ```
///
/// and `ρ₃` is `ρ₂` of the transposed grid. Every step adds non-negative
/// terms; the result is inflated by `(1 + γ_n)` for the rounding.
pub fn rho_terms(a: &Grid, k: usize, tails: &TailSumTable, ez_delta: f64) -> Result<RhoTerms> {
    if k == 0 || a.len() < k || a.iter().take(k).any(|r| r.len() < k) {
        return invalid(format!("A grid must cover 0 <= i, j < k = {k}"));
    }
    if tails.s_max() < 2 * k {
        return invalid(format!("tail table reaches s = {}, need {}", tails.s_max(), 2 * k));
    }
    if a.iter().take(k).flatten().take(k * k).any(|x| !(*x >= 0.0)) {
        return invalid("A grid has negative or NaN entries");
    }
    let mut rho1 = 0.0;
    for (i, row) in a.iter().enumerate().take(k) {
        for (j, &x) in row.iter().enumerate().take(k) {
            rho1 += x * tails.t2(2 * k - i - j);
        }
    }
    let at: Grid = (0..k).map(|j| (0..k).map(|i| a[i][j]).collect()).collect();
    let rho2 = rho2_sum(a, k, tails);
    let rho3 = rho2_sum(&at, k, tails);
    let infl = (1.0 + gamma_n(2 * k * k + 8)) * ez_delta;
    Ok(RhoTerms { rho1: rho1 * infl, rho2: rho2 * infl, rho3: rho3 * infl })
}

/// `Σ_{i,j<k} A_{i,j} Σ_{s=k-j+1}^{2k-1-i-j} T1(s)`, the inner sum grown
/// term by term as `i` decreases.
fn rho2_sum(a: &Grid, k: usize, tails: &TailSumTable) -> f64 {
    let mut total = 0.0;
    for j in 0..k {
        let mut inner = 0.0;
        for i in (0..k).rev() {
            // the range for i is the range for i + 1 plus s = 2k - 1 - i - j
            if i + 1 < k {
                inner += tails.t1(2 * k - 1 - i - j);
            }
            total += a[i][j] * inner;
        }
    }
    total
}

/// `E[z^δ] = e^{δh} Q(δβ)`.
pub fn ez_delta(law: DisorderLaw, pinning: Pinning, delta: f64) -> f64 {
    (delta * pinning.h + law.log_q(delta * pinning.beta)).exp()
}

/// Candidate tilts; every `(λ, ℓ)` pair gives a valid bound in every cell,
/// and each cell keeps the smallest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltSchedule {
    pub lambdas: Vec<f64>,
    pub ells: Vec<f64>,
    /// Also try `λ = (i ℓ_i)^{-1/2}` with the matching `ℓ_i` at dyadic `i`.
    pub include_asymptotic_pairs: bool,
}

impl TiltSchedule {
    /// 8 log-spaced `λ` up to the Hölder limit and dyadic `ℓ` up to `k`.
    pub fn default_for(k: usize, delta: f64) -> Self {
        let lmax = max_tilt(delta);
        let lambdas = (0..8).map(|p| lmax * 2f64.powi(-p)).collect();
        let mut ells = Vec::new();
        let mut e = 1usize;
        while e <= k.max(1) {
            ells.push(e as f64);
            e *= 2;
        }
        Self { lambdas, ells, include_asymptotic_pairs: true }
    }

    fn candidates(&self, alpha: f64, epsilon: f64, k: usize, delta: f64) -> Vec<(f64, f64)> {
        let lmax = max_tilt(delta);
        let mut out: Vec<(f64, f64)> = Vec::new();
        for &l in &self.lambdas {
            for &e in &self.ells {
                if l > 0.0 && l <= lmax {
                    out.push((l, e));
                }
            }
        }
        if self.include_asymptotic_pairs && alpha > 1.0 {
            let mut i = 2usize;
            while i <= k {
                let ell = asymptotic_ell(i, alpha, epsilon);
                let lam = 1.0 / (i as f64 * ell).sqrt();
                if lam <= lmax {
                    out.push((lam, ell));
                }
                i *= 2;
            }
        }
        out
    }
}

/// `ℓ_i = i^{(1+ε³)/α}` for `α <= 2`, `sqrt(i log i)` above.
pub fn asymptotic_ell(i: usize, alpha: f64, epsilon: f64) -> f64 {
    let x = i as f64;
    if alpha <= 2.0 {
        x.powf((1.0 + epsilon.powi(3)) / alpha)
    } else {
        (x * x.ln().max(1.0)).sqrt()
    }
}

/// Coarse-graining scale `k_β = 1/Δ_β^ε`; `None` for `α <= 1`.
pub fn asymptotic_scale(alpha: f64, beta: f64, epsilon: f64) -> Option<f64> {
    if alpha <= 1.0 || beta <= 0.0 {
        return None;
    }
    if alpha <= 2.0 {
        Some(beta.powf(-(1.0 + epsilon) * 2.0 * alpha / (alpha - 1.0)))
    } else {
        Some(beta.powi(-4) * beta.ln().abs().powi(6))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertParams {
    pub delta: f64,
    pub k_scale: usize,
    pub epsilon: f64,
    pub schedule: Option<TiltSchedule>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSource {
    Exact,
    Jensen,
    HolderTilt,
}

impl BoundSource {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundSource::Exact => "exact",
            BoundSource::Jensen => "jensen",
            BoundSource::HolderTilt => "holder_tilt",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateReport {
    pub alpha: f64,
    pub beta: f64,
    pub h: f64,
    pub delta: f64,
    pub k: usize,
    /// `Δ = h - h_c^a(β)`.
    pub h_gap: f64,
    pub a_upper: Grid,
    pub which_bound: Vec<Vec<BoundSource>>,
    pub rho: RhoTerms,
    pub rho_sum: f64,
    pub certified: bool,
    /// `Δ` when certified: `h_c(β) >= h`.
    pub shift_lower_bound: Option<f64>,
    pub per_cell_bound_source: BTreeMap<String, usize>,
    /// `(2 + α) δ > 4`, the stronger condition used for `α > 2`.
    pub strong_delta_condition: bool,
}

/// Build `A_upper`, the `ρ` terms and the verdict at `(β, h)`.
pub fn deloc_certificate(
    kernel: &Kernel,
    law: DisorderLaw,
    beta: f64,
    h: f64,
    params: &CertParams,
    budget: &Budget,
) -> Result<CertificateReport> {
    let (delta, k) = (params.delta, params.k_scale);
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0, 1), got {delta}"));
    }
    if (2.0 + kernel.alpha()) * delta <= 2.0 {
        return invalid(format!("(2 + α) δ = {} must exceed 2", (2.0 + kernel.alpha()) * delta));
    }
    if k < 1 {
        return invalid("k_scale must be at least 1");
    }
    let gap = h + law.log_q(beta);
    if !(gap > 0.0) {
        return invalid(format!("Δ = h - h_c^a(β) = {gap} must be positive"));
    }
    if gap * k as f64 > 1.0 {
        return invalid(format!("Δ k = {} exceeds 1", gap * k as f64));
    }
    let pinning = Pinning::new(beta, h);
    let size = k.saturating_sub(1);
    let jensen = frac_moment_jensen_bounds(kernel, pinning, law, size, size, delta, budget)?;
    let mut a = jensen.bound.clone();
    let mut src = vec![vec![BoundSource::Jensen; k]; k];
    if beta > 0.0 && k > 1 {
        let schedule = params.schedule.clone().unwrap_or_else(|| TiltSchedule::default_for(k, delta));
        let cands = schedule.candidates(kernel.alpha(), params.epsilon, k, delta);
        budget.check(Budget::grid_work(size, size).saturating_mul(cands.len() as u128 + 1))?;
        let tilts: Vec<Result<Grid>> = map_indexed(cands.len(), |c| {
            let (lam, ell) = cands[c];
            frac_moment_tilt_bounds(kernel, pinning, law, size, size, delta, lam, ell, &Budget::unlimited())
        });
        for t in tilts {
            let t = t?;
            for i in 0..k {
                for j in 0..k {
                    if t[i][j] < a[i][j] {
                        a[i][j] = t[i][j];
                        src[i][j] = BoundSource::HolderTilt;
                    }
                }
            }
        }
    }
    // conventions A_{0,0} = 1 and A_{i,0} = A_{0,j} = 0 hold exactly
    for i in 0..k {
        for j in 0..k {
            if i == 0 || j == 0 {
                a[i][j] = if i == 0 && j == 0 { 1.0 } else { 0.0 };
                src[i][j] = BoundSource::Exact;
            }
        }
    }
    let tails = TailSumTable::build(kernel, delta, 2 * k)?;
    let rho = rho_terms(&a, k, &tails, ez_delta(law, pinning, delta))?;
    let rho_sum = rho.sum() * (1.0 + gamma_n(4));
    let certified = rho_sum <= 1.0;
    let mut hist = BTreeMap::new();
    for s in src.iter().flatten() {
        *hist.entry(s.as_str().to_string()).or_insert(0) += 1;
    }
    Ok(CertificateReport {
        alpha: kernel.alpha(),
        beta,
        h,
        delta,
        k,
        h_gap: gap,
        a_upper: a,
        which_bound: src,
        rho,
        rho_sum,
        certified,
        shift_lower_bound: certified.then_some(gap),
        per_cell_bound_source: hist,
        strong_delta_condition: (2.0 + kernel.alpha()) * delta > 4.0,
    })
}
