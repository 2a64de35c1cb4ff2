//! Bivariate renewal: mass function, path sampling, k-step laws and
//! exponent-level checks of the renewal theorems.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::dp::{ConstantWeight, Diag, DiagGrid};
use crate::error::{invalid, Result};
use crate::fit::ExponentFit;
use crate::kernel::Kernel;
use crate::numeric::dyadic_points;
use crate::rng;
use crate::scaled::ScaledNonneg;

/// `u[n][m] = P((n, m) ∈ τ)` on `[0, N] x [0, M]`.
#[derive(Debug, Clone)]
pub struct RenewalMassGrid {
    grid: DiagGrid,
}

/// Exact renewal mass function on `[0, n_max] x [0, m_max]`.
pub fn renewal_mass(kernel: &Kernel, n_max: usize, m_max: usize, budget: &Budget) -> Result<RenewalMassGrid> {
    budget.check_grid(n_max, m_max)?;
    let k = kernel.values_up_to(n_max + m_max);
    let grid = DiagGrid::renewal(n_max, m_max, &k, &ConstantWeight(1.0))?;
    Ok(RenewalMassGrid { grid })
}

impl RenewalMassGrid {
    pub fn n_max(&self) -> usize {
        self.grid.n_max()
    }

    pub fn m_max(&self) -> usize {
        self.grid.m_max()
    }

    pub fn get(&self, n: usize, m: usize) -> ScaledNonneg {
        self.grid.get(n, m)
    }

    /// `u[n][m]` as `f64` (renewal masses never leave the `f64` range at desk scale).
    pub fn u(&self, n: usize, m: usize) -> f64 {
        self.grid.get(n, m).to_f64()
    }

    pub fn ln_u(&self, n: usize, m: usize) -> f64 {
        self.grid.ln(n, m)
    }

    /// `Σ_{n+m=d} u[n][m]` over the stored rectangle.
    pub fn diag_mass(&self, d: usize) -> f64 {
        self.grid.diag_total(d).to_f64()
    }

    /// Dense copy `u[n][m]`.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..=self.n_max()).map(|n| (0..=self.m_max()).map(|m| self.u(n, m)).collect()).collect()
    }
}

/// Inverse-CDF sampler of single jumps.
#[derive(Debug, Clone)]
pub struct JumpSampler {
    alpha: f64,
    t_max: usize,
    /// `cdf[t] = Σ_{r <= t} (r - 1) K(r)`.
    cdf: Vec<f64>,
}

impl JumpSampler {
    pub fn new(kernel: &Kernel) -> Self {
        let t_max = kernel.t_max();
        let mut cdf = vec![0.0; t_max + 1];
        let mut acc = 0.0;
        for (t, c) in cdf.iter_mut().enumerate().skip(2) {
            acc += (t - 1) as f64 * kernel.k(t);
            *c = acc;
        }
        Self { alpha: kernel.alpha(), t_max, cdf }
    }

    /// Total length `t = i + j` of one jump.
    pub fn sample_total<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let x: f64 = rng.gen();
        if x < self.cdf[self.t_max] {
            let t = self.cdf.partition_point(|&c| c <= x);
            return t.max(2) as u64;
        }
        // continuous Pareto tail beyond the table, rounded up
        let v: f64 = 1.0 - rng.gen::<f64>();
        let t = (self.t_max as f64 * v.powf(-1.0 / self.alpha)).ceil();
        if t >= 1e18 {
            1_000_000_000_000_000_000
        } else {
            (t as u64).max(self.t_max as u64 + 1)
        }
    }

    pub fn sample_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> (u64, u64) {
        let t = self.sample_total(rng);
        let i = rng.gen_range(1..t);
        (i, t - i)
    }
}

/// Renewal points `τ_0 = (0,0), τ_1, …` inside `[0, N] x [0, M]`.
pub fn sample_renewal<R: Rng + ?Sized>(sampler: &JumpSampler, n_max: u64, m_max: u64, rng: &mut R) -> Vec<(u64, u64)> {
    let mut pts = vec![(0, 0)];
    let (mut n, mut m) = (0u64, 0u64);
    loop {
        let (i, j) = sampler.sample_jump(rng);
        n = n.saturating_add(i);
        m = m.saturating_add(j);
        if n > n_max || m > m_max {
            return pts;
        }
        pts.push((n, m));
    }
}

/// `P(τ_steps = (n, m))` on `[0, N]^2` by repeated exact convolution.
pub struct KStepLaw {
    grid: DiagGrid,
}

impl KStepLaw {
    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.grid.get(n, m).to_f64()
    }

    pub fn total(&self) -> f64 {
        let side = self.grid.n_max();
        (0..=2 * side).map(|d| self.grid.diag_total(d).to_f64()).sum()
    }
}

pub const MAX_STEPS: usize = 64;

pub fn k_step_pmf(kernel: &Kernel, steps: usize, n_max: usize, budget: &Budget) -> Result<KStepLaw> {
    if steps > MAX_STEPS {
        return invalid(format!("steps must be at most {MAX_STEPS}, got {steps}"));
    }
    budget.check(Budget::grid_work(n_max, n_max) * steps.max(1) as u128)?;
    let k = kernel.values_up_to(2 * n_max);
    let mut grid = DiagGrid::delta(n_max, n_max);
    for _ in 0..steps {
        grid = DiagGrid::convolve(&grid, &k, &ConstantWeight(1.0))?;
    }
    Ok(KStepLaw { grid })
}

/// One row of the local large-deviation check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalDeviationPoint {
    pub steps: usize,
    pub n: usize,
    /// `P(τ_k = (n, n)) / (k K(n - μ k))`.
    pub ratio: f64,
}

/// Ratios `P(τ_k = (n,n)) / (k K(n - μk))` over `n - μk >= c sqrt(k log k)`.
pub fn local_deviation_ratios(
    kernel: &Kernel,
    steps_list: &[usize],
    n_max: usize,
    c: f64,
    budget: &Budget,
) -> Result<Vec<LocalDeviationPoint>> {
    let mu = kernel.mu();
    if !mu.is_finite() {
        return invalid("the local deviation bound needs a finite mean (alpha > 1)");
    }
    let mut out = Vec::new();
    for &k in steps_list {
        let law = k_step_pmf(kernel, k, n_max, budget)?;
        let kf = k as f64;
        let gap = c * (kf * kf.max(2.0).ln()).sqrt();
        for n in 1..=n_max {
            let x = n as f64 - mu * kf;
            if x < gap || x < 2.0 {
                continue;
            }
            let kx = kernel.k(x.floor() as usize);
            out.push(LocalDeviationPoint { steps: k, n, ratio: law.get(n, n) / (kf * kx) });
        }
    }
    Ok(out)
}

/// Slope of `log u[n][n]` against `log n` over the dyadic points of `window`.
pub fn fit_diagonal_exponent(grid: &RenewalMassGrid, window: (usize, usize)) -> Result<ExponentFit> {
    let side = grid.n_max().min(grid.m_max());
    if window.1 > side || window.0 == 0 {
        return invalid(format!("window {window:?} outside grid of side {side}"));
    }
    let pts = dyadic_points(window.0, window.1).into_iter().map(|n| (n as f64, grid.u(n, n))).collect();
    ExponentFit::from_points(pts)
}

/// Slope of `log u[n][n + r]` against `log r` over the dyadic `r` of `r_window`.
pub fn fit_offdiagonal_exponent(grid: &RenewalMassGrid, n_fixed: usize, r_window: (usize, usize)) -> Result<ExponentFit> {
    if n_fixed > grid.n_max() || n_fixed + r_window.1 > grid.m_max() || r_window.0 == 0 {
        return invalid(format!(
            "off-diagonal window n = {n_fixed}, r in {r_window:?} outside grid {}x{}",
            grid.n_max(),
            grid.m_max()
        ));
    }
    let pts = dyadic_points(r_window.0, r_window.1)
        .into_iter()
        .map(|r| (r as f64, grid.u(n_fixed, n_fixed + r)))
        .collect();
    ExponentFit::from_points(pts)
}

/// Median contact counts per box size, with a log-log fit against `N`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContactScaling {
    /// `(N, median |τ ∩ [0,N] x [0,M]|)`, origin included.
    pub medians: Vec<(usize, f64)>,
    pub fit: ExponentFit,
}

/// Median over `n_paths` of the number of renewal points in `[0,N] x [0,⌊γN⌋]`.
pub fn contact_count_scaling(
    kernel: &Kernel,
    n_list: &[usize],
    gamma: f64,
    n_paths: usize,
    seed: u64,
) -> Result<ContactScaling> {
    if kernel.alpha() >= 1.0 {
        return invalid("contact scaling applies to alpha < 1");
    }
    if !(gamma > 0.0) || n_paths == 0 {
        return invalid("need gamma > 0 and at least one path");
    }
    let sampler = JumpSampler::new(kernel);
    let mut medians = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let m = (gamma * n as f64).floor() as u64;
        let mut counts: Vec<usize> = (0..n_paths as u64)
            .map(|p| {
                let mut r = rng::stream(&[seed, n as u64, p]);
                sample_renewal(&sampler, n as u64, m, &mut r).len()
            })
            .collect();
        counts.sort_unstable();
        let mid = counts.len() / 2;
        let median = if counts.len() % 2 == 1 {
            counts[mid] as f64
        } else {
            0.5 * (counts[mid - 1] + counts[mid]) as f64
        };
        medians.push((n, median));
    }
    let fit = ExponentFit::from_points(medians.iter().map(|&(n, c)| (n as f64, c)).collect())?;
    Ok(ContactScaling { medians, fit })
}

impl DiagGrid {
    /// The point mass at the origin.
    pub(crate) fn delta(n_max: usize, m_max: usize) -> Self {
        let diags = (0..=n_max + m_max)
            .map(|d| {
                let lo = d.saturating_sub(m_max);
                let hi = d.min(n_max);
                let mut val = vec![0.0; hi - lo + 1];
                if d == 0 {
                    val[0] = 1.0;
                }
                Diag::from_values(lo, 0, val)
            })
            .collect();
        DiagGrid::from_diags(n_max, m_max, diags)
    }
}
