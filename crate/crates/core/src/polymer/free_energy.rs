//! Finite-volume free energies: quenched replicas, annealed values and the
//! homogeneous critical scan.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::bracket::Bracket;
use crate::budget::Budget;
use crate::error::{invalid, Error, Result};
use crate::fit::ExponentFit;
use crate::kernel::Kernel;
use crate::numeric::{gauss_legendre, integrate_panels, CompensatedSum};
use crate::parallel::map_indexed;

use super::disorder::{DisorderLaw, DisorderSpec, Field};
use super::partition::{constrained_partition, Pinning};

/// Aspect ratio `γ = p / q` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectRatio {
    p: u64,
    q: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl AspectRatio {
    pub const ONE: AspectRatio = AspectRatio { p: 1, q: 1 };

    pub fn new(p: u64, q: u64) -> Result<Self> {
        if p == 0 || q == 0 {
            return invalid(format!("aspect ratio {p}/{q} must be positive"));
        }
        let g = gcd(p, q);
        Ok(Self { p: p / g, q: q / g })
    }

    /// Best continued-fraction convergent of `x` with denominator at most
    /// `max_den`, and its absolute error.
    pub fn approximate(x: f64, max_den: u64) -> Result<(Self, f64)> {
        if !(x.is_finite() && x > 0.0) || max_den == 0 {
            return invalid(format!("cannot approximate {x} by a positive rational"));
        }
        let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
        let mut r = x;
        for _ in 0..64 {
            let a = r.floor();
            if a > 1e15 {
                break;
            }
            let a = a as u64;
            let (p2, q2) = (a * p1 + p0, a * q1 + q0);
            if q2 > max_den {
                break;
            }
            (p0, q0, p1, q1) = (p1, q1, p2, q2);
            let frac = r - a as f64;
            if frac < 1e-12 {
                break;
            }
            r = 1.0 / frac;
        }
        if p1 == 0 {
            p1 = 1;
        }
        let g = Self::new(p1, q1)?;
        Ok((g, (g.value() - x).abs()))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// `⌊γ N⌋`.
    pub fn m_for(&self, n: usize) -> usize {
        (n as u128 * self.p as u128 / self.q as u128) as usize
    }

    /// True when `γ N` is an integer, i.e. `q | N`.
    pub fn divides(&self, n: usize) -> bool {
        n as u64 % self.q == 0
    }
}

impl std::fmt::Display for AspectRatio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub h: f64,
    pub gamma: AspectRatio,
}

impl ModelParams {
    pub fn pinning(&self) -> Pinning {
        Pinning::new(self.beta, self.h)
    }
}

/// Replica statistics of `(1/N) log Z^c_{N, ⌊γN⌋}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FreeEnergyEstimate {
    pub n: usize,
    pub m: usize,
    pub gamma: AspectRatio,
    pub values: Vec<f64>,
    pub mean: f64,
    pub std_err: f64,
    /// Half-width of the 95% confidence interval on the mean.
    pub ci_half_width: f64,
    /// `γN` integral: the mean of `(1/N) E log Z` lower-bounds the limit.
    pub is_lower_bound: bool,
    /// `N · mean < 10`, below the correlation length.
    pub short_volume: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuenchedScan {
    pub estimates: Vec<FreeEnergyEstimate>,
    /// Means non-decreasing along the `N` values flagged as lower bounds.
    pub monotone_lower_bounds: bool,
}

/// Mean, standard error and 95% CI half-width of a sample.
pub fn replica_stats(values: &[f64]) -> (f64, f64, f64) {
    let r = values.len();
    let mut s = CompensatedSum::new();
    for &v in values {
        s.add(v);
    }
    let mean = s.value() / r as f64;
    if r < 2 {
        return (mean, 0.0, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1) as f64;
    let se = (var / r as f64).sqrt();
    let t = StudentsT::new(0.0, 1.0, (r - 1) as f64).map(|d| d.inverse_cdf(0.975)).unwrap_or(1.96);
    (mean, se, t * se)
}

/// Replica estimates of the quenched free energy; one grid per replica at
/// the largest `N` serves every `N` in the list.
pub fn quenched_free_energy(
    kernel: &Kernel,
    params: ModelParams,
    spec: DisorderSpec,
    n_list: &[usize],
    replicas: usize,
    budget: &Budget,
) -> Result<QuenchedScan> {
    if n_list.is_empty() || replicas == 0 {
        return invalid("need at least one N and one replica");
    }
    let n_top = *n_list.iter().max().unwrap();
    let m_top = params.gamma.m_for(n_top);
    if n_list.iter().any(|&n| n == 0 || params.gamma.m_for(n) == 0) {
        return invalid("every N must give N >= 1 and ⌊γN⌋ >= 1");
    }
    budget.check(Budget::grid_work(n_top, m_top).saturating_mul(replicas as u128))?;
    let per_replica: Vec<Result<Vec<f64>>> = map_indexed(replicas, |r| {
        let field = spec.field(r as u64);
        let grid = constrained_partition(kernel, params.pinning(), Some(&field as &dyn Field), n_top, m_top, &Budget::unlimited())?;
        Ok(n_list.iter().map(|&n| grid.log_z(n, params.gamma.m_for(n)) / n as f64).collect())
    });
    let per_replica: Vec<Vec<f64>> = per_replica.into_iter().collect::<Result<_>>()?;
    let mut estimates = Vec::with_capacity(n_list.len());
    for (i, &n) in n_list.iter().enumerate() {
        let values: Vec<f64> = per_replica.iter().map(|v| v[i]).collect();
        let (mean, std_err, ci) = replica_stats(&values);
        estimates.push(FreeEnergyEstimate {
            n,
            m: params.gamma.m_for(n),
            gamma: params.gamma,
            values,
            mean,
            std_err,
            ci_half_width: ci,
            is_lower_bound: params.gamma.divides(n),
            short_volume: n as f64 * mean < 10.0,
        });
    }
    let mut lb: Vec<&FreeEnergyEstimate> = estimates.iter().filter(|e| e.is_lower_bound).collect();
    lb.sort_by_key(|e| e.n);
    let monotone_lower_bounds = lb.windows(2).all(|w| w[1].mean >= w[0].mean - w[0].ci_half_width - w[1].ci_half_width);
    Ok(QuenchedScan { estimates, monotone_lower_bounds })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AnnealedQuantities {
    /// `log E Z^c_{N,M}`, exact through the homogeneous model at `h + log Q(β)`.
    pub log_annealed_z: f64,
    /// `h_c^a(β) = -log Q(β)`.
    pub h_c_annealed: f64,
}

pub fn annealed_quantities(
    kernel: &Kernel,
    params: ModelParams,
    law: DisorderLaw,
    n: usize,
    budget: &Budget,
) -> Result<AnnealedQuantities> {
    let log_q = law.log_q(params.beta);
    let m = params.gamma.m_for(n);
    let grid = constrained_partition(kernel, Pinning::homogeneous(params.h + log_q), None, n, m, budget)?;
    Ok(AnnealedQuantities { log_annealed_z: grid.log_z(n, m), h_c_annealed: -log_q })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRow {
    pub h: f64,
    /// `(1/N) log Z^c_{N, ⌊γN⌋}`.
    pub f_n: f64,
    /// `N F_N < 10`: the volume is below the correlation length.
    pub short_volume: bool,
    /// Infinite-volume free energy from its variational equation (`γ = 1` only).
    pub f_exact: Option<Bracket>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomogeneousScan {
    pub n: usize,
    pub gamma: AspectRatio,
    pub rows: Vec<ScanRow>,
    /// `log F_N` against `log h` over rows with `h > 0` and `F_N > 0`.
    pub fit: Option<ExponentFit>,
    /// Same fit on the midpoints of `f_exact`.
    pub fit_exact: Option<ExponentFit>,
    /// `1/μ` for `α > 1`, the predicted limit of `F/h`.
    pub inv_mu: Option<f64>,
}

pub fn homogeneous_critical_scan(
    kernel: &Kernel,
    gamma: AspectRatio,
    h_list: &[f64],
    n: usize,
    budget: &Budget,
) -> Result<HomogeneousScan> {
    let m = gamma.m_for(n);
    if m == 0 {
        return invalid(format!("⌊γN⌋ = 0 for N = {n}, γ = {gamma}"));
    }
    budget.check(Budget::grid_work(n, m).saturating_mul(h_list.len() as u128))?;
    let rows: Vec<Result<ScanRow>> = map_indexed(h_list.len(), |i| {
        let h = h_list[i];
        let grid = constrained_partition(kernel, Pinning::homogeneous(h), None, n, m, &Budget::unlimited())?;
        let f_n = grid.log_z(n, m) / n as f64;
        let f_exact = if gamma == AspectRatio::ONE { Some(homogeneous_free_energy_diagonal(kernel, h)?) } else { None };
        Ok(ScanRow { h, f_n, short_volume: n as f64 * f_n < 10.0, f_exact })
    });
    let rows: Vec<ScanRow> = rows.into_iter().collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.h > 0.0 && r.f_n > 0.0).map(|r| (r.h, r.f_n)).collect();
    let fit = ExponentFit::from_points(pts).ok();
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.f_exact.filter(|b| r.h > 0.0 && b.lo > 0.0).map(|b| (r.h, b.mid())))
        .collect();
    let fit_exact = ExponentFit::from_points(pts).ok();
    let inv_mu = (kernel.alpha() > 1.0).then(|| 1.0 / kernel.mu());
    Ok(HomogeneousScan { n, gamma, rows, fit, fit_exact, inv_mu })
}

/// Homogeneous free energy for `γ = 1`.
///
/// Tilting jumps by `e^{-F(n+m)/2}` turns `e^h K(n+m) e^{-F(n+m)/2}` into a
/// probability law with diagonal mean, so `F` solves
/// `Σ_t (t-1) K(t) e^{-F t / 2} = e^{-h}` (and `F = 0` for `h <= 0`).
/// Terms beyond the kernel table are bracketed by integrals of the
/// continuous profile, which assumes the summand is decreasing there.
pub fn homogeneous_free_energy_diagonal(kernel: &Kernel, h: f64) -> Result<Bracket> {
    if !h.is_finite() {
        return invalid(format!("h must be finite, got {h}"));
    }
    if h <= 0.0 {
        return Ok(Bracket::point(0.0));
    }
    let target = (-h).exp();
    let rule = gauss_legendre(16);
    let t_max = kernel.t_max();
    let head = |f: f64| {
        let mut s = CompensatedSum::new();
        for t in (2..=t_max).rev() {
            s.add((t - 1) as f64 * kernel.k(t) * (-0.5 * f * t as f64).exp());
        }
        s.value()
    };
    // ∫_{x0}^∞ (x-1) K(x) e^{-Fx/2} dx with x = x0 e^y
    let tail = |f: f64, x0: f64| {
        let alpha = kernel.alpha();
        let sv = kernel.sv();
        let norm = kernel.norm();
        let g = |y: f64| {
            let x = x0 * y.exp();
            (x - 1.0) * x.powf(-1.0 - alpha) * sv.value(x) / norm * (-0.5 * f * x).exp()
        };
        let y_end = 80.0 / alpha.min(1.0);
        integrate_panels(g, 0.0, y_end, 800, &rule)
    };
    let solve = |x0: f64| -> Result<f64> {
        let phi = |f: f64| head(f) + tail(f, x0);
        let (mut lo, mut hi) = (0.0, h);
        if phi(hi) > target {
            return Err(Error::Numerical(format!("free-energy root not bracketed at h = {h}")));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if phi(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    let f_lo = solve(t_max as f64 + 1.0)?;
    let f_hi = solve(t_max as f64)?;
    Ok(Bracket::new(f_lo.min(f_hi), f_lo.max(f_hi)))
}
