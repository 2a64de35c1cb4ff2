//! Second moment of the partition function at the annealed critical point,
//! `β₁` and the correlation volume `N_β`.

use serde::{Deserialize, Serialize};

use crate::bracket::Bracket;
use crate::error::{invalid, Error, Result};
use crate::fit::ExponentFit;
use crate::intersection::{IntersectionTables, TerminationReport};
use crate::kernel::Kernel;
use crate::polymer::{AspectRatio, DisorderLaw};

/// `log Q(2β) - 2 log Q(β)`, the overlap reward per shared contact.
pub fn overlap_excess(law: DisorderLaw, beta: f64) -> f64 {
    law.log_q(2.0 * beta) - 2.0 * law.log_q(beta)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SecondMomentCurve {
    pub beta: f64,
    pub lambda: f64,
    /// `(N, E[(Z^f_{N,⌊γN⌋})²])` at `h = h_c^a(β)`.
    pub points: Vec<(usize, f64)>,
}

impl SecondMomentCurve {
    pub fn sup(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Successive increments are non-increasing.
    pub fn increments_decreasing(&self) -> bool {
        let inc: Vec<f64> = self.points.windows(2).map(|w| w[1].1 - w[0].1).collect();
        inc.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-15)
    }

    /// First `N` whose value exceeds `threshold`.
    pub fn first_exceeding(&self, threshold: f64) -> Option<usize> {
        self.points.iter().find(|p| p.1 > threshold).map(|p| p.0)
    }
}

/// Exact second moment through the overlap MGF of two replicas.
pub fn second_moment_curve(
    tables: &IntersectionTables,
    law: DisorderLaw,
    beta: f64,
    n_list: &[usize],
    gamma: AspectRatio,
) -> Result<SecondMomentCurve> {
    if !(beta.is_finite() && beta >= 0.0) {
        return invalid(format!("beta must be finite and >= 0, got {beta}"));
    }
    let lambda = overlap_excess(law, beta);
    let boxes: Vec<(usize, usize)> = n_list.iter().map(|&n| (n, gamma.m_for(n))).collect();
    let values = tables.overlap_mgf_many(lambda, &boxes)?;
    Ok(SecondMomentCurve { beta, lambda, points: n_list.iter().copied().zip(values).collect() })
}

/// Bracket on `β₁`, the largest `β` with `log Q(2β) - 2 log Q(β) < -log P(σ₁ < ∞)`.
pub fn compute_beta1(law: DisorderLaw, report: &TerminationReport) -> Result<Bracket> {
    if report.persistent {
        return Ok(Bracket::point(0.0));
    }
    let p = report.p_sigma1_finite;
    if !(p.lo > 0.0 && p.hi < 1.0 && p.lo <= p.hi) {
        return Err(Error::Inconclusive(format!("P(σ₁ < ∞) bracket {p:?} is degenerate")));
    }
    // larger P means a smaller target
    let lo = invert_excess(law, -p.hi.ln())?;
    let hi = invert_excess(law, -p.lo.ln())?;
    Ok(Bracket::new(lo, hi))
}

/// Smallest `β >= 0` with `excess(β) >= target`; `+inf` when never reached.
fn invert_excess(law: DisorderLaw, target: f64) -> Result<f64> {
    if target <= 0.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while overlap_excess(law, hi) < target {
        hi *= 2.0;
        if hi > 1e6 {
            return Ok(f64::INFINITY);
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if overlap_excess(law, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NBeta {
    pub beta: f64,
    /// Largest grid `N` with second moment `<= 2`.
    pub n_beta: usize,
    /// The curve never crossed 2 on the grid; `n_beta` is only a lower bound.
    pub lower_bound_only: bool,
}

pub fn compute_n_beta(
    kernel: &Kernel,
    tables: &IntersectionTables,
    law: DisorderLaw,
    beta: f64,
    gamma: AspectRatio,
    n_grid: &[usize],
) -> Result<NBeta> {
    if kernel.alpha() <= 1.0 {
        return invalid("N_β is defined for α > 1");
    }
    if n_grid.is_empty() {
        return invalid("empty N grid");
    }
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    let curve = second_moment_curve(tables, law, beta, &grid, gamma)?;
    let below: Vec<usize> = curve.points.iter().take_while(|p| p.1 <= 2.0).map(|p| p.0).collect();
    let lower_bound_only = below.len() == grid.len();
    Ok(NBeta { beta, n_beta: below.last().copied().unwrap_or(0), lower_bound_only })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NBetaScaling {
    pub points: Vec<NBeta>,
    /// `log N_β` against `log(1/β)` over crossed points.
    pub fit: Option<ExponentFit>,
    /// `max(2α/(α-1), 4)`.
    pub predicted_exponent: f64,
}

pub fn n_beta_scaling(
    kernel: &Kernel,
    tables: &IntersectionTables,
    law: DisorderLaw,
    betas: &[f64],
    gamma: AspectRatio,
    n_grid: &[usize],
) -> Result<NBetaScaling> {
    let points = betas
        .iter()
        .map(|&b| compute_n_beta(kernel, tables, law, b, gamma, n_grid))
        .collect::<Result<Vec<_>>>()?;
    let pts = points
        .iter()
        .filter(|p| !p.lower_bound_only && p.n_beta > 0 && p.beta > 0.0)
        .map(|p| (1.0 / p.beta, p.n_beta as f64))
        .collect();
    let a = kernel.alpha();
    Ok(NBetaScaling { points, fit: ExponentFit::from_points(pts).ok(), predicted_exponent: (2.0 * a / (a - 1.0)).max(4.0) })
}
