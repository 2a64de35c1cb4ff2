//! Deterministic upper bounds and Monte Carlo estimates of the fractional
//! moments `A_{i,j} = E[Z_{i,j,ω}^δ]`.

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::dp::{DiagGrid, FnWeight};
use crate::error::{invalid, Result};
use crate::kernel::Kernel;
use crate::parallel::map_indexed;
use crate::polymer::{constrained_partition, replica_stats, DisorderLaw, DisorderSpec, Field, Pinning};
use crate::renewal::renewal_mass;

/// Relative slack applied to DP outputs entering a certificate. The
/// anti-diagonal engine agrees with naive summation to ~1e-13; this factor
/// keeps a wide margin above that.
pub const DP_SLACK: f64 = 1e-9;

/// Dense `(I + 1) x (J + 1)` table of bounds.
pub type Grid = Vec<Vec<f64>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JensenBounds {
    /// `(E Z_{i,j})^δ`, the expectation by the homogeneous DP at `h + log Q(β)`.
    pub bound: Grid,
    /// `e^δ P((i, j) ∈ τ)^δ`, valid when `Δ min(i, j) <= 1`.
    pub coarse: Grid,
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0, 1), got {delta}"));
    }
    Ok(())
}

fn inflate(x: f64) -> f64 {
    x * (1.0 + DP_SLACK)
}

pub fn frac_moment_jensen_bounds(
    kernel: &Kernel,
    pinning: Pinning,
    law: DisorderLaw,
    i_max: usize,
    j_max: usize,
    delta: f64,
    budget: &Budget,
) -> Result<JensenBounds> {
    check_delta(delta)?;
    let h_ann = pinning.h + law.log_q(pinning.beta);
    let g = constrained_partition(kernel, Pinning::homogeneous(h_ann), None, i_max, j_max, budget)?;
    let u = renewal_mass(kernel, i_max, j_max, budget)?;
    let bound = (0..=i_max)
        .map(|i| (0..=j_max).map(|j| inflate((delta * g.log_z(i, j)).exp())).collect())
        .collect();
    let coarse = (0..=i_max)
        .map(|i| (0..=j_max).map(|j| (delta * (1.0 + u.ln_u(i, j))).exp()).collect())
        .collect();
    Ok(JensenBounds { bound, coarse })
}

pub fn frac_moment_jensen_bound(
    kernel: &Kernel,
    pinning: Pinning,
    law: DisorderLaw,
    i: usize,
    j: usize,
    delta: f64,
) -> Result<f64> {
    Ok(frac_moment_jensen_bounds(kernel, pinning, law, i, j, delta, &Budget::DEFAULT)?.bound[i][j])
}

/// Largest admissible tilt `min(1, (1-δ)/δ)`.
pub fn max_tilt(delta: f64) -> f64 {
    ((1.0 - delta) / delta).min(1.0)
}

/// `#J_{i,j}` with `J_{i,j} = {(n, m) ∈ [1, i] x [1, j] : |n - m| <= 2ℓ}`.
pub fn strip_size(i: usize, j: usize, ell: f64) -> usize {
    let w = (2.0 * ell).floor() as i64;
    (1..=i as i64)
        .map(|n| {
            let lo = (n - w).max(1);
            let hi = (n + w).min(j as i64);
            (hi - lo + 1).max(0) as usize
        })
        .sum()
}

/// Hölder bounds `E_λ[Z_{i,j}]^δ (Q(-λ)^δ Q(λδ/(1-δ))^{1-δ})^{#J_{i,j}}` for
/// every `(i, j) <= (I, J)`.
///
/// Membership in the strip depends only on `|n - m|`, so one two-weight DP
/// over the full box evaluates the tilted expectation for all corners.
#[allow(clippy::too_many_arguments)]
pub fn frac_moment_tilt_bounds(
    kernel: &Kernel,
    pinning: Pinning,
    law: DisorderLaw,
    i_max: usize,
    j_max: usize,
    delta: f64,
    lambda: f64,
    ell: f64,
    budget: &Budget,
) -> Result<Grid> {
    check_delta(delta)?;
    if !(lambda.abs() <= max_tilt(delta)) {
        return invalid(format!("tilt λ = {lambda} outside [-{m}, {m}]", m = max_tilt(delta)));
    }
    if !(ell >= 0.0 && ell.is_finite()) {
        return invalid(format!("strip half-width must be finite and >= 0, got {ell}"));
    }
    budget.check_grid(i_max, j_max)?;
    let beta = pinning.beta;
    let w_in = (pinning.h + law.log_q(beta - lambda) - law.log_q(-lambda)).exp();
    let w_out = (pinning.h + law.log_q(beta)).exp();
    let width = (2.0 * ell).floor() as usize;
    let k = kernel.values_up_to(i_max + j_max);
    let grid = DiagGrid::renewal(i_max, j_max, &k, &FnWeight(|n, m| if n.abs_diff(m) <= width { w_in } else { w_out }))?;
    let ln_pen = delta * law.log_q(-lambda) + (1.0 - delta) * law.log_q(lambda * delta / (1.0 - delta));
    let mut out = vec![vec![0.0; j_max + 1]; i_max + 1];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let ln = delta * grid.ln(i, j) + strip_size(i, j, ell) as f64 * ln_pen;
            *cell = inflate(ln.exp());
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
pub fn frac_moment_tilt_bound(
    kernel: &Kernel,
    pinning: Pinning,
    law: DisorderLaw,
    i: usize,
    j: usize,
    delta: f64,
    lambda: f64,
    ell: f64,
) -> Result<f64> {
    Ok(frac_moment_tilt_bounds(kernel, pinning, law, i, j, delta, lambda, ell, &Budget::DEFAULT)?[i][j])
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MonteCarloMoment {
    pub mean: f64,
    pub std_err: f64,
}

/// Monte Carlo `A_{i,j}` for every `(i, j) <= (I, J)`; replica `r` uses field `r`.
pub fn frac_moment_mc_grid(
    kernel: &Kernel,
    pinning: Pinning,
    spec: DisorderSpec,
    i_max: usize,
    j_max: usize,
    delta: f64,
    replicas: usize,
) -> Result<Vec<Vec<MonteCarloMoment>>> {
    check_delta(delta)?;
    if replicas < 2 {
        return invalid("need at least two replicas");
    }
    let samples: Vec<Result<Grid>> = map_indexed(replicas, |r| {
        let field = spec.field(r as u64);
        let g = constrained_partition(kernel, pinning, Some(&field as &dyn Field), i_max, j_max, &Budget::unlimited())?;
        Ok((0..=i_max).map(|i| (0..=j_max).map(|j| (delta * g.log_z(i, j)).exp()).collect()).collect())
    });
    let samples: Vec<Grid> = samples.into_iter().collect::<Result<_>>()?;
    Ok((0..=i_max)
        .map(|i| {
            (0..=j_max)
                .map(|j| {
                    let xs: Vec<f64> = samples.iter().map(|s| s[i][j]).collect();
                    let (mean, std_err, _) = replica_stats(&xs);
                    MonteCarloMoment { mean, std_err }
                })
                .collect()
        })
        .collect())
}

pub fn frac_moment_mc(
    kernel: &Kernel,
    pinning: Pinning,
    spec: DisorderSpec,
    i: usize,
    j: usize,
    delta: f64,
    replicas: usize,
) -> Result<MonteCarloMoment> {
    Ok(frac_moment_mc_grid(kernel, pinning, spec, i, j, delta, replicas)?[i][j])
}
