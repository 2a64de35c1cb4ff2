//! Pathwise finite-volume inequalities: the free/constrained sandwich and
//! super-additivity along the `γ` direction.

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{invalid, Result};
use crate::kernel::Kernel;

use super::disorder::{DisorderField, Field};
use super::partition::{constrained_partition, free_partition, PartitionGrid, Pinning};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SandwichReport {
    /// `log(Z^f / Z^c)` at the grid corner.
    pub log_ratio: f64,
    /// Explicit upper bound on `log(Z^f / Z^c)`.
    pub log_envelope: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub ok: bool,
}

/// Check `Z^c <= Z^f <= Z^c (1 + E)` with the explicit envelope
///
/// ```text
/// E = e^{-βω_{N,M}} [ e^{-h} N M / K_min
///       + Λ (N e^{β max_n ω_{n,M}} (1 + N/2)^{2+α} + M e^{β max_m ω_{N,m}} (1 + M/2)^{2+α}) ]
/// ```
///
/// where `K_min` is the smallest `K(t)` and `Λ` the largest ratio of
/// slowly varying values over `2 <= t <= N + M`. Points strictly inside the
/// box reach `(N, M)` in one jump; points on the last row or column are
/// compared by redirecting their final jump to `(N, M)`.
pub fn sandwich_check(grid: &PartitionGrid, kernel: &Kernel, field: Option<&dyn Field>) -> SandwichReport {
    let (n, m) = (grid.n_max(), grid.m_max());
    let log_zc = grid.log_z(n, m);
    let log_zf = free_partition(grid, kernel);
    let log_ratio = log_zf - log_zc;
    let p = grid.pinning();
    let omega = |a: usize, b: usize| match field {
        Some(f) if p.beta != 0.0 => f.omega(a, b),
        _ => 0.0,
    };
    let w_nm = p.beta * omega(n, m);
    let row_max = (1..=n).map(|a| p.beta * omega(a, m)).fold(f64::NEG_INFINITY, f64::max);
    let col_max = (1..=m).map(|b| p.beta * omega(n, b)).fold(f64::NEG_INFINITY, f64::max);
    let t_hi = n + m;
    let ln_kmin = kernel.min_k(t_hi).ln();
    let ln_lambda = kernel.sv_ratio(t_hi).ln();
    let ex = 2.0 + kernel.alpha();
    let terms = [
        -p.h + ((n * m) as f64).ln() - ln_kmin,
        ln_lambda + (n as f64).ln() + row_max + ex * (1.0 + n as f64 / 2.0).ln(),
        ln_lambda + (m as f64).ln() + col_max + ex * (1.0 + m as f64 / 2.0).ln(),
    ];
    let log_e = crate::numeric::log_sum_exp(&terms) - w_nm;
    let log_envelope = log_e.exp().ln_1p().max(log_e);
    // rounding slack of the two log-domain sums
    let slack = 1e-9 * (1.0 + log_zc.abs());
    let lower_ok = log_ratio >= -slack;
    let upper_ok = log_ratio <= log_envelope + slack;
    SandwichReport { log_ratio, log_envelope, lower_ok, upper_ok, ok: lower_ok && upper_ok }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SuperadditivityReport {
    pub j1: usize,
    pub j2: usize,
    /// `log Z_{(j1+j2) q, (j1+j2) p}(ω)`.
    pub log_lhs: f64,
    /// `log Z_{j1 q, j1 p}(ω) + log Z_{j2 q, j2 p}(Θ_{j1 q, j1 p} ω)`.
    pub log_rhs: f64,
    pub holds: bool,
}

/// Evaluate both sides of `Z_{j1+j2}(ω) >= Z_{j1}(ω) Z_{j2}(Θ ω)` with one
/// field, where `Z_j = Z_{j q, j p}` for the block `(q, p)`.
pub fn superadditivity_check(
    kernel: &Kernel,
    pinning: Pinning,
    field: &DisorderField,
    block: (usize, usize),
    j1: usize,
    j2: usize,
    budget: &Budget,
) -> Result<SuperadditivityReport> {
    if j1 == 0 || j2 == 0 || block.0 == 0 || block.1 == 0 {
        return invalid("block counts and block sides must be positive");
    }
    let (q, p) = block;
    let n = (j1 + j2) * q;
    let m = (j1 + j2) * p;
    let whole = constrained_partition(kernel, pinning, Some(field), n, m, budget)?;
    let shifted = field.shifted(j1 * q, j1 * p);
    let second = constrained_partition(kernel, pinning, Some(&shifted), j2 * q, j2 * p, budget)?;
    let log_lhs = whole.log_z(n, m);
    let log_rhs = whole.log_z(j1 * q, j1 * p) + second.log_z(j2 * q, j2 * p);
    // the pinned path through (j1 q, j1 p) is one term of the left side;
    // allow for the rounding of the two independently computed factors
    let holds = log_lhs >= log_rhs - 1e-12 * (1.0 + log_rhs.abs());
    Ok(SuperadditivityReport { j1, j2, log_lhs, log_rhs, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::SlowlyVarying;
    use crate::polymer::disorder::{DisorderLaw, DisorderSpec};
    use crate::renewal::renewal_mass;

    #[test]
    fn sandwich_at_zero_pinning_is_inverse_mass() {
        let k = Kernel::new(1.5, SlowlyVarying::constant(1.0), 5000).unwrap();
        let g = constrained_partition(&k, Pinning::homogeneous(0.0), None, 40, 40, &Budget::DEFAULT).unwrap();
        let r = sandwich_check(&g, &k, None);
        let u = renewal_mass(&k, 40, 40, &Budget::DEFAULT).unwrap();
        assert!((r.log_ratio + u.ln_u(40, 40)).abs() < 1e-10);
        assert!(r.ok);
    }

    #[test]
    fn sandwich_with_disorder() {
        let k = Kernel::new(0.5, SlowlyVarying::constant(1.0), 5000).unwrap();
        let spec = DisorderSpec::new(DisorderLaw::GaussianUnit, 3);
        for r in 0..4 {
            let f = spec.field(r);
            let g = constrained_partition(&k, Pinning::new(1.0, -0.3), Some(&f), 24, 20, &Budget::DEFAULT).unwrap();
            let rep = sandwich_check(&g, &k, Some(&f));
            assert!(rep.ok, "{rep:?}");
        }
    }

    #[test]
    fn superadditivity_small() {
        let k = Kernel::new(1.5, SlowlyVarying::constant(1.0), 5000).unwrap();
        let f = DisorderSpec::new(DisorderLaw::RademacherUnit, 9).field(0);
        let rep = superadditivity_check(&k, Pinning::new(0.8, 0.05), &f, (2, 3), 2, 3, &Budget::DEFAULT).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert!(rep.log_lhs > rep.log_rhs);
    }
}
