//! Constrained, free and rectangle-pinned partition functions.

use crate::budget::Budget;
use crate::dp::{DiagGrid, FnWeight};
use crate::error::{invalid, Error, Result};
use crate::kernel::Kernel;
use crate::scaled::ScaledNonneg;

use super::disorder::Field;

/// Pinning parameters `(β, h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pinning {
    pub beta: f64,
    pub h: f64,
}

impl Pinning {
    pub fn new(beta: f64, h: f64) -> Self {
        Self { beta, h }
    }

    pub fn homogeneous(h: f64) -> Self {
        Self { beta: 0.0, h }
    }
}

/// `Z^c_{n,m,ω}` for all `(n, m) <= (N, M)`.
#[derive(Debug, Clone)]
pub struct PartitionGrid {
    grid: DiagGrid,
    pinning: Pinning,
    disordered: bool,
}

impl PartitionGrid {
    pub fn n_max(&self) -> usize {
        self.grid.n_max()
    }

    pub fn m_max(&self) -> usize {
        self.grid.m_max()
    }

    pub fn pinning(&self) -> Pinning {
        self.pinning
    }

    pub fn is_disordered(&self) -> bool {
        self.disordered
    }

    pub fn z(&self, n: usize, m: usize) -> ScaledNonneg {
        self.grid.get(n, m)
    }

    /// `log Z^c_{n,m}`; `-inf` where the partition function vanishes.
    pub fn log_z(&self, n: usize, m: usize) -> f64 {
        self.grid.ln(n, m)
    }

    /// Dense `log Z` table.
    pub fn log_table(&self) -> Vec<Vec<f64>> {
        (0..=self.n_max()).map(|n| (0..=self.m_max()).map(|m| self.log_z(n, m)).collect()).collect()
    }
}

/// Site weights `z_{n,m} = exp(β ω_{n,m} + h)` on `[1, N] x [1, M]`.
fn site_weights(pinning: Pinning, field: Option<&dyn Field>, n_max: usize, m_max: usize) -> Result<Vec<f64>> {
    let cols = m_max + 1;
    let mut w = vec![0.0; (n_max + 1) * cols];
    for n in 1..=n_max {
        for m in 1..=m_max {
            let e = match field {
                Some(f) if pinning.beta != 0.0 => pinning.beta * f.omega(n, m) + pinning.h,
                _ => pinning.h,
            };
            let z = e.exp();
            if !(z.is_finite() && z > 0.0) {
                return Err(Error::Range(format!("site weight exp({e}) at ({n}, {m}) is not a positive double")));
            }
            w[n * cols + m] = z;
        }
    }
    Ok(w)
}

fn check_pinning(p: Pinning) -> Result<()> {
    if !(p.beta.is_finite() && p.beta >= 0.0 && p.h.is_finite()) {
        return invalid(format!("need finite β >= 0 and finite h, got β = {}, h = {}", p.beta, p.h));
    }
    Ok(())
}

/// Exact `Z^c_{n,m}` on `[0, N] x [0, M]`; `field = None` is the homogeneous model.
pub fn constrained_partition(
    kernel: &Kernel,
    pinning: Pinning,
    field: Option<&dyn Field>,
    n_max: usize,
    m_max: usize,
    budget: &Budget,
) -> Result<PartitionGrid> {
    check_pinning(pinning)?;
    budget.check_grid(n_max, m_max)?;
    let w = site_weights(pinning, field, n_max, m_max)?;
    let cols = m_max + 1;
    let k = kernel.values_up_to(n_max + m_max);
    let grid = DiagGrid::renewal(n_max, m_max, &k, &FnWeight(|n, m| w[n * cols + m]))?;
    Ok(PartitionGrid { grid, pinning, disordered: field.is_some() && pinning.beta != 0.0 })
}

/// `P_exit(A, B) = 1 - Σ_{i<=A, j<=B} K(i + j)` for `A <= N`, `B <= M`, kept
/// as a sum of positive terms:
/// `Tail(A + B) + Σ_{j=2}^{B} (j-1) K(A+j) + Σ_{i=2}^{A} (i-1) K(B+i)`.
#[derive(Debug, Clone)]
pub struct ExitTable {
    cols: usize,
    p: Vec<f64>,
}

impl ExitTable {
    pub fn new(kernel: &Kernel, n_max: usize, m_max: usize) -> Self {
        let cols = m_max + 1;
        let k = kernel.values_up_to(n_max + m_max);
        let mut p = vec![0.0; (n_max + 1) * cols];
        for a in 0..=n_max {
            let mut h = 0.0;
            for b in 0..=m_max {
                if b >= 2 {
                    h += (b - 1) as f64 * k[a + b];
                }
                p[a * cols + b] = kernel.tail_mass(a + b) + h;
            }
        }
        for b in 0..=m_max {
            let mut h = 0.0;
            for a in 2..=n_max {
                h += (a - 1) as f64 * k[a + b];
                p[a * cols + b] += h;
            }
        }
        Self { cols, p }
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.p[a * self.cols + b]
    }
}

/// `log Z^f_{N,M}` at the grid corner.
pub fn free_partition(grid: &PartitionGrid, kernel: &Kernel) -> f64 {
    free_partition_at(grid, kernel, grid.n_max(), grid.m_max())
}

/// `log Z^f_{N,M}` for any `(N, M)` inside the grid.
pub fn free_partition_at(grid: &PartitionGrid, kernel: &Kernel, n_max: usize, m_max: usize) -> f64 {
    let exit = ExitTable::new(kernel, n_max, m_max);
    let mut total = ScaledNonneg::ZERO;
    for n in 0..=n_max {
        for m in 0..=m_max {
            let z = grid.z(n, m);
            if !z.is_zero() {
                total = total + z * ScaledNonneg::from_f64(exit.get(n_max - n, m_max - m));
            }
        }
    }
    total.ln()
}

/// `Z_{(a1,b1),(a2,b2),ω}`: partition function of paths pinned at both
/// corners, weighting `(a2, b2)` but not `(a1, b1)`.
pub fn rectangle_partition(
    kernel: &Kernel,
    pinning: Pinning,
    field: Option<&dyn Field>,
    from: (usize, usize),
    to: (usize, usize),
    budget: &Budget,
) -> Result<ScaledNonneg> {
    let ((a1, b1), (a2, b2)) = (from, to);
    if a2 < a1 || b2 < b1 {
        return invalid(format!("rectangle corners {from:?} -> {to:?} are not ordered"));
    }
    if (a1, b1) == (a2, b2) {
        return Ok(ScaledNonneg::ONE);
    }
    if a1 == a2 || b1 == b2 {
        return Ok(ScaledNonneg::ZERO);
    }
    let shifted = ShiftedField { inner: field, origin: from };
    let f: Option<&dyn Field> = if field.is_some() { Some(&shifted) } else { None };
    let g = constrained_partition(kernel, pinning, f, a2 - a1, b2 - b1, budget)?;
    Ok(g.z(a2 - a1, b2 - b1))
}

/// `Z_{(a,b),(a+i,b+j)}` for all `(i, j) <= (I, J)` from one grid.
pub fn partition_from(
    kernel: &Kernel,
    pinning: Pinning,
    field: Option<&dyn Field>,
    from: (usize, usize),
    extent: (usize, usize),
    budget: &Budget,
) -> Result<PartitionGrid> {
    let shifted = ShiftedField { inner: field, origin: from };
    let f: Option<&dyn Field> = if field.is_some() { Some(&shifted) } else { None };
    constrained_partition(kernel, pinning, f, extent.0, extent.1, budget)
}

struct ShiftedField<'a> {
    inner: Option<&'a dyn Field>,
    origin: (usize, usize),
}

impl Field for ShiftedField<'_> {
    fn omega(&self, n: usize, m: usize) -> f64 {
        self.inner.map_or(0.0, |f| f.omega(self.origin.0 + n, self.origin.1 + m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::SlowlyVarying;
    use crate::polymer::disorder::{DisorderLaw, DisorderSpec, TableField};
    use crate::renewal::renewal_mass;

    fn kernel(alpha: f64) -> Kernel {
        Kernel::new(alpha, SlowlyVarying::constant(1.0), 5000).unwrap()
    }

    #[test]
    fn hand_values() {
        let k = kernel(1.5);
        let h = 0.37;
        let g = constrained_partition(&k, Pinning::homogeneous(h), None, 3, 3, &Budget::DEFAULT).unwrap();
        assert_eq!(g.log_z(0, 0), 0.0);
        assert_eq!(g.log_z(2, 0), f64::NEG_INFINITY);
        assert!((g.z(1, 1).to_f64() - h.exp() * k.k(2)).abs() < 1e-16);
        let z22 = h.exp() * k.k(4) + (2.0 * h).exp() * k.k(2).powi(2);
        assert!((g.z(2, 2).to_f64() / z22 - 1.0).abs() < 1e-14);

        let field = TableField::new(vec![vec![0.0; 3], vec![0.0, 0.8, 0.0], vec![0.0; 3]]);
        let gd = constrained_partition(&k, Pinning::new(0.5, h), Some(&field), 2, 2, &Budget::DEFAULT).unwrap();
        assert!((gd.z(1, 1).to_f64() - (0.4 + h).exp() * k.k(2)).abs() < 1e-16);
    }

    #[test]
    fn zero_pinning_is_renewal_mass() {
        let k = kernel(0.5);
        let g = constrained_partition(&k, Pinning::homogeneous(0.0), None, 20, 15, &Budget::DEFAULT).unwrap();
        let u = renewal_mass(&k, 20, 15, &Budget::DEFAULT).unwrap();
        for n in 0..=20 {
            for m in 0..=15 {
                assert_eq!(g.log_z(n, m), u.ln_u(n, m));
            }
        }
    }

    #[test]
    fn free_partition_small_cases() {
        let k = kernel(1.5);
        let h = -0.2;
        let g = constrained_partition(&k, Pinning::homogeneous(h), None, 1, 1, &Budget::DEFAULT).unwrap();
        let exit = ExitTable::new(&k, 1, 1);
        let want = exit.get(1, 1) + h.exp() * k.k(2) * exit.get(0, 0);
        assert!((free_partition(&g, &k).exp() / want - 1.0).abs() < 1e-14);
        assert!((exit.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((exit.get(1, 1) - (1.0 - k.k(2))).abs() < 1e-15);
        let g0 = constrained_partition(&k, Pinning::homogeneous(0.0), None, 30, 30, &Budget::DEFAULT).unwrap();
        assert!(free_partition(&g0, &k).abs() < 1e-12);
    }

    #[test]
    fn exit_table_matches_complement() {
        let k = kernel(0.5);
        let e = ExitTable::new(&k, 6, 4);
        for a in 0..=6 {
            for b in 0..=4 {
                let inside: f64 = (1..=a).flat_map(|i| (1..=b).map(move |j| i + j)).map(|t| k.k(t)).sum();
                assert!((e.get(a, b) - (1.0 - inside)).abs() < 1e-14, "({a}, {b})");
            }
        }
    }

    #[test]
    fn rectangle_conventions_and_shift() {
        let k = kernel(1.5);
        let field = DisorderSpec::new(DisorderLaw::GaussianUnit, 5).field(0);
        let p = Pinning::new(0.7, 0.1);
        let b = Budget::DEFAULT;
        assert_eq!(rectangle_partition(&k, p, Some(&field), (3, 4), (3, 4), &b).unwrap(), ScaledNonneg::ONE);
        assert!(rectangle_partition(&k, p, Some(&field), (3, 4), (3, 9), &b).unwrap().is_zero());
        let direct = constrained_partition(&k, p, Some(&field), 7, 6, &b).unwrap();
        let r = rectangle_partition(&k, p, Some(&field), (0, 0), (7, 6), &b).unwrap();
        assert_eq!(r, direct.z(7, 6));
        let view = field.shifted(2, 3);
        let shifted = constrained_partition(&k, p, Some(&view), 5, 3, &b).unwrap();
        let r = rectangle_partition(&k, p, Some(&field), (2, 3), (7, 6), &b).unwrap();
        assert_eq!(r, shifted.z(5, 3));
    }
}
