//! Brute-force references for cross-checking the fast routes.
//!
//! Everything here is written as plain nested loops over the defining sums,
//! sharing no code with the engines it checks beyond kernel values.

use std::collections::HashSet;

use rand::Rng;

use crate::kernel::Kernel;
use crate::numeric::CompensatedSum;
use crate::polymer::{replica_stats, Field, Pinning, TableField};
use crate::renewal::{sample_renewal, JumpSampler};
use crate::rng;

pub type Dense = Vec<Vec<f64>>;

/// `f(n, m) = z(n, m) Σ_{i<n, j<m} f(i, j) K(n-i+m-j)`, `f(0, 0) = 1`.
pub fn naive_recursion(kernel: &Kernel, n_max: usize, m_max: usize, z: impl Fn(usize, usize) -> f64) -> Dense {
    let mut f = vec![vec![0.0; m_max + 1]; n_max + 1];
    f[0][0] = 1.0;
    for n in 1..=n_max {
        for m in 1..=m_max {
            let mut s = CompensatedSum::new();
            for (i, row) in f.iter().enumerate().take(n) {
                for (j, &x) in row.iter().enumerate().take(m) {
                    if x != 0.0 {
                        s.add(x * kernel.k(n - i + m - j));
                    }
                }
            }
            f[n][m] = z(n, m) * s.value();
        }
    }
    f
}

/// `u[n][m]` by the O(N² M²) renewal equation.
pub fn naive_renewal(kernel: &Kernel, n_max: usize, m_max: usize) -> Dense {
    naive_recursion(kernel, n_max, m_max, |_, _| 1.0)
}

/// `Z^c_{n,m}` by the O(N² M²) recursion.
pub fn naive_partition(kernel: &Kernel, pinning: Pinning, field: Option<&dyn Field>, n_max: usize, m_max: usize) -> Dense {
    naive_recursion(kernel, n_max, m_max, |n, m| {
        let w = field.map_or(0.0, |f| pinning.beta * f.omega(n, m));
        (w + pinning.h).exp()
    })
}

/// `E^{⊗2}[e^{λ |σ ∩ (0,N] x (0,M]|}]` by the chain expansion
/// `E = 1 + Σ Φ`, `Φ = c (v + Φ ⊛ v)`, `c = e^λ - 1`, `v = u²`.
pub fn chain_overlap_mgf(kernel: &Kernel, lambda: f64, n_max: usize, m_max: usize) -> f64 {
    let u = naive_renewal(kernel, n_max, m_max);
    let v: Dense = u.iter().map(|r| r.iter().map(|x| x * x).collect()).collect();
    let c = lambda.exp_m1();
    let mut phi = vec![vec![0.0; m_max + 1]; n_max + 1];
    let mut total = CompensatedSum::new();
    total.add(1.0);
    for n in 1..=n_max {
        for m in 1..=m_max {
            let mut s = v[n][m];
            for (i, row) in phi.iter().enumerate().take(n).skip(1) {
                for (j, &p) in row.iter().enumerate().take(m).skip(1) {
                    s += p * v[n - i][m - j];
                }
            }
            phi[n][m] = c * s;
            total.add(phi[n][m]);
        }
    }
    total.value()
}

/// Monte Carlo of the overlap MGF from independent path pairs: `(mean, std_err)`.
pub fn monte_carlo_overlap_mgf(kernel: &Kernel, lambda: f64, n_max: usize, m_max: usize, pairs: usize, seed: u64) -> (f64, f64) {
    let sampler = JumpSampler::new(kernel);
    let xs: Vec<f64> = (0..pairs)
        .map(|p| {
            let mut r = rng::stream(&[seed, p as u64]);
            let a = sample_renewal(&sampler, n_max as u64, m_max as u64, &mut r);
            let b: HashSet<(u64, u64)> = sample_renewal(&sampler, n_max as u64, m_max as u64, &mut r).into_iter().collect();
            let shared = a.iter().filter(|x| x.0 > 0 && x.1 > 0 && b.contains(x)).count();
            (lambda * shared as f64).exp()
        })
        .collect();
    let (mean, se, _) = replica_stats(&xs);
    (mean, se)
}

/// Exact `A_{i,j} = E[Z_{i,j}^δ]` under ±1 disorder by enumerating every
/// sign pattern on `[1, I] x [1, J]`; returns the full `(I+1) x (J+1)` table.
pub fn exhaustive_binary_frac_moment(kernel: &Kernel, pinning: Pinning, i_max: usize, j_max: usize, delta: f64) -> Dense {
    let sites = i_max * j_max;
    assert!(sites <= 20, "2^{sites} configurations is too many");
    let mut acc = vec![vec![0.0; j_max + 1]; i_max + 1];
    let weight = 0.5f64.powi(sites as i32);
    for mask in 0u64..(1u64 << sites) {
        let mut w = vec![vec![0.0; j_max + 1]; i_max + 1];
        for n in 1..=i_max {
            for m in 1..=j_max {
                let bit = (n - 1) * j_max + (m - 1);
                w[n][m] = if mask >> bit & 1 == 1 { 1.0 } else { -1.0 };
            }
        }
        let field = TableField::new(w);
        let z = naive_partition(kernel, pinning, Some(&field), i_max, j_max);
        for n in 0..=i_max {
            for m in 0..=j_max {
                acc[n][m] += weight * z[n][m].powf(delta);
            }
        }
    }
    acc
}

/// The three sums of the `ρ` bound with every index written out and
/// `K(t)^δ` cut at `t <= t_cut`.
pub fn brute_force_rho(kernel: &Kernel, a: &Dense, k: usize, delta: f64, t_cut: usize, ez_delta: f64) -> (f64, f64, f64) {
    let kd = |t: usize| if t <= t_cut { kernel.k(t).powf(delta) } else { 0.0 };
    let mut r1 = CompensatedSum::new();
    let mut r2 = CompensatedSum::new();
    let mut r3 = CompensatedSum::new();
    // n - i <= t_cut allows n up to t_cut + k - 1
    let top = t_cut + k;
    for n in k..=top {
        for m in k..=top {
            for (i, row) in a.iter().enumerate().take(k) {
                for (j, &x) in row.iter().enumerate().take(k) {
                    if x != 0.0 && n - i + m - j <= t_cut {
                        r1.add(x * kd(n - i + m - j));
                    }
                }
            }
        }
    }
    for n in 1..k {
        for m in k..=top {
            for (i, row) in a.iter().enumerate().take(n) {
                for (j, &x) in row.iter().enumerate().take(k) {
                    if x != 0.0 && n - i + m - j <= t_cut {
                        r2.add(x * kd(n - i + m - j));
                    }
                }
            }
        }
    }
    for n in k..=top {
        for m in 1..k {
            for (i, row) in a.iter().enumerate().take(k) {
                for (j, &x) in row.iter().enumerate().take(m) {
                    if x != 0.0 && n - i + m - j <= t_cut {
                        r3.add(x * kd(n - i + m - j));
                    }
                }
            }
        }
    }
    (ez_delta * r1.value(), ez_delta * r2.value(), ez_delta * r3.value())
}

/// A random ±1 or Gaussian table field for tests.
pub fn random_table_field<R: Rng>(rng: &mut R, n_max: usize, m_max: usize) -> TableField {
    let v = (0..=n_max).map(|_| (0..=m_max).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    TableField::new(v)
}
