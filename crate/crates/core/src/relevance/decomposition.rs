//! Corner-block decomposition of `Z_{N,M}` underlying the `ρ` bound.

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{invalid, Result};
use crate::kernel::Kernel;
use crate::numeric::CompensatedSum;
use crate::polymer::{constrained_partition, partition_from, Field, Pinning};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecompositionCheck {
    pub direct: f64,
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
    pub rel_err: f64,
    pub ok: bool,
}

/// Split `Z_{N,M}` by the last renewal point outside the corner block
/// `(N-k, N] x (M-k, M]` and the first one inside it, and compare the three
/// pieces to the direct value. Tolerance `1e-10` relative.
pub fn decomposition_identity_check(
    kernel: &Kernel,
    pinning: Pinning,
    field: Option<&dyn Field>,
    n: usize,
    m: usize,
    k: usize,
    budget: &Budget,
) -> Result<DecompositionCheck> {
    if k == 0 || k > n || k > m {
        return invalid(format!("need 1 <= k <= min(N, M), got k = {k}, N = {n}, M = {m}"));
    }
    let head = constrained_partition(kernel, pinning, field, n, m, budget)?;
    let zc = |a: usize, b: usize| head.z(a, b).to_f64();
    let site = |a: usize, b: usize| {
        let w = match field {
            Some(f) if pinning.beta != 0.0 => pinning.beta * f.omega(a, b),
            _ => 0.0,
        };
        (w + pinning.h).exp()
    };
    // tail[i][j] = z_{N-i,M-j} Z_{(N-i,M-j),(N,M)}
    let mut tail = vec![vec![0.0; k]; k];
    for (i, row) in tail.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let inner = if i == 0 && j == 0 {
                1.0
            } else if i == 0 || j == 0 {
                0.0
            } else {
                partition_from(kernel, pinning, field, (n - i, m - j), (i, j), budget)?.z(i, j).to_f64()
            };
            *cell = site(n - i, m - j) * inner;
        }
    }
    let kk = |t: usize| kernel.k(t);
    let block = |nn: usize, mm: usize, i_hi: usize, j_hi: usize| {
        let mut s = 0.0;
        for (i, row) in tail.iter().enumerate().take(i_hi) {
            for (j, &t) in row.iter().enumerate().take(j_hi) {
                s += kk(nn - i + mm - j) * t;
            }
        }
        s
    };
    let mut z1 = CompensatedSum::new();
    let mut z2 = CompensatedSum::new();
    let mut z3 = CompensatedSum::new();
    for nn in 1..=n {
        for mm in 1..=m {
            let outer = zc(n - nn, m - mm);
            if outer == 0.0 {
                continue;
            }
            match (nn >= k, mm >= k) {
                (true, true) => z1.add(outer * block(nn, mm, k, k)),
                (false, true) => z2.add(outer * block(nn, mm, nn, k)),
                (true, false) => z3.add(outer * block(nn, mm, k, mm)),
                (false, false) => {}
            }
        }
    }
    let (z1, z2, z3) = (z1.value(), z2.value(), z3.value());
    let direct = zc(n, m);
    let rel_err = ((z1 + z2 + z3) - direct).abs() / direct;
    Ok(DecompositionCheck { direct, z1, z2, z3, rel_err, ok: rel_err < 1e-10 })
}
