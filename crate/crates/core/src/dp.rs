//! Anti-diagonal convolution engine.
//!
//! Computes grids of the form
//!
//! ```text
//! f(n, m) = z(n, m) * Σ_{i<n, j<m} g(i, j) K(n - i + m - j)
//! ```
//!
//! where `g` is either `f` itself (renewal-type recursions) or a fixed source
//! grid (one convolution step). Sources are grouped by anti-diagonal
//! `s = i + j`: for a target on diagonal `d` the admissible sources on
//! diagonal `s` form a contiguous index range, so each (target, source
//! diagonal) pair costs O(1) through per-diagonal prefix and suffix sums.
//! Total cost is `O(N M (N + M))`.
//!
//! Each diagonal is stored as `f64` values times a shared power of two, which
//! keeps the range sums exact-ish while the grid spans thousands of orders of
//! magnitude.

use crate::error::{Error, Result};
use crate::scaled::{pow2, ScaledNonneg};

#[derive(Debug, Clone)]
pub(crate) struct Diag {
    /// Smallest first coordinate stored on this diagonal.
    lo: usize,
    /// Binary exponent shared by the diagonal.
    exp: i64,
    val: Vec<f64>,
    /// `pre[k] = Σ_{idx < k} val[idx]`.
    pre: Vec<f64>,
    /// `suf[k] = Σ_{idx >= k} val[idx]`.
    suf: Vec<f64>,
}

impl Diag {
    pub(crate) fn from_values(lo: usize, exp: i64, val: Vec<f64>) -> Self {
        let len = val.len();
        let mut pre = vec![0.0; len + 1];
        let mut suf = vec![0.0; len + 1];
        for k in 0..len {
            pre[k + 1] = pre[k] + val[k];
        }
        for k in (0..len).rev() {
            suf[k] = suf[k + 1] + val[k];
        }
        Self { lo, exp, val, pre, suf }
    }

    fn total(&self) -> f64 {
        self.suf[0]
    }
}

/// Per-cell multiplicative weights `z(n, m)`.
pub(crate) trait SiteWeights {
    /// Fill `out[k]` with `z(lo + k, d - lo - k)`.
    fn fill(&self, d: usize, lo: usize, out: &mut [f64]);
}

/// The same weight everywhere.
pub(crate) struct ConstantWeight(pub f64);

impl SiteWeights for ConstantWeight {
    fn fill(&self, _d: usize, _lo: usize, out: &mut [f64]) {
        out.fill(self.0);
    }
}

/// Weights from a closure `(n, m) -> z`.
pub(crate) struct FnWeight<F: Fn(usize, usize) -> f64>(pub F);

impl<F: Fn(usize, usize) -> f64> SiteWeights for FnWeight<F> {
    fn fill(&self, d: usize, lo: usize, out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            let n = lo + k;
            *o = (self.0)(n, d - n);
        }
    }
}

/// Grid on `[0, N] x [0, M]` stored by anti-diagonals.
#[derive(Debug, Clone)]
pub(crate) struct DiagGrid {
    n_max: usize,
    m_max: usize,
    diags: Vec<Diag>,
}

/// Smallest `f64` we accept as an interior cell value after rescaling.
const SMALLEST_NORMAL: f64 = f64::MIN_POSITIVE;

impl DiagGrid {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub(crate) fn from_diags(n_max: usize, m_max: usize, diags: Vec<Diag>) -> Self {
        debug_assert_eq!(diags.len(), n_max + m_max + 1);
        Self { n_max, m_max, diags }
    }

    fn range(&self, d: usize) -> (usize, usize) {
        (d.saturating_sub(self.m_max), d.min(self.n_max))
    }

    /// Self-referential recursion with `f(0, 0) = 1`.
    pub fn renewal<W: SiteWeights>(n_max: usize, m_max: usize, kernel: &[f64], z: &W) -> Result<Self> {
        check_kernel_len(kernel, n_max + m_max)?;
        let mut grid = Self { n_max, m_max, diags: Vec::with_capacity(n_max + m_max + 1) };
        grid.diags.push(Diag::from_values(0, 0, vec![1.0]));
        let mut acc = Vec::new();
        let mut zbuf = Vec::new();
        for d in 1..=n_max + m_max {
            let diag = next_diag(&grid.diags, &grid, d, kernel, z, false, &mut acc, &mut zbuf)?;
            grid.diags.push(diag);
        }
        Ok(grid)
    }

    /// One convolution step `f = z * (g ⊛ K)` of a fixed source grid, on the same box.
    pub fn convolve<W: SiteWeights>(source: &DiagGrid, kernel: &[f64], z: &W) -> Result<Self> {
        let (n_max, m_max) = (source.n_max, source.m_max);
        check_kernel_len(kernel, n_max + m_max)?;
        let mut grid = Self { n_max, m_max, diags: Vec::with_capacity(n_max + m_max + 1) };
        grid.diags.push(Diag::from_values(0, 0, vec![0.0]));
        let mut acc = Vec::new();
        let mut zbuf = Vec::new();
        for d in 1..=n_max + m_max {
            let diag = next_diag(&source.diags[..d], &grid, d, kernel, z, true, &mut acc, &mut zbuf)?;
            grid.diags.push(diag);
        }
        Ok(grid)
    }

    pub fn get(&self, n: usize, m: usize) -> ScaledNonneg {
        assert!(n <= self.n_max && m <= self.m_max, "({n}, {m}) outside grid");
        let diag = &self.diags[n + m];
        ScaledNonneg::from_parts(diag.val[n - diag.lo], diag.exp)
    }

    pub fn ln(&self, n: usize, m: usize) -> f64 {
        self.get(n, m).ln()
    }

    /// Sum of the stored anti-diagonal `n + m = d`.
    pub fn diag_total(&self, d: usize) -> ScaledNonneg {
        let diag = &self.diags[d];
        ScaledNonneg::from_parts(diag.total(), diag.exp)
    }
}

fn check_kernel_len(kernel: &[f64], max_t: usize) -> Result<()> {
    if kernel.len() <= max_t {
        return Err(Error::InvalidParameter(format!(
            "kernel table has {} entries, need {}",
            kernel.len(),
            max_t + 1
        )));
    }
    Ok(())
}

/// Compute diagonal `d` of `target` from the source diagonals `0..d`.
///
/// `allow_zero` admits interior cells that receive no contribution at all
/// (sparse sources); underflow of a positive value is always an error.
#[allow(clippy::too_many_arguments)]
fn next_diag<W: SiteWeights>(
    sources: &[Diag],
    target: &DiagGrid,
    d: usize,
    kernel: &[f64],
    z: &W,
    allow_zero: bool,
    acc: &mut Vec<f64>,
    zbuf: &mut Vec<f64>,
) -> Result<Diag> {
    let (lo_d, hi_d) = target.range(d);
    let len = hi_d - lo_d + 1;
    // interior targets have n >= 1 and m >= 1
    let n_lo = lo_d.max(1);
    let n_hi = hi_d.min(d - 1);
    if d < 2 || n_lo > n_hi {
        return Ok(Diag::from_values(lo_d, 0, vec![0.0; len]));
    }

    // reference exponent: the largest single-diagonal contribution
    let mut e_ref = i64::MIN;
    for (s, src) in sources.iter().enumerate().take(d - 1) {
        let tot = src.total() * kernel[d - s];
        if tot > 0.0 {
            e_ref = e_ref.max(src.exp + ScaledNonneg::from_f64(tot).exponent());
        }
    }
    if e_ref == i64::MIN {
        return Ok(Diag::from_values(lo_d, 0, vec![0.0; len]));
    }

    acc.clear();
    acc.resize(len, 0.0);
    for (s, src) in sources.iter().enumerate().take(d - 1) {
        let t = d - s;
        let shift = src.exp - e_ref;
        if src.total() == 0.0 || shift < -1100 {
            continue;
        }
        let w = kernel[t] * pow2(shift.max(-1074));
        if w == 0.0 {
            continue;
        }
        accumulate(src, s, t, n_lo, n_hi, w, &mut acc[n_lo - lo_d..=n_hi - lo_d]);
    }

    zbuf.clear();
    zbuf.resize(len, 0.0);
    z.fill(d, lo_d, zbuf);
    let mut vmax = 0.0f64;
    for k in 0..len {
        let v = acc[k] * zbuf[k];
        acc[k] = v;
        vmax = vmax.max(v);
    }
    if allow_zero && vmax == 0.0 {
        return Ok(Diag::from_values(lo_d, 0, vec![0.0; len]));
    }
    if !(vmax.is_finite() && vmax > 0.0) {
        return Err(Error::Range(format!("anti-diagonal {d} has maximum {vmax}")));
    }
    let e_max = ScaledNonneg::from_f64(vmax).exponent();
    let rescale = pow2(-e_max);
    let mut val = vec![0.0; len];
    for n in n_lo..=n_hi {
        let v = acc[n - lo_d] * rescale;
        if v < SMALLEST_NORMAL && !(allow_zero && v == 0.0) {
            return Err(Error::Range(format!(
                "cell ({n}, {}) is below 2^-1022 relative to its anti-diagonal",
                d - n
            )));
        }
        val[n - lo_d] = v;
    }
    Ok(Diag::from_values(lo_d, e_ref + e_max, val))
}

/// `out[n - n_lo] += w * Σ_{i = a(n)}^{b(n)} src(i, s - i)` for `n` in `[n_lo, n_hi]`,
/// with `a(n) = max(n + 1 - t, 0)`, `b(n) = min(n - 1, s)`.
///
/// Each range sum is taken as a difference of whichever of the prefix or
/// suffix sums excludes less mass, so cancellation never loses more than the
/// smaller excluded side.
#[inline]
fn accumulate(src: &Diag, s: usize, t: usize, n_lo: usize, n_hi: usize, w: f64, out: &mut [f64]) {
    let lo = src.lo;
    let pre = &src.pre[..];
    let suf = &src.suf[..];
    for (k, o) in out.iter_mut().enumerate() {
        let n = n_lo + k;
        let a = (n + 1).saturating_sub(t) - lo;
        let b1 = n.min(s + 1) - lo;
        let p = pre[b1];
        let q = suf[a];
        let range = if p <= q { p - pre[a] } else { q - suf[b1] };
        *o += w * range;
    }
    debug_assert_eq!(out.len(), n_hi - n_lo + 1);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_kernel(len: usize) -> Vec<f64> {
        (0..len).map(|t| if t < 2 { 0.0 } else { 1.0 / (t as f64).powf(3.0) }).collect()
    }

    fn naive(n_max: usize, m_max: usize, k: &[f64], z: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
        let mut f = vec![vec![0.0; m_max + 1]; n_max + 1];
        f[0][0] = 1.0;
        for d in 2..=n_max + m_max {
            for n in 1..=n_max {
                if d < n + 1 || d - n > m_max {
                    continue;
                }
                let m = d - n;
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..m {
                        s += f[i][j] * k[n - i + m - j];
                    }
                }
                f[n][m] = z(n, m) * s;
            }
        }
        f
    }

    #[test]
    fn matches_naive_on_rectangles() {
        for (n_max, m_max) in [(0, 0), (1, 1), (5, 3), (3, 9), (12, 12)] {
            let k = toy_kernel(n_max + m_max + 1);
            let z = |n: usize, m: usize| 1.0 + 0.1 * ((n * 7 + m * 3) % 5) as f64;
            let grid = DiagGrid::renewal(n_max, m_max, &k, &FnWeight(z)).unwrap();
            let f = naive(n_max, m_max, &k, z);
            for n in 0..=n_max {
                for m in 0..=m_max {
                    let got = grid.get(n, m).to_f64();
                    let want = f[n][m];
                    assert!((got - want).abs() <= 1e-14 * want.abs(), "({n},{m}) {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn strong_weights_match_naive_in_log_domain() {
        let k = toy_kernel(25);
        let z = |_: usize, _: usize| 1e25;
        let grid = DiagGrid::renewal(12, 12, &k, &FnWeight(z)).unwrap();
        let f = naive(12, 12, &k, z);
        for n in 1..=12 {
            for m in 1..=12 {
                let want = f[n][m].ln();
                let diff = (grid.ln(n, m) - want).abs();
                assert!(diff < 1e-13 + 1e-15 * want.abs(), "({n},{m}) {diff}");
            }
        }
    }

    #[test]
    fn unrepresentable_spread_is_reported() {
        // many contacts near the diagonal against a single one at the edge
        let k = toy_kernel(81);
        let err = DiagGrid::renewal(40, 40, &k, &ConstantWeight(1e200)).unwrap_err();
        assert!(matches!(err, Error::Range(_)));
    }

    #[test]
    fn convolution_step_of_delta_is_kernel() {
        let k = toy_kernel(21);
        let delta = DiagGrid::renewal(10, 10, &k, &ConstantWeight(0.0));
        // a zero weight makes every interior cell vanish, which is a range error
        assert!(delta.is_err());
        let mut origin = DiagGrid { n_max: 10, m_max: 10, diags: Vec::new() };
        origin.diags.push(Diag::from_values(0, 0, vec![1.0]));
        for d in 1..=20 {
            let (lo, hi) = origin.range(d);
            origin.diags.push(Diag::from_values(lo, 0, vec![0.0; hi - lo + 1]));
        }
        let step = DiagGrid::convolve(&origin, &k, &ConstantWeight(1.0)).unwrap();
        for n in 1..=10 {
            for m in 1..=10 {
                assert_eq!(step.get(n, m).to_f64(), k[n + m]);
            }
        }
        assert!(step.get(0, 0).is_zero());
    }
}
