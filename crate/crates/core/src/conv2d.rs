//! Causal two-dimensional convolution equations.
//!
//! Solves `X(n, m) = a(n, m) + c Σ_{1<=i<n, 1<=j<m} X(i, j) w(n - i, m - j)`
//! for `1 <= n <= N`, `1 <= m <= M`, in `O(N² M² / 4)` contiguous dot products.

use crate::error::Result;

/// Dense row-major `(N + 1) x (M + 1)` table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table2 {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Table2 {
    pub fn zeros(n_max: usize, m_max: usize) -> Self {
        Self { rows: n_max + 1, cols: m_max + 1, data: vec![0.0; (n_max + 1) * (m_max + 1)] }
    }

    pub fn from_fn(n_max: usize, m_max: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n_max, m_max);
        for n in 0..=n_max {
            for m in 0..=m_max {
                t.data[n * t.cols + m] = f(n, m);
            }
        }
        t
    }

    pub fn n_max(&self) -> usize {
        self.rows - 1
    }

    pub fn m_max(&self) -> usize {
        self.cols - 1
    }

    #[inline]
    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.data[n * self.cols + m]
    }

    #[inline]
    pub fn set(&mut self, n: usize, m: usize, x: f64) {
        self.data[n * self.cols + m] = x;
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.data[n * self.cols..(n + 1) * self.cols]
    }

    pub fn row_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.data[n * self.cols..(n + 1) * self.cols]
    }

    /// `P(A, B) = Σ_{n<=A, m<=B} self(n, m)`.
    pub fn prefix_sums(&self) -> Table2 {
        let mut p = Table2::zeros(self.n_max(), self.m_max());
        for n in 0..self.rows {
            let mut run = 0.0;
            for m in 0..self.cols {
                run += self.get(n, m);
                let above = if n > 0 { p.get(n - 1, m) } else { 0.0 };
                p.set(n, m, above + run);
            }
        }
        p
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        s[0] += x[0] * y[0];
        s[1] += x[1] * y[1];
        s[2] += x[2] * y[2];
        s[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (s[0] + s[1]) + (s[2] + s[3]) + tail
}

/// Solve the causal equation on `[1, N] x [1, M]` (row 0 and column 0 of
/// the result stay zero). `post_row` may adjust each finished row before it
/// feeds later rows.
pub fn solve_causal(
    a: &Table2,
    c: f64,
    w: &Table2,
    mut post_row: impl FnMut(usize, &mut [f64]) -> Result<()>,
) -> Result<Table2> {
    let (n_max, m_max) = (a.n_max(), a.m_max());
    assert!(w.n_max() >= n_max && w.m_max() >= m_max, "weight table smaller than target");
    // wr[r][p] = w(r, M - p): the dot product over j becomes contiguous
    let wr = Table2::from_fn(n_max, m_max, |r, p| w.get(r, m_max - p));
    let mut x = Table2::zeros(n_max, m_max);
    let mut acc = vec![0.0; m_max + 1];
    for n in 1..=n_max {
        acc.fill(0.0);
        for i in 1..n {
            let xi = x.row(i);
            let wa = wr.row(n - i);
            for m in 2..=m_max {
                acc[m] += dot(&xi[1..m], &wa[m_max + 1 - m..m_max]);
            }
        }
        let row = x.row_mut(n);
        for m in 1..=m_max {
            row[m] = a.get(n, m) + c * acc[m];
        }
        post_row(n, row)?;
    }
    Ok(x)
}
