//! Small dense kernels on row-major square blocks.
//!
//! Every block of a [`BlockTridiagMatrix`](crate::BlockTridiagMatrix) is an
//! `n x n` dense matrix stored row-major. The kernels here are the inner loops
//! of the structured products and block solves, so they work on slices and
//! never allocate.

use nalgebra::DMatrix;

/// Square dense block stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    n: usize,
    data: Vec<f64>,
}

impl Block {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds a block from `n * n` row-major entries. Returns `None` on a length mismatch.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == n * n).then_some(Self { n, data })
    }

    /// Copies a square `nalgebra` matrix. Returns `None` if it is not square.
    pub fn from_dmatrix(m: &DMatrix<f64>) -> Option<Self> {
        if m.nrows() != m.ncols() {
            return None;
        }
        Some(Self::from_fn(m.nrows(), |i, j| m[(i, j)]))
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    /// Largest `|B_ij - B_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `y += alpha * B x`
    #[inline]
    pub(crate) fn mul_vec_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        for (i, yi) in y.iter_mut().enumerate().take(n) {
            let row = &self.data[i * n..(i + 1) * n];
            let mut acc = 0.0;
            for (r, xv) in row.iter().zip(x) {
                acc += r * xv;
            }
            *yi += alpha * acc;
        }
    }

    /// `y += alpha * B^T x`
    #[inline]
    pub(crate) fn mul_t_vec_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        for (i, xi) in x.iter().enumerate().take(n) {
            let s = alpha * xi;
            let row = &self.data[i * n..(i + 1) * n];
            for (yj, r) in y.iter_mut().zip(row) {
                *yj += s * r;
            }
        }
    }

    /// Unpivoted Cholesky factorization `B = L L^T`.
    ///
    /// Only the lower triangle is read. Returns `None` when a pivot is not
    /// strictly positive (or not finite).
    pub fn cholesky(&self) -> Option<CholeskyFactor> {
        let n = self.n;
        let mut l = Block::zeros(n);
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l.get(j, k) * l.get(j, k);
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let ljj = d.sqrt();
            l.set(j, j, ljj);
            for i in (j + 1)..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, s / ljj);
            }
        }
        Some(CholeskyFactor { lower: l })
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive definite block.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    lower: Block,
}

impl CholeskyFactor {
    pub fn lower(&self) -> &Block {
        &self.lower
    }

    /// Overwrites `x` with `(L L^T)^{-1} x`.
    #[inline]
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.lower.n;
        let l = &self.lower.data;
        for i in 0..n {
            let row = &l[i * n..i * n + i];
            let mut s = x[i];
            for (lik, xk) in row.iter().zip(&x[..i]) {
                s -= lik * xk;
            }
            x[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= l[k * n + i] * x[k];
            }
            x[i] = s / l[i * n + i];
        }
    }

    /// Reassembles `L L^T`.
    pub fn reconstruct(&self) -> Block {
        let n = self.lower.n;
        Block::from_fn(n, |i, j| {
            (0..=i.min(j))
                .map(|k| self.lower.get(i, k) * self.lower.get(j, k))
                .sum()
        })
    }
}
