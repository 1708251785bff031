//! Diagonal and stair splittings `A = B - C` and their inverse applications.
//!
//! `B_d` keeps only the diagonal blocks. `B_l` (left stair) keeps the diagonal
//! blocks plus the full coupling of every even-numbered block row; its odd rows
//! are decoupled. `B_r = B_l^T` is the mirror: even rows decoupled, odd rows
//! coupled. The matching `C = B - A` is never formed.
//!
//! Each stair solve runs in two phases. The decoupled rows are solved first,
//! each with one block Cholesky solve; the coupled rows then only read their
//! already-solved neighbours. Rows within a phase write disjoint blocks and
//! can be processed in any order.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::blocktri::{BlockTridiagMatrix, BlockVector};
use crate::dense::CholeskyFactor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplittingKind {
    /// `B_d = blockdiag(D_1, ..., D_N)`
    Diagonal,
    /// `B_l`: even-numbered block rows keep their off-diagonal blocks.
    StairLeft,
    /// `B_r = B_l^T`: odd-numbered block rows keep their off-diagonal blocks.
    StairRight,
}

impl SplittingKind {
    pub const ALL: [SplittingKind; 3] = [Self::Diagonal, Self::StairLeft, Self::StairRight];

    /// Whether the row at 0-based index `i` keeps its off-diagonal blocks in `B`.
    fn row_is_coupled(self, i: usize) -> bool {
        match self {
            Self::Diagonal => false,
            // 0-based odd index = even block number
            Self::StairLeft => i % 2 == 1,
            Self::StairRight => i % 2 == 0,
        }
    }
}

/// Cholesky factors of every diagonal block, tied to the matrix they came from.
#[derive(Debug, Clone)]
pub struct BlockFactorization {
    chol: Vec<CholeskyFactor>,
    matrix: Arc<BlockTridiagMatrix>,
}

/// Factors every `D_k`. Fails with `NotPositiveDefinite(k)` (1-based) at the
/// first block whose Cholesky factorization breaks down.
pub fn factorize(matrix: Arc<BlockTridiagMatrix>) -> Result<BlockFactorization> {
    BlockFactorization::new(matrix)
}

impl BlockFactorization {
    pub fn new(matrix: Arc<BlockTridiagMatrix>) -> Result<Self> {
        let chol = matrix
            .diag_blocks()
            .iter()
            .enumerate()
            .map(|(k, d)| d.cholesky().ok_or(Error::NotPositiveDefinite(k + 1)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { chol, matrix })
    }

    pub fn matrix(&self) -> &BlockTridiagMatrix {
        &self.matrix
    }

    pub fn matrix_arc(&self) -> &Arc<BlockTridiagMatrix> {
        &self.matrix
    }

    pub fn factors(&self) -> &[CholeskyFactor] {
        &self.chol
    }

    /// Solves `B_kind x = y`.
    pub fn solve_b(&self, kind: SplittingKind, y: &BlockVector) -> Result<BlockVector> {
        self.matrix.check_vector(y)?;
        let mut x = self.matrix.zero_vector();
        self.solve_b_into(kind, y.as_slice(), x.as_mut_slice());
        Ok(x)
    }

    pub(crate) fn solve_b_into(&self, kind: SplittingKind, y: &[f64], x: &mut [f64]) {
        let nb = self.matrix.num_blocks();
        let decoupled = (0..nb).filter(|&i| !kind.row_is_coupled(i));
        let coupled = (0..nb).filter(|&i| kind.row_is_coupled(i));
        self.decoupled_phase(decoupled, y, x);
        self.coupled_phase(coupled, y, x);
    }

    /// `x_i = D_i^{-1} y_i` for each listed row.
    fn decoupled_phase(&self, rows: impl Iterator<Item = usize>, y: &[f64], x: &mut [f64]) {
        let n = self.matrix.block_size();
        for i in rows {
            let xi = &mut x[i * n..(i + 1) * n];
            xi.copy_from_slice(&y[i * n..(i + 1) * n]);
            self.chol[i].solve_in_place(xi);
        }
    }

    /// `x_i = D_i^{-1} (y_i - O_{i-1}^T x_{i-1} - O_i x_{i+1})` for each listed
    /// row. Neighbour blocks must already hold their final values.
    fn coupled_phase(&self, rows: impl Iterator<Item = usize>, y: &[f64], x: &mut [f64]) {
        let n = self.matrix.block_size();
        let nb = self.matrix.num_blocks();
        let off = self.matrix.off_blocks();
        let mut tmp = vec![0.0; n];
        for i in rows {
            tmp.copy_from_slice(&y[i * n..(i + 1) * n]);
            if i > 0 {
                off[i - 1].mul_t_vec_add(-1.0, &x[(i - 1) * n..i * n], &mut tmp);
            }
            if i + 1 < nb {
                off[i].mul_vec_add(-1.0, &x[(i + 1) * n..(i + 2) * n], &mut tmp);
            }
            self.chol[i].solve_in_place(&mut tmp);
            x[i * n..(i + 1) * n].copy_from_slice(&tmp);
        }
    }

    /// Computes `B_d^{-1} y`, `B_l^{-1} y` and `B_r^{-1} y` together.
    ///
    /// The decoupled rows of both stair solves are exactly the corresponding
    /// rows of `B_d^{-1} y`, so they are copied instead of re-solved; the
    /// outputs are bit-identical to three separate [`solve_b`](Self::solve_b)
    /// calls at two thirds of the cost.
    pub(crate) fn solve_all_into(
        &self,
        y: &[f64],
        diag: &mut [f64],
        left: &mut [f64],
        right: &mut [f64],
    ) {
        let nb = self.matrix.num_blocks();
        self.decoupled_phase(0..nb, y, diag);
        left.copy_from_slice(diag);
        right.copy_from_slice(diag);
        self.coupled_phase((1..nb).step_by(2), y, left);
        self.coupled_phase((0..nb).step_by(2), y, right);
    }
}

/// Dense `B` of the given splitting, for oracles.
pub fn dense_b(kind: SplittingKind, a: &BlockTridiagMatrix) -> DMatrix<f64> {
    let full = a.assemble_dense();
    let n = a.block_size();
    let mut b = DMatrix::zeros(a.dim(), a.dim());
    for bi in 0..a.num_blocks() {
        let keep_row = kind.row_is_coupled(bi);
        for bj in 0..a.num_blocks() {
            if bi == bj || (keep_row && bi.abs_diff(bj) == 1) {
                b.view_mut((bi * n, bj * n), (n, n))
                    .copy_from(&full.view((bi * n, bj * n), (n, n)));
            }
        }
    }
    b
}

/// Dense `C = B - A`, for oracles.
pub fn dense_c(kind: SplittingKind, a: &BlockTridiagMatrix) -> DMatrix<f64> {
    dense_b(kind, a) - a.assemble_dense()
}

/// Dense check that `A = B - C` is P-regular: `sym(B + C)` must be positive
/// definite. (`B` is always nonsingular here since it contains every `D_k`.)
pub fn check_p_regular(kind: SplittingKind, a: &BlockTridiagMatrix) -> bool {
    let b = dense_b(kind, a);
    let b_plus_c = &b * 2.0 - a.assemble_dense();
    let sym = (&b_plus_c + b_plus_c.transpose()) * 0.5;
    sym.cholesky().is_some()
}
