//! Dense spectral oracle for desk-scale instances.
//!
//! Preconditioned operators `M^{-1} A` are not symmetric, but for s.p.d.
//! `M^{-1} = L L^T` they are similar to `L^T A L`, and for any symmetric `G`
//! the product `G A` is similar to `R^T G R` with `A = R R^T`. Both routes
//! reduce every spectrum computed here to a symmetric eigenproblem.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::blocktri::{BlockTridiagMatrix, BlockVector};
use crate::error::{Error, Result};
use crate::precond::{apply_g, apply_h, PolyPreconditioner, SpectrumInterval, SplittingWeights, EIG_EQ_RTOL};
use crate::splitting::BlockFactorization;

/// Relative asymmetry accepted by [`sym_eig`].
pub const SYMMETRY_RTOL: f64 = 1e-10;

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for j in 0..m.ncols() {
        for i in (j + 1)..m.nrows() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn checked_symmetric(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidShape(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    let asym = asymmetry(m);
    if !(asym <= SYMMETRY_RTOL * m.amax().max(1.0)) {
        return Err(Error::NonSymmetricInput(asym));
    }
    Ok((m + m.transpose()) * 0.5)
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eig(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    Ok(sym_eig_pairs(m)?.0)
}

/// Eigenvalues (ascending) with matching eigenvectors as columns.
pub fn sym_eig_pairs(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let sym = checked_symmetric(m)?;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Whether two eigenvalues are equal under the shared multiplicity rule.
pub fn eig_equal(x: f64, y: f64) -> bool {
    (x - y).abs() <= EIG_EQ_RTOL * x.abs().max(1.0)
}

/// Groups an ascending sequence into runs of equal eigenvalues, returning
/// `(first value, multiplicity)` per run.
pub fn eigen_clusters(sorted: &[f64]) -> Vec<(f64, usize)> {
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    let mut prev = f64::NAN;
    for &x in sorted {
        match clusters.last_mut() {
            Some(last) if eig_equal(prev, x) => last.1 += 1,
            _ => clusters.push((x, 1)),
        }
        prev = x;
    }
    clusters
}

/// Number of distinct values in an ascending sequence.
pub fn count_distinct(sorted: &[f64]) -> usize {
    eigen_clusters(sorted).len()
}

/// Eigenvalues of a preconditioned operator with summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub distinct: usize,
    /// Ratio of the largest to the smallest positive eigenvalue.
    pub cond: f64,
    pub interval: SpectrumInterval,
    /// Every cluster away from 1.0 has even multiplicity.
    pub pairing_ok: bool,
}

impl SpectrumReport {
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        let clusters = eigen_clusters(&eigenvalues);
        let positive: Vec<f64> = eigenvalues.iter().copied().filter(|&x| x > 0.0).collect();
        let cond = match (positive.first(), positive.last()) {
            (Some(lo), Some(hi)) => hi / lo,
            _ => f64::NAN,
        };
        let pairing_ok = clusters
            .iter()
            .filter(|(v, _)| !eig_equal(1.0, *v))
            .all(|(_, mult)| mult % 2 == 0);
        let interval = SpectrumInterval::closed(
            eigenvalues.first().copied().unwrap_or(f64::NAN),
            eigenvalues.last().copied().unwrap_or(f64::NAN),
        );
        Self {
            distinct: clusters.len(),
            eigenvalues,
            cond,
            interval,
            pairing_ok,
        }
    }

    /// Number of eigenvalues within `tol` of `target`.
    pub fn count_near(&self, target: f64, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|&&x| (x - target).abs() <= tol).count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Dense matrix of a linear operator on block vectors, one unit vector per column.
pub fn dense_operator(
    num_blocks: usize,
    block_size: usize,
    mut apply: impl FnMut(&BlockVector) -> Result<BlockVector>,
) -> Result<DMatrix<f64>> {
    let dim = num_blocks * block_size;
    let mut m = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let col = apply(&BlockVector::unit(num_blocks, block_size, j))?;
        m.column_mut(j).copy_from_slice(col.as_slice());
    }
    Ok(m)
}

pub fn dense_preconditioner(p: &PolyPreconditioner) -> Result<DMatrix<f64>> {
    let a = p.factorization().matrix();
    dense_operator(a.num_blocks(), a.block_size(), |y| p.apply_mm_inv(y))
}

pub fn dense_g(w: SplittingWeights, f: &BlockFactorization) -> Result<DMatrix<f64>> {
    let a = f.matrix();
    dense_operator(a.num_blocks(), a.block_size(), |y| apply_g(w, f, y))
}

pub fn dense_h(w: SplittingWeights, f: &BlockFactorization) -> Result<DMatrix<f64>> {
    let a = f.matrix();
    dense_operator(a.num_blocks(), a.block_size(), |y| apply_h(w, f, y))
}

/// Spectrum of `M_m^{-1} A` through `M_m^{-1} = L L^T` and `sigma(L^T A L)`.
///
/// Fails with [`Error::PreconditionerNotSpd`] when the dense `M_m^{-1}` has
/// no Cholesky factor.
pub fn spectrum_of_preconditioned(p: &PolyPreconditioner) -> Result<SpectrumReport> {
    let m_inv = checked_symmetric(&dense_preconditioner(p)?)?;
    let l = m_inv.cholesky().ok_or(Error::PreconditionerNotSpd)?.unpack();
    let a = p.factorization().matrix().assemble_dense();
    let congruent = l.transpose() * a * &l;
    Ok(SpectrumReport::from_eigenvalues(sym_eig(&congruent)?))
}

/// Eigenvalues of `S A` for a symmetric dense `S` (not necessarily definite),
/// via `A = R R^T` and `sigma(R^T S R)`.
pub fn spectrum_times_a(a: &BlockTridiagMatrix, s: &DMatrix<f64>) -> Result<Vec<f64>> {
    let s = checked_symmetric(s)?;
    let r = a.assemble_dense().cholesky().ok_or(Error::NotSpd)?.unpack();
    sym_eig(&(r.transpose() * s * &r))
}

/// `sigma(G_ab A)`, ascending. Valid for any weights.
pub fn spectrum_of_ga(f: &BlockFactorization, w: SplittingWeights) -> Result<Vec<f64>> {
    spectrum_times_a(f.matrix(), &dense_g(w, f)?)
}

/// Nonzero eigenvalues of `B_l^{-1} C_l`, ascending, recovered from the
/// block Jacobi spectrum `1 -+ sqrt(lambda)`.
pub fn eig_stair_product(f: &BlockFactorization) -> Result<Vec<f64>> {
    let jacobi = spectrum_of_ga(f, SplittingWeights::diagonal_only())?;
    let mut lambdas: Vec<f64> = jacobi
        .iter()
        .filter(|&&mu| mu < 1.0 && !eig_equal(1.0, mu))
        .map(|&mu| (1.0 - mu) * (1.0 - mu))
        .collect();
    lambdas.sort_by(f64::total_cmp);
    Ok(lambdas)
}

/// `rho(H_ab) = max |1 - mu|` over `mu in sigma(G_ab A)`.
pub fn spectral_radius_h(f: &BlockFactorization, w: SplittingWeights) -> Result<f64> {
    Ok(spectrum_of_ga(f, w)?
        .iter()
        .fold(0.0, |acc, mu| acc.max((1.0 - mu).abs())))
}
