//! Symmetric positive definite block tridiagonal matrices.
//!
//! ```text
//!     | D_1   O_1                 |
//!     | O_1^T D_2   O_2           |
//! A = |       O_2^T D_3   ...     |
//!     |             ...   O_{N-1} |
//!     |           O_{N-1}^T  D_N  |
//! ```
//!
//! Blocks are numbered `1..=N` in documentation and error messages and are
//! stored 0-based: `D_k` lives at index `k - 1`. A block row is called *odd*
//! or *even* by its 1-based number, so the odd rows `D_1, D_3, ...` sit at the
//! even 0-based indices `0, 2, ...`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::dense::Block;
use crate::error::{Error, Result};

/// Absolute per-entry tolerance on the symmetry of each diagonal block.
pub const BLOCK_SYMMETRY_TOL: f64 = 1e-12;

/// A vector of length `N * n` viewed as `N` stacked sub-vectors of length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    num_blocks: usize,
    block_size: usize,
    data: Vec<f64>,
}

impl BlockVector {
    pub fn zeros(num_blocks: usize, block_size: usize) -> Self {
        Self {
            num_blocks,
            block_size,
            data: vec![0.0; num_blocks * block_size],
        }
    }

    pub fn from_vec(num_blocks: usize, block_size: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != num_blocks * block_size {
            return Err(Error::DimensionMismatch {
                expected: num_blocks * block_size,
                found: data.len(),
            });
        }
        Ok(Self {
            num_blocks,
            block_size,
            data,
        })
    }

    /// Unit vector `e_j` (0-based global index).
    pub fn unit(num_blocks: usize, block_size: usize, j: usize) -> Self {
        let mut v = Self::zeros(num_blocks, block_size);
        v.data[j] = 1.0;
        v
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Sub-vector `v_{i+1}` (0-based `i`).
    pub fn block(&self, i: usize) -> &[f64] {
        &self.data[i * self.block_size..(i + 1) * self.block_size]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.block_size..(i + 1) * self.block_size]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.num_blocks == other.num_blocks && self.block_size == other.block_size
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn norm2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `self += alpha * x`
    pub fn axpy(&mut self, alpha: f64, x: &Self) {
        for (s, v) in self.data.iter_mut().zip(&x.data) {
            *s += alpha * v;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    /// Splits `v = v_e + v_o`.
    ///
    /// `v_e` keeps the even-numbered sub-vectors `v_2, v_4, ...` and `v_o`
    /// keeps the odd-numbered ones `v_1, v_3, ...`; all other blocks are zero.
    pub fn parity_split(&self) -> (BlockVector, BlockVector) {
        let mut even = Self::zeros(self.num_blocks, self.block_size);
        let mut odd = Self::zeros(self.num_blocks, self.block_size);
        for i in 0..self.num_blocks {
            // 0-based index i is block number i + 1
            let target = if i % 2 == 0 { &mut odd } else { &mut even };
            target.block_mut(i).copy_from_slice(self.block(i));
        }
        (even, odd)
    }
}

/// Symmetric block tridiagonal matrix with `N` diagonal blocks of size `n`.
///
/// Construction always checks block shapes and the symmetry of each `D_k`;
/// the (expensive) check that the whole matrix is positive definite is
/// opt-in through [`BlockTridiagMatrix::new_validated`] or
/// [`BlockTridiagMatrix::validate_spd`].
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTridiagMatrix {
    num_blocks: usize,
    block_size: usize,
    diag: Vec<Block>,
    off: Vec<Block>,
}

impl BlockTridiagMatrix {
    /// `diag` holds `D_1..D_N`, `off` holds `O_1..O_{N-1}` where `O_k` is the
    /// block at position `(k, k+1)`.
    pub fn new(diag: Vec<Block>, off: Vec<Block>) -> Result<Self> {
        let num_blocks = diag.len();
        if num_blocks == 0 {
            return Err(Error::InvalidShape("at least one diagonal block is required".into()));
        }
        if off.len() + 1 != num_blocks {
            return Err(Error::InvalidShape(format!(
                "{} diagonal blocks need {} off-diagonal blocks, got {}",
                num_blocks,
                num_blocks - 1,
                off.len()
            )));
        }
        let block_size = diag[0].size();
        if block_size == 0 {
            return Err(Error::InvalidShape("block size must be positive".into()));
        }
        for b in diag.iter().chain(&off) {
            if b.size() != block_size {
                return Err(Error::DimensionMismatch {
                    expected: block_size,
                    found: b.size(),
                });
            }
        }
        for (k, d) in diag.iter().enumerate() {
            let deviation = d.asymmetry();
            if !(deviation <= BLOCK_SYMMETRY_TOL) {
                return Err(Error::NotSymmetric {
                    block: k + 1,
                    deviation,
                });
            }
        }
        Ok(Self {
            num_blocks,
            block_size,
            diag,
            off,
        })
    }

    /// Like [`new`](Self::new), and additionally requires the assembled matrix
    /// to pass a dense Cholesky factorization.
    pub fn new_validated(diag: Vec<Block>, off: Vec<Block>) -> Result<Self> {
        let m = Self::new(diag, off)?;
        m.validate_spd()?;
        Ok(m)
    }

    /// Dense Cholesky of the assembled matrix. Costs `O((N n)^3)`.
    pub fn validate_spd(&self) -> Result<()> {
        self.assemble_dense()
            .cholesky()
            .map(|_| ())
            .ok_or(Error::NotSpd)
    }

    /// Scalar tridiagonal matrix (`n = 1`) with constant diagonal and off-diagonal.
    pub fn scalar_toeplitz(num_blocks: usize, diag: f64, off: f64) -> Result<Self> {
        Self::new(
            vec![Block::from_row_major(1, vec![diag]).unwrap(); num_blocks],
            vec![Block::from_row_major(1, vec![off]).unwrap(); num_blocks.saturating_sub(1)],
        )
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// Total dimension `N * n`.
    pub fn dim(&self) -> usize {
        self.num_blocks * self.block_size
    }

    pub fn diag_blocks(&self) -> &[Block] {
        &self.diag
    }

    pub fn off_blocks(&self) -> &[Block] {
        &self.off
    }

    pub fn zero_vector(&self) -> BlockVector {
        BlockVector::zeros(self.num_blocks, self.block_size)
    }

    pub(crate) fn check_vector(&self, x: &BlockVector) -> Result<()> {
        if x.num_blocks != self.num_blocks || x.block_size != self.block_size {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `y = A x` using only the stored blocks, `O(N n^2)`.
    pub fn matvec(&self, x: &BlockVector) -> Result<BlockVector> {
        self.check_vector(x)?;
        let mut y = self.zero_vector();
        self.matvec_into(x.as_slice(), y.as_mut_slice());
        Ok(y)
    }

    /// `y = A x` on raw slices of length `N n`; `y` is overwritten.
    pub(crate) fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.block_size;
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.num_blocks {
            let yi = &mut y[i * n..(i + 1) * n];
            self.diag[i].mul_vec_add(1.0, &x[i * n..(i + 1) * n], yi);
            if i > 0 {
                self.off[i - 1].mul_t_vec_add(1.0, &x[(i - 1) * n..i * n], yi);
            }
            if i + 1 < self.num_blocks {
                self.off[i].mul_vec_add(1.0, &x[(i + 1) * n..(i + 2) * n], yi);
            }
        }
    }

    /// Dense `Nn x Nn` assembly. The upper off-diagonal blocks are copied and
    /// mirrored, so the result is exactly symmetric off the diagonal blocks.
    pub fn assemble_dense(&self) -> DMatrix<f64> {
        let n = self.block_size;
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for (k, d) in self.diag.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    m[(k * n + i, k * n + j)] = d.get(i, j);
                }
            }
        }
        for (k, o) in self.off.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    let v = o.get(i, j);
                    m[(k * n + i, (k + 1) * n + j)] = v;
                    m[((k + 1) * n + j, k * n + i)] = v;
                }
            }
        }
        m
    }

    /// Writes the plain-text fixture format: a header line `N n`, then the `N`
    /// diagonal blocks and `N-1` off-diagonal blocks, one block row per line.
    /// Values carry 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.num_blocks, self.block_size).unwrap();
        for b in self.diag.iter().chain(&self.off) {
            for i in 0..self.block_size {
                let row: Vec<String> = (0..self.block_size)
                    .map(|j| format!("{:.16e}", b.get(i, j)))
                    .collect();
                writeln!(out, "{}", row.join(" ")).unwrap();
            }
        }
        out
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Parses the fixture format written by [`to_text`](Self::to_text).
    /// Blank lines are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        Self::read_text(text.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_text(std::io::BufReader::new(f))
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r
            .lines()
            .enumerate()
            .map(|(i, l)| l.map(|s| (i + 1, s)))
            .filter(|l| l.as_ref().map_or(true, |(_, s)| !s.trim().is_empty()));

        let (line_no, header) = lines.next().transpose()?.ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("bad header: {e}"),
            })?;
        let [num_blocks, block_size] = dims[..] else {
            return Err(Error::Parse {
                line: line_no,
                msg: "header must be `N n`".into(),
            });
        };
        if num_blocks == 0 || block_size == 0 {
            return Err(Error::Parse {
                line: line_no,
                msg: "N and n must be positive".into(),
            });
        }

        let mut read_block = || -> Result<Block> {
            let mut data = Vec::with_capacity(block_size * block_size);
            for _ in 0..block_size {
                let (line_no, line) = lines.next().transpose()?.ok_or(Error::Parse {
                    line: 0,
                    msg: "unexpected end of input".into(),
                })?;
                let before = data.len();
                for tok in line.split_whitespace() {
                    data.push(tok.parse::<f64>().map_err(|e| Error::Parse {
                        line: line_no,
                        msg: format!("bad number {tok:?}: {e}"),
                    })?);
                }
                if data.len() - before != block_size {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected {block_size} values"),
                    });
                }
            }
            Ok(Block::from_row_major(block_size, data).unwrap())
        };

        let diag = (0..num_blocks)
            .map(|_| read_block())
            .collect::<Result<Vec<_>>>()?;
        let off = (0..num_blocks - 1)
            .map(|_| read_block())
            .collect::<Result<Vec<_>>>()?;
        Self::new(diag, off)
    }
}
