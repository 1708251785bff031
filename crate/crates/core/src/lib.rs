//! Parametrized multi-splitting polynomial preconditioners for symmetric
//! positive definite block tridiagonal matrices.
//!
//! The weighted combination of the block diagonal splitting and the two stair
//! splittings, `G_ab = a (B_l^{-1} + B_r^{-1}) + b B_d^{-1}` with `2a + b = 1`,
//! is expanded into the m-step preconditioner
//! `M_m^{-1} = (I + H_ab + ... + H_ab^{m-1}) G_ab`, where `H_ab = I - G_ab A`.
//! Every application only needs independent per-block Cholesky solves and
//! block products, in at most two phases.
//!
//! Modules:
//! - [`blocktri`]: the matrix and vector types.
//! - [`splitting`]: per-block factorization and `B_d`, `B_l`, `B_r` solves.
//! - [`precond`]: the `(a, b)` family, [`PolyPreconditioner`], scalar maps.
//! - [`krylov`]: preconditioned conjugate gradient.
//! - [`spectral`]: dense spectral oracle for verification.
//! - [`ocpgen`]: LQR-derived random instances.

pub mod blocktri;
pub mod dense;
pub mod error;
pub mod krylov;
pub mod ocpgen;
pub mod precond;
pub mod spectral;
pub mod splitting;

#[cfg(test)]
pub(crate) mod test_support;

pub use blocktri::{BlockTridiagMatrix, BlockVector};
pub use dense::{Block, CholeskyFactor};
pub use error::{Error, Result};
pub use krylov::{pcg_solve, Identity, PcgConfig, PcgError, PcgResult, Preconditioner};
pub use precond::{
    apply_g, apply_h, distinct_count, f_a, predict_spectrum, PolyPreconditioner, Sign, SpectrumInterval,
    SplittingWeights,
};
pub use spectral::SpectrumReport;
pub use splitting::{factorize, BlockFactorization, SplittingKind};
