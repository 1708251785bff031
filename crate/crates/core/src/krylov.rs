//! Preconditioned conjugate gradient.
//!
//! Starts from `x_0 = 0` and stops once the true residual `||A x_k - b||_2`
//! drops below `tol_abs`. The true residual is recomputed with an extra
//! product every iteration so the reported counts do not depend on drift of
//! the recurrence residual.

use thiserror::Error;

use crate::blocktri::{BlockTridiagMatrix, BlockVector};

/// Application of a symmetric positive definite operator `r -> M^{-1} r`.
pub trait Preconditioner {
    fn apply(&self, r: &BlockVector) -> BlockVector;
}

/// `M^{-1} = I`, i.e. plain CG.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&self, r: &BlockVector) -> BlockVector {
        r.clone()
    }
}

impl<F> Preconditioner for F
where
    F: Fn(&BlockVector) -> BlockVector,
{
    fn apply(&self, r: &BlockVector) -> BlockVector {
        self(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcgConfig {
    /// Exit threshold on `||A x - b||_2`.
    pub tol_abs: f64,
    pub max_iter: usize,
    pub record_history: bool,
}

impl PcgConfig {
    /// `tol_abs = 1e-6`, `max_iter = 10 N n`, no history.
    pub fn for_matrix(a: &BlockTridiagMatrix) -> Self {
        Self {
            tol_abs: 1e-6,
            max_iter: 10 * a.dim(),
            record_history: false,
        }
    }

    pub fn with_tol(mut self, tol_abs: f64) -> Self {
        self.tol_abs = tol_abs;
        self
    }

    pub fn with_history(mut self) -> Self {
        self.record_history = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcgResult {
    pub x: BlockVector,
    /// Completed iterations before the exit test passed.
    pub iterations: usize,
    pub converged: bool,
    /// True residual norms, starting with `||b||` at iteration 0.
    pub residual_history: Option<Vec<f64>>,
}

#[derive(Debug, Error)]
pub enum PcgError {
    #[error("no convergence within {} iterations", .0.iterations)]
    MaxIterExceeded(Box<PcgResult>),
    #[error("non-positive curvature p^T A p = {curvature:e} at iteration {iteration}")]
    BreakdownNonPositiveCurvature { iteration: usize, curvature: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Shape(#[from] crate::error::Error),
}

fn residual_norm(a: &BlockTridiagMatrix, x: &BlockVector, b: &BlockVector, work: &mut BlockVector) -> f64 {
    a.matvec_into(x.as_slice(), work.as_mut_slice());
    work.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(ax, bi)| (ax - bi) * (ax - bi))
        .sum::<f64>()
        .sqrt()
}

/// Solves `A x = b` with preconditioned conjugate gradient.
///
/// On `MaxIterExceeded` the error carries the iterate with the smallest true
/// residual seen.
pub fn pcg_solve<P: Preconditioner + ?Sized>(
    a: &BlockTridiagMatrix,
    b: &BlockVector,
    precond: &P,
    cfg: &PcgConfig,
) -> Result<PcgResult, PcgError> {
    if !(cfg.tol_abs > 0.0) {
        return Err(PcgError::InvalidConfig("tol_abs must be positive"));
    }
    if cfg.max_iter == 0 {
        return Err(PcgError::InvalidConfig("max_iter must be at least 1"));
    }
    a.check_vector(b)?;

    let mut history = cfg.record_history.then(Vec::new);
    let mut x = a.zero_vector();
    let mut work = a.zero_vector();

    let b_norm = b.norm2();
    if let Some(h) = history.as_mut() {
        h.push(b_norm);
    }
    if b_norm < cfg.tol_abs {
        return Ok(PcgResult {
            x,
            iterations: 0,
            converged: true,
            residual_history: history,
        });
    }

    let mut r = b.clone();
    let mut z = precond.apply(&r);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let mut ap = a.zero_vector();

    let mut best = (b_norm, x.clone(), 0);

    for k in 1..=cfg.max_iter {
        a.matvec_into(p.as_slice(), ap.as_mut_slice());
        let curvature = p.dot(&ap);
        if !(curvature > 0.0) {
            return Err(PcgError::BreakdownNonPositiveCurvature {
                iteration: k,
                curvature,
            });
        }
        let alpha = rz / curvature;
        x.axpy(alpha, &p);
        r.axpy(-alpha, &ap);

        let true_res = residual_norm(a, &x, b, &mut work);
        if let Some(h) = history.as_mut() {
            h.push(true_res);
        }
        if true_res < cfg.tol_abs {
            return Ok(PcgResult {
                x,
                iterations: k,
                converged: true,
                residual_history: history,
            });
        }
        if true_res < best.0 {
            best = (true_res, x.clone(), k);
        }

        z = precond.apply(&r);
        let rz_next = r.dot(&z);
        let beta = rz_next / rz;
        rz = rz_next;
        for (pi, zi) in p.as_mut_slice().iter_mut().zip(z.as_slice()) {
            *pi = zi + beta * *pi;
        }
    }

    Err(PcgError::MaxIterExceeded(Box::new(PcgResult {
        x: best.1,
        iterations: cfg.max_iter,
        converged: false,
        residual_history: history,
    })))
}
