//! Random LQR problems and the block tridiagonal Schur complements of their KKT systems.
//!
//! Decision variables are ordered `z = (x_0, u_0, x_1, u_1, ..., x_T)` with
//! Hessian `H = blockdiag(Q_0, R_0, ..., Q_T)`. The equality constraints are
//! the initial condition `x_0 = x_init` and the dynamics written as
//! `-A_t x_t - B_t u_t + x_{t+1} = 0`. Eliminating `z` from the KKT system
//! leaves the multiplier system with matrix `S = G H^{-1} G^T`:
//!
//! ```text
//! S_00     = Q_0^{-1}
//! S_tt     = A_{t-1} Q_{t-1}^{-1} A_{t-1}^T + B_{t-1} R_{t-1}^{-1} B_{t-1}^T + Q_t^{-1}
//! S_{t,t+1} = -(A_t Q_t^{-1})^T
//! ```
//!
//! which is s.p.d. block tridiagonal with `N = T + 1` blocks of size `nx`.
//!
//! Generation is a pure function of the seed. The generator is ChaCha8 seeded
//! with `seed` via `seed_from_u64`; problem data is drawn on stream 0 and
//! right-hand sides on stream 1. The draw order is fixed (see
//! [`GENERATOR_VERSION`]); changing it requires bumping the version.

use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::blocktri::{BlockTridiagMatrix, BlockVector};
use crate::dense::Block;
use crate::error::{Error, Result};

/// Version of the random draw order; recorded in instance sidecars.
pub const GENERATOR_VERSION: u32 = 1;

const RHS_STREAM: u64 = 1;

/// Parameters of the random LQR ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    /// Number of diagonal blocks `N = T + 1`.
    pub num_blocks: usize,
    /// Block size, equal to the state dimension.
    pub block_size: usize,
    /// Control dimension.
    pub nu: usize,
    /// Dynamics entries are `dynamics_scale / sqrt(nx) * N(0, 1)`.
    pub dynamics_scale: f64,
    /// Cost factor entries are `cost_factor_scale * N(0, 1)`.
    pub cost_factor_scale: f64,
    /// Diagonal shift added to every `Q_t` and `R_t`.
    pub cost_shift: f64,
}

impl GeneratorConfig {
    /// Defaults: `nu = max(1, n / 3)`, unit scales, `cost_shift = 0.1 n`.
    pub fn new(seed: u64, num_blocks: usize, block_size: usize) -> Self {
        Self {
            seed,
            num_blocks,
            block_size,
            nu: (block_size / 3).max(1),
            dynamics_scale: 1.0,
            cost_factor_scale: 1.0,
            cost_shift: 0.1 * block_size as f64,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_blocks < 2 || self.block_size < 1 || self.nu < 1 {
            return Err(Error::InvalidShape(format!(
                "generator needs N >= 2, n >= 1, nu >= 1 (got N={}, n={}, nu={})",
                self.num_blocks, self.block_size, self.nu
            )));
        }
        Ok(())
    }

    /// Writes `cfg` plus generator metadata as a JSON sidecar.
    pub fn write_sidecar(&self, path: impl AsRef<Path>) -> Result<()> {
        let doc = serde_json::json!({
            "generator": "chacha8-lqr-schur",
            "version": GENERATOR_VERSION,
            "config": self,
        });
        std::fs::write(path, serde_json::to_string_pretty(&doc)?)?;
        Ok(())
    }
}

/// Finite-horizon linear quadratic regulator.
#[derive(Debug, Clone, PartialEq)]
pub struct LqrProblem {
    pub horizon: usize,
    pub nx: usize,
    pub nu: usize,
    /// `(A_t, B_t)` for `t = 0..T`.
    pub dynamics: Vec<(DMatrix<f64>, DMatrix<f64>)>,
    /// `Q_0..Q_T`
    pub q: Vec<DMatrix<f64>>,
    /// `R_0..R_{T-1}`
    pub r: Vec<DMatrix<f64>>,
    pub x0: DVector<f64>,
}

impl LqrProblem {
    pub fn validate(&self) -> Result<()> {
        let t = self.horizon;
        if t == 0 || self.dynamics.len() != t || self.q.len() != t + 1 || self.r.len() != t {
            return Err(Error::InvalidShape("inconsistent horizon".into()));
        }
        let shape_ok = self.dynamics.iter().all(|(a, b)| {
            a.shape() == (self.nx, self.nx) && b.shape() == (self.nx, self.nu)
        }) && self.q.iter().all(|q| q.shape() == (self.nx, self.nx))
            && self.r.iter().all(|r| r.shape() == (self.nu, self.nu))
            && self.x0.len() == self.nx;
        if !shape_ok {
            return Err(Error::InvalidShape("inconsistent LQR dimensions".into()));
        }
        for (k, m) in self.q.iter().chain(&self.r).enumerate() {
            if m.clone().cholesky().is_none() {
                return Err(Error::NotPositiveDefinite(k + 1));
            }
        }
        Ok(())
    }
}

fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    // row-major draw order
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let z: f64 = rng.sample(StandardNormal);
            m[(i, j)] = scale * z;
        }
    }
    m
}

fn random_cost(rng: &mut ChaCha8Rng, dim: usize, factor_scale: f64, shift: f64) -> DMatrix<f64> {
    let l = normal_matrix(rng, dim, dim, factor_scale);
    let mut c = &l * l.transpose();
    for i in 0..dim {
        c[(i, i)] += shift;
    }
    c
}

/// Draws an LQR problem with `T = N - 1` stages.
///
/// Draw order: `(A_t, B_t)` for each stage, then `Q_0..Q_T`, then
/// `R_0..R_{T-1}`, then `x_0`, every matrix row-major.
pub fn random_lqr(cfg: &GeneratorConfig) -> Result<LqrProblem> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (nx, nu) = (cfg.block_size, cfg.nu);
    let horizon = cfg.num_blocks - 1;
    let dyn_scale = cfg.dynamics_scale / (nx as f64).sqrt();

    let dynamics = (0..horizon)
        .map(|_| {
            let a = normal_matrix(&mut rng, nx, nx, dyn_scale);
            let b = normal_matrix(&mut rng, nx, nu, dyn_scale);
            (a, b)
        })
        .collect();
    let q = (0..=horizon)
        .map(|_| random_cost(&mut rng, nx, cfg.cost_factor_scale, cfg.cost_shift))
        .collect();
    let r = (0..horizon)
        .map(|_| random_cost(&mut rng, nu, cfg.cost_factor_scale, cfg.cost_shift))
        .collect();
    let x0 = DVector::from_iterator(nx, (0..nx).map(|_| rng.sample::<f64, _>(StandardNormal)));

    let p = LqrProblem {
        horizon,
        nx,
        nu,
        dynamics,
        q,
        r,
        x0,
    };
    p.validate()?;
    Ok(p)
}

/// Cholesky factors of the stage costs, i.e. of the Hessian blocks.
#[derive(Debug, Clone)]
pub struct HessianFactor {
    pub q: Vec<Cholesky<f64, Dyn>>,
    pub r: Vec<Cholesky<f64, Dyn>>,
}

fn symmetrized(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Builds `S = G H^{-1} G^T` blockwise and checks it is s.p.d.
pub fn schur_complement(p: &LqrProblem) -> Result<(BlockTridiagMatrix, HessianFactor)> {
    p.validate()?;
    let not_pd = |k| Error::NotPositiveDefinite(k + 1);
    let q_chol = p
        .q
        .iter()
        .enumerate()
        .map(|(k, q)| q.clone().cholesky().ok_or_else(|| not_pd(k)))
        .collect::<Result<Vec<_>>>()?;
    let r_chol = p
        .r
        .iter()
        .enumerate()
        .map(|(k, r)| r.clone().cholesky().ok_or_else(|| not_pd(k)))
        .collect::<Result<Vec<_>>>()?;
    let q_inv: Vec<DMatrix<f64>> = q_chol.iter().map(|c| symmetrized(c.inverse())).collect();
    let r_inv: Vec<DMatrix<f64>> = r_chol.iter().map(|c| symmetrized(c.inverse())).collect();

    let mut diag = Vec::with_capacity(p.horizon + 1);
    let mut off = Vec::with_capacity(p.horizon);
    diag.push(q_inv[0].clone());
    for t in 1..=p.horizon {
        let (a, b) = &p.dynamics[t - 1];
        let d = a * &q_inv[t - 1] * a.transpose() + b * &r_inv[t - 1] * b.transpose() + &q_inv[t];
        diag.push(symmetrized(d));
    }
    for t in 0..p.horizon {
        let (a, _) = &p.dynamics[t];
        off.push(-(a * &q_inv[t]).transpose());
    }

    let to_blocks = |ms: Vec<DMatrix<f64>>| -> Vec<Block> {
        ms.iter().map(|m| Block::from_dmatrix(m).expect("square block")).collect()
    };
    let s = BlockTridiagMatrix::new(to_blocks(diag), to_blocks(off))?;
    Ok((s, HessianFactor { q: q_chol, r: r_chol }))
}

/// [`random_lqr`] followed by [`schur_complement`]; a Schur complement that
/// fails the dense s.p.d. check is reported as `SchurNotSpd`.
pub fn random_instance(cfg: &GeneratorConfig) -> Result<BlockTridiagMatrix> {
    let p = random_lqr(cfg)?;
    let (s, _) = schur_complement(&p)?;
    s.validate_spd().map_err(|_| Error::SchurNotSpd { seed: cfg.seed })?;
    Ok(s)
}

/// `count` standard normal vectors of length `N n`, drawn from stream 1.
pub fn random_rhs(cfg: &GeneratorConfig, count: usize) -> Vec<BlockVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(RHS_STREAM);
    let dim = cfg.num_blocks * cfg.block_size;
    (0..count)
        .map(|_| {
            let data = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            BlockVector::from_vec(cfg.num_blocks, cfg.block_size, data).unwrap()
        })
        .collect()
}

/// Dense `G` and `H` of the equality-constrained QP, for oracles.
pub fn dense_kkt_parts(p: &LqrProblem) -> (DMatrix<f64>, DMatrix<f64>) {
    let (nx, nu, t) = (p.nx, p.nu, p.horizon);
    let stage = nx + nu;
    let nz = t * stage + nx;
    let x_col = |k: usize| k * stage;
    let u_col = |k: usize| k * stage + nx;

    let mut h = DMatrix::zeros(nz, nz);
    for k in 0..=t {
        h.view_mut((x_col(k), x_col(k)), (nx, nx)).copy_from(&p.q[k]);
    }
    for k in 0..t {
        h.view_mut((u_col(k), u_col(k)), (nu, nu)).copy_from(&p.r[k]);
    }

    let mut g = DMatrix::zeros((t + 1) * nx, nz);
    g.view_mut((0, 0), (nx, nx)).fill_with_identity();
    for k in 0..t {
        let row = (k + 1) * nx;
        let (a, b) = &p.dynamics[k];
        g.view_mut((row, x_col(k)), (nx, nx)).copy_from(&(-a));
        g.view_mut((row, u_col(k)), (nx, nu)).copy_from(&(-b));
        g.view_mut((row, x_col(k + 1)), (nx, nx)).fill_with_identity();
    }
    (g, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_problem() -> LqrProblem {
        let one = DMatrix::from_element(1, 1, 1.0);
        LqrProblem {
            horizon: 1,
            nx: 1,
            nu: 1,
            dynamics: vec![(one.clone(), one.clone())],
            q: vec![one.clone(), one.clone()],
            r: vec![one.clone()],
            x0: DVector::from_element(1, 0.0),
        }
    }

    #[test]
    fn scalar_hand_computation() {
        let (s, _) = schur_complement(&scalar_problem()).unwrap();
        let dense = s.assemble_dense();
        assert_eq!(dense, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 3.0]));
        let (g, _) = dense_kkt_parts(&scalar_problem());
        assert_eq!(g, DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn deterministic_in_seed() {
        let cfg = GeneratorConfig::new(42, 5, 4);
        assert_eq!(random_lqr(&cfg).unwrap(), random_lqr(&cfg).unwrap());
        assert_ne!(random_lqr(&cfg).unwrap(), random_lqr(&cfg.with_seed(43)).unwrap());
        assert_eq!(random_rhs(&cfg, 3), random_rhs(&cfg, 3));
    }

    #[test]
    fn paper_sized_problem() {
        let p = random_lqr(&GeneratorConfig::new(0, 20, 15)).unwrap();
        assert_eq!((p.horizon, p.nx, p.nu), (19, 15, 5));
        assert_eq!(p.q.len(), 20);
    }

    #[test]
    fn degenerate_costs_are_identity() {
        let mut cfg = GeneratorConfig::new(1, 4, 3);
        cfg.cost_factor_scale = 0.0;
        cfg.cost_shift = 1.0;
        let p = random_lqr(&cfg).unwrap();
        for m in p.q.iter().chain(&p.r) {
            assert_eq!(*m, DMatrix::identity(m.nrows(), m.ncols()));
        }
    }

    #[test]
    fn zero_dynamics_decouple() {
        let mut p = random_lqr(&GeneratorConfig::new(2, 4, 3)).unwrap();
        for (a, b) in p.dynamics.iter_mut() {
            a.fill(0.0);
            b.fill(0.0);
        }
        for m in p.q.iter_mut().chain(p.r.iter_mut()) {
            let d = m.nrows();
            *m = DMatrix::identity(d, d);
        }
        let (s, _) = schur_complement(&p).unwrap();
        for d in s.diag_blocks() {
            assert_eq!(*d, Block::identity(3));
        }
        assert!(s.off_blocks().iter().all(|o| o.max_abs() == 0.0));
    }

    #[test]
    fn invalid_configs() {
        assert!(random_lqr(&GeneratorConfig::new(0, 1, 3)).is_err());
        assert!(random_lqr(&GeneratorConfig::new(0, 3, 0)).is_err());
        let mut p = scalar_problem();
        p.q[0][(0, 0)] = -1.0;
        assert!(matches!(schur_complement(&p), Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn rhs_counts() {
        let cfg = GeneratorConfig::new(3, 3, 2);
        assert!(random_rhs(&cfg, 0).is_empty());
        let v = random_rhs(&cfg, 100);
        assert_eq!(v.len(), 100);
        assert!(v.iter().all(|b| b.len() == 6));
    }
}
