#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stairprecond::ocpgen::{random_instance, GeneratorConfig};
use stairprecond::{factorize, Block, BlockFactorization, BlockTridiagMatrix, BlockVector};

pub fn lqr_factor(seed: u64, num_blocks: usize, block_size: usize) -> Arc<BlockFactorization> {
    let cfg = GeneratorConfig::new(seed, num_blocks, block_size);
    let a = random_instance(&cfg).expect("s.p.d. instance");
    Arc::new(factorize(Arc::new(a)).unwrap())
}

pub fn random_vectors(seed: u64, num_blocks: usize, block_size: usize, count: usize) -> Vec<BlockVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let data = (0..num_blocks * block_size).map(|_| rng.random_range(-1.0..1.0)).collect();
            BlockVector::from_vec(num_blocks, block_size, data).unwrap()
        })
        .collect()
}

/// Near block-Toeplitz s.p.d. matrix: `D_k = I + E_k` with small symmetric
/// `E_k` and `O_k = 0.45 U_k` with `U_k` orthogonal. The eigenvalues of
/// `B_l^{-1} C_l` stay away from zero, so eigenvalue counts are robust.
pub fn random_spd(seed: u64, num_blocks: usize, n: usize) -> Arc<BlockFactorization> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let diag = (0..num_blocks)
        .map(|_| {
            let e = DMatrix::from_fn(n, n, |_, _| rng.random_range(-0.05..0.05));
            let d = DMatrix::identity(n, n) + &e + e.transpose();
            Block::from_dmatrix(&d).unwrap()
        })
        .collect();
    let off = (1..num_blocks)
        .map(|_| {
            let x = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let u = x.qr().q() * 0.45;
            Block::from_dmatrix(&u).unwrap()
        })
        .collect();
    let a = BlockTridiagMatrix::new_validated(diag, off).unwrap();
    Arc::new(factorize(Arc::new(a)).unwrap())
}
