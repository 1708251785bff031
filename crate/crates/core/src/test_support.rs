use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::blocktri::{BlockTridiagMatrix, BlockVector};
use crate::dense::Block;

/// Random s.p.d. block tridiagonal matrix with noticeable off-diagonal coupling.
pub fn random_spd_blocktri(rng: &mut ChaCha8Rng, num_blocks: usize, n: usize) -> BlockTridiagMatrix {
    let diag: Vec<Block> = (0..num_blocks)
        .map(|_| {
            let x = Block::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            Block::from_fn(n, |i, j| {
                let s: f64 = (0..n).map(|k| x.get(i, k) * x.get(j, k)).sum();
                s + if i == j { 0.5 } else { 0.0 }
            })
        })
        .collect();
    let raw_off: Vec<Block> = (1..num_blocks)
        .map(|_| Block::from_fn(n, |_, _| rng.random_range(-1.0..1.0)))
        .collect();
    let mut scale = 1.0;
    loop {
        let off = raw_off
            .iter()
            .map(|o| Block::from_fn(n, |i, j| scale * o.get(i, j)))
            .collect();
        let a = BlockTridiagMatrix::new(diag.clone(), off).unwrap();
        if a.validate_spd().is_ok() {
            return a;
        }
        scale *= 0.7;
    }
}

pub fn random_vector(rng: &mut ChaCha8Rng, num_blocks: usize, n: usize) -> BlockVector {
    let data = (0..num_blocks * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    BlockVector::from_vec(num_blocks, n, data).unwrap()
}
