use stairprecond::ocpgen::{dense_kkt_parts, random_lqr, schur_complement, GeneratorConfig};

fn rel_frobenius(x: &nalgebra::DMatrix<f64>, y: &nalgebra::DMatrix<f64>) -> f64 {
    (x - y).norm() / y.norm()
}

#[test]
fn blockwise_schur_matches_dense_product() {
    for (seed, nb, n) in [(0, 2, 1), (1, 3, 2), (2, 5, 4), (3, 6, 5), (4, 10, 6), (5, 4, 15)] {
        let cfg = GeneratorConfig::new(seed, nb, n);
        let p = random_lqr(&cfg).unwrap();
        let (s, _) = schur_complement(&p).unwrap();
        let (g, h) = dense_kkt_parts(&p);
        let h_inv = h.cholesky().unwrap().inverse();
        let reference = &g * h_inv * g.transpose();
        let dense = s.assemble_dense();
        let err = rel_frobenius(&dense, &reference);
        assert!(err < 1e-10, "seed {seed}: relative error {err:e}");
        assert!(dense.clone().cholesky().is_some());
    }
}

#[test]
fn dense_product_vanishes_outside_the_band() {
    let cfg = GeneratorConfig::new(9, 6, 3);
    let p = random_lqr(&cfg).unwrap();
    let (g, h) = dense_kkt_parts(&p);
    let s = &g * h.cholesky().unwrap().inverse() * g.transpose();
    let n = cfg.block_size;
    for bi in 0..cfg.num_blocks {
        for bj in 0..cfg.num_blocks {
            if bi.abs_diff(bj) > 1 {
                let block = s.view((bi * n, bj * n), (n, n));
                assert!(block.amax() < 1e-12, "block ({bi},{bj})");
            }
        }
    }
}

#[test]
fn shapes_follow_horizon_and_state_size() {
    let cfg = GeneratorConfig::new(1, 8, 3);
    let p = random_lqr(&cfg).unwrap();
    assert_eq!(p.horizon, 7);
    assert_eq!(p.dynamics.len(), 7);
    assert_eq!(p.q.len(), 8);
    assert_eq!(p.r.len(), 7);
    let (s, hf) = schur_complement(&p).unwrap();
    assert_eq!((s.num_blocks(), s.block_size()), (8, 3));
    assert_eq!((hf.q.len(), hf.r.len()), (8, 7));
}
