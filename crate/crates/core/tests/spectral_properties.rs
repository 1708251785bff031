mod common;

use common::{random_spd, random_vectors};
use stairprecond::precond::ScalarMap;
use stairprecond::spectral::{dense_h, dense_preconditioner, eig_stair_product, spectrum_of_preconditioned};
use stairprecond::{distinct_count, pcg_solve, Identity, PcgConfig, PolyPreconditioner, Sign, SplittingWeights};

fn cond(f: &std::sync::Arc<stairprecond::BlockFactorization>, w: SplittingWeights, m: usize) -> f64 {
    spectrum_of_preconditioned(&PolyPreconditioner::new(w, m, f.clone()).unwrap())
        .unwrap()
        .cond
}

#[test]
fn optimal_weights_halve_distinct_eigenvalues() {
    for (seed, nb, n) in [(1, 6, 3), (2, 7, 3), (3, 8, 2), (4, 5, 4)] {
        let f = random_spd(seed, nb, n);
        for m in 1..=4 {
            let p = PolyPreconditioner::new(SplittingWeights::optimal(), m, f.clone()).unwrap();
            let r = spectrum_of_preconditioned(&p).unwrap();
            assert_eq!(r.distinct, distinct_count(nb, n), "N={nb} n={n} m={m}");
            assert!(r.pairing_ok);
        }
    }
}

#[test]
fn exact_ones_only_for_odd_block_count() {
    for (nb, expected) in [(5, 3), (6, 0), (7, 3), (4, 0)] {
        let f = random_spd(nb as u64, nb, 3);
        for m in 1..=3 {
            let p = PolyPreconditioner::new(SplittingWeights::optimal(), m, f.clone()).unwrap();
            let r = spectrum_of_preconditioned(&p).unwrap();
            assert_eq!(r.count_near(1.0, 1e-8), expected, "N={nb} m={m}");
        }
    }
}

#[test]
fn eigenvalues_follow_the_scalar_map() {
    let f = random_spd(11, 6, 3);
    let mut lambdas = eig_stair_product(&f).unwrap();
    lambdas.push(0.0);
    for a in [0.0, 0.25, 1.0 / 3.0, 0.5, 0.8, 1.0] {
        let map = ScalarMap::new(a);
        for m in 1..=3 {
            let p = PolyPreconditioner::new(SplittingWeights::from_a(a), m, f.clone()).unwrap();
            for mu in spectrum_of_preconditioned(&p).unwrap().eigenvalues {
                let hit = lambdas.iter().any(|&l| {
                    [Sign::Plus, Sign::Minus]
                        .iter()
                        .any(|&s| (map.preconditioned_eigenvalue(s, l, m) - mu).abs() < 1e-7)
                });
                assert!(hit, "a={a} m={m} mu={mu}");
            }
        }
    }
}

#[test]
fn condition_number_decreases_with_order() {
    for seed in 0..3 {
        let f = random_spd(20 + seed, 6, 3);
        for w in [SplittingWeights::stairs_only(), SplittingWeights::equal(), SplittingWeights::optimal()] {
            let conds: Vec<f64> = (1..=4).map(|m| cond(&f, w, m)).collect();
            for k in 1..conds.len() {
                assert!(conds[k] <= conds[k - 1] * (1.0 + 1e-9), "{w:?}: {conds:?}");
            }
        }
    }
}

// Block Jacobi at odd order maps -sqrt(lambda_max) to 1 + lambda_max^{m/2},
// so m = 3 is worse than m = 2 once lambda_max is close to 1.
#[test]
fn block_jacobi_odd_order_can_raise_condition_number() {
    let f = common::lqr_factor(0, 8, 3);
    let lmax = *eig_stair_product(&f).unwrap().last().unwrap();
    let x = lmax.sqrt();
    let predicted2 = 1.0 / (1.0 - x * x);
    let predicted3 = (1.0 + x.powi(3)) / (1.0 - x.powi(3));
    let w = SplittingWeights::diagonal_only();
    let (c2, c3) = (cond(&f, w, 2), cond(&f, w, 3));
    assert!((c2 - predicted2).abs() < 1e-6 * predicted2);
    assert!((c3 - predicted3).abs() < 1e-6 * predicted3);
    assert_eq!(c3 > c2, predicted3 > predicted2);
}

#[test]
fn optimal_iteration_matrix_is_checkerboard() {
    for (seed, nb) in [(1, 6), (2, 7)] {
        let n = 2;
        let f = random_spd(seed, nb, n);
        let h = dense_h(SplittingWeights::optimal(), &f).unwrap();
        let mut nonzero = 0;
        for bi in 0..nb {
            for bj in 0..nb {
                let amax = h.view((bi * n, bj * n), (n, n)).amax();
                if bi.abs_diff(bj) == 1 {
                    assert!(amax <= 1e-12, "block ({bi},{bj}) = {amax:e}");
                }
                if amax > 1e-12 {
                    nonzero += 1;
                }
            }
        }
        assert!(nonzero <= 3 * nb - 4, "{nonzero} nonzero blocks");
    }
}

#[test]
fn pcg_terminates_after_distinct_count_steps() {
    let (nb, n) = (6, 2);
    for seed in 0..5 {
        let f = random_spd(40 + seed, nb, n);
        let a = f.matrix();
        let p = PolyPreconditioner::new(SplittingWeights::optimal(), 1, f.clone()).unwrap();
        let cfg = PcgConfig::for_matrix(a).with_tol(1e-6);
        for b in random_vectors(seed, nb, n, 5) {
            let pre = pcg_solve(a, &b, &p, &cfg).unwrap();
            assert!(pre.iterations <= distinct_count(nb, n) + 2, "{}", pre.iterations);
            let plain = pcg_solve(a, &b, &Identity, &cfg).unwrap();
            assert!(plain.converged);
        }
    }
}

#[test]
fn doubling_steps_of_block_jacobi_matches_optimal() {
    let (nb, n) = (7, 3);
    let f = random_spd(8, nb, n);
    for m in 1..=3 {
        let opt = PolyPreconditioner::new(SplittingWeights::optimal(), m, f.clone()).unwrap();
        let jac = PolyPreconditioner::new(SplittingWeights::diagonal_only(), 2 * m, f.clone()).unwrap();
        for y in random_vectors(m as u64, nb, n, 10) {
            let mut d = opt.apply_mm_inv(&y).unwrap();
            d.axpy(-1.0, &jac.apply_mm_inv(&y).unwrap());
            assert!(d.norm_inf() <= 1e-10 * y.norm_inf());
        }
    }
}

#[test]
fn preconditioners_in_guaranteed_region_are_spd() {
    let f = random_spd(3, 5, 3);
    for a in [0.0, 0.1, 1.0 / 3.0, 0.6, 1.0] {
        for m in 1..=4 {
            let p = PolyPreconditioner::new(SplittingWeights::from_a(a), m, f.clone()).unwrap();
            let dense = dense_preconditioner(&p).unwrap();
            let asym = (&dense - dense.transpose()).amax();
            assert!(asym <= 1e-10 * dense.amax().max(1.0));
            let r = spectrum_of_preconditioned(&p).unwrap();
            assert!(r.eigenvalues[0] > 0.0);
        }
    }
}

#[test]
fn parity_parts_of_stair_eigenvectors_are_eigenvectors_of_optimal_operators() {
    use nalgebra::DVector;
    use stairprecond::splitting::{dense_b, dense_c};
    use stairprecond::spectral::dense_g;
    use stairprecond::SplittingKind;

    let (nb, n) = (6, 2);
    let f = random_spd(77, nb, n);
    let a = f.matrix();
    let b = dense_b(SplittingKind::StairLeft, a);
    let c = dense_c(SplittingKind::StairLeft, a);
    let t = b.clone().lu().solve(&c).unwrap();
    let h = dense_h(SplittingWeights::optimal(), &f).unwrap();
    let ga = dense_g(SplittingWeights::optimal(), &f).unwrap() * a.assemble_dense();
    let dim = nb * n;
    for lambda in eig_stair_product(&f).unwrap() {
        let shifted = &t - nalgebra::DMatrix::identity(dim, dim) * lambda;
        let svd = shifted.svd(false, true);
        let (k, _) = svd.singular_values.argmin();
        let v: DVector<f64> = svd.v_t.unwrap().row(k).transpose();
        assert!((&t * &v - &v * lambda).norm() < 1e-8);
        let bv = stairprecond::BlockVector::from_vec(nb, n, v.as_slice().to_vec()).unwrap();
        let (even, odd) = bv.parity_split();
        for part in [even, odd] {
            let p = DVector::from_column_slice(part.as_slice());
            if p.norm() < 1e-10 {
                continue;
            }
            assert!((&h * &p - &p * lambda).norm() < 1e-8 * p.norm(), "H, lambda={lambda}");
            assert!((&ga * &p - &p * (1.0 - lambda)).norm() < 1e-8 * p.norm(), "GA, lambda={lambda}");
        }
    }
}
