mod common;

use nalgebra::Complex;
use proptest::prelude::*;
use wassmean::barycenter::{
    commuting_closed_form, fixed_point_residual, objective, wasserstein_mean, Ensemble,
    IterationRule, SolverConfig, SolverInit,
};
use wassmean::bures_wasserstein::geodesic;
use wassmean::hermitian::{random_spd, random_spd_with, random_unitary, seeded_rng, SpdMatrix};
use wassmean::means::WeightVector;
use wassmean::verify::{random_commuting_ensemble, random_ensemble};

fn raw(e: &Ensemble) -> (Vec<f64>, Vec<common::CMat>) {
    (
        e.weights().as_slice().to_vec(),
        e.matrices().iter().map(|a| a.matrix().clone()).collect(),
    )
}

fn solve(e: &Ensemble) -> SpdMatrix {
    let r = wasserstein_mean(e, &SolverConfig::default()).unwrap();
    assert!(r.converged, "residual {}", r.residual);
    r.mean
}

#[test]
fn residual_agrees_with_independent_oracle() {
    let mut rng = seeded_rng(101);
    for m in [2, 3, 5] {
        for n in [2, 3, 5] {
            for _ in 0..4 {
                let e = random_ensemble(&mut rng, m, n, 0.2, 5.0).unwrap();
                let r = wasserstein_mean(&e, &SolverConfig::default()).unwrap();
                assert!(r.converged && r.iterations <= 200);
                let (w, mats) = raw(&e);
                let oracle = common::wass_residual(r.mean.matrix(), &w, &mats);
                assert!(oracle <= 1e-10, "m={m} n={n}: oracle residual {oracle}");
                let fp = fixed_point_residual(&r.mean, &e).unwrap();
                assert!(fp <= 1e-9 * r.mean.frobenius_norm());
            }
        }
    }
}

#[test]
fn minimizer_dominance() {
    let mut rng = seeded_rng(102);
    for m in [2, 3] {
        for _ in 0..10 {
            let e = random_ensemble(&mut rng, m, 3, 0.2, 5.0).unwrap();
            let x = solve(&e);
            let fx = objective(&x, &e).unwrap();
            let mut probes: Vec<SpdMatrix> = e.matrices().to_vec();
            probes.push(wassmean::means::arithmetic_mean(e.weights(), e.matrices()).unwrap());
            for _ in 0..20 {
                probes.push(random_spd_with(m, 0.2, 5.0, &mut rng).unwrap());
            }
            for y in &probes {
                assert!(fx <= objective(y, &e).unwrap() + 1e-9);
            }
            // The objective is the weighted sum of squared distances, checked via the oracle distance.
            let (w, mats) = raw(&e);
            let direct: f64 = w
                .iter()
                .zip(&mats)
                .map(|(w, a)| w * common::bw_distance(x.matrix(), a).powi(2))
                .sum();
            assert!((direct - fx).abs() < 1e-9);
        }
    }
}

#[test]
fn permutation_equivariance() {
    let mut rng = seeded_rng(103);
    for m in [2, 3, 5] {
        let e = random_ensemble(&mut rng, m, 5, 0.2, 5.0).unwrap();
        let x = solve(&e);
        for perm in [[4, 3, 2, 1, 0], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3]] {
            let y = solve(&e.permuted(&perm).unwrap());
            assert!(common::rel_err(y.matrix(), x.matrix()) < 1e-9);
        }
    }
}

#[test]
fn homogeneity() {
    let mut rng = seeded_rng(104);
    for m in [2, 3, 5] {
        let e = random_ensemble(&mut rng, m, 3, 0.2, 5.0).unwrap();
        let x = solve(&e);
        for c in [0.5, 2.0] {
            let y = solve(&e.scaled(c).unwrap());
            assert!(common::rel_err(y.matrix(), &(x.matrix() * Complex::new(c, 0.0))) < 1e-9);
        }
    }
}

#[test]
fn unitary_equivariance() {
    let mut rng = seeded_rng(105);
    for m in [2, 3, 4] {
        let e = random_ensemble(&mut rng, m, 3, 0.2, 5.0).unwrap();
        let u = random_unitary(m, &mut rng);
        let x = solve(&e);
        let rotated = e
            .map_matrices(|a| SpdMatrix::from_symmetrized(&(&u * a.matrix() * u.adjoint())))
            .unwrap();
        let y = solve(&rotated);
        assert!(common::rel_err(y.matrix(), &(&u * x.matrix() * u.adjoint())) < 1e-9);
    }
}

#[test]
fn two_point_mean_is_the_geodesic() {
    for seed in 0..20 {
        let m = 2 + (seed % 3) as usize;
        let a = random_spd(m, seed, 0.2, 5.0).unwrap();
        let b = random_spd(m, seed + 1000, 0.2, 5.0).unwrap();
        for t in [0.25, 0.5, 0.75] {
            let e = Ensemble::new(
                WeightVector::new(vec![1.0 - t, t]).unwrap(),
                vec![a.clone(), b.clone()],
            )
            .unwrap();
            let x = solve(&e);
            let g = geodesic(&a, &b, t).unwrap();
            assert!((x.matrix() - g.matrix()).norm() < 1e-7, "seed={seed} t={t}");
        }
    }
}

#[test]
fn commuting_ensembles_match_closed_form() {
    let mut rng = seeded_rng(106);
    for m in [2, 3, 5] {
        for n in [2, 3, 5] {
            let e = random_commuting_ensemble(&mut rng, m, n, 0.2, 5.0).unwrap();
            let x = solve(&e);
            let closed = commuting_closed_form(&e).unwrap();
            assert!((x.matrix() - closed.matrix()).norm() < 1e-8);
            // Closed form rebuilt from Denman–Beavers roots.
            let (w, mats) = raw(&e);
            let s = w
                .iter()
                .zip(&mats)
                .fold(common::CMat::zeros(m, m), |acc, (w, a)| {
                    acc + common::db_sqrt(a) * Complex::new(*w, 0.0)
                });
            assert!(common::rel_err(closed.matrix(), &(&s * &s)) < 1e-10);
        }
    }
}

#[test]
fn naive_rule_reaches_the_same_mean() {
    let mut rng = seeded_rng(107);
    let e = random_ensemble(&mut rng, 3, 3, 0.5, 2.0).unwrap();
    let damped = solve(&e);
    let cfg = SolverConfig {
        rule: IterationRule::Naive,
        max_iter: 2000,
        ..SolverConfig::default()
    };
    let naive = wasserstein_mean(&e, &cfg).unwrap();
    assert!(naive.converged);
    assert!(common::rel_err(naive.mean.matrix(), damped.matrix()) < 1e-9);
}

#[test]
fn explicit_initialization_converges() {
    let mut rng = seeded_rng(108);
    let e = random_ensemble(&mut rng, 3, 4, 0.2, 5.0).unwrap();
    let cfg = SolverConfig {
        init: SolverInit::Explicit(SpdMatrix::scaled_identity(3, 10.0)),
        ..SolverConfig::default()
    };
    let r = wasserstein_mean(&e, &cfg).unwrap();
    assert!(r.converged);
    assert!(common::rel_err(r.mean.matrix(), solve(&e).matrix()) < 1e-9);
}

#[test]
fn solves_are_bitwise_deterministic() {
    let mut rng = seeded_rng(109);
    let e = random_ensemble(&mut rng, 4, 5, 0.2, 5.0).unwrap();
    let a = wasserstein_mean(&e, &SolverConfig::default()).unwrap();
    let b = std::thread::spawn(move || wasserstein_mean(&e, &SolverConfig::default()).unwrap())
        .join()
        .unwrap();
    assert_eq!(a.mean.matrix(), b.mean.matrix());
    assert_eq!(a.iterations, b.iterations);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mean_lies_between_bounds(seed in any::<u64>(), m in 1usize..5, n in 1usize..5) {
        let mut rng = seeded_rng(seed);
        let e = random_ensemble(&mut rng, m, n, 0.1, 10.0).unwrap();
        let x = solve(&e);
        let (w, mats) = raw(&e);
        let mut sum = common::CMat::zeros(m, m);
        let mut sum_inv = common::CMat::zeros(m, m);
        for (w, a) in w.iter().zip(&mats) {
            sum += a * Complex::new(*w, 0.0);
            sum_inv += common::inv(a) * Complex::new(*w, 0.0);
        }
        let lower = common::eye(m) * Complex::new(2.0, 0.0) - sum_inv;
        prop_assert!(common::loewner_oracle(&lower, x.matrix(), 1e-9));
        prop_assert!(common::loewner_oracle(x.matrix(), &sum, 1e-9));
    }
}
