mod common;

use common::*;
use evolver_core::linop::{mat_exp, operator_norm, resolvent, symmetric_eigen};
use evolver_core::{Matrix, Vector};
use proptest::prelude::*;

fn matrix_strategy(d: usize, bound: f64) -> impl Strategy<Value = Matrix<f64>> {
    prop::collection::vec(-bound..bound, d * d)
        .prop_map(move |v| Matrix::from_fn(d, |i, j| v[i * d + j]))
}

#[test]
fn operator_norm_matches_svd() {
    let mut r = rng(11);
    for d in 1..=8 {
        for _ in 0..10 {
            let m = random_matrix(&mut r, d, 2.0);
            let oracle = to_na(&m).singular_values().max();
            let ours = operator_norm(&m);
            assert!((ours - oracle).abs() <= 1e-10 * oracle.max(1.0), "{d}: {ours} vs {oracle}");
        }
    }
}

#[test]
fn exponential_matches_eigen_oracle_on_symmetric_input() {
    let mut r = rng(12);
    for d in [2, 4, 6] {
        let b = random_matrix(&mut r, d, 1.0);
        let s = (&b + &b.transpose()).scale(1.5);
        let (vals, vecs) = symmetric_eigen(&s);
        let exp_diag = Matrix::diag(&vals.iter().map(|v| v.exp()).collect::<Vec<_>>());
        let oracle = &(&vecs * &exp_diag) * &vecs.transpose();
        let ours = mat_exp(&s, 1.0).unwrap();
        assert!(max_diff(&ours, &oracle) < 1e-11 * oracle.max_abs().max(1.0));
    }
}

#[test]
fn exponential_of_large_norm_against_taylor_with_squaring() {
    // e^{tM} = (e^{tM/2^j})^{2^j} with a 30-term Taylor series at the bottom
    let mut r = rng(13);
    let m = random_matrix(&mut r, 5, 3.0);
    let j = 12;
    let small = m.scale(1.0 / f64::from(1u32 << j));
    let mut term = Matrix::identity(5);
    let mut sum = Matrix::identity(5);
    for k in 1..30 {
        term = (&term * &small).scale(1.0 / k as f64);
        sum = &sum + &term;
    }
    for _ in 0..j {
        sum = &sum * &sum;
    }
    let ours = mat_exp(&m, 1.0).unwrap();
    assert!(max_diff(&ours, &sum) < 1e-9 * sum.max_abs().max(1.0));
}

#[test]
fn resolvent_residual() {
    let mut r = rng(14);
    for _ in 0..20 {
        let m = random_matrix(&mut r, 4, 1.0);
        let mu = 5.0;
        let res = resolvent(&m, mu).unwrap();
        let prod = &(&Matrix::scalar(4, mu) - &m) * &res;
        assert!(max_diff(&prod, &Matrix::identity(4)) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn semigroup_law(m in matrix_strategy(4, 1.0), s in 0.0..2.0f64, t in 0.0..2.0f64) {
        let lhs = mat_exp(&m, s + t).unwrap();
        let rhs = &mat_exp(&m, t).unwrap() * &mat_exp(&m, s).unwrap();
        let scale = 1.0 + operator_norm(&m);
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-10 * scale * scale * lhs.max_abs().max(1.0));
    }

    #[test]
    fn contraction_transfer(seed in 0u64..1000, t in 0.0..10.0f64) {
        let mut r = rng(seed);
        let m = random_dissipative(&mut r, 4, 0.3);
        let omega = -evolver_core::linop::max_symmetric_eigenvalue(&m.symmetric_part());
        prop_assert!(omega >= 0.3 - 1e-12);
        let norm = operator_norm(&mat_exp(&m, t).unwrap());
        prop_assert!(norm <= (-omega * t).exp() + 1e-10);
    }

    #[test]
    fn resolvent_identity(m in matrix_strategy(4, 1.0), a in 5.0..8.0f64, b in 8.5..12.0f64) {
        let ra = resolvent(&m, a).unwrap();
        let rb = resolvent(&m, b).unwrap();
        let lhs = &ra - &rb;
        let rhs = (&ra * &rb).scale(b - a);
        prop_assert!(max_diff(&lhs, &rhs) < 1e-9);
    }

    #[test]
    fn whitened_norms_agree(seed in 0u64..500) {
        let mut r = rng(seed);
        let b = random_matrix(&mut r, 3, 1.0);
        let g = &(&b * &b.transpose()) + &Matrix::identity(3);
        let metric = evolver_core::Metric::new(g.clone()).unwrap();
        let x: Vector<f64> = random_vector(&mut r, 3);
        let direct = x.dot(&g.mul_vec(&x)).sqrt();
        prop_assert!((metric.norm(&x) - direct).abs() < 1e-12 * (1.0 + direct));
    }
}
