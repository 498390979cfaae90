mod common;

use common::*;
use evolver_core::linop::{mat_exp, operator_norm};
use evolver_core::semigroup::{
    chernoff_defect, chernoff_power_limit, chernoff_sum_limit, dissipativity_rate, ChernoffScheme, ChernoffSequence,
    ContractionSemigroup, SequencePreset,
};
use evolver_core::{Matrix, Vector};
use rand::Rng;

#[test]
fn defect_bound_on_random_contractions() {
    let mut r = rng(21);
    let mut violations = 0;
    for _ in 0..100 {
        let d = r.gen_range(1..=6);
        let m = random_matrix(&mut r, d, 1.0);
        let t_op = m.scale(r.gen_range(0.1..1.0) / operator_norm(&m));
        let x = random_vector(&mut r, d);
        for n in [1, 2, 5, 16, 64] {
            let b = chernoff_defect(&t_op, &x, n).unwrap();
            if b.lhs > b.rhs + 1e-9 {
                violations += 1;
            }
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn defect_rejects_expansions() {
    let t_op = Matrix::diag(&[1.5, 0.2]);
    assert!(chernoff_defect(&t_op, &Vector::from_f64(&[1.0, 1.0]), 4).is_err());
}

#[test]
fn resolvent_scheme_power_and_sum_limits() {
    let mut r = rng(22);
    for _ in 0..5 {
        let a = random_dissipative(&mut r, 3, 0.1);
        let scheme = ChernoffScheme::resolvent(3, move |_| a.clone());
        let x = random_vector(&mut r, 3);
        for preset in [SequencePreset::Uniform, SequencePreset::CeilStep] {
            let seq = ChernoffSequence::doubling(preset, 1.0, 0.0, 16, 4096);
            let power = chernoff_power_limit(&scheme, &seq, &x).unwrap();
            assert!(power.converged, "{power:?}");
            let sum = chernoff_sum_limit(&scheme, &seq, &x).unwrap();
            assert!(sum.converged, "{sum:?}");
            // backward Euler is first order
            let rate = power.observed_rate.unwrap();
            assert!((0.8..1.2).contains(&rate), "{rate}");
        }
    }
}

#[test]
fn exponential_scheme_is_exact_for_uniform_steps() {
    let a = Matrix::from_f64_rows(&[&[-1.0, 2.0], &[-2.0, -1.0]]).unwrap();
    let scheme = ChernoffScheme::exponential(2, move |_| a.clone());
    let seq = ChernoffSequence::doubling(SequencePreset::Uniform, 1.0, 0.0, 1, 64);
    let table = chernoff_power_limit(&scheme, &seq, &Vector::from_f64(&[1.0, 0.0])).unwrap();
    assert!(table.rows.iter().all(|r| r.error < 1e-13));
}

#[test]
fn parameter_dependent_generators() {
    // A(μ) = −(1 + μ) I; with μ_n → μ₀ the limit is exp(−t(1 + μ₀))
    let scheme = ChernoffScheme::resolvent(1, |mu: f64| Matrix::diag(&[-(1.0 + mu)]));
    let seq = ChernoffSequence::doubling(SequencePreset::Uniform, 1.0, 0.5, 8, 4096).with_mu_offset(1.0);
    let table = chernoff_power_limit(&scheme, &seq, &Vector::from_f64(&[1.0])).unwrap();
    assert!(table.converged);
    let gap = scheme.consistency_gap(1e-4, 0.5, 0.5).unwrap();
    assert!(gap < 1e-3);
}

#[test]
fn contraction_semigroup_bound() {
    let mut r = rng(23);
    let a = random_dissipative(&mut r, 4, 0.4);
    let rate = dissipativity_rate(&a, &Matrix::identity(4)).unwrap();
    let sg = ContractionSemigroup::new(a.clone(), rate, None).unwrap();
    let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
    assert!(sg.bound_excess(&times).unwrap() <= 1e-12);
    assert!(ContractionSemigroup::new(a, rate + 0.1, None).is_err());
    let e = mat_exp(&Matrix::diag(&[-1.0]), 2.0).unwrap();
    assert!((e[(0, 0)] - (-2.0f64).exp()).abs() < 1e-15);
}

#[test]
fn dissipativity_examples() {
    let m = Matrix::<f64>::from_f64_rows(&[&[0.0, 1.0], &[-1.0, -2.0]]).unwrap();
    assert!(dissipativity_rate(&m, &Matrix::identity(2)).unwrap().abs() < 1e-14);
    let not_spd = Matrix::from_f64_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
    assert!(dissipativity_rate(&m, &not_spd).is_err());
}
