mod common;

use std::f64::consts::PI;

use common::{random_vector, rk4_path, rng};
use evolver_core::averaging::PeriodMapOptions;
use evolver_core::evolsys::{build_evolution, GeneratorFamily};
use evolver_core::mild::MildProblem;
use evolver_core::wave::{
    build_wave_model, energy_residual, find_periodic_wave, invariance_gap, linear_nondegeneracy, select_eta,
    wave_problem, WaveModel, WaveParams,
};
use evolver_core::{Error, Matrix, Vector};
use proptest::prelude::*;

fn cos_beta(t: f64) -> f64 {
    1.0 + 0.5 * (2.0 * PI * t).cos()
}

fn model(k: usize) -> WaveModel<f64> {
    build_wave_model(WaveParams::new(PI, k, 1.0).with_beta(cos_beta)).unwrap().0
}

fn saturating(k: usize) -> WaveModel<f64> {
    let params = WaveParams::new(PI, k, 1.0)
        .with_beta(cos_beta)
        .with_nonlinearity(|t: f64, s: f64| s.tanh() + (2.0 * PI * t).cos(), 0.0);
    build_wave_model(params).unwrap().0
}

fn rk4_wave(m: &WaveModel<f64>, x: &Vector<f64>, g: impl Fn(f64) -> Vector<f64>, steps: usize) -> Vec<Vector<f64>> {
    let fam = m.family();
    let field = m.field();
    let k = m.k();
    rk4_path(
        move |t, z| {
            let mut out = fam.eval(t).mul_vec(z);
            out.axpy(1.0, &field.eval(t, z));
            let gt = g(t);
            for i in 0..k {
                out[k + i] += gt[i];
            }
            out
        },
        x,
        0.0,
        1.0,
        steps,
    )
}

#[test]
fn dissipativity_in_the_eta_metric() {
    for k in [1, 3, 8] {
        let m = model(k);
        let fam = m.family();
        let omega = m.eta_choice().numeric_rate;
        let mut g = rng(k as u64);
        for i in 0..64 {
            let t = i as f64 / 64.0;
            let z = random_vector(&mut g, 2 * k);
            let az = fam.eval(t).mul_vec(&z);
            let lhs = fam.metric().inner(&az, &z);
            let rhs = -omega * fam.metric().inner(&z, &z);
            assert!(lhs <= rhs + 1e-12, "k={k} t={t}: {lhs} > {rhs}");
        }
    }
}

#[test]
fn contraction_in_the_eta_metric() {
    let m = model(3);
    let fam = m.family();
    let choice = select_eta(&m).unwrap();
    let r = build_evolution(&fam, 512).unwrap();
    let pairs: Vec<(f64, f64)> = (0..10).map(|i| (1.0 - 0.04 * i as f64, 0.05 * i as f64)).collect();
    assert!(r.contraction_check(choice.numeric_rate, &pairs).unwrap() <= 1e-9);
}

#[test]
fn unforced_energy_residual_and_zero_solution() {
    let (m, fam) = build_wave_model(WaveParams::new(PI, 1, 1.0)).unwrap();
    let field = m.forcing_field(|_| Vector::zeros(1));
    let p = MildProblem::new(&fam, &field, 1.0, 2048, 2048).unwrap();
    let traj = p.solve(&Vector::from_f64(&[1.0, 0.0])).unwrap();
    assert!(energy_residual(&traj, &m, |_| Vector::zeros(1)) < 1e-3);
    let rest = p.solve(&Vector::zeros(2)).unwrap();
    assert_eq!(energy_residual(&rest, &m, |_| Vector::zeros(1)), 0.0);
}

#[test]
fn forced_energies_match_rk4() {
    let m = model(3);
    let g = |t: f64| Vector::new(vec![(2.0 * PI * t).sin(), 0.5, -(4.0 * PI * t).cos()]);
    let p = MildProblem::new(&m.family(), &m.forcing_field(g), 1.0, 4096, 2048).unwrap();
    let x = Vector::from_f64(&[0.3, -0.1, 0.05, 0.0, 0.2, 0.0]);
    let traj = p.solve(&x).unwrap();
    let lin = build_wave_model(WaveParams::new(PI, 3, 1.0).with_beta(cos_beta)).unwrap().0;
    let path = rk4_wave(&lin, &x, g, 2048);
    let worst = traj.states.iter().zip(&path).map(|(a, b)| (m.energy(a) - m.energy(b)).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-3, "{worst}");
}

#[test]
fn mode_coupled_damping_breaks_invariance() {
    let small = model(1).family();
    let eigs = [1.0, 4.0, 9.0];
    let coupled = GeneratorFamily::new(6, 1.0, move |t: f64| {
        let b = cos_beta(t);
        let mut m = Matrix::zeros(6);
        for i in 0..3 {
            m[(i, 3 + i)] = 1.0;
            m[(3 + i, i)] = -eigs[i];
            m[(3 + i, 3 + i)] = -b;
        }
        m[(3, 4)] = -0.5;
        m[(4, 3)] = -0.5;
        m
    });
    let pairs = [(1.0, 0.0), (0.6, 0.1)];
    assert!(invariance_gap(&small, &coupled, &pairs, 256).unwrap() > 1e-3);
    assert!(invariance_gap(&small, &model(3).family(), &pairs, 256).unwrap() <= 1e-10);
}

#[test]
fn monodromy_classification() {
    let lambdas: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    let m = model(3);
    let rep = linear_nondegeneracy(&m, &lambdas, 256).unwrap();
    assert!(rep.nondegenerate);
    let omega = m.eta_choice().numeric_rate;
    for row in &rep.rows {
        let bound = (-row.lambda * omega).exp();
        // spectral radius ≤ η-norm bound
        assert!(row.eigenvalues.iter().all(|&(re, im)| re.hypot(im) <= bound + 1e-9));
    }

    let between = WaveParams::new(PI, 3, 1.0).with_beta(cos_beta).with_nonlinearity(|_, s: f64| -2.5 * s, -2.5);
    let (mb, _) = build_wave_model(between).unwrap();
    assert!(linear_nondegeneracy(&mb, &lambdas, 256).unwrap().nondegenerate);

    let resonant = WaveParams::new(PI, 3, 1.0).with_beta(cos_beta).with_nonlinearity(|_, s: f64| -s, -1.0);
    let (mr, _) = build_wave_model(resonant).unwrap();
    let rep = linear_nondegeneracy(&mr, &lambdas, 256).unwrap();
    assert!(!rep.kernel_trivial && !rep.nondegenerate);
    let err = find_periodic_wave(&mr, 1.0, &Vector::zeros(6), &PeriodMapOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Configuration(_)));
}

#[test]
fn linear_nonlinearity_has_only_the_zero_wave() {
    let params = WaveParams::new(PI, 3, 1.0).with_beta(cos_beta).with_nonlinearity(|_, s: f64| 2.5 * s, 2.5);
    let (m, _) = build_wave_model(params).unwrap();
    let opts = PeriodMapOptions { n: 256, grid: 512, ..Default::default() };
    let x0 = Vector::from_f64(&[0.2, 0.1, -0.1, 0.0, 0.3, 0.0]);
    let wave = find_periodic_wave(&m, 1.0, &x0, &opts).unwrap();
    assert!(wave.x.norm() < 1e-9);
}

#[test]
fn affine_wave_matches_the_linear_algebra_oracle() {
    let params = WaveParams::new(PI, 3, 1.0)
        .with_beta(cos_beta)
        .with_nonlinearity(|t: f64, s: f64| -2.5 * s + 0.8 * (2.0 * PI * t).cos(), -2.5);
    let (m, _) = build_wave_model(params).unwrap();
    let opts = PeriodMapOptions { n: 512, grid: 512, ..Default::default() };
    let p = wave_problem(&m, 1.0, &opts).unwrap();
    // Φ_T(x) = Mx + c
    let c = p.period_map(&Vector::zeros(6)).unwrap();
    let mut i_minus_m = Matrix::identity(6);
    for j in 0..6 {
        let col = &p.period_map(&Vector::basis(6, j)).unwrap() - &c;
        for i in 0..6 {
            i_minus_m[(i, j)] -= col[i];
        }
    }
    let oracle = i_minus_m.inverse().unwrap().mul_vec(&c);
    let wave = find_periodic_wave(&m, 1.0, &Vector::zeros(6), &opts).unwrap();
    assert!(wave.x.distance(&oracle) < 1e-8, "{}", wave.x.distance(&oracle));
}

#[test]
fn saturating_wave_k3_survives_reintegration() {
    let m = saturating(3);
    let wave = find_periodic_wave(&m, 1.0, &Vector::zeros(6), &PeriodMapOptions::default()).unwrap();
    assert!(wave.residual <= 1e-6);
    let p = wave_problem(&m, 1.0, &PeriodMapOptions::default()).unwrap();
    assert!(p.period_map(&wave.x).unwrap().distance(&wave.x) <= 1e-6);
    let path = rk4_wave(&m, &wave.x, |_| Vector::zeros(3), 4000);
    assert!(path.last().unwrap().distance(&wave.x) < 1e-2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn eta_inner_is_symmetric_and_bilinear(seed in 0u64..10_000, a in -2.0f64..2.0) {
        let m = model(3);
        let mut g = rng(seed);
        let (x, y, z) = (random_vector(&mut g, 6), random_vector(&mut g, 6), random_vector(&mut g, 6));
        let xy = m.eta_inner(&x, &y).unwrap();
        prop_assert!((xy - m.eta_inner(&y, &x).unwrap()).abs() < 1e-12);
        let mut comb = x.scale(a);
        comb.axpy(1.0, &z);
        let lhs = m.eta_inner(&comb, &y).unwrap();
        let rhs = a * xy + m.eta_inner(&z, &y).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-11);
    }
}
