mod common;

use std::f64::consts::PI;

use common::{random_dissipative, random_vector, rk4_path, rng};
use evolver_core::evolsys::GeneratorFamily;
use evolver_core::mild::{FixedPointMethod, FixedPointOptions, MildProblem, NonlinearField};
use evolver_core::{Matrix, Vector};
use proptest::prelude::*;

/// Dissipative 2-d linear part with a bounded, Lipschitz sine nonlinearity.
fn problem(seed: u64, lambda: f64, grid: usize) -> MildProblem<f64> {
    let mut g = rng(seed);
    let a = random_dissipative(&mut g, 2, 1.0);
    let fam = GeneratorFamily::new(2, 1.0, move |t: f64| &a + &Matrix::diag(&[0.3 * (2.0 * PI * t).cos(), 0.0]))
        .with_omega(0.5)
        .periodic(true);
    let field = NonlinearField::new(2, 1.0, |t: f64, x: &Vector<f64>| {
        Vector::new(vec![0.5 * x[1].sin() + (2.0 * PI * t).cos(), 0.5 * x[0].sin()])
    })
    .with_lipschitz(0.5)
    .periodic(true);
    MildProblem::new(&fam, &field, lambda, 256, grid).unwrap()
}

#[test]
fn group_property_two_stage_solve() {
    let p = problem(3, 1.0, 2048);
    let x = Vector::from_f64(&[0.4, -1.1]);
    let once = p.period_map(&x).unwrap();
    let mid = p.solve_between(0.0, 0.375, &x).unwrap();
    let twice = p.solve_between(0.375, 1.0, mid.final_state()).unwrap();
    assert!(once.distance(twice.final_state()) < 1e-8);
}

#[test]
fn semiflow_identity_along_the_trajectory() {
    let p = problem(4, 0.7, 512);
    let traj = p.solve(&Vector::from_f64(&[1.0, 0.5])).unwrap();
    let r = p.evolution();
    let dt = traj.times[1] - traj.times[0];
    for i in [0, 17, 200, 511] {
        let (t, h) = (traj.times[i], traj.times[i + 1]);
        let w0 = p.field().eval(t, &traj.states[i]).scale(p.lambda());
        let w1 = p.field().eval(h, &traj.states[i + 1]).scale(p.lambda());
        let mut carried = traj.states[i].clone();
        carried.axpy(dt / 2.0, &w0);
        let mut expected = r.apply(h, t, &carried).unwrap();
        expected.axpy(dt / 2.0, &w1);
        assert!(expected.distance(&traj.states[i + 1]) < 1e-8, "node {i}");
    }
}

#[test]
fn agrees_with_rk4_on_a_smooth_problem() {
    let p = problem(5, 1.0, 2048);
    let x = Vector::from_f64(&[0.2, 0.9]);
    let fam = p.evolution().family().clone();
    let field = p.field().clone();
    let path = rk4_path(
        move |t, z| {
            let mut out = fam.eval(t).mul_vec(z);
            out.axpy(1.0, &field.eval(t, z));
            out
        },
        &x,
        0.0,
        1.0,
        2000,
    );
    let mild = p.period_map(&x).unwrap();
    assert!(mild.distance(path.last().unwrap()) < 2e-2);
}

#[test]
fn picard_updates_decay_geometrically() {
    let p = problem(6, 0.5, 512);
    let traj = p.solve(&Vector::from_f64(&[2.0, -2.0])).unwrap();
    let u = &traj.meta.updates;
    assert!(u.len() >= 4);
    let ratios: Vec<f64> = u.windows(2).take(u.len() - 2).map(|w| w[1] / w[0]).collect();
    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(worst < 0.5, "ratios {ratios:?}");
}

#[test]
fn continuity_in_state_and_parameter() {
    let x = Vector::from_f64(&[0.3, 0.3]);
    let base = problem(7, 1.0, 512).period_map(&x).unwrap();
    let mut gaps = Vec::new();
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        let mut y = x.clone();
        y.axpy(eps, &Vector::from_f64(&[1.0, -1.0]));
        let moved = problem(7, 1.0 + eps, 512).period_map(&y).unwrap();
        gaps.push(base.distance(&moved));
    }
    for w in gaps.windows(2) {
        assert!(w[1] < w[0] * 0.2, "gaps {gaps:?}");
    }
    assert!(gaps[3] < 1e-3);
}

#[test]
fn newton_and_picard_fixed_points_agree() {
    let p = problem(8, 1.0, 512);
    let opts = FixedPointOptions::default();
    let a = p.fixed_point(&Vector::zeros(2), FixedPointMethod::Newton, &opts).unwrap();
    let b = p.fixed_point(&Vector::zeros(2), FixedPointMethod::Picard, &opts).unwrap();
    assert!(a.x.distance(&b.x) < 1e-6);
    assert!(p.period_map(&a.x).unwrap().distance(&a.x) < 1e-7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn period_map_contracts(seed in 0u64..1000, lambda in 0.1f64..1.0) {
        // L = 0.5 and ω = 0.5 give the bound e^{λ(L − ω)T} = 1
        let p = problem(seed, lambda, 256);
        let mut g = rng(seed + 1);
        let x = random_vector(&mut g, 2);
        let y = random_vector(&mut g, 2);
        let d = p.period_map(&x).unwrap().distance(&p.period_map(&y).unwrap());
        prop_assert!(d <= x.distance(&y) + 1e-8);
    }
}
