//! Evolution-system checks: RK4 oracle and refinement order, cocycle law,
//! contraction bound on the model family, parameter continuity.
//!
//! Columns: `check, dim, n, eps, value, threshold`.

use std::f64::consts::PI;

use evolver_core::evolsys::{build_evolution, family_continuity_gap, GeneratorFamily};
use evolver_core::Matrix;
use rand::Rng;

use super::{doubling, random_dissipative, random_matrix, random_vector, Context, Outcome};
use crate::report::{Cell, Report};

const ORACLE_GAP: f64 = 1e-3;
const MIN_ORDER: f64 = 0.9;
const COCYCLE_TOL: f64 = 1e-12;
const CONTRACTION_TOL: f64 = 1e-9;
const LINEARITY_FACTOR: f64 = 3.0;

pub fn run(ctx: &Context, report: &mut Report) -> Outcome {
    report.set_columns(&["check", "dim", "n", "eps", "value", "threshold"]);
    oracle(ctx, report)?;
    cocycle(ctx, report)?;
    contraction(ctx, report)?;
    continuity(ctx, report)
}

fn row(report: &mut Report, check: &str, dim: usize, n: usize, eps: Option<f64>, value: f64, threshold: f64) {
    report.row(vec![check.into(), dim.into(), n.into(), eps.into(), value.into(), threshold.into()]);
}

/// `base + wobble·sin(2πt)` on `[0, 1]`.
fn random_family(ctx: &Context, stream: u64, d: usize) -> GeneratorFamily<f64> {
    let mut rng = ctx.rng(stream);
    let base = random_dissipative(&mut rng, d, 0.5);
    let wobble = random_dissipative(&mut rng, d, 0.1).scale(0.3);
    GeneratorFamily::new(d, 1.0, move |t: f64| &base + &wobble.scale((2.0 * PI * t).sin())).periodic(true)
}

/// Classical RK4 for `Y' = A(t)Y`, `Y(0) = I`, on `[0, t]`.
fn rk4_propagator(fam: &GeneratorFamily<f64>, t: f64, steps: usize) -> Matrix<f64> {
    let h = t / steps as f64;
    let mut y = Matrix::identity(fam.dim());
    for i in 0..steps {
        let tau = h * i as f64;
        let mid = fam.eval(tau + h / 2.0);
        let k1 = &fam.eval(tau) * &y;
        let k2 = &mid * &(&y + &k1.scale(h / 2.0));
        let k3 = &mid * &(&y + &k2.scale(h / 2.0));
        let k4 = &fam.eval(tau + h) * &(&y + &k3.scale(h));
        let incr = &(&k1 + &k2.scale(2.0)) + &(&k3.scale(2.0) + &k4);
        y = &y + &incr.scale(h / 6.0);
    }
    y
}

fn oracle(ctx: &Context, report: &mut Report) -> Outcome {
    let dims = ctx.numeric.dims.clone().unwrap_or_else(|| vec![2, 4, 8]);
    let ns = ctx.numeric.ns.clone().unwrap_or_else(|| doubling(512, 4096));
    let mut worst_gap = 0.0f64;
    let mut worst_order = f64::INFINITY;
    for (i, &d) in dims.iter().enumerate() {
        let fam = random_family(ctx, 10 + i as u64, d);
        let reference = rk4_propagator(&fam, 1.0, 2000);
        let mut gaps = Vec::with_capacity(ns.len());
        for &n in &ns {
            let r = build_evolution(&fam, n)?;
            let gap = (&r.operator(1.0, 0.0)? - &reference).max_abs();
            row(report, "rk4-gap", d, n, None, gap, ORACLE_GAP);
            gaps.push(gap);
        }
        worst_gap = worst_gap.max(*gaps.last().expect("ns is nonempty"));
        if let [.., a, b] = gaps.as_slice() {
            let (na, nb) = (ns[ns.len() - 2] as f64, ns[ns.len() - 1] as f64);
            let order = (a / b).ln() / (nb / na).ln();
            row(report, "order", d, ns[ns.len() - 1], None, order, MIN_ORDER);
            worst_order = worst_order.min(order);
        }
    }
    report.check("rk4_gap", worst_gap, ORACLE_GAP, worst_gap < ORACLE_GAP);
    if worst_order.is_finite() {
        report.check("refinement_order", worst_order, MIN_ORDER, worst_order >= MIN_ORDER);
    }
    Ok(())
}

fn cocycle(ctx: &Context, report: &mut Report) -> Outcome {
    let n = ctx.numeric.n.unwrap_or(256);
    let d = 4;
    let r = build_evolution(&random_family(ctx, 20, d), n)?;
    let mut rng = ctx.rng(21);
    let h = 1.0 / n as f64;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mut idx = [rng.gen_range(0..=n), rng.gen_range(0..=n), rng.gen_range(0..=n)];
        idx.sort_unstable();
        let defect = r.cocycle_defect(idx[2] as f64 * h, idx[1] as f64 * h, idx[0] as f64 * h)?;
        row(report, "cocycle", d, n, None, defect, COCYCLE_TOL);
        worst = worst.max(defect);
    }
    report.check("cocycle_defect", worst, COCYCLE_TOL, worst <= COCYCLE_TOL);
    Ok(())
}

fn contraction(ctx: &Context, report: &mut Report) -> Outcome {
    let model = ctx.model();
    let omega = match &model.wave {
        Some(w) => evolver_core::wave::select_eta(w)?.numeric_rate,
        None => model.family.omega(),
    };
    let n = ctx.numeric.grid.unwrap_or(512);
    let period = model.period();
    let r = build_evolution(&model.family, n)?;
    let pairs: Vec<(f64, f64)> =
        (0..10).map(|i| (period * (1.0 - 0.04 * i as f64), period * 0.05 * i as f64)).collect();
    let excess = r.contraction_check(omega, &pairs)?;
    row(report, "contraction", model.dim(), n, None, excess, CONTRACTION_TOL);
    report.metric("contraction_omega", omega);
    report.check("contraction_excess", excess, CONTRACTION_TOL, excess <= CONTRACTION_TOL);
    Ok(())
}

fn continuity(ctx: &Context, report: &mut Report) -> Outcome {
    let eps = ctx.numeric.eps.clone().unwrap_or_else(|| vec![1e-1, 1e-2, 1e-3, 1e-4]);
    let d = 3;
    let n = 256;
    let mut rng = ctx.rng(30);
    let base = random_dissipative(&mut rng, d, 0.5);
    let pert = random_matrix(&mut rng, d, 1.0);
    let v = random_vector(&mut rng, d);
    let b1 = base.clone();
    let f1 = GeneratorFamily::new(d, 1.0, move |_| b1.clone());
    let mut holds = true;
    let mut slopes = Vec::with_capacity(eps.len());
    for &e in &eps {
        let b = base.clone();
        let p = pert.scale(e);
        let f2 = GeneratorFamily::new(d, 1.0, move |t: f64| &b + &p.scale((2.0 * PI * t).cos()));
        let gap = family_continuity_gap(&f1, &f2, n, &v)?;
        report.row(vec![
            "continuity-lhs".into(),
            d.into(),
            n.into(),
            e.into(),
            gap.lhs.into(),
            gap.rhs.into(),
        ]);
        holds &= gap.lhs <= gap.rhs;
        slopes.push(gap.lhs / e);
    }
    let spread = slopes.iter().copied().fold(0.0, f64::max) / slopes.iter().copied().fold(f64::INFINITY, f64::min);
    report.row(vec!["continuity-spread".into(), d.into(), n.into(), Cell::Empty, spread.into(), LINEARITY_FACTOR.into()]);
    report.check("continuity_bound", holds, true, holds);
    report.check("continuity_linearity", spread, LINEARITY_FACTOR, spread <= LINEARITY_FACTOR);
    Ok(())
}
