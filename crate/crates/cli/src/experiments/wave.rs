//! Damped-wave experiments: dissipativity, energy identity and mode
//! invariance; nondegeneracy and periodic solutions.

use std::f64::consts::PI;

use evolver_core::averaging::PeriodMapOptions;
use evolver_core::mild::MildProblem;
use evolver_core::wave::{
    build_wave_model, energy_residual, find_periodic_wave, linear_nondegeneracy, spectral_invariance_gap, wave_problem,
    WaveModel,
};
use evolver_core::{Matrix, Vector};

use super::{rk4, Context, Outcome};
use crate::catalog::{Model, WaveRecipe};
use crate::error::{model_error, CliError};
use crate::report::{Cell, Report};

const RATE_SLACK: f64 = 1e-9;
const ENERGY_TOL: f64 = 1e-3;
const HALVING: (f64, f64) = (0.3, 0.7);
const INVARIANCE_TOL: f64 = 1e-10;
const UNIT_GAP: f64 = 1e-8;
const PERIODIC_TOL: f64 = 1e-6;
const RK4_TOL: f64 = 1e-2;
const AFFINE_TOL: f64 = 1e-8;

fn wave_parts(model: &Model) -> Result<(&WaveModel<f64>, &WaveRecipe), CliError> {
    match (&model.wave, &model.recipe) {
        (Some(w), Some(r)) => Ok((w, r)),
        _ => Err(CliError::config(format!("model {:?} is not a wave model", model.name))),
    }
}

fn linear(recipe: &WaveRecipe, k: usize) -> Result<WaveModel<f64>, CliError> {
    Ok(build_wave_model(recipe.params(k)).map_err(model_error)?.0)
}

/// Columns: `check, variant, k, grid, n, value, threshold`.
pub fn energy(ctx: &Context, report: &mut Report) -> Outcome {
    report.set_columns(&["check", "variant", "k", "grid", "n", "value", "threshold"]);
    let (wave, recipe) = wave_parts(ctx.model())?;
    rates(ctx, recipe, report)?;
    energy_identity(ctx, wave.k(), recipe, report)?;
    invariance(ctx, recipe, report)
}

fn rates(ctx: &Context, recipe: &WaveRecipe, report: &mut Report) -> Outcome {
    let ks = ctx.numeric.ks.clone().unwrap_or_else(|| vec![1, 3, 8]);
    let mut worst = f64::INFINITY;
    for (variant, r) in [("beta-const", recipe.unit_damping()), ("beta-model", recipe.clone())] {
        for &k in &ks {
            let choice = linear(&r, k)?.eta_choice();
            let margin = choice.numeric_rate - choice.analytic_rate;
            report.row(vec![
                "rate-margin".into(),
                variant.into(),
                k.into(),
                Cell::Empty,
                Cell::Empty,
                margin.into(),
                (-RATE_SLACK).into(),
            ]);
            worst = worst.min(margin);
        }
    }
    report.check("rate_margin", worst, -RATE_SLACK, worst >= -RATE_SLACK);
    Ok(())
}

fn energy_identity(ctx: &Context, k: usize, recipe: &WaveRecipe, report: &mut Report) -> Outcome {
    let m = linear(recipe, k)?;
    let period = recipe.period;
    let g = move |t: f64| {
        Vector::new((0..k).map(|i| (2.0 * PI * t / period + i as f64).cos() / (i + 1) as f64).collect())
    };
    let mut x = Vector::zeros(2 * k);
    for i in 0..k {
        x[i] = 0.3 / (i + 1) as f64;
    }
    let grid = ctx.numeric.grid.unwrap_or(1024);
    let n = ctx.numeric.n.unwrap_or(2 * grid);
    let mut residuals = Vec::new();
    for level in 0..2 {
        let (grid, n) = (grid << level, n << level);
        let problem = MildProblem::new(&m.family(), &m.forcing_field(g), 1.0, n, grid)?;
        let traj = problem.solve(&x)?;
        let res = energy_residual(&traj, &m, g);
        report.row(vec!["energy-residual".into(), "forced".into(), k.into(), grid.into(), n.into(), res.into(), ENERGY_TOL.into()]);
        residuals.push(res);
    }
    let finest = residuals[1];
    let ratio = residuals[1] / residuals[0];
    report.check("energy_residual", finest, ENERGY_TOL, finest < ENERGY_TOL);
    report.check(
        "energy_halving",
        ratio,
        vec![HALVING.0, HALVING.1],
        (HALVING.0..=HALVING.1).contains(&ratio),
    );
    Ok(())
}

fn invariance(ctx: &Context, recipe: &WaveRecipe, report: &mut Report) -> Outcome {
    let period = recipe.period;
    let pairs: Vec<(f64, f64)> = (0..10).map(|i| (period * (i + 1) as f64 / 10.0, period * i as f64 / 20.0)).collect();
    let n = ctx.numeric.steps.unwrap_or(256);
    let mut worst = 0.0f64;
    for (k, kp) in [(1, 3), (3, 8)] {
        let gap = spectral_invariance_gap(&linear(recipe, k)?, &linear(recipe, kp)?, &pairs, n)?;
        report.row(vec![
            "invariance".into(),
            format!("{k}->{kp}").into(),
            k.into(),
            Cell::Empty,
            n.into(),
            gap.into(),
            INVARIANCE_TOL.into(),
        ]);
        worst = worst.max(gap);
    }
    report.check("invariance_gap", worst, INVARIANCE_TOL, worst <= INVARIANCE_TOL);
    Ok(())
}

/// Columns: `check, lambda, f_inf, value, threshold`.
pub fn periodic(ctx: &Context, report: &mut Report) -> Outcome {
    report.set_columns(&["check", "lambda", "f_inf", "value", "threshold"]);
    let (wave, recipe) = wave_parts(ctx.model())?;
    nondegeneracy(ctx, wave.k(), recipe, report)?;
    periodic_solution(ctx, wave, report)?;
    affine_oracle(wave.k(), recipe, report)
}

fn nondegeneracy(ctx: &Context, k: usize, recipe: &WaveRecipe, report: &mut Report) -> Outcome {
    let f_infs = ctx.numeric.f_inf.clone().unwrap_or_else(|| vec![-2.5, 2.5]);
    let lambdas = ctx.numeric.lambdas.clone().unwrap_or_else(|| (1..=10).map(|i| i as f64 / 10.0).collect());
    let n = ctx.numeric.steps.unwrap_or(256);
    let mut min_gap = f64::INFINITY;
    let mut kernels = true;
    for &f in &f_infs {
        let params = recipe.params(k).with_nonlinearity(move |_, s| f * s, f);
        let (m, _) = build_wave_model(params).map_err(model_error)?;
        let rep = linear_nondegeneracy(&m, &lambdas, n)?;
        for row in &rep.rows {
            report.row(vec!["unit-distance".into(), row.lambda.into(), f.into(), row.distance_to_one.into(), UNIT_GAP.into()]);
            min_gap = min_gap.min(row.distance_to_one);
        }
        report.row(vec!["averaged-det".into(), Cell::Empty, f.into(), rep.averaged_det.into(), Cell::Empty]);
        kernels &= rep.kernel_trivial;
    }
    report.check("unit_distance", min_gap, UNIT_GAP, min_gap > UNIT_GAP);
    report.check("kernel_trivial", kernels, true, kernels);
    Ok(())
}

fn periodic_solution(ctx: &Context, wave: &WaveModel<f64>, report: &mut Report) -> Outcome {
    let opts = PeriodMapOptions {
        n: ctx.numeric.n.unwrap_or(1024),
        grid: ctx.numeric.grid.unwrap_or(1024),
        ..Default::default()
    };
    let x0 = match &ctx.numeric.x0 {
        Some(v) if v.len() == wave.dim() => Vector::from_f64(v),
        Some(v) => {
            return Err(CliError::config(format!("numeric.x0 has {} entries, model dimension is {}", v.len(), wave.dim())).into())
        }
        None => Vector::zeros(wave.dim()),
    };
    let found = find_periodic_wave(wave, 1.0, &x0, &opts)?;
    report.row(vec!["periodic-residual".into(), 1.0.into(), wave.f_inf().into(), found.residual.into(), PERIODIC_TOL.into()]);
    report.metric("periodic_state", found.x.to_f64_vec());
    report.metric("newton_iters", found.newton_iters);
    report.check("periodic_residual", found.residual, PERIODIC_TOL, found.residual <= PERIODIC_TOL);

    let fam = wave.family();
    let field = wave.field();
    let steps = ctx.numeric.steps.unwrap_or(4000);
    let end = rk4(
        |t, z| {
            let mut out = fam.eval(t).mul_vec(z);
            out.axpy(1.0, &field.eval(t, z));
            out
        },
        &found.x,
        0.0,
        wave.period(),
        steps,
    );
    let gap = end.distance(&found.x);
    report.row(vec!["rk4-reintegration".into(), 1.0.into(), wave.f_inf().into(), gap.into(), RK4_TOL.into()]);
    report.check("rk4_reintegration", gap, RK4_TOL, gap < RK4_TOL);
    Ok(())
}

/// Affine nonlinearity `−2.5s + 0.8cos(2πt/T)`: the period map is `x ↦ Mx + c`,
/// so the periodic point solves `(I − M)x = c`.
fn affine_oracle(k: usize, recipe: &WaveRecipe, report: &mut Report) -> Outcome {
    let period = recipe.period;
    let params =
        recipe.params(k).with_nonlinearity(move |t, s| -2.5 * s + 0.8 * (2.0 * PI * t / period).cos(), -2.5);
    let (m, _) = build_wave_model(params).map_err(model_error)?;
    let opts = PeriodMapOptions { n: 512, grid: 512, ..Default::default() };
    let p = wave_problem(&m, 1.0, &opts)?;
    let d = m.dim();
    let c = p.period_map(&Vector::zeros(d))?;
    let mut i_minus_m = Matrix::identity(d);
    for j in 0..d {
        let col = &p.period_map(&Vector::basis(d, j))? - &c;
        for i in 0..d {
            i_minus_m[(i, j)] -= col[i];
        }
    }
    let oracle = i_minus_m.inverse()?.mul_vec(&c);
    let found = find_periodic_wave(&m, 1.0, &Vector::zeros(d), &opts)?;
    let gap = found.x.distance(&oracle);
    report.row(vec!["affine-oracle".into(), 1.0.into(), (-2.5).into(), gap.into(), AFFINE_TOL.into()]);
    report.check("affine_oracle", gap, AFFINE_TOL, gap <= AFFINE_TOL);
    Ok(())
}
