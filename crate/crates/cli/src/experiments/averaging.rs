//! Branching sweep, averaging-principle degree comparison and the
//! continuation scenario.

use evolver_core::averaging::{
    averaging_degree_check, branching_experiment, AveragedField, PeriodMapOptions, BRANCHING_REDUCTION,
};
use evolver_core::degree::{winding_number_2d, DegreeOptions};
use evolver_core::mild::{FixedPointMethod, FixedPointOptions};
use evolver_core::{Error, Vector};

use super::{Context, Outcome};
use crate::error::CliError;
use crate::report::{Cell, Report};

const WINDING_SAMPLES: usize = 64;
const CONTINUATION_RESIDUAL: f64 = 1e-8;

fn descending(ctx: &Context, default: &[f64]) -> Result<Vec<f64>, CliError> {
    let lambdas = ctx.numeric.lambdas.clone().unwrap_or_else(|| default.to_vec());
    if lambdas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(CliError::config("numeric.lambdas must be strictly descending"));
    }
    Ok(lambdas)
}

fn state_columns(prefix: &str, d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("{prefix}_{i}")).collect()
}

fn state_cells(x: Option<&Vector<f64>>, d: usize) -> Vec<Cell> {
    match x {
        Some(x) => x.iter().map(|&v| v.into()).collect(),
        None => vec![Cell::Empty; d],
    }
}

/// Columns: `lambda, x_1..x_d, defect, sup_gap, residual, newton_iters, picard_iters, failure`.
pub fn branching(ctx: &Context, report: &mut Report) -> Outcome {
    let model = ctx.model();
    let d = model.dim();
    let mut columns = vec!["lambda".to_string()];
    columns.extend(state_columns("x", d));
    columns.extend(["defect", "sup_gap", "residual", "newton_iters", "picard_iters", "failure"].map(String::from));
    report.set_columns(&columns);

    let lambdas = descending(ctx, &[1.0, 0.3, 0.1, 0.03, 0.01, 3e-3, 1e-3])?;
    let mut opts = PeriodMapOptions::default();
    if let Some(n) = ctx.numeric.n {
        opts.n = n;
    }
    if let Some(g) = ctx.numeric.grid {
        opts.grid = g;
    }
    if let Some(t) = ctx.numeric.picard_tol {
        opts.picard_tol = t;
    }
    if let Some(t) = ctx.numeric.tol {
        opts.fixed_point_tol = t;
    }
    let region = ctx.region(model)?;
    let table = branching_experiment(&model.family, &model.field, &lambdas, &region, &opts)?;
    for r in &table.rows {
        let mut cells = vec![r.lambda.into()];
        cells.extend(state_cells(r.x.as_ref(), d));
        cells.extend([
            r.defect.into(),
            r.sup_gap.into(),
            r.residual.into(),
            r.newton_iters.into(),
            r.picard_iters.into(),
            r.failure.clone().into(),
        ]);
        report.row(cells);
    }
    if let Some(x0) = &table.averaged_zero {
        report.metric("averaged_zero", x0.to_f64_vec());
    }
    let solved = table.rows.iter().filter(|r| r.failure.is_none()).count();
    let all = solved == table.rows.len();
    report.check("all_solved", solved, table.rows.len(), all);
    report.check("defect_monotone", table.monotone, true, table.monotone);
    let reduction = table.reduction.unwrap_or(f64::INFINITY);
    let last_defect = table.rows.last().and_then(|r| r.defect).unwrap_or(f64::INFINITY);
    let reduced = reduction <= BRANCHING_REDUCTION || last_defect <= 1e-10;
    report.check("defect_reduction", reduction, BRANCHING_REDUCTION, reduced);
    Ok(())
}

fn map_options(ctx: &Context) -> PeriodMapOptions<f64> {
    PeriodMapOptions {
        n: ctx.numeric.n.unwrap_or(128),
        grid: ctx.numeric.grid.unwrap_or(256),
        picard_tol: ctx.numeric.picard_tol.unwrap_or(1e-13),
        fixed_point_tol: ctx.numeric.tol.unwrap_or(1e-8),
    }
}

fn degree_options(ctx: &Context, d: usize) -> DegreeOptions {
    DegreeOptions {
        starts_per_axis: ctx.numeric.starts.unwrap_or(if d == 1 { 16 } else { 6 }),
        boundary_per_axis: ctx.numeric.boundary.unwrap_or(33),
        ..Default::default()
    }
}

/// Columns: `lambda, boundary_min, admissible, degree, averaged_degree, winding, failure`.
pub fn averaging(ctx: &Context, report: &mut Report) -> Outcome {
    report.set_columns(&["lambda", "boundary_min", "admissible", "degree", "averaged_degree", "winding", "failure"]);
    let model = ctx.model();
    let d = model.dim();
    let region = ctx.region(model)?;
    let lambdas = ctx.numeric.lambdas.clone().unwrap_or_else(|| vec![1e-3, 3e-3, 0.01, 0.03, 0.1, 0.3, 1.0]);
    let map_opts = map_options(ctx);
    let dopts = degree_options(ctx, d);
    let rep = averaging_degree_check(&model.family, &model.field, &region, &lambdas, &map_opts, &dopts)?;
    let mut winding_agrees = true;
    for row in &rep.rows {
        let winding = if d == 2 && row.admissible && row.lambda <= rep.lambda0.unwrap_or(f64::NEG_INFINITY) {
            let problem = map_opts.problem(&model.family, &model.field, row.lambda)?;
            let g = |x: &Vector<f64>| match problem.period_map(x) {
                Ok(p) => (x - &p).scale(1.0 / row.lambda),
                Err(_) => Vector::new(vec![f64::NAN; d]),
            };
            let w = winding_number_2d(&g, &region, WINDING_SAMPLES)?;
            winding_agrees &= Some(w) == row.degree;
            Some(w as i64)
        } else {
            None
        };
        report.row(vec![
            row.lambda.into(),
            row.boundary_min.into(),
            row.admissible.into(),
            row.degree.into(),
            rep.averaged_degree.into(),
            winding.into(),
            row.failure.clone().into(),
        ]);
    }
    report.metric("averaged_degree", rep.averaged_degree);
    match rep.lambda0 {
        Some(l) => report.check("lambda0", l, "exists", true),
        None => report.check("lambda0", serde_json::Value::Null, "exists", false),
    }
    report.check("degree_consistent", rep.consistent, true, rep.consistent);
    if d == 2 {
        report.check("winding_agrees", winding_agrees, true, winding_agrees);
    }
    Ok(())
}

/// Columns: `lambda, boundary_min, admissible, degree, x_1..x_d, residual, failure`.
pub fn continuation(ctx: &Context, report: &mut Report) -> Outcome {
    let model = ctx.model();
    let d = model.dim();
    let mut columns: Vec<String> = ["lambda", "boundary_min", "admissible", "degree"].map(String::from).to_vec();
    columns.extend(state_columns("x", d));
    columns.extend(["residual", "failure"].map(String::from));
    report.set_columns(&columns);

    let region = ctx.region(model)?;
    let lambdas = ctx.numeric.lambdas.clone().unwrap_or_else(|| vec![0.05, 0.1, 0.2, 0.4, 0.7, 1.0]);
    let map_opts = map_options(ctx);
    let dopts = degree_options(ctx, d);
    let rep = averaging_degree_check(&model.family, &model.field, &region, &lambdas, &map_opts, &dopts)?;
    let avg = AveragedField::new(&model.family, &model.field)?;
    let mut guess = avg.zero_in(&region).unwrap_or_else(|| region.center());
    let fp_opts = FixedPointOptions { tol: CONTINUATION_RESIDUAL, max_iter: 60 };

    let mut degrees = Vec::new();
    let mut all_admissible = true;
    let mut final_point: Option<(f64, f64)> = None;
    for row in &rep.rows {
        all_admissible &= row.admissible;
        degrees.push(row.degree);
        let attempt = (|| -> Result<_, Error> {
            let problem = map_opts.problem(&model.family, &model.field, row.lambda)?;
            problem.fixed_point(&guess, FixedPointMethod::Newton, &fp_opts)
        })();
        let (x, residual, failure) = match attempt {
            Ok(fp) => {
                guess = fp.x.clone();
                let inside = region.contains(&fp.x);
                let failure = (!inside).then(|| "fixed point left the region".to_string());
                (Some(fp.x), Some(fp.residual), failure.or(row.failure.clone()))
            }
            Err(e) => (None, None, Some(e.to_string())),
        };
        if row.lambda == 1.0 {
            final_point = residual.map(|r| (row.lambda, r)).filter(|_| x.as_ref().is_some_and(|x| region.contains(x)));
        }
        let mut cells = vec![row.lambda.into(), row.boundary_min.into(), row.admissible.into(), row.degree.into()];
        cells.extend(state_cells(x.as_ref(), d));
        cells.extend([residual.into(), failure.into()]);
        report.row(cells);
    }
    let constant = degrees.windows(2).all(|w| w[0] == w[1]) && degrees.iter().all(Option::is_some);
    let degree = degrees.last().copied().flatten();
    report.metric("averaged_degree", rep.averaged_degree);
    report.check("all_admissible", all_admissible, true, all_admissible);
    report.check("degree_constant", constant, true, constant);
    report.check("degree_nonzero", degree, "nonzero", degree.is_some_and(|g| g != 0));
    match final_point {
        Some((_, r)) => report.check("fixed_point_at_one", r, CONTINUATION_RESIDUAL, r <= CONTINUATION_RESIDUAL),
        None => report.check("fixed_point_at_one", serde_json::Value::Null, CONTINUATION_RESIDUAL, false),
    }
    Ok(())
}
