//! Defect bound on random contractions, then power and sum limits of the
//! backward-Euler scheme.
//!
//! Columns: `part, trial, dim, n, lhs, rhs, power_error, sum_error`.

use evolver_core::averaging::average_generator;
use evolver_core::linop::operator_norm;
use evolver_core::semigroup::{
    chernoff_defect, chernoff_power_limit, chernoff_sum_limit, ChernoffScheme, ChernoffSequence, SequencePreset,
    CONVERGENCE_TOL,
};
use evolver_core::{Error, Matrix};
use rand::Rng;

use super::{doubling, random_dissipative, random_matrix, random_vector, Context, Outcome};
use crate::report::{Cell, Report};

const DEFECT_SLACK: f64 = 1e-9;

pub fn run(ctx: &Context, report: &mut Report) -> Outcome {
    report.set_columns(&["part", "trial", "dim", "n", "lhs", "rhs", "power_error", "sum_error"]);
    defect_part(ctx, report)?;
    limit_part(ctx, report)
}

fn defect_part(ctx: &Context, report: &mut Report) -> Outcome {
    let trials = ctx.numeric.trials.unwrap_or(200);
    let max_dim = ctx.numeric.max_dim.unwrap_or(6);
    let n_max = ctx.numeric.n.unwrap_or(64);
    let mut rng = ctx.rng(1);
    let mut violations = 0usize;
    let mut worst_ratio = 0.0f64;
    for trial in 0..trials {
        let d = rng.gen_range(1..=max_dim);
        let raw = random_matrix(&mut rng, d, 1.0);
        let target = rng.gen_range(0.1..1.0);
        let norm = operator_norm(&raw);
        let t_op = if norm > 0.0 { raw.scale(target / norm) } else { raw };
        let x = random_vector(&mut rng, d);
        for n in doubling(1, n_max) {
            let b = chernoff_defect(&t_op, &x, n)?;
            if b.lhs > b.rhs + DEFECT_SLACK {
                violations += 1;
            }
            if b.rhs > 0.0 {
                worst_ratio = worst_ratio.max(b.lhs / b.rhs);
            }
            report.row(vec![
                "defect".into(),
                trial.into(),
                d.into(),
                n.into(),
                b.lhs.into(),
                b.rhs.into(),
                Cell::Empty,
                Cell::Empty,
            ]);
        }
    }
    report.metric("defect_trials", trials);
    report.metric("defect_worst_ratio", worst_ratio);
    report.check("defect_violations", violations, 0, violations == 0);
    Ok(())
}

fn generators(ctx: &Context) -> Result<Vec<Matrix<f64>>, Error> {
    if let Some(model) = &ctx.model {
        return Ok(vec![average_generator(&model.family)?]);
    }
    let mut rng = ctx.rng(2);
    Ok((0..3).map(|_| random_dissipative(&mut rng, 3, 0.1)).collect())
}

fn limit_part(ctx: &Context, report: &mut Report) -> Outcome {
    let ns = match &ctx.numeric.ns {
        Some(ns) => ns.clone(),
        None => doubling(16, 4096),
    };
    let mut rng = ctx.rng(3);
    let mut all_converged = true;
    let mut worst_power = 0.0f64;
    let mut worst_sum = 0.0f64;
    let mut rates = Vec::new();
    for (trial, a) in generators(ctx)?.into_iter().enumerate() {
        let d = a.dim();
        let x = random_vector(&mut rng, d);
        let scheme = ChernoffScheme::resolvent(d, move |_| a.clone());
        let seq = ChernoffSequence { preset: SequencePreset::Uniform, t: 1.0, mu0: 0.0, mu_offset: 0.0, ns: ns.clone() };
        let power = chernoff_power_limit(&scheme, &seq, &x)?;
        let sum = chernoff_sum_limit(&scheme, &seq, &x)?;
        for (p, s) in power.rows.iter().zip(&sum.rows) {
            report.row(vec![
                "limit".into(),
                trial.into(),
                d.into(),
                p.term.n.into(),
                Cell::Empty,
                Cell::Empty,
                p.error.into(),
                s.error.into(),
            ]);
        }
        all_converged &= power.converged && sum.converged;
        worst_power = worst_power.max(power.final_error().unwrap_or(f64::INFINITY));
        worst_sum = worst_sum.max(sum.final_error().unwrap_or(f64::INFINITY));
        if let Some(r) = power.observed_rate {
            rates.push(r);
        }
    }
    report.metric("observed_rate_min", rates.iter().copied().fold(f64::INFINITY, f64::min));
    report.check("limits_converged", all_converged, true, all_converged);
    report.check("final_power_error", worst_power, CONVERGENCE_TOL, worst_power < CONVERGENCE_TOL);
    report.check("final_sum_error", worst_sum, CONVERGENCE_TOL, worst_sum < CONVERGENCE_TOL);
    Ok(())
}
