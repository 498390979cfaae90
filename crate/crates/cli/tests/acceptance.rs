//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::Instant;

use evolver_cli::report::Cell;
use evolver_cli::{run_experiment, ExperimentConfig, ExperimentKind, Report};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn run(kind: ExperimentKind, json: &str) -> Report {
    let cfg = ExperimentConfig::from_json(json).expect("valid config");
    let report = run_experiment(kind, &cfg, Some(0)).expect("experiment runs");
    if let Some((kind, msg)) = &report.error {
        panic!("{}: {kind}: {msg}", report.experiment);
    }
    report
}

fn metric(r: &Report, name: &str) -> f64 {
    let v = &r.metrics[name];
    v.as_f64().or_else(|| v.as_bool().map(|b| if b { 1.0 } else { 0.0 })).unwrap_or(f64::NAN)
}

fn check_passed(r: &Report, name: &str) -> bool {
    r.checks.iter().any(|c| c.name == name && c.passed)
}

fn column(r: &Report, name: &str) -> usize {
    r.columns.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn num(c: &Cell) -> Option<f64> {
    match c {
        Cell::Float(x) => Some(*x),
        Cell::Int(i) => Some(*i as f64),
        _ => None,
    }
}

fn text(c: &Cell) -> &str {
    match c {
        Cell::Text(s) => s,
        _ => "",
    }
}

fn rows_where<'a>(r: &'a Report, col: &str, value: &str) -> Vec<&'a Vec<Cell>> {
    let i = column(r, col);
    r.rows.iter().filter(|row| text(&row[i]) == value).collect()
}

fn chernoff_defect(r: &Report) -> Outcome {
    let rows = rows_where(r, "part", "defect");
    let (lhs, rhs) = (column(r, "lhs"), column(r, "rhs"));
    let violations = rows.iter().filter(|row| num(&row[lhs]).unwrap() > num(&row[rhs]).unwrap() + 1e-9).count();
    let trials = metric(r, "defect_trials") as usize;
    let max_n = rows.iter().map(|row| num(&row[column(r, "n")]).unwrap()).fold(0.0, f64::max);
    let max_d = rows.iter().map(|row| num(&row[column(r, "dim")]).unwrap()).fold(0.0, f64::max);
    outcome(
        violations == 0 && trials == 200 && max_n <= 64.0 && max_d <= 6.0,
        format!("{trials} contractions, d <= {max_d}, n <= {max_n}, {violations} violations"),
    )
}

fn chernoff_limits(r: &Report) -> Outcome {
    let rows = rows_where(r, "part", "limit");
    let (trial, n, pe, se) = (column(r, "trial"), column(r, "n"), column(r, "power_error"), column(r, "sum_error"));
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for t in 0..3 {
        let mine: Vec<_> = rows.iter().filter(|row| num(&row[trial]) == Some(t as f64)).collect();
        let last = mine.last().expect("rows per generator");
        ok &= num(&last[n]) == Some(4096.0);
        for col in [pe, se] {
            let errs: Vec<f64> = mine.iter().map(|row| num(&row[col]).unwrap()).collect();
            let tail = &errs[errs.len() - 3..];
            ok &= tail[1] <= tail[0] && tail[2] <= tail[1] && tail[2] < 1e-3;
            worst = worst.max(tail[2]);
        }
    }
    outcome(ok, format!("3 generators, worst final error {worst:.3e} at n = 4096"))
}

fn evolsys_axioms(r: &Report) -> Outcome {
    let ok = ["rk4_gap", "refinement_order", "cocycle_defect"].iter().all(|c| check_passed(r, c));
    let dims: Vec<f64> = rows_where(r, "check", "rk4-gap").iter().map(|row| num(&row[1]).unwrap()).collect();
    outcome(
        ok && dims.iter().all(|&d| d <= 8.0),
        format!(
            "cocycle {:.1e}, RK4 gap {:.2e}, order {:.3}",
            metric(r, "cocycle_defect"),
            metric(r, "rk4_gap"),
            metric(r, "refinement_order")
        ),
    )
}

fn evolsys_contraction(r: &Report) -> Outcome {
    let ok = r.model.as_deref() == Some("wave-k3") && check_passed(r, "contraction_excess");
    outcome(
        ok,
        format!("excess {:.2e} with omega {:.4} on wave-k3", metric(r, "contraction_excess"), metric(r, "contraction_omega")),
    )
}

fn evolsys_continuity(r: &Report) -> Outcome {
    let rows = rows_where(r, "check", "continuity-lhs");
    let (eps_col, lhs, rhs) = (column(r, "eps"), column(r, "value"), column(r, "threshold"));
    let eps: Vec<f64> = rows.iter().map(|row| num(&row[eps_col]).unwrap()).collect();
    let holds = rows.iter().all(|row| num(&row[lhs]).unwrap() <= num(&row[rhs]).unwrap());
    let slopes: Vec<f64> = rows.iter().map(|row| num(&row[lhs]).unwrap() / num(&row[eps_col]).unwrap()).collect();
    let spread = slopes.iter().copied().fold(0.0, f64::max) / slopes.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        holds && spread <= 3.0 && eps == [1e-1, 1e-2, 1e-3, 1e-4],
        format!("bound holds on 4 eps, slope spread {spread:.4}"),
    )
}

fn state(r: &Report, row: &[Cell], d: usize) -> Vec<f64> {
    let first = column(r, "x_1");
    (0..d).map(|i| num(&row[first + i]).unwrap_or(f64::NAN)).collect()
}

/// Scalar: `x_λ = 2 − λω/(λ² + ω²)` with `ω = 2π`. Planar: the averaged zero
/// solves `[[−1, 1], [−1, −1]]x + (0.3 sin x₂ + 1, 0.5 + 0.2 tanh x₁) = 0`.
fn branching(scalar: &Report, planar: &Report) -> Outcome {
    let mut ok = check_passed(scalar, "defect_monotone") && check_passed(scalar, "defect_reduction");
    ok &= check_passed(planar, "defect_monotone") && check_passed(planar, "defect_reduction");
    ok &= check_passed(scalar, "all_solved") && check_passed(planar, "all_solved");
    let w = 2.0 * PI;
    let mut worst = 0.0f64;
    for row in &scalar.rows {
        let lambda = num(&row[0]).unwrap();
        let x = state(scalar, row, 1)[0];
        worst = worst.max((x - (2.0 - lambda * w / (lambda * lambda + w * w))).abs());
    }
    ok &= worst < 1e-5;
    let x0: Vec<f64> = serde_json::from_value(planar.metrics["averaged_zero"].clone()).unwrap();
    let res = [-x0[0] + x0[1] + 0.3 * x0[1].sin() + 1.0, -x0[0] - x0[1] + 0.5 + 0.2 * x0[0].tanh()];
    let avg_res = res[0].hypot(res[1]);
    ok &= avg_res < 1e-8;
    let last = planar.rows.last().unwrap();
    let gap = state(planar, last, 2).iter().zip(&x0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    ok &= gap < 1e-2;
    outcome(
        ok,
        format!(
            "reductions {:.2e} / {:.2e}, scalar closed-form gap {worst:.1e}, planar gap to averaged zero {gap:.1e}",
            metric(scalar, "defect_reduction"),
            metric(planar, "defect_reduction")
        ),
    )
}

/// Scalar: `I + Â⁻¹F̂ = x − 2` has degree 1. Planar: the sign of
/// `det(I + Â⁻¹DF̂)` at the averaged zero.
fn averaging(scalar: &Report, planar: &Report) -> Outcome {
    let mut ok = check_passed(scalar, "degree_consistent") && check_passed(planar, "degree_consistent");
    ok &= check_passed(planar, "winding_agrees");
    ok &= metric(scalar, "averaged_degree") == 1.0;
    let x0 = [0.0, 0.0];
    // Newton on the averaged field for the planar oracle
    let field = |x: [f64; 2]| [-x[0] + x[1] + 0.3 * x[1].sin() + 1.0, -x[0] - x[1] + 0.5 + 0.2 * x[0].tanh()];
    let jac = |x: [f64; 2]| [[-1.0, 1.0 + 0.3 * x[1].cos()], [-1.0 + 0.2 / x[0].cosh().powi(2), -1.0]];
    let mut x = x0;
    for _ in 0..50 {
        let (f, j) = (field(x), jac(x));
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        x[0] -= (j[1][1] * f[0] - j[0][1] * f[1]) / det;
        x[1] -= (-j[1][0] * f[0] + j[0][0] * f[1]) / det;
    }
    let j = jac(x);
    // det(Â⁻¹) det(Â + DF̂) with det Â = 2
    let expected = ((j[0][0] * j[1][1] - j[0][1] * j[1][0]) / 2.0).signum();
    ok &= metric(planar, "averaged_degree") == expected;
    let deg = column(planar, "degree");
    let wind = column(planar, "winding");
    let admissible = column(planar, "admissible");
    let checked = planar.rows.iter().filter(|r| r[admissible] == Cell::Bool(true)).count();
    ok &= planar.rows.iter().filter(|r| r[admissible] == Cell::Bool(true)).all(|r| r[deg] == r[wind]);
    outcome(
        ok,
        format!(
            "scalar degree {} on all lambda <= {}, planar degree {} (oracle {expected}) with winding on {checked} lambdas",
            metric(scalar, "averaged_degree"),
            metric(scalar, "lambda0"),
            metric(planar, "averaged_degree")
        ),
    )
}

fn degree(r: &Report) -> Outcome {
    let (f, d, g, w) = (column(r, "field"), column(r, "dim"), column(r, "degree"), column(r, "winding"));
    let mut ok = true;
    let mut planar = 0;
    for row in &r.rows {
        let name = text(&row[f]);
        let dim = num(&row[d]).unwrap() as i32;
        let expected = if name.starts_with("identity") {
            1
        } else if name.starts_with("antipodal") {
            (-1i64).pow(dim as u32)
        } else if let Some(m) = name.strip_prefix("conj-power-") {
            -m.parse::<i64>().unwrap()
        } else {
            name.strip_prefix("power-").unwrap().parse::<i64>().unwrap()
        };
        ok &= num(&row[g]) == Some(expected as f64);
        if dim == 2 {
            planar += 1;
            ok &= row[w] == row[g];
        }
    }
    outcome(ok && r.rows.len() == 13, format!("{} fields exact, winding equal on {planar} planar fields", r.rows.len()))
}

fn wave_rates(r: &Report) -> Outcome {
    let rows = rows_where(r, "check", "rate-margin");
    let ok = rows.len() == 6 && rows.iter().all(|row| num(&row[5]).unwrap() >= -1e-9);
    outcome(ok, format!("min numeric - analytic rate {:.3e} over 2 dampings x k in {{1,3,8}}", metric(r, "rate_margin")))
}

fn wave_energy(r: &Report) -> Outcome {
    let rows = rows_where(r, "check", "energy-residual");
    let finest = rows.last().unwrap();
    let at_target = num(&finest[3]) == Some(2048.0) && num(&finest[4]) == Some(4096.0);
    let ok = at_target && check_passed(r, "energy_residual") && check_passed(r, "energy_halving");
    outcome(
        ok,
        format!("residual {:.2e} at grid 2048 / n 4096, ratio {:.3}", metric(r, "energy_residual"), metric(r, "energy_halving")),
    )
}

fn wave_invariance(r: &Report) -> Outcome {
    let ok = check_passed(r, "invariance_gap") && rows_where(r, "check", "invariance").len() == 2;
    outcome(ok, format!("gap {:.1e} for (1,3) and (3,8)", metric(r, "invariance_gap")))
}

fn wave_periodic(r: &Report) -> Outcome {
    let ok = ["unit_distance", "kernel_trivial", "periodic_residual", "affine_oracle", "rk4_reintegration"]
        .iter()
        .all(|c| check_passed(r, c));
    outcome(
        ok,
        format!(
            "unit distance {:.3e}, periodic residual {:.1e}, affine gap {:.1e}",
            metric(r, "unit_distance"),
            metric(r, "periodic_residual"),
            metric(r, "affine_oracle")
        ),
    )
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("empty.json");
    std::fs::write(&cfg, "{}").unwrap();
    let names = ["chernoff", "evolsys", "branching", "degree", "averaging", "continuation", "wave-periodic", "wave-energy"];
    let mut identical = 0;
    for name in names {
        let mut outputs = Vec::new();
        for run in ["a", "b"] {
            let out = tmp.path().join(run);
            let status = Command::new(env!("CARGO_BIN_EXE_evolver"))
                .args([name, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "42"])
                .output()
                .expect("binary runs")
                .status;
            let csv = std::fs::read(out.join(format!("{name}.csv"))).unwrap_or_default();
            let json = std::fs::read(out.join(format!("{name}.summary.json"))).unwrap_or_default();
            outputs.push((status.code(), csv, json));
        }
        if outputs[0] == outputs[1] && !outputs[0].1.is_empty() && outputs[0].0 == Some(0) {
            identical += 1;
        }
    }
    outcome(identical == names.len(), format!("{identical}/{} experiments byte-identical", names.len()))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let chernoff = run(ExperimentKind::Chernoff, "{}");
    let evolsys = run(ExperimentKind::Evolsys, "{}");
    let branch_scalar = run(ExperimentKind::Branching, r#"{"model": "scalar-linear"}"#);
    let branch_planar = run(ExperimentKind::Branching, r#"{"model": "rotation-damped-2d"}"#);
    let avg_scalar = run(ExperimentKind::Averaging, r#"{"model": "scalar-linear"}"#);
    let avg_planar = run(ExperimentKind::Averaging, r#"{"model": "rotation-damped-2d"}"#);
    let degrees = run(ExperimentKind::Degree, "{}");
    let energy = run(ExperimentKind::WaveEnergy, "{}");
    let periodic = run(ExperimentKind::WavePeriodic, "{}");

    let results = [
        (1, "Chernoff defect bound", chernoff_defect(&chernoff)),
        (2, "power and sum limits of the resolvent scheme", chernoff_limits(&chernoff)),
        (3, "evolution system axioms", evolsys_axioms(&evolsys)),
        (4, "contraction bound", evolsys_contraction(&evolsys)),
        (5, "parameter continuity", evolsys_continuity(&evolsys)),
        (6, "branching", branching(&branch_scalar, &branch_planar)),
        (7, "averaging degree equality", averaging(&avg_scalar, &avg_planar)),
        (8, "degree module", degree(&degrees)),
        (9, "wave dissipativity", wave_rates(&energy)),
        (10, "energy identity", wave_energy(&energy)),
        (11, "eigenmode invariance", wave_invariance(&energy)),
        (12, "nondegeneracy and periodic waves", wave_periodic(&periodic)),
        (13, "CLI determinism", determinism()),
    ];
    let mut failed = 0;
    for (n, name, o) in &results {
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {n:>2}: {verdict}  {name}: {}", o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {}/{} passed in {:.1}s", results.len() - failed, results.len(), start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
