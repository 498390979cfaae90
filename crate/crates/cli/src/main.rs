use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use evolver_cli::{load_config, output_dir, run_experiment, CliError, ExperimentKind};

/// Run a named experiment and write `<out>/<experiment>.csv` and `<out>/<experiment>.summary.json`.
#[derive(Debug, Parser)]
#[command(name = "evolver", version)]
struct Args {
    experiment: ExperimentKind,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (defaults to `output.dir`, then `.`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Record wall time in the summary (makes it non-reproducible).
    #[arg(long)]
    timing: bool,
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("evolver: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let start = Instant::now();
    let mut report = match run_experiment(args.experiment, &cfg, args.seed) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    if args.timing {
        report.wall_time = Some(start.elapsed().as_secs_f64());
    }
    let dir = output_dir(args.out.as_deref(), &cfg);
    let (csv, json) = match report.write(&dir) {
        Ok(paths) => paths,
        Err(e) => return fail(&e),
    };
    if report.passed() {
        println!("{}: pass ({}, {})", report.experiment, csv.display(), json.display());
        return ExitCode::SUCCESS;
    }
    match &report.error {
        Some((kind, message)) => eprintln!("{}: fail: {kind}: {message}", report.experiment),
        None => eprintln!("{}: fail: {}", report.experiment, report.failed_checks().join(", ")),
    }
    ExitCode::from(1)
}
