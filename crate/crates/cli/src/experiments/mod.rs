//! The named experiments. Each fills a [`Report`] with rows and thresholded checks.

mod averaging;
mod chernoff;
mod degree;
mod evolsys;
mod wave;

use evolver_core::degree::Region;
use evolver_core::{Error, Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{self, build_region, Model};
use crate::config::{ExperimentConfig, ExperimentKind, Numeric};
use crate::error::CliError;
use crate::report::Report;

/// Why an experiment stopped early.
#[derive(Debug)]
pub enum Failure {
    Config(CliError),
    Numeric(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Configuration(msg) => Failure::Config(CliError::Config(msg)),
            other => Failure::Numeric(other),
        }
    }
}

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        Failure::Config(e)
    }
}

pub type Outcome = std::result::Result<(), Failure>;

/// Everything an experiment needs.
pub struct Context<'a> {
    pub numeric: &'a Numeric,
    pub model: Option<Model>,
    pub seed: u64,
}

impl Context<'_> {
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }

    /// The configured model, which every experiment except `chernoff` and
    /// `degree` receives (falling back to its catalog default).
    pub fn model(&self) -> &Model {
        self.model.as_ref().expect("experiment has a default model")
    }

    pub fn region(&self, model: &Model) -> Result<Region<f64>, CliError> {
        match &self.numeric.region {
            Some(r) => build_region(r, model.dim()),
            None => model
                .region
                .clone()
                .ok_or_else(|| CliError::config(format!("model {:?} has no default region; set numeric.region", model.name))),
        }
    }
}

fn default_model(kind: ExperimentKind) -> Option<&'static str> {
    match kind {
        ExperimentKind::Chernoff | ExperimentKind::Degree => None,
        ExperimentKind::Branching | ExperimentKind::Averaging => Some("scalar-linear"),
        ExperimentKind::Continuation => Some("rotation-damped-2d"),
        ExperimentKind::Evolsys | ExperimentKind::WaveEnergy | ExperimentKind::WavePeriodic => Some("wave-k3"),
    }
}

/// Runs one experiment; configuration problems come back as `Err`, numeric
/// failures are recorded in the report.
pub fn run(kind: ExperimentKind, cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Report, CliError> {
    if let Some(declared) = cfg.experiment {
        if declared != kind {
            return Err(CliError::config(format!("config is for `{declared}`, not `{kind}`")));
        }
    }
    let seed = seed.or(cfg.numeric.seed).unwrap_or(0);
    let model = match (&cfg.model, default_model(kind)) {
        (Some(spec), _) => Some(catalog::resolve(spec)?),
        (None, Some(key)) => Some(catalog::catalog_model(key)?),
        (None, None) => None,
    };
    let mut report = Report::new(kind.name(), model.as_ref().map(|m| m.name.clone()), seed);
    let ctx = Context { numeric: &cfg.numeric, model, seed };
    let outcome = match kind {
        ExperimentKind::Chernoff => chernoff::run(&ctx, &mut report),
        ExperimentKind::Evolsys => evolsys::run(&ctx, &mut report),
        ExperimentKind::Branching => averaging::branching(&ctx, &mut report),
        ExperimentKind::Averaging => averaging::averaging(&ctx, &mut report),
        ExperimentKind::Continuation => averaging::continuation(&ctx, &mut report),
        ExperimentKind::Degree => degree::run(&ctx, &mut report),
        ExperimentKind::WaveEnergy => wave::energy(&ctx, &mut report),
        ExperimentKind::WavePeriodic => wave::periodic(&ctx, &mut report),
    };
    match outcome {
        Ok(()) => Ok(report),
        Err(Failure::Config(e)) => Err(e),
        Err(Failure::Numeric(e)) => {
            report.error = Some((e.kind().to_string(), e.to_string()));
            Ok(report)
        }
    }
}

pub(crate) fn random_matrix(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Matrix<f64> {
    Matrix::from_fn(d, |_, _| rng.gen_range(-scale..scale))
}

pub(crate) fn random_vector(rng: &mut ChaCha8Rng, d: usize) -> Vector<f64> {
    Vector::new((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

/// `−(BBᵀ + cI) + (C − Cᵀ)`, whose symmetric part is at most `−c`.
pub(crate) fn random_dissipative(rng: &mut ChaCha8Rng, d: usize, c: f64) -> Matrix<f64> {
    let b = random_matrix(rng, d, 1.0);
    let k = random_matrix(rng, d, 1.0);
    let sym = &(&b * &b.transpose()) + &Matrix::scalar(d, c);
    &(&k - &k.transpose()) - &sym
}

/// Classical RK4 for `z' = f(t, z)` on `[t0, t1]`, returning the final state.
pub(crate) fn rk4(f: impl Fn(f64, &Vector<f64>) -> Vector<f64>, z0: &Vector<f64>, t0: f64, t1: f64, steps: usize) -> Vector<f64> {
    let h = (t1 - t0) / steps as f64;
    let mut z = z0.clone();
    for i in 0..steps {
        let t = t0 + h * i as f64;
        let k1 = f(t, &z);
        let mut tmp = z.clone();
        tmp.axpy(h / 2.0, &k1);
        let k2 = f(t + h / 2.0, &tmp);
        let mut tmp = z.clone();
        tmp.axpy(h / 2.0, &k2);
        let k3 = f(t + h / 2.0, &tmp);
        let mut tmp = z.clone();
        tmp.axpy(h, &k3);
        let k4 = f(t + h, &tmp);
        z.axpy(h / 6.0, &k1);
        z.axpy(h / 3.0, &k2);
        z.axpy(h / 3.0, &k3);
        z.axpy(h / 6.0, &k4);
    }
    z
}

/// `n_min, 2n_min, …` up to `n_max`.
pub(crate) fn doubling(n_min: usize, n_max: usize) -> Vec<usize> {
    std::iter::successors(Some(n_min.max(1)), |n| Some(n * 2)).take_while(|&n| n <= n_max).collect()
}
