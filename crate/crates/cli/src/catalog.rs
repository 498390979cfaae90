//! Named models and inline model construction.

use std::f64::consts::PI;
use std::sync::Arc;

use evolver_core::degree::Region;
use evolver_core::evolsys::GeneratorFamily;
use evolver_core::exprlang::{Bindings, Expr, Var};
use evolver_core::mild::NonlinearField;
use evolver_core::semigroup::dissipativity_rate_in;
use evolver_core::wave::{build_wave_model, WaveModel, WaveParams};
use evolver_core::{Matrix, Metric, Vector};

use crate::config::{Entry, InlineModel, ModelSpec, RegionSpec, SystemSpec, WaveSpec};
use crate::error::{model_error, CliError};

pub const CATALOG: [&str; 4] = ["scalar-linear", "rotation-damped-2d", "wave-k1", "wave-k3"];

/// A resolved model: linear family, nonlinearity and a default region.
#[derive(Clone)]
pub struct Model {
    pub name: String,
    pub family: GeneratorFamily<f64>,
    pub field: NonlinearField<f64>,
    /// Default degree region; wave models exceed the degree dimension cap and have none.
    pub region: Option<Region<f64>>,
    pub wave: Option<WaveModel<f64>>,
    /// Rebuilds the linear wave operator with another mode count.
    pub recipe: Option<WaveRecipe>,
}

type BetaFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Domain length, period and damping of a wave model.
#[derive(Clone)]
pub struct WaveRecipe {
    pub ell: f64,
    pub period: f64,
    pub beta: BetaFn,
}

impl WaveRecipe {
    /// Linear parameters (`f ≡ 0`) with `k` modes.
    pub fn params(&self, k: usize) -> WaveParams<f64> {
        let beta = self.beta.clone();
        WaveParams::new(self.ell, k, self.period).with_beta(move |t| beta(t))
    }

    /// The same recipe with constant damping `β ≡ 1`.
    pub fn unit_damping(&self) -> Self {
        WaveRecipe { beta: Arc::new(|_| 1.0), ..self.clone() }
    }
}

impl Model {
    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn period(&self) -> f64 {
        self.family.period()
    }
}

impl std::fmt::Debug for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Model").field("name", &self.name).field("dim", &self.dim()).finish_non_exhaustive()
    }
}

pub fn resolve(spec: &ModelSpec) -> Result<Model, CliError> {
    match spec {
        ModelSpec::Catalog(key) => catalog_model(key),
        ModelSpec::Inline(inline) => match inline.as_ref() {
            InlineModel::System(s) => system_model(s),
            InlineModel::Wave(w) => inline_wave(w),
        },
    }
}

pub fn catalog_model(key: &str) -> Result<Model, CliError> {
    match key {
        "scalar-linear" => Ok(scalar_linear()),
        "rotation-damped-2d" => Ok(rotation_damped()),
        "wave-k1" => catalog_wave(1),
        "wave-k3" => catalog_wave(3),
        other => Err(CliError::config(format!("unknown model {other:?}; catalog: {}", CATALOG.join(", ")))),
    }
}

/// `u' = −u + 2 + sin(2πt)`, `T = 1`.
fn scalar_linear() -> Model {
    let family = GeneratorFamily::constant(Matrix::diag(&[-1.0]), 1.0).with_omega(1.0);
    let field = NonlinearField::forcing(1, 1.0, |t| Vector::new(vec![2.0 + (2.0 * PI * t).sin()])).periodic(true);
    Model {
        name: "scalar-linear".into(),
        family,
        field,
        region: Some(Region::interval(0.0, 4.0).expect("static region")),
        wave: None,
        recipe: None,
    }
}

/// A damped rotation with periodically modulated coupling and a bounded
/// saturating nonlinearity.
fn rotation_damped() -> Model {
    let family = GeneratorFamily::new(2, 1.0, |t: f64| {
        let (s, c) = (2.0 * PI * t).sin_cos();
        Matrix::from_f64_rows(&[&[-1.0, 1.0 + 0.5 * s], &[-1.0, -1.0 + 0.3 * c]]).expect("2x2")
    })
    .with_omega(0.5)
    .periodic(true);
    let field = NonlinearField::new(2, 1.0, |t: f64, x: &Vector<f64>| {
        Vector::new(vec![0.3 * x[1].sin() + 1.0 + (2.0 * PI * t).cos(), 0.5 + 0.2 * x[0].tanh()])
    })
    .with_lipschitz(0.3)
    .periodic(true);
    let region = Region::cuboid(Vector::from_f64(&[-4.0, -4.0]), Vector::from_f64(&[4.0, 4.0])).ok();
    Model { name: "rotation-damped-2d".into(), family, field, region, wave: None, recipe: None }
}

/// `β = 1 + 0.5cos(2πt/T)`, `f = tanh(s) + cos(2πt/T)`, `ℓ = π`, `T = 1`.
fn catalog_wave(k: usize) -> Result<Model, CliError> {
    let recipe = catalog_wave_recipe();
    let params = recipe.params(k).with_nonlinearity(|t: f64, s: f64| s.tanh() + (2.0 * PI * t).cos(), 0.0);
    wave_from_params(format!("wave-k{k}"), params, recipe, None)
}

/// `ℓ = π`, `T = 1`, `β = 1 + 0.5cos(2πt/T)`.
pub fn catalog_wave_recipe() -> WaveRecipe {
    WaveRecipe { ell: PI, period: 1.0, beta: Arc::new(|t: f64| 1.0 + 0.5 * (2.0 * PI * t).cos()) }
}

fn wave_from_params(
    name: String,
    params: WaveParams<f64>,
    recipe: WaveRecipe,
    region: Option<&RegionSpec>,
) -> Result<Model, CliError> {
    let (wave, family) = build_wave_model(params).map_err(model_error)?;
    let d = family.dim();
    let region = region.map(|r| build_region(r, d)).transpose()?;
    Ok(Model { name, family, field: wave.field(), region, wave: Some(wave), recipe: Some(recipe) })
}

pub fn build_region(spec: &RegionSpec, dim: usize) -> Result<Region<f64>, CliError> {
    let check = |v: &Vec<f64>, what: &str| {
        if v.len() != dim {
            return Err(CliError::config(format!("region.{what} has {} entries, model dimension is {dim}", v.len())));
        }
        Ok(Vector::from_f64(v))
    };
    let region = match spec {
        RegionSpec { center: Some(c), radius: Some(r), lo: None, hi: None } => Region::ball(check(c, "center")?, *r),
        RegionSpec { center: None, radius: None, lo: Some(lo), hi: Some(hi) } => {
            Region::cuboid(check(lo, "lo")?, check(hi, "hi")?)
        }
        _ => return Err(CliError::config("region needs either center+radius or lo+hi")),
    };
    region.map_err(|e| CliError::config(format!("invalid region: {e}")))
}

fn eval_or_nan(e: &Expr, env: &Bindings) -> f64 {
    e.eval(env).unwrap_or(f64::NAN)
}

fn system_model(spec: &SystemSpec) -> Result<Model, CliError> {
    let d = spec.dim;
    if d == 0 {
        return Err(CliError::config("model.dim must be at least 1"));
    }
    if !(spec.period > 0.0 && spec.period.is_finite()) {
        return Err(CliError::config("model.period must be positive"));
    }
    let compile_matrix = |rows: &Vec<Vec<Entry>>, name: &str, allowed: &[Var]| -> Result<Vec<Expr>, CliError> {
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(CliError::config(format!("model.{name} must be a {d}x{d} matrix")));
        }
        let mut out = Vec::with_capacity(d * d);
        for (i, row) in rows.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                out.push(e.compile(&format!("model.{name}[{i}][{j}]"), allowed)?);
            }
        }
        Ok(out)
    };
    let period = spec.period;
    let a = Arc::new(compile_matrix(&spec.a, "a", &[Var::Time, Var::Period, Var::Pi])?);
    let a_fn = {
        let a = a.clone();
        move |t: f64| {
            let env = Bindings::new().t(t).period(period);
            Matrix::from_fn(d, |i, j| eval_or_nan(&a[i * d + j], &env))
        }
    };
    let omega = match spec.omega {
        Some(w) => w,
        None => (0..=256)
            .map(|i| dissipativity_rate_in(&a_fn(period * i as f64 / 256.0), &Metric::euclidean(d)))
            .fold(f64::INFINITY, f64::min),
    };
    let family = GeneratorFamily::new(d, period, a_fn).with_omega(omega);
    let report = family.validate(256).map_err(model_error)?;
    let family = family.periodic(report.periodicity_gap <= 1e-12);

    let field = match &spec.f {
        None => NonlinearField::zero(d, period),
        Some(rows) => {
            let h = Arc::new(compile_matrix(rows, "f", &[Var::Time, Var::State, Var::Period, Var::Pi])?);
            NonlinearField::new(d, period, move |t, x: &Vector<f64>| {
                Vector::new(
                    (0..d)
                        .map(|i| {
                            (0..d)
                                .map(|j| eval_or_nan(&h[i * d + j], &Bindings::new().t(t).s(x[j]).period(period)))
                                .sum()
                        })
                        .collect(),
                )
            })
        }
    };
    let mut field = field.periodic(true);
    if let Some(l) = spec.lipschitz {
        field = field.with_lipschitz(l);
    }
    let region = match &spec.region {
        Some(r) => Some(build_region(r, d)?),
        None => Region::ball(Vector::zeros(d), 10.0).ok(),
    };
    Ok(Model { name: "inline-system".into(), family, field, region, wave: None, recipe: None })
}

fn inline_wave(spec: &WaveSpec) -> Result<Model, CliError> {
    let period = spec.period;
    let beta: BetaFn = match &spec.beta {
        Some(beta) => {
            let e = beta.compile("model.beta", &[Var::Time, Var::Period, Var::Pi])?;
            Arc::new(move |t| eval_or_nan(&e, &Bindings::new().t(t).period(period)))
        }
        None => Arc::new(|_| 1.0),
    };
    let recipe = WaveRecipe { ell: spec.ell, period, beta };
    let mut params = recipe.params(spec.k);
    if let Some(f) = &spec.f {
        let e = f.compile("model.f", &[Var::Time, Var::State, Var::Period, Var::Pi])?;
        params = params.with_nonlinearity(move |t, s| eval_or_nan(&e, &Bindings::new().t(t).s(s).period(period)), spec.f_inf);
    } else if spec.f_inf != 0.0 {
        let f_inf = spec.f_inf;
        params = params.with_nonlinearity(move |_, s| f_inf * s, f_inf);
    }
    if let Some(eigs) = &spec.eigenvalues {
        params = params.with_eigenvalues(eigs.clone());
    }
    if let Some(eta) = spec.eta {
        params = params.with_eta(eta);
    }
    wave_from_params("inline-wave".into(), params, recipe, spec.region.as_ref())
}
