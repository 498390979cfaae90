//! JSON experiment configuration.

use std::fmt;

use clap::ValueEnum;
use evolver_core::exprlang::{parse_expr, Expr, Var};
use serde::Deserialize;
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Chernoff,
    Evolsys,
    Branching,
    Degree,
    Averaging,
    Continuation,
    WavePeriodic,
    WaveEnergy,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Chernoff => "chernoff",
            ExperimentKind::Evolsys => "evolsys",
            ExperimentKind::Branching => "branching",
            ExperimentKind::Degree => "degree",
            ExperimentKind::Averaging => "averaging",
            ExperimentKind::Continuation => "continuation",
            ExperimentKind::WavePeriodic => "wave-periodic",
            ExperimentKind::WaveEnergy => "wave-energy",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A matrix or vector entry: a number or an expression string.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Num(f64),
    Expr(String),
}

impl Entry {
    /// Parses the entry, rejecting variables outside `allowed`.
    pub fn compile(&self, field: &str, allowed: &[Var]) -> Result<Expr, CliError> {
        let expr = match self {
            Entry::Num(x) if x.is_finite() => return Ok(Expr::Num(*x)),
            Entry::Num(x) => return Err(CliError::config(format!("{field}: non-finite number {x}"))),
            Entry::Expr(src) => {
                parse_expr(src).map_err(|e| CliError::config(format!("{field}: cannot parse {src:?}: {e}")))?
            }
        };
        if let Some(v) = expr.free_vars().into_iter().find(|v| !allowed.contains(v)) {
            return Err(CliError::config(format!("{field}: variable `{}` is not available here", v.name())));
        }
        Ok(expr)
    }
}

/// An inline linear-plus-nonlinear system `u' = A(t)u + F(t, u)` with
/// `F_i(t, x) = Σ_j f[i][j](t, s = x_j)`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub dim: usize,
    pub period: f64,
    pub a: Vec<Vec<Entry>>,
    #[serde(default)]
    pub f: Option<Vec<Vec<Entry>>>,
    #[serde(default)]
    pub omega: Option<f64>,
    #[serde(default)]
    pub lipschitz: Option<f64>,
    #[serde(default)]
    pub region: Option<RegionSpec>,
}

/// An inline damped-wave Galerkin model.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSpec {
    pub ell: f64,
    pub k: usize,
    pub period: f64,
    #[serde(default)]
    pub beta: Option<Entry>,
    #[serde(default)]
    pub f: Option<Entry>,
    #[serde(default)]
    pub f_inf: f64,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub eigenvalues: Option<Vec<f64>>,
    #[serde(default)]
    pub region: Option<RegionSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InlineModel {
    System(SystemSpec),
    Wave(WaveSpec),
}

#[derive(Debug, Clone)]
pub enum ModelSpec {
    Catalog(String),
    Inline(Box<InlineModel>),
}

/// Either a ball (`center`, `radius`) or a box (`lo`, `hi`).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub center: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
}

/// Numerical controls; every field has an experiment-specific default.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numeric {
    pub n: Option<usize>,
    pub grid: Option<usize>,
    pub ns: Option<Vec<usize>>,
    pub tol: Option<f64>,
    pub picard_tol: Option<f64>,
    pub lambdas: Option<Vec<f64>>,
    pub eta: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub max_dim: Option<usize>,
    pub dims: Option<Vec<usize>>,
    pub eps: Option<Vec<f64>>,
    pub ks: Option<Vec<usize>>,
    pub f_inf: Option<Vec<f64>>,
    pub fields: Option<Vec<String>>,
    pub region: Option<RegionSpec>,
    pub x0: Option<Vec<f64>>,
    pub starts: Option<usize>,
    pub boundary: Option<usize>,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<String>,
    pub format: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub model: Option<ModelSpec>,
    pub numeric: Numeric,
    pub output: OutputSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    experiment: Option<ExperimentKind>,
    #[serde(default)]
    model: Option<Value>,
    #[serde(default)]
    numeric: Numeric,
    #[serde(default)]
    output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| CliError::config(format!("invalid config: {e}")))?;
        let model = match raw.model {
            None | Some(Value::Null) => None,
            Some(Value::String(key)) => Some(ModelSpec::Catalog(key)),
            Some(v @ Value::Object(_)) => {
                let inline: InlineModel =
                    serde_json::from_value(v).map_err(|e| CliError::config(format!("invalid inline model: {e}")))?;
                Some(ModelSpec::Inline(Box::new(inline)))
            }
            Some(_) => return Err(CliError::config("model must be a catalog key or an object")),
        };
        let cfg = ExperimentConfig { experiment: raw.experiment, model, numeric: raw.numeric, output: raw.output };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let n = &self.numeric;
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(CliError::config(format!("numeric.{name} must be positive"))),
            _ => Ok(()),
        };
        positive("tol", n.tol)?;
        positive("picard_tol", n.picard_tol)?;
        for (name, list) in [("lambdas", &n.lambdas), ("eps", &n.eps)] {
            if let Some(list) = list {
                if list.is_empty() {
                    return Err(CliError::config(format!("numeric.{name} must not be empty")));
                }
                for &x in list {
                    positive(name, Some(x))?;
                }
            }
        }
        for (name, v) in [("n", n.n), ("grid", n.grid), ("trials", n.trials), ("max_dim", n.max_dim), ("steps", n.steps)] {
            if v == Some(0) {
                return Err(CliError::config(format!("numeric.{name} must be at least 1")));
            }
        }
        if let Some(eta) = n.eta {
            if !(0.0..=1.0).contains(&eta) {
                return Err(CliError::config("numeric.eta must lie in [0, 1]"));
            }
        }
        if let Some(ns) = &n.ns {
            if ns.is_empty() || ns.contains(&0) {
                return Err(CliError::config("numeric.ns must be nonempty and positive"));
            }
        }
        if let Some(f) = &self.output.format {
            if f != "csv" {
                return Err(CliError::config(format!("unsupported output format {f:?}")));
            }
        }
        Ok(())
    }
}
