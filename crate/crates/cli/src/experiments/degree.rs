//! Degrees of reference fields, cross-checked by the planar winding number.
//!
//! Columns: `field, dim, degree, expected, winding, zeros`.

use evolver_core::averaging::AveragedField;
use evolver_core::degree::{brouwer_degree, deg_hat, winding_number_2d, DegreeOptions, Region};
use evolver_core::Vector;

use super::{Context, Outcome};
use crate::catalog::build_region;
use crate::error::CliError;
use crate::report::Report;

const WINDING_SAMPLES: usize = 64;
/// Shift that splits the zero of `zᵐ` into `m` simple ones.
const POWER_SHIFT: f64 = 0.25;

#[derive(Debug, Clone, Copy)]
enum Field {
    Identity(usize),
    Antipodal(usize),
    Power(u32),
    ConjPower(u32),
    Averaged,
}

impl Field {
    fn parse(name: &str) -> Result<Field, CliError> {
        let bad = || CliError::config(format!("unknown degree field {name:?}"));
        let num = |s: &str| s.parse::<usize>().ok().filter(|&m| (1..=8).contains(&m)).ok_or_else(bad);
        if name == "averaged" {
            Ok(Field::Averaged)
        } else if let Some(d) = name.strip_prefix("identity-") {
            Ok(Field::Identity(num(d)?))
        } else if let Some(d) = name.strip_prefix("antipodal-") {
            Ok(Field::Antipodal(num(d)?))
        } else if let Some(m) = name.strip_prefix("conj-power-") {
            Ok(Field::ConjPower(num(m)? as u32))
        } else if let Some(m) = name.strip_prefix("power-") {
            Ok(Field::Power(num(m)? as u32))
        } else {
            Err(bad())
        }
    }

    fn dim(self, ctx: &Context) -> usize {
        match self {
            Field::Identity(d) | Field::Antipodal(d) => d,
            Field::Power(_) | Field::ConjPower(_) => 2,
            Field::Averaged => ctx.model.as_ref().map_or(0, |m| m.dim()),
        }
    }

    fn expected(self, d: usize) -> Option<i64> {
        match self {
            Field::Identity(_) => Some(1),
            Field::Antipodal(_) => Some((-1i64).pow(d as u32)),
            Field::Power(m) => Some(m as i64),
            Field::ConjPower(m) => Some(-(m as i64)),
            Field::Averaged => None,
        }
    }

    /// The planar field `zᵐ − c` or `z̄ᵐ − c` for the complex-power cases.
    fn eval(self, x: &Vector<f64>) -> Vector<f64> {
        match self {
            Field::Identity(_) => x.clone(),
            Field::Antipodal(_) => x.scale(-1.0),
            Field::Power(m) | Field::ConjPower(m) => {
                let im = if matches!(self, Field::ConjPower(_)) { -x[1] } else { x[1] };
                let (mut re, mut ip) = (1.0, 0.0);
                for _ in 0..m {
                    (re, ip) = (re * x[0] - ip * im, re * im + ip * x[0]);
                }
                Vector::new(vec![re - POWER_SHIFT, ip])
            }
            Field::Averaged => unreachable!("averaged field is evaluated through the model"),
        }
    }
}

fn default_fields() -> Vec<String> {
    let mut v = Vec::new();
    for d in 1..=4 {
        v.push(format!("identity-{d}"));
        v.push(format!("antipodal-{d}"));
    }
    for m in 1..=4 {
        v.push(format!("power-{m}"));
    }
    v.push("conj-power-2".into());
    v
}

pub fn run(ctx: &Context, report: &mut Report) -> Outcome {
    report.set_columns(&["field", "dim", "degree", "expected", "winding", "zeros"]);
    let names = ctx.numeric.fields.clone().unwrap_or_else(default_fields);
    if names.is_empty() {
        return Err(CliError::config("numeric.fields must not be empty").into());
    }
    let fields = names.iter().map(|n| Field::parse(n)).collect::<Result<Vec<_>, _>>()?;
    let mut degrees_match = true;
    let mut winding_match = true;
    for (name, field) in names.iter().zip(fields) {
        let d = field.dim(ctx);
        let (region, model_region) = match (field, &ctx.model) {
            (Field::Averaged, None) => return Err(CliError::config("field \"averaged\" needs a model").into()),
            (Field::Averaged, Some(m)) => (None, Some(ctx.region(m)?)),
            _ => (Some(region_for(ctx, d)?), None),
        };
        let region = region.or(model_region).expect("one region is set");
        let opts = DegreeOptions {
            starts_per_axis: ctx.numeric.starts.unwrap_or(DegreeOptions::default().starts_per_axis),
            boundary_per_axis: ctx.numeric.boundary.unwrap_or(0),
            ..Default::default()
        };
        let (rep, winding) = match field {
            Field::Averaged => {
                let model = ctx.model();
                let avg = AveragedField::new(&model.family, &model.field)?;
                let rep = deg_hat(avg.a_hat(), &|x: &Vector<f64>| avg.f_hat(x), &region, &opts)?;
                (rep, None)
            }
            _ => {
                let g = |x: &Vector<f64>| field.eval(x);
                let rep = brouwer_degree(&g, &region, &opts)?;
                let w = if d == 2 { Some(winding_number_2d(&g, &region, WINDING_SAMPLES)?) } else { None };
                (rep, w)
            }
        };
        let expected = field.expected(d);
        if let Some(e) = expected {
            degrees_match &= rep.degree == e;
        }
        if let Some(w) = winding {
            winding_match &= w == rep.degree;
        }
        report.row(vec![
            name.as_str().into(),
            d.into(),
            rep.degree.into(),
            expected.into(),
            winding.into(),
            rep.zeros.len().into(),
        ]);
    }
    report.check("degrees_match", degrees_match, true, degrees_match);
    report.check("winding_match", winding_match, true, winding_match);
    Ok(())
}

/// The configured region when its dimension fits, else the unit ball.
fn region_for(ctx: &Context, d: usize) -> Result<Region<f64>, CliError> {
    if let Some(spec) = &ctx.numeric.region {
        let spec_dim = spec.center.as_ref().or(spec.lo.as_ref()).map(Vec::len);
        if spec_dim == Some(d) {
            return build_region(spec, d);
        }
    }
    Region::ball(Vector::zeros(d), 1.0).map_err(|e| CliError::config(format!("invalid region: {e}")))
}
