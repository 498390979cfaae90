//! Time averages of periodic problems and the small-`λ` limit of their periodic points.

use rayon::prelude::*;

use crate::degree::{boundary_check, brouwer_degree_fallible, deg_hat, locate_zero, DegreeOptions, Region};
use crate::error::{Error, Result};
use crate::evolsys::{build_evolution, GeneratorFamily};
use crate::linop::{eigenvalues, resolvent, Matrix, Vector};
use crate::mild::{FixedPointMethod, FixedPointOptions, MildProblem, NonlinearField, PicardOptions};
use crate::quad::simpson;
use crate::scalar::Real;

/// Refinement tolerance for the time averages.
pub const AVERAGE_TOL: f64 = 1e-10;
/// Monodromy eigenvalues closer than this to 1 signal resonance.
pub const UNIT_EIGEN_GAP: f64 = 1e-8;

/// `Â = (1/T)∫₀ᵀ A(τ) dτ`.
pub fn average_generator<S: Real>(family: &GeneratorFamily<S>) -> Result<Matrix<S>> {
    let d = family.dim();
    let period = family.period();
    let q = simpson(|t| family.eval(t).as_slice().to_vec(), S::zero(), period, S::lit(AVERAGE_TOL) * period)?;
    Ok(Matrix::from_fn(d, |i, j| q.value[i * d + j] / period))
}

/// `F̂(x) = (1/T)∫₀ᵀ F(τ, x) dτ`.
pub fn average_field<S: Real>(field: &NonlinearField<S>, x: &Vector<S>) -> Result<Vector<S>> {
    let period = field.period();
    let q = simpson(|t| field.eval(t, x).into_inner(), S::zero(), period, S::lit(AVERAGE_TOL) * period)?;
    Ok(Vector::new(q.value).scale(S::one() / period))
}

/// The averaged pair `(Â, F̂)`.
#[derive(Debug, Clone)]
pub struct AveragedField<S> {
    a_hat: Matrix<S>,
    field: NonlinearField<S>,
}

impl<S: Real> AveragedField<S> {
    pub fn new(family: &GeneratorFamily<S>, field: &NonlinearField<S>) -> Result<Self> {
        if family.dim() != field.dim() {
            return Err(Error::DimensionMismatch { expected: family.dim(), found: field.dim() });
        }
        Ok(AveragedField { a_hat: average_generator(family)?, field: field.clone() })
    }

    pub fn a_hat(&self) -> &Matrix<S> {
        &self.a_hat
    }

    pub fn f_hat(&self, x: &Vector<S>) -> Vector<S> {
        average_field(&self.field, x).unwrap_or_else(|_| Vector::new(vec![S::nan(); x.dim()]))
    }

    /// `Âx + F̂(x)`.
    pub fn eval(&self, x: &Vector<S>) -> Result<Vector<S>> {
        Ok(&self.a_hat.mul_vec(x) + &average_field(&self.field, x)?)
    }

    /// `Â⁻¹`, rejecting a singular average.
    pub fn a_hat_inverse(&self) -> Result<Matrix<S>> {
        Ok(resolvent(&self.a_hat, S::zero())?.scale(S::lit(-1.0)))
    }

    /// `Deg(Â + F̂, U)`.
    pub fn degree(&self, region: &Region<S>, opts: &DegreeOptions) -> Result<i64> {
        Ok(deg_hat(&self.a_hat, &|x: &Vector<S>| self.f_hat(x), region, opts)?.degree)
    }

    /// A zero of `Â + F̂` reached by Newton from the centre of `U`.
    pub fn zero_in(&self, region: &Region<S>) -> Option<Vector<S>> {
        let g = |x: &Vector<S>| self.eval(x);
        locate_zero(&g, &region.center(), region, S::lit(1e-12), 80)
    }
}

/// `A^{(μ)}(t) = −μI + (1−μ)A(t)`, with decay rate `μ + (1−μ)ω`.
pub fn mu_rescale<S: Real>(family: &GeneratorFamily<S>, mu: S) -> Result<GeneratorFamily<S>> {
    if !(S::zero() <= mu && mu <= S::one()) {
        return Err(Error::InvalidInput(format!("μ = {mu} outside [0, 1]")));
    }
    let d = family.dim();
    let omega = mu + (S::one() - mu) * family.omega();
    let base = family.clone();
    let out = GeneratorFamily::new(d, family.period(), move |t| {
        &Matrix::scalar(d, -mu) + &base.eval(t).scale(S::one() - mu)
    })
    .with_omega(omega)
    .with_metric(family.metric().clone())
    .periodic(family.is_periodic())
    .differentiable(family.is_differentiable());
    Ok(out)
}

/// `F^{(μ)}(t, x) = (1−μ)F(t, x) − μÂ⁻¹F̂(x)`, the field homotoped alongside
/// [`mu_rescale`]. At `μ = 1` the problem is `u̇ = −λu − λÂ⁻¹F̂(u)`.
pub fn mu_rescale_field<S: Real>(avg: &AveragedField<S>, mu: S) -> Result<NonlinearField<S>> {
    if !(S::zero() <= mu && mu <= S::one()) {
        return Err(Error::InvalidInput(format!("μ = {mu} outside [0, 1]")));
    }
    let a_inv = avg.a_hat_inverse()?;
    let periodic = avg.field.is_periodic();
    let avg = avg.clone();
    let field = avg.field.clone();
    let d = field.dim();
    let period = field.period();
    Ok(NonlinearField::new(d, period, move |t, x| {
        let mut out = field.eval(t, x).scale(S::one() - mu);
        if mu > S::zero() {
            out.axpy(-mu, &a_inv.mul_vec(&avg.f_hat(x)));
        }
        out
    })
    .periodic(periodic))
}

/// Discretisation used whenever a period map is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodMapOptions<S> {
    /// Subdivisions of the evolution system.
    pub n: usize,
    /// Intervals of the mild-solution grid.
    pub grid: usize,
    pub picard_tol: S,
    /// Target for `‖Φ_T(x) − x‖`, multiplied by `min(λ, 1)` at each `λ`.
    pub fixed_point_tol: S,
}

impl<S: Real> Default for PeriodMapOptions<S> {
    fn default() -> Self {
        PeriodMapOptions { n: 1024, grid: 1024, picard_tol: S::lit(1e-13), fixed_point_tol: S::lit(1e-8) }
    }
}

impl<S: Real> PeriodMapOptions<S> {
    pub fn problem(&self, family: &GeneratorFamily<S>, field: &NonlinearField<S>, lambda: S) -> Result<MildProblem<S>> {
        Ok(MildProblem::new(family, field, lambda, self.n, self.grid)?
            .with_picard(PicardOptions { tol: self.picard_tol, max_iter: 400 }))
    }

    fn fixed_point_opts(&self, lambda: S) -> FixedPointOptions<S> {
        FixedPointOptions { tol: self.fixed_point_tol * lambda.min(S::one()), max_iter: 60 }
    }
}

/// One `λ` of a branching sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchingRow<S> {
    pub lambda: S,
    pub x: Option<Vector<S>>,
    /// `‖Âx_λ + F̂(x_λ)‖`.
    pub defect: Option<S>,
    /// `sup_t ‖Φ_t^{(λ)}(x_λ) − x₀‖` against the averaged zero `x₀`.
    pub sup_gap: Option<S>,
    pub residual: Option<S>,
    pub newton_iters: usize,
    pub picard_iters: usize,
    pub failure: Option<String>,
}

/// Outcome of [`branching_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct BranchingTable<S> {
    pub rows: Vec<BranchingRow<S>>,
    /// Zero of the averaged field the branch should approach.
    pub averaged_zero: Option<Vector<S>>,
    pub monotone: bool,
    /// `final defect / initial defect`.
    pub reduction: Option<S>,
    pub passed: bool,
}

/// Relative factor the defect must fall by across the sweep.
pub const BRANCHING_REDUCTION: f64 = 1e-2;

/// Tracks `T`-periodic points `x_λ` along a descending `λ` sweep and their
/// distance from being zeros of the averaged field.
pub fn branching_experiment<S: Real>(
    family: &GeneratorFamily<S>,
    field: &NonlinearField<S>,
    lambdas: &[S],
    region: &Region<S>,
    opts: &PeriodMapOptions<S>,
) -> Result<BranchingTable<S>> {
    if lambdas.is_empty() || lambdas.iter().any(|&l| !(l > S::zero())) {
        return Err(Error::InvalidInput("λ sweep must be nonempty and positive".into()));
    }
    if lambdas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidInput("λ sweep must be strictly descending".into()));
    }
    let avg = AveragedField::new(family, field)?;
    let averaged_zero = avg.zero_in(region);
    let mut guess = averaged_zero.clone().unwrap_or_else(|| region.center());
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let attempt = (|| -> Result<BranchingRow<S>> {
            let problem = opts.problem(family, field, lambda)?;
            let fp = problem.fixed_point(&guess, FixedPointMethod::Newton, &opts.fixed_point_opts(lambda))?;
            let traj = problem.solve(&fp.x)?;
            let defect = avg.eval(&fp.x)?.norm();
            let sup_gap = averaged_zero
                .as_ref()
                .map(|x0| traj.states.iter().map(|u| u.distance(x0)).fold(S::zero(), S::max));
            Ok(BranchingRow {
                lambda,
                x: Some(fp.x),
                defect: Some(defect),
                sup_gap,
                residual: Some(fp.residual),
                newton_iters: fp.iterations,
                picard_iters: traj.meta.iterations,
                failure: None,
            })
        })();
        match attempt {
            Ok(row) => {
                guess = row.x.clone().unwrap_or(guess);
                rows.push(row);
            }
            Err(e) => rows.push(BranchingRow {
                lambda,
                x: None,
                defect: None,
                sup_gap: None,
                residual: None,
                newton_iters: 0,
                picard_iters: 0,
                failure: Some(e.to_string()),
            }),
        }
    }
    let defects: Vec<S> = rows.iter().filter_map(|r| r.defect).collect();
    let slack = S::lit(1e-10);
    let monotone = defects.windows(2).all(|w| w[1] <= w[0] * (S::one() + S::lit(1e-3)) + slack);
    let reduction = match (rows.first().and_then(|r| r.defect), rows.last().and_then(|r| r.defect)) {
        (Some(first), Some(last)) if first > S::zero() => Some(last / first),
        (Some(_), Some(last)) => Some(if last == S::zero() { S::zero() } else { S::infinity() }),
        _ => None,
    };
    let all_solved = rows.iter().all(|r| r.failure.is_none());
    let first = rows.first().and_then(|r| r.defect).unwrap_or(S::zero());
    let last = rows.last().and_then(|r| r.defect).unwrap_or(S::infinity());
    // an exact equilibrium branch has zero defect throughout
    let reduced = last <= first * S::lit(BRANCHING_REDUCTION) || last <= slack;
    let passed = all_solved && monotone && reduced;
    Ok(BranchingTable { rows, averaged_zero, monotone, reduction, passed })
}

/// Fundamental matrix over one period and its spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyReport<S> {
    pub lambda: S,
    pub matrix: Matrix<S>,
    pub eigenvalues: Vec<(f64, f64)>,
    /// `min |σ − 1|` over the eigenvalues.
    pub distance_to_one: f64,
    pub nondegenerate: bool,
}

/// `R(T, 0)` of `u̇ = λ(A(t) + F_∞(t))u` with `n` subdivisions.
pub fn monodromy<S: Real>(
    family: &GeneratorFamily<S>,
    f_inf: impl Fn(S) -> Matrix<S> + Send + Sync + 'static,
    lambda: S,
    n: usize,
) -> Result<MonodromyReport<S>> {
    let gap = {
        let (a, b) = (f_inf(S::zero()), f_inf(family.period()));
        crate::linop::operator_norm(&(&a - &b))
    };
    if gap > S::lit(1e-12) {
        return Err(Error::Precondition(format!("F_∞(0) and F_∞(T) differ by {gap}")));
    }
    let perturbed = family.perturbed(f_inf, S::lit(f64::NEG_INFINITY)).scaled(lambda);
    let r = build_evolution(&perturbed, n)?;
    let matrix = r.operator(family.period(), S::zero())?;
    let eigenvalues = eigenvalues(&matrix)?;
    let distance_to_one = eigenvalues.iter().map(|&(re, im)| (re - 1.0).hypot(im)).fold(f64::INFINITY, f64::min);
    Ok(MonodromyReport { lambda, matrix, eigenvalues, distance_to_one, nondegenerate: distance_to_one > UNIT_EIGEN_GAP })
}

/// One `λ` of the degree comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragingDegreeRow<S> {
    pub lambda: S,
    /// Smallest sampled `‖x − Φ_T^{(λ)}(x)‖ / λ` on `∂U`.
    pub boundary_min: S,
    pub admissible: bool,
    pub degree: Option<i64>,
    pub failure: Option<String>,
}

/// Outcome of [`averaging_degree_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct AveragingDegreeReport<S> {
    /// `Deg(Â + F̂, U)`.
    pub averaged_degree: i64,
    /// Rows in ascending `λ`.
    pub rows: Vec<AveragingDegreeRow<S>>,
    /// Largest sampled `λ` such that every sampled `λ' ≤ λ` has a nonvanishing boundary.
    pub lambda0: Option<S>,
    /// `d_λ = d₀` for every sampled `λ ≤ λ₀`.
    pub consistent: bool,
}

/// Compares `Deg(Â + F̂, U)` with `deg(I − Φ_T^{(λ)}, U)` over a `λ` sweep.
///
/// The period-map field is divided by `λ`, which leaves its degree unchanged
/// and keeps the regular-value thresholds meaningful as `λ → 0`.
pub fn averaging_degree_check<S: Real>(
    family: &GeneratorFamily<S>,
    field: &NonlinearField<S>,
    region: &Region<S>,
    lambdas: &[S],
    map_opts: &PeriodMapOptions<S>,
    degree_opts: &DegreeOptions,
) -> Result<AveragingDegreeReport<S>> {
    let avg = AveragedField::new(family, field)?;
    let averaged = |x: &Vector<S>| avg.eval(x);
    let check = boundary_check(&averaged, region, 33)?;
    if !check.admissible() {
        return Err(Error::InadmissibleRegion { sample: check.argmin.to_f64_vec(), norm: check.min_norm.to_f64_lossy() });
    }
    let averaged_degree = avg.degree(region, degree_opts)?;
    let mut sorted: Vec<S> = lambdas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let rows: Vec<AveragingDegreeRow<S>> = sorted
        .par_iter()
        .map(|&lambda| degree_row(family, field, region, lambda, map_opts, degree_opts))
        .collect();
    let mut lambda0 = None;
    for row in &rows {
        if !row.admissible {
            break;
        }
        lambda0 = Some(row.lambda);
    }
    let consistent = rows
        .iter()
        .take_while(|r| r.admissible)
        .all(|r| r.degree == Some(averaged_degree));
    Ok(AveragingDegreeReport { averaged_degree, rows, lambda0, consistent: consistent && lambda0.is_some() })
}

fn degree_row<S: Real>(
    family: &GeneratorFamily<S>,
    field: &NonlinearField<S>,
    region: &Region<S>,
    lambda: S,
    map_opts: &PeriodMapOptions<S>,
    degree_opts: &DegreeOptions,
) -> AveragingDegreeRow<S> {
    let failed = |e: Error, boundary_min: S| AveragingDegreeRow {
        lambda,
        boundary_min,
        admissible: false,
        degree: None,
        failure: Some(e.to_string()),
    };
    let problem = match map_opts.problem(family, field, lambda) {
        Ok(p) => p,
        Err(e) => return failed(e, S::nan()),
    };
    let g = |x: &Vector<S>| -> Result<Vector<S>> { Ok((x - &problem.period_map(x)?).scale(S::one() / lambda)) };
    let boundary = match boundary_check(&g, region, degree_opts.boundary_per_axis.max(33)) {
        Ok(b) => b,
        Err(e) => return failed(e, S::nan()),
    };
    if !boundary.admissible() {
        let min = boundary.min_norm;
        return failed(
            Error::InadmissibleRegion { sample: boundary.argmin.to_f64_vec(), norm: min.to_f64_lossy() },
            min,
        );
    }
    match brouwer_degree_fallible(&g, region, degree_opts) {
        Ok(rep) => AveragingDegreeRow {
            lambda,
            boundary_min: boundary.min_norm,
            admissible: true,
            degree: Some(rep.degree),
            failure: None,
        },
        Err(e @ Error::InadmissibleRegion { .. }) => failed(e, boundary.min_norm),
        Err(e) => AveragingDegreeRow {
            lambda,
            boundary_min: boundary.min_norm,
            admissible: true,
            degree: None,
            failure: Some(e.to_string()),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn scalar_forced() -> (GeneratorFamily<f64>, NonlinearField<f64>) {
        let fam = GeneratorFamily::constant(Matrix::diag(&[-1.0]), 1.0).with_omega(1.0);
        let field = NonlinearField::forcing(1, 1.0, |t| Vector::new(vec![2.0 + (2.0 * PI * t).sin()])).periodic(true);
        (fam, field)
    }

    #[test]
    fn averages_of_zero_mean_sines() {
        let fam = GeneratorFamily::new(2, 1.0, |t: f64| Matrix::diag(&[-2.0 - (2.0 * PI * t).sin(), -3.0]));
        let a = average_generator(&fam).unwrap();
        assert!((&a - &Matrix::diag(&[-2.0, -3.0])).max_abs() < 1e-12);
        let f = NonlinearField::new(2, 1.0, |t: f64, x: &Vector<f64>| x.scale(2.0 + (2.0 * PI * t).cos()));
        let v = average_field(&f, &Vector::from_f64(&[1.0, -3.0])).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-12 && (v[1] + 6.0).abs() < 1e-12);
    }

    #[test]
    fn mu_rescale_endpoints() {
        let fam = GeneratorFamily::constant(Matrix::diag(&[-2.0]), 1.0).with_omega(2.0);
        assert_eq!(mu_rescale(&fam, 0.0).unwrap().eval(0.3), Matrix::diag(&[-2.0]));
        assert_eq!(mu_rescale(&fam, 1.0).unwrap().eval(0.3), Matrix::diag(&[-1.0]));
        let half = mu_rescale(&fam, 0.5).unwrap();
        assert_eq!(half.eval(0.0), Matrix::diag(&[-1.5]));
        assert!(half.validate(16).is_ok());
        assert!(mu_rescale(&fam, 1.5).is_err());
    }

    #[test]
    fn branching_closed_form() {
        let (fam, field) = scalar_forced();
        let table = branching_experiment(
            &fam,
            &field,
            &[1.0, 0.1, 0.01, 0.001],
            &Region::interval(0.0, 4.0).unwrap(),
            &PeriodMapOptions::default(),
        )
        .unwrap();
        let omega = 2.0 * PI;
        for row in &table.rows {
            let l = row.lambda;
            let exact = 2.0 - l * omega / (l * l + omega * omega);
            assert!((row.x.as_ref().unwrap()[0] - exact).abs() < 1e-6, "{l}: {:?}", row.x);
        }
        assert!(table.passed, "{table:?}");
    }

    #[test]
    fn monodromy_of_constant_generator() {
        let fam = GeneratorFamily::constant(Matrix::diag(&[-1.0, -2.0]), 1.0);
        let rep = monodromy(&fam, |_| Matrix::zeros(2), 0.5, 64).unwrap();
        assert!((rep.matrix[(0, 0)] - (-0.5f64).exp()).abs() < 1e-12);
        assert!(rep.nondegenerate);
        let resonant = monodromy(&fam, |_| Matrix::diag(&[1.0, 0.0]), 0.5, 64).unwrap();
        assert!(!resonant.nondegenerate);
    }

    #[test]
    fn scalar_degree_equality() {
        let fam = GeneratorFamily::constant(Matrix::diag(&[-1.0]), 1.0).with_omega(1.0);
        let field = NonlinearField::forcing(1, 1.0, |_| Vector::new(vec![2.0])).periodic(true);
        let opts = PeriodMapOptions { n: 64, grid: 128, ..Default::default() };
        let dopts = DegreeOptions { starts_per_axis: 8, ..Default::default() };
        let inside = Region::interval(0.0, 4.0).unwrap();
        let rep = averaging_degree_check(&fam, &field, &inside, &[0.1, 1.0], &opts, &dopts).unwrap();
        assert_eq!(rep.averaged_degree, 1);
        assert!(rep.consistent, "{rep:?}");
        let outside = Region::interval(3.0, 5.0).unwrap();
        let rep = averaging_degree_check(&fam, &field, &outside, &[0.1, 1.0], &opts, &dopts).unwrap();
        assert_eq!(rep.averaged_degree, 0);
        assert!(rep.consistent);
    }
}
