//! Mild solutions and translation along trajectories.
//!
//! For a generator family `A(t)` and a field `F(t, x)` the scaled problem
//! `u̇ = λA(t)u + λF(t, u)` is solved in its variation-of-constants form
//!
//! ```text
//! u(t) = R(t, 0)x + ∫₀ᵗ R(t, s) λF(s, u(s)) ds
//! ```
//!
//! where `R` is the evolution system of `λA`. The integral uses the composite
//! trapezoid rule on a uniform grid, evaluated by the recursion
//! `u_{i+1} = P_i (u_i + ½Δ w_i) + ½Δ w_{i+1}` with `P_i = R(τ_{i+1}, τ_i)`,
//! which is the same sum because `R` composes exactly across grid nodes.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::evolsys::{build_evolution, EvolutionSystem, GeneratorFamily};
use crate::linop::{Matrix, Metric, Vector};
use crate::scalar::Real;

type FieldFn<S> = Arc<dyn Fn(S, &Vector<S>) -> Vector<S> + Send + Sync>;

/// A nonlinearity `F(t, x)` with its Lipschitz and linear-growth constants.
#[derive(Clone)]
pub struct NonlinearField<S> {
    dim: usize,
    period: S,
    f: FieldFn<S>,
    lipschitz: S,
    growth: S,
    periodic: bool,
}

impl<S: std::fmt::Debug> std::fmt::Debug for NonlinearField<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NonlinearField")
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .field("growth", &self.growth)
            .finish_non_exhaustive()
    }
}

/// Sampled constants of a [`NonlinearField`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldReport<S> {
    pub max_lipschitz_ratio: S,
    pub max_growth_ratio: S,
    pub periodicity_gap: S,
}

impl<S: Real> NonlinearField<S> {
    pub fn new(dim: usize, period: S, f: impl Fn(S, &Vector<S>) -> Vector<S> + Send + Sync + 'static) -> Self {
        NonlinearField { dim, period, f: Arc::new(f), lipschitz: S::zero(), growth: S::zero(), periodic: false }
    }

    /// `F ≡ 0`.
    pub fn zero(dim: usize, period: S) -> Self {
        Self::new(dim, period, move |_, _| Vector::zeros(dim)).periodic(true)
    }

    /// A field that ignores the state: `F(t, x) = g(t)`.
    pub fn forcing(dim: usize, period: S, g: impl Fn(S) -> Vector<S> + Send + Sync + 'static) -> Self {
        Self::new(dim, period, move |t, _| g(t))
    }

    /// `F(t, x) = B x + g(t)`.
    pub fn affine(b: Matrix<S>, period: S, g: impl Fn(S) -> Vector<S> + Send + Sync + 'static) -> Self {
        let lipschitz = crate::linop::operator_norm(&b);
        Self::new(b.dim(), period, move |t, x| &b.mul_vec(x) + &g(t)).with_lipschitz(lipschitz)
    }

    pub fn with_lipschitz(mut self, l: S) -> Self {
        self.lipschitz = l;
        self
    }

    pub fn with_growth(mut self, c: S) -> Self {
        self.growth = c;
        self
    }

    pub fn periodic(mut self, periodic: bool) -> Self {
        self.periodic = periodic;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> S {
        self.period
    }

    pub fn lipschitz(&self) -> S {
        self.lipschitz
    }

    pub fn growth(&self) -> S {
        self.growth
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn eval(&self, t: S, x: &Vector<S>) -> Vector<S> {
        (self.f)(t, x)
    }

    /// Checks the claimed constants on every pair of `points` at `times + 1`
    /// equispaced times. A zero claimed constant disables that check.
    pub fn check_constants(&self, points: &[Vector<S>], times: usize) -> Result<FieldReport<S>> {
        let times = times.max(1);
        let slack = S::lit(1e-9);
        let mut lip = S::zero();
        let mut growth = S::zero();
        let mut gap = S::zero();
        for i in 0..=times {
            let t = self.period * S::from_usize_lossy(i) / S::from_usize_lossy(times);
            let values: Vec<Vector<S>> = points.iter().map(|p| self.eval(t, p)).collect();
            for (p, v) in points.iter().zip(&values) {
                if v.dim() != self.dim {
                    return Err(Error::DimensionMismatch { expected: self.dim, found: v.dim() });
                }
                growth = growth.max(v.norm() / (S::one() + p.norm()));
            }
            for a in 0..points.len() {
                for b in a + 1..points.len() {
                    let dx = points[a].distance(&points[b]);
                    if dx > S::zero() {
                        lip = lip.max(values[a].distance(&values[b]) / dx);
                    }
                }
            }
        }
        for p in points {
            gap = gap.max(self.eval(S::zero(), p).distance(&self.eval(self.period, p)));
        }
        if self.lipschitz > S::zero() && lip > self.lipschitz * (S::one() + slack) + slack {
            return Err(Error::InvalidInput(format!("sampled Lipschitz ratio {lip} exceeds {}", self.lipschitz)));
        }
        if self.growth > S::zero() && growth > self.growth * (S::one() + slack) + slack {
            return Err(Error::InvalidInput(format!("sampled growth ratio {growth} exceeds {}", self.growth)));
        }
        if self.periodic && gap > S::lit(1e-12) {
            return Err(Error::InvalidInput(format!("F(0, x) and F(T, x) differ by {gap}")));
        }
        Ok(FieldReport { max_lipschitz_ratio: lip, max_growth_ratio: growth, periodicity_gap: gap })
    }
}

/// Solver bookkeeping attached to a [`Trajectory`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta<S> {
    pub lambda: S,
    pub iterations: usize,
    /// Sup-norm size of the last Picard update.
    pub residual: S,
    /// Sup-norm size of every Picard update, in order.
    pub updates: Vec<S>,
}

/// States of a solution on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<S>,
    pub states: Vec<Vector<S>>,
    pub meta: TrajectoryMeta<S>,
}

impl<S: Real> Trajectory<S> {
    pub fn initial_state(&self) -> &Vector<S> {
        &self.states[0]
    }

    pub fn final_state(&self) -> &Vector<S> {
        &self.states[self.states.len() - 1]
    }

    /// Linear interpolation between grid states.
    pub fn state_at(&self, t: S) -> Vector<S> {
        let first = self.times[0];
        let last = self.times[self.times.len() - 1];
        let m = self.times.len() - 1;
        if m == 0 || t <= first {
            return self.states[0].clone();
        }
        if t >= last {
            return self.final_state().clone();
        }
        let x = (t - first) / (last - first) * S::from_usize_lossy(m);
        let i = x.floor().to_usize().unwrap_or(0).min(m - 1);
        let theta = x - S::from_usize_lossy(i);
        let mut out = self.states[i].scale(S::one() - theta);
        out.axpy(theta, &self.states[i + 1]);
        out
    }

    /// Largest node-wise distance to another trajectory on the same grid.
    pub fn sup_distance(&self, other: &Self) -> S {
        self.states.iter().zip(&other.states).map(|(a, b)| a.distance(b)).fold(S::zero(), S::max)
    }
}

/// Picard iteration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions<S> {
    pub tol: S,
    pub max_iter: usize,
}

impl<S: Real> Default for PicardOptions<S> {
    fn default() -> Self {
        PicardOptions { tol: S::lit(1e-10), max_iter: 200 }
    }
}

/// Default number of grid intervals on `[0, T]`.
pub const DEFAULT_GRID: usize = 2048;

/// Transfer operators of an evolution system over a uniform grid on `[t0, t1]`.
#[derive(Debug, Clone)]
pub struct GridPropagator<S> {
    times: Vec<S>,
    transfers: Vec<Matrix<S>>,
}

impl<S: Real> GridPropagator<S> {
    pub fn new(r: &EvolutionSystem<S>, t0: S, t1: S, m: usize) -> Result<Self> {
        let transfers = r.transfers(t0, t1, m)?;
        let dt = (t1 - t0) / S::from_usize_lossy(m);
        let times = (0..=m)
            .map(|i| if i == m { t1 } else { t0 + dt * S::from_usize_lossy(i) })
            .collect();
        Ok(GridPropagator { times, transfers })
    }

    pub fn times(&self) -> &[S] {
        &self.times
    }

    pub fn intervals(&self) -> usize {
        self.transfers.len()
    }

    pub fn dim(&self) -> usize {
        self.transfers[0].dim()
    }

    pub fn transfer(&self, i: usize) -> &Matrix<S> {
        &self.transfers[i]
    }

    fn step(&self) -> S {
        (self.times[self.times.len() - 1] - self.times[0]) / S::from_usize_lossy(self.intervals())
    }

    /// `Σ(x, w)(τ_i)` at every node for a forcing sampled at the nodes.
    pub fn sigma(&self, x: &Vector<S>, w: &[Vector<S>]) -> Result<Vec<Vector<S>>> {
        if w.len() != self.times.len() {
            return Err(Error::DimensionMismatch { expected: self.times.len(), found: w.len() });
        }
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.dim() });
        }
        let half = self.step() * S::lit(0.5);
        let mut out = Vec::with_capacity(self.times.len());
        out.push(x.clone());
        for (i, p) in self.transfers.iter().enumerate() {
            let mut carried = out[i].clone();
            carried.axpy(half, &w[i]);
            let mut next = p.mul_vec(&carried);
            next.axpy(half, &w[i + 1]);
            out.push(next);
        }
        Ok(out)
    }
}

/// The variation-of-constants operator `Σ(x, w, λ)` on the propagator's grid.
/// The forcing `w` already contains any factor `λ`.
pub fn sigma_apply<S: Real>(
    prop: &GridPropagator<S>,
    x: &Vector<S>,
    w: &[Vector<S>],
    lambda: S,
) -> Result<Trajectory<S>> {
    let states = prop.sigma(x, w)?;
    Ok(Trajectory {
        times: prop.times().to_vec(),
        states,
        meta: TrajectoryMeta { lambda, iterations: 0, residual: S::zero(), updates: Vec::new() },
    })
}

/// Picard iteration `u ← Σ(x0, λF(·, u(·)), λ)` started from the constant path `x0`.
pub fn mild_solve<S: Real>(
    prop: &GridPropagator<S>,
    field: &NonlinearField<S>,
    x0: &Vector<S>,
    lambda: S,
    opts: &PicardOptions<S>,
) -> Result<Trajectory<S>> {
    if field.dim() != prop.dim() {
        return Err(Error::DimensionMismatch { expected: prop.dim(), found: field.dim() });
    }
    let times = prop.times().to_vec();
    let mut states = vec![x0.clone(); times.len()];
    let mut updates = Vec::new();
    for iteration in 1..=opts.max_iter {
        let w: Vec<Vector<S>> = times.iter().zip(&states).map(|(&t, u)| field.eval(t, u).scale(lambda)).collect();
        let next = prop.sigma(x0, &w)?;
        let update = next.iter().zip(&states).map(|(a, b)| a.distance(b)).fold(S::zero(), S::max);
        states = next;
        updates.push(update);
        if !update.is_finite() {
            return Err(Error::Divergence { iterations: iteration, residual: update.to_f64_lossy() });
        }
        if update < opts.tol {
            return Ok(Trajectory {
                times,
                states,
                meta: TrajectoryMeta { lambda, iterations: iteration, residual: update, updates },
            });
        }
    }
    let residual = updates.last().copied().unwrap_or(S::nan());
    Err(Error::Divergence { iterations: opts.max_iter, residual: residual.to_f64_lossy() })
}

/// How [`MildProblem::fixed_point`] searches for `Φ_T(x) = x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPointMethod {
    /// Successive substitution `x ← Φ_T(x)`.
    Picard,
    /// Damped Newton on `Φ_T(x) − x` with a central-difference Jacobian.
    Newton,
}

/// Fixed-point search controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions<S> {
    /// Target for `‖Φ_T(x) − x‖`.
    pub tol: S,
    pub max_iter: usize,
}

impl<S: Real> Default for FixedPointOptions<S> {
    fn default() -> Self {
        FixedPointOptions { tol: S::lit(1e-8), max_iter: 60 }
    }
}

/// Above this relative condition number `Φ_T − I` counts as singular.
pub const JACOBIAN_COND_MAX: f64 = 1e8;

/// A located periodic point.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint<S> {
    pub x: Vector<S>,
    /// `‖Φ_T(x) − x‖` at the returned point.
    pub residual: S,
    pub iterations: usize,
}

/// The scaled problem `u̇ = λA(t)u + λF(t, u)` on `[0, T]` with its period map.
#[derive(Debug, Clone)]
pub struct MildProblem<S> {
    evolution: EvolutionSystem<S>,
    field: NonlinearField<S>,
    lambda: S,
    grid: usize,
    prop: GridPropagator<S>,
    picard: PicardOptions<S>,
}

impl<S: Real> MildProblem<S> {
    /// Builds the evolution system of `λA` with `n` subdivisions and a
    /// solution grid of `grid` intervals.
    pub fn new(family: &GeneratorFamily<S>, field: &NonlinearField<S>, lambda: S, n: usize, grid: usize) -> Result<Self> {
        if family.dim() != field.dim() {
            return Err(Error::DimensionMismatch { expected: family.dim(), found: field.dim() });
        }
        if !(lambda >= S::zero()) {
            return Err(Error::InvalidInput("λ must be nonnegative".into()));
        }
        let evolution = build_evolution(&family.scaled(lambda), n)?;
        Self::from_evolution(evolution, field, lambda, grid)
    }

    /// Uses an existing evolution system, which must already include the factor `λ`.
    pub fn from_evolution(evolution: EvolutionSystem<S>, field: &NonlinearField<S>, lambda: S, grid: usize) -> Result<Self> {
        let prop = GridPropagator::new(&evolution, S::zero(), evolution.period(), grid)?;
        Ok(MildProblem { evolution, field: field.clone(), lambda, grid, prop, picard: PicardOptions::default() })
    }

    pub fn with_picard(mut self, opts: PicardOptions<S>) -> Self {
        self.picard = opts;
        self
    }

    pub fn evolution(&self) -> &EvolutionSystem<S> {
        &self.evolution
    }

    pub fn propagator(&self) -> &GridPropagator<S> {
        &self.prop
    }

    pub fn field(&self) -> &NonlinearField<S> {
        &self.field
    }

    pub fn lambda(&self) -> S {
        self.lambda
    }

    pub fn period(&self) -> S {
        self.evolution.period()
    }

    pub fn dim(&self) -> usize {
        self.evolution.dim()
    }

    pub fn metric(&self) -> &Metric<S> {
        self.evolution.family().metric()
    }

    /// Mild solution on `[0, T]` from `x0`.
    pub fn solve(&self, x0: &Vector<S>) -> Result<Trajectory<S>> {
        mild_solve(&self.prop, &self.field, x0, self.lambda, &self.picard)
    }

    /// Mild solution on `[t0, t1]` starting from `x` at time `t0`, on a grid
    /// with the same spacing as the main one (rounded up).
    pub fn solve_between(&self, t0: S, t1: S, x: &Vector<S>) -> Result<Trajectory<S>> {
        let span = (t1 - t0) / self.period();
        let m = (span * S::from_usize_lossy(self.grid)).round().to_usize().unwrap_or(1).max(1);
        let prop = GridPropagator::new(&self.evolution, t0, t1, m)?;
        mild_solve(&prop, &self.field, x, self.lambda, &self.picard)
    }

    /// `Φ_t(x)`, the state at time `t` of the solution starting from `x`.
    pub fn translate(&self, t: S, x: &Vector<S>) -> Result<Vector<S>> {
        if t == S::zero() {
            return Ok(x.clone());
        }
        if t == self.period() {
            return self.period_map(x);
        }
        Ok(self.solve_between(S::zero(), t, x)?.final_state().clone())
    }

    /// `Φ_T(x)`.
    pub fn period_map(&self, x: &Vector<S>) -> Result<Vector<S>> {
        Ok(self.solve(x)?.final_state().clone())
    }

    /// Searches for `x` with `Φ_T(x) = x`.
    pub fn fixed_point(&self, x_init: &Vector<S>, method: FixedPointMethod, opts: &FixedPointOptions<S>) -> Result<FixedPoint<S>> {
        match method {
            FixedPointMethod::Picard => self.fixed_point_picard(x_init, opts),
            FixedPointMethod::Newton => self.fixed_point_newton(x_init, opts),
        }
    }

    fn fixed_point_picard(&self, x_init: &Vector<S>, opts: &FixedPointOptions<S>) -> Result<FixedPoint<S>> {
        let mut x = x_init.clone();
        for iteration in 0..opts.max_iter.max(1) * 10 {
            let next = self.period_map(&x)?;
            let residual = next.distance(&x);
            if residual <= opts.tol {
                return Ok(FixedPoint { x, residual, iterations: iteration });
            }
            if !residual.is_finite() {
                break;
            }
            x = next;
        }
        Err(Error::NoConvergence("successive substitution did not reach tolerance".into()))
    }

    /// Central-difference Jacobian of `x ↦ Φ_T(x) − x`.
    pub fn displacement_jacobian(&self, x: &Vector<S>) -> Result<Matrix<S>> {
        let d = self.dim();
        let mut jac = Matrix::zeros(d);
        for j in 0..d {
            let h = S::lit(1e-6) * S::one().max(x[j].abs());
            let mut plus = x.clone();
            plus[j] = plus[j] + h;
            let mut minus = x.clone();
            minus[j] = minus[j] - h;
            let column = (&self.period_map(&plus)? - &self.period_map(&minus)?).scale(S::one() / (h + h));
            for i in 0..d {
                jac[(i, j)] = column[i] - if i == j { S::one() } else { S::zero() };
            }
        }
        Ok(jac)
    }

    fn fixed_point_newton(&self, x_init: &Vector<S>, opts: &FixedPointOptions<S>) -> Result<FixedPoint<S>> {
        let mut x = x_init.clone();
        let mut g = &self.period_map(&x)? - &x;
        let mut norm = g.norm();
        for iteration in 0..opts.max_iter {
            if norm <= opts.tol {
                return Ok(FixedPoint { x, residual: norm, iterations: iteration });
            }
            let jac = self.displacement_jacobian(&x)?;
            let lu = jac
                .lu()
                .map_err(|_| Error::DegenerateFixedPoint(format!("singular Jacobian of Φ_T − I at {:?}", x.to_f64_vec())))?;
            // condition relative to the size of DΦ_T, since Φ_T − I may itself be tiny
            let inv_norm = lu.inverse()?.norm_1();
            let scale = S::one() + (&jac + &Matrix::identity(self.dim())).norm_1();
            if (inv_norm * scale).to_f64_lossy() > JACOBIAN_COND_MAX {
                return Err(Error::DegenerateFixedPoint(format!(
                    "ill-conditioned Jacobian of Φ_T − I at {:?}",
                    x.to_f64_vec()
                )));
            }
            let step = -&lu.solve(&g);
            let mut t = S::one();
            let mut accepted = false;
            for _ in 0..30 {
                let mut trial = x.clone();
                trial.axpy(t, &step);
                if let Ok(image) = self.period_map(&trial) {
                    let trial_g = &image - &trial;
                    let trial_norm = trial_g.norm();
                    if trial_norm.is_finite() && (trial_norm < norm || trial_norm <= opts.tol) {
                        x = trial;
                        g = trial_g;
                        norm = trial_norm;
                        accepted = true;
                        break;
                    }
                }
                t = t * S::lit(0.5);
            }
            if !accepted {
                if norm <= opts.tol * S::lit(10.0) {
                    break;
                }
                return Err(Error::NoConvergence(format!("Newton line search stalled at residual {norm}")));
            }
        }
        if norm <= opts.tol {
            let iterations = opts.max_iter;
            return Ok(FixedPoint { x, residual: norm, iterations });
        }
        Err(Error::NoConvergence(format!("Newton stopped at residual {norm}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn scalar_problem(forcing: impl Fn(f64) -> f64 + Send + Sync + 'static, lambda: f64) -> MildProblem<f64> {
        let fam = GeneratorFamily::constant(Matrix::diag(&[-1.0]), 1.0).with_omega(1.0);
        let field = NonlinearField::forcing(1, 1.0, move |t| Vector::new(vec![forcing(t)]));
        MildProblem::new(&fam, &field, lambda, 64, 2048).unwrap()
    }

    #[test]
    fn zero_forcing_gives_free_evolution() {
        let p = scalar_problem(|_| 0.0, 1.0);
        let w = vec![Vector::zeros(1); 2049];
        let traj = sigma_apply(p.propagator(), &Vector::from_f64(&[2.0]), &w, 1.0).unwrap();
        for (t, x) in traj.times.iter().zip(&traj.states) {
            assert!((x[0] - 2.0 * (-t).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_forcing_closed_form() {
        let p = scalar_problem(|_| 1.0, 1.0);
        let traj = p.solve(&Vector::zeros(1)).unwrap();
        for (t, x) in traj.times.iter().zip(&traj.states) {
            assert!((x[0] - (1.0 - (-t).exp())).abs() < 1e-6);
        }
        assert!(traj.meta.iterations <= 3);
    }

    #[test]
    fn translate_at_zero_is_identity() {
        let p = scalar_problem(|t| (2.0 * PI * t).sin(), 0.5);
        let x = Vector::from_f64(&[0.7]);
        assert_eq!(p.translate(0.0, &x).unwrap(), x);
    }

    #[test]
    fn equilibrium_is_periodic_for_all_lambda() {
        for lambda in [0.1, 1.0, 3.0] {
            let p = scalar_problem(|_| 2.0, lambda);
            let fp = p.fixed_point(&Vector::zeros(1), FixedPointMethod::Newton, &FixedPointOptions::default()).unwrap();
            // the discrete period map is exact only up to the trapezoid error
            assert!((fp.x[0] - 2.0).abs() < 1e-6, "{lambda}: {:?}", fp.x);
        }
    }

    #[test]
    fn picard_fixed_point_of_linear_contraction() {
        let fam = GeneratorFamily::constant(Matrix::from_f64_rows(&[&[-1.0, 1.0], &[-1.0, -1.0]]).unwrap(), 1.0);
        let p = MildProblem::new(&fam, &NonlinearField::zero(2, 1.0), 1.0, 16, 64).unwrap();
        let fp = p
            .fixed_point(&Vector::from_f64(&[1.0, -1.0]), FixedPointMethod::Picard, &FixedPointOptions::default())
            .unwrap();
        assert!(fp.x.norm() < 1e-8);
    }

    #[test]
    fn divergence_is_reported() {
        let fam = GeneratorFamily::constant(Matrix::diag(&[0.0]), 1.0);
        let field = NonlinearField::new(1, 1.0, |_, x: &Vector<f64>| Vector::new(vec![x[0] * x[0]]));
        let p = MildProblem::new(&fam, &field, 1.0, 8, 64).unwrap();
        let err = p.solve(&Vector::from_f64(&[5.0])).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
    }

    #[test]
    fn degenerate_fixed_point_is_reported() {
        // u̇ = 1: Φ_T(x) = x + 1 and the Jacobian of Φ_T − I vanishes
        let fam = GeneratorFamily::constant(Matrix::diag(&[0.0]), 1.0);
        let field = NonlinearField::forcing(1, 1.0, |_| Vector::new(vec![1.0]));
        let p = MildProblem::new(&fam, &field, 1.0, 8, 64).unwrap();
        let opts = FixedPointOptions::default();
        let err = p.fixed_point(&Vector::from_f64(&[1.0]), FixedPointMethod::Newton, &opts).unwrap_err();
        assert!(matches!(err, Error::DegenerateFixedPoint(_)));
    }

    #[test]
    fn field_constants_are_checked() {
        let field = NonlinearField::new(1, 1.0, |t: f64, x: &Vector<f64>| {
            Vector::new(vec![2.0 * x[0].tanh() + (2.0 * PI * t).cos()])
        })
        .with_lipschitz(2.0)
        .with_growth(2.0)
        .periodic(true);
        let points: Vec<_> = (-5..=5).map(|i| Vector::new(vec![i as f64 * 0.7])).collect();
        let report = field.check_constants(&points, 8).unwrap();
        assert!(report.max_lipschitz_ratio <= 2.0);
        let tight = field.clone().with_lipschitz(1.0);
        assert!(tight.check_constants(&points, 8).is_err());
    }

    #[test]
    fn interpolation_between_nodes() {
        let p = scalar_problem(|_| 1.0, 1.0);
        let traj = p.solve(&Vector::zeros(1)).unwrap();
        let mid = traj.state_at(0.5 + 0.25 / 2048.0)[0];
        assert!((mid - (1.0 - (-0.5f64 - 0.25 / 2048.0).exp())).abs() < 1e-6);
    }
}
