//! Evolution systems of time-dependent generator families.
//!
//! [`build_evolution`] realizes the frozen-coefficient product
//!
//! ```text
//! R_n(t, s) = S_k(t − t_k) · S_{k−1}(T/n) ⋯ S_{l+1}(T/n) · S_l(t_{l+1} − s)
//! ```
//!
//! with `t_j = jT/n`, `S_j(τ) = exp(τ A(t_j))`, `s ∈ [t_l, t_{l+1}]` and
//! `t ∈ [t_k, t_{k+1}]`; when `s` and `t` share a subinterval it reduces to
//! `S_l(t − s)`. Products are composed right to left, so the factor for the
//! earliest subinterval acts first.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linop::{mat_exp, operator_norm, Matrix, Metric, Vector, DIM_CAP};
use crate::scalar::Real;
use crate::semigroup::dissipativity_rate_in;

/// Largest subdivision count accepted by [`build_evolution`].
pub const MAX_SUBDIVISIONS: usize = 1 << 14;

/// Snap distance, in units of the step size, for recognizing grid nodes.
const NODE_SNAP: f64 = 1e-9;

type FamilyFn<S> = Arc<dyn Fn(S) -> Matrix<S> + Send + Sync>;

/// A continuous family `t ↦ A(t)` on `[0, T]` with its stability data.
#[derive(Clone)]
pub struct GeneratorFamily<S> {
    dim: usize,
    a: FamilyFn<S>,
    period: S,
    omega: S,
    metric: Metric<S>,
    periodic: bool,
    differentiable: bool,
}

impl<S: std::fmt::Debug> std::fmt::Debug for GeneratorFamily<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GeneratorFamily")
            .field("dim", &self.dim)
            .field("period", &self.period)
            .field("omega", &self.omega)
            .field("periodic", &self.periodic)
            .finish_non_exhaustive()
    }
}

/// What [`GeneratorFamily::validate`] measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyReport<S> {
    /// Smallest dissipativity rate over the sampled times.
    pub min_rate: S,
    /// `‖A(0) − A(T)‖`.
    pub periodicity_gap: S,
    /// Largest sampled `‖A(t) − A(t′)‖ / |t − t′|` between neighbouring samples.
    pub continuity_modulus: S,
}

impl<S: Real> GeneratorFamily<S> {
    /// A family with decay rate 0, Euclidean metric and no periodicity claim.
    pub fn new(dim: usize, period: S, a: impl Fn(S) -> Matrix<S> + Send + Sync + 'static) -> Self {
        GeneratorFamily {
            dim,
            a: Arc::new(a),
            period,
            omega: S::zero(),
            metric: Metric::euclidean(dim),
            periodic: false,
            differentiable: false,
        }
    }

    /// `A(t) ≡ m`; periodic and smooth.
    pub fn constant(m: Matrix<S>, period: S) -> Self {
        let dim = m.dim();
        Self::new(dim, period, move |_| m.clone()).periodic(true).differentiable(true)
    }

    pub fn with_omega(mut self, omega: S) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_metric(mut self, metric: Metric<S>) -> Self {
        self.metric = metric;
        self
    }

    pub fn periodic(mut self, periodic: bool) -> Self {
        self.periodic = periodic;
        self
    }

    pub fn differentiable(mut self, differentiable: bool) -> Self {
        self.differentiable = differentiable;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> S {
        self.period
    }

    pub fn omega(&self) -> S {
        self.omega
    }

    pub fn metric(&self) -> &Metric<S> {
        &self.metric
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn is_differentiable(&self) -> bool {
        self.differentiable
    }

    pub fn eval(&self, t: S) -> Matrix<S> {
        (self.a)(t)
    }

    /// The family `t ↦ λ A(t)` with decay rate `λ ω`.
    pub fn scaled(&self, lambda: S) -> Self {
        let a = self.a.clone();
        GeneratorFamily {
            a: Arc::new(move |t| a(t).scale(lambda)),
            omega: self.omega * lambda,
            ..self.clone()
        }
    }

    /// `t ↦ A(t) + B(t)`; the decay rate is reset to `omega`.
    pub fn perturbed(&self, b: impl Fn(S) -> Matrix<S> + Send + Sync + 'static, omega: S) -> Self {
        let a = self.a.clone();
        GeneratorFamily { a: Arc::new(move |t| &a(t) + &b(t)), omega, ..self.clone() }
    }

    /// Checks dimensions, finiteness, the periodicity claim and the claimed
    /// decay rate on `samples + 1` equispaced times.
    pub fn validate(&self, samples: usize) -> Result<FamilyReport<S>> {
        if self.dim == 0 || self.dim > DIM_CAP {
            return Err(Error::DimensionCap { dim: self.dim, cap: DIM_CAP });
        }
        if !(self.period > S::zero()) || !self.period.is_finite() {
            return Err(Error::InvalidFamily("period must be positive and finite".into()));
        }
        if self.metric.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: self.metric.dim() });
        }
        let samples = samples.max(1);
        let h = self.period / S::from_usize_lossy(samples);
        let mut min_rate = S::infinity();
        let mut modulus = S::zero();
        let mut prev: Option<Matrix<S>> = None;
        for i in 0..=samples {
            let t = h * S::from_usize_lossy(i);
            let a = self.eval(t);
            if a.dim() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, found: a.dim() });
            }
            if !a.is_finite() {
                return Err(Error::InvalidFamily(format!("A({t}) has non-finite entries")));
            }
            min_rate = min_rate.min(dissipativity_rate_in(&a, &self.metric));
            if let Some(p) = &prev {
                modulus = modulus.max(operator_norm(&(&a - p)) / h);
            }
            prev = Some(a);
        }
        let periodicity_gap = operator_norm(&(&self.eval(S::zero()) - &self.eval(self.period)));
        if self.periodic && periodicity_gap > S::lit(1e-12) {
            return Err(Error::InvalidFamily(format!("A(0) and A(T) differ by {periodicity_gap}")));
        }
        if min_rate < self.omega - S::lit(1e-12) {
            return Err(Error::InvalidFamily(format!(
                "dissipativity rate {min_rate} falls below the claimed {}",
                self.omega
            )));
        }
        Ok(FamilyReport { min_rate, periodicity_gap, continuity_modulus: modulus })
    }
}

/// The frozen-coefficient evolution system `R_n(t, s)` of a generator family.
#[derive(Debug, Clone)]
pub struct EvolutionSystem<S> {
    family: GeneratorFamily<S>,
    n: usize,
    h: S,
    frozen: Vec<Matrix<S>>,
    steps: Vec<Matrix<S>>,
    prefix: Vec<Matrix<S>>,
}

/// Builds `R_n` on `n` equal subintervals of `[0, T]`.
pub fn build_evolution<S: Real>(family: &GeneratorFamily<S>, n: usize) -> Result<EvolutionSystem<S>> {
    if n == 0 {
        return Err(Error::InvalidInput("subdivision count must be at least 1".into()));
    }
    if n > MAX_SUBDIVISIONS {
        return Err(Error::ResourceGuard(format!("{n} subdivisions exceed the cap of {MAX_SUBDIVISIONS}")));
    }
    if !(family.period > S::zero()) {
        return Err(Error::InvalidFamily("period must be positive".into()));
    }
    let h = family.period / S::from_usize_lossy(n);
    let mut frozen = Vec::with_capacity(n);
    let mut steps = Vec::with_capacity(n);
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(Matrix::identity(family.dim));
    for j in 0..n {
        let a = family.eval(h * S::from_usize_lossy(j));
        if a.dim() != family.dim {
            return Err(Error::DimensionMismatch { expected: family.dim, found: a.dim() });
        }
        let step = mat_exp(&a, h)?;
        prefix.push(&step * &prefix[j]);
        frozen.push(a);
        steps.push(step);
    }
    Ok(EvolutionSystem { family: family.clone(), n, h, frozen, steps, prefix })
}

/// Position of a time on the subdivision: subinterval index and offset into it.
#[derive(Debug, Clone, Copy)]
struct Loc<S> {
    interval: usize,
    offset: S,
}

impl<S: Real> EvolutionSystem<S> {
    pub fn family(&self) -> &GeneratorFamily<S> {
        &self.family
    }

    pub fn subdivisions(&self) -> usize {
        self.n
    }

    pub fn step_size(&self) -> S {
        self.h
    }

    pub fn period(&self) -> S {
        self.family.period
    }

    pub fn dim(&self) -> usize {
        self.family.dim
    }

    /// Grid node `t_j = jT/n`.
    pub fn node(&self, j: usize) -> S {
        self.h * S::from_usize_lossy(j)
    }

    /// The cached full step `S_j(T/n)`.
    pub fn step(&self, j: usize) -> &Matrix<S> {
        &self.steps[j]
    }

    /// The frozen generator `A(t_j)`.
    pub fn frozen_generator(&self, j: usize) -> &Matrix<S> {
        &self.frozen[j]
    }

    fn locate(&self, t: S) -> Loc<S> {
        let x = t / self.h;
        let r = x.round();
        let node = (x - r).abs() < S::lit(NODE_SNAP);
        let base = if node { r } else { x.floor() };
        let idx = base.to_usize().unwrap_or(0);
        if idx >= self.n {
            return Loc { interval: self.n - 1, offset: if node { self.h } else { t - self.node(self.n - 1) } };
        }
        let offset = if node { S::zero() } else { t - self.node(idx) };
        Loc { interval: idx, offset }
    }

    fn check_times(&self, t: S, s: S) -> Result<()> {
        let eps = S::lit(NODE_SNAP) * self.h;
        if !t.is_finite() || !s.is_finite() || s < -eps || t > self.family.period + eps {
            return Err(Error::InvalidInput(format!("times ({t}, {s}) outside [0, T]")));
        }
        if t < s - eps {
            return Err(Error::Ordering { t: t.to_f64_lossy(), s: s.to_f64_lossy() });
        }
        Ok(())
    }

    /// Factors of `R_n(t, s)` in application order (first factor acts first).
    fn factors(&self, t: S, s: S) -> Result<Vec<Factor<'_, S>>> {
        self.check_times(t, s)?;
        let ls = self.locate(s);
        let lt = self.locate(t);
        let mut out = Vec::new();
        if lt.interval == ls.interval {
            let tau = (lt.offset - ls.offset).max(S::zero());
            if ls.offset == S::zero() && lt.offset == self.h {
                out.push(Factor::Cached(&self.steps[ls.interval]));
            } else if tau > S::zero() {
                out.push(Factor::Owned(mat_exp(&self.frozen[ls.interval], tau)?));
            }
            return Ok(out);
        }
        if lt.interval < ls.interval {
            // both times snapped onto the same node from different sides
            return Ok(out);
        }
        if ls.offset == S::zero() {
            out.push(Factor::Cached(&self.steps[ls.interval]));
        } else {
            let tau = (self.h - ls.offset).max(S::zero());
            out.push(Factor::Owned(mat_exp(&self.frozen[ls.interval], tau)?));
        }
        for j in ls.interval + 1..lt.interval {
            out.push(Factor::Cached(&self.steps[j]));
        }
        if lt.offset > S::zero() {
            if lt.offset == self.h {
                out.push(Factor::Cached(&self.steps[lt.interval]));
            } else {
                out.push(Factor::Owned(mat_exp(&self.frozen[lt.interval], lt.offset)?));
            }
        }
        Ok(out)
    }

    /// The operator `R_n(t, s)` for `0 ≤ s ≤ t ≤ T`.
    pub fn operator(&self, t: S, s: S) -> Result<Matrix<S>> {
        self.check_times(t, s)?;
        let ls = self.locate(s);
        let lt = self.locate(t);
        // from the start node onto a node: cached prefix product
        if s <= S::lit(NODE_SNAP) * self.h && ls.offset == S::zero() && ls.interval == 0 {
            let k = if lt.offset == S::zero() {
                Some(lt.interval)
            } else if lt.offset == self.h {
                Some(lt.interval + 1)
            } else {
                None
            };
            if let Some(k) = k {
                return Ok(self.prefix[k].clone());
            }
        }
        let mut out = Matrix::identity(self.dim());
        for f in self.factors(t, s)? {
            out = f.matrix() * &out;
        }
        Ok(out)
    }

    /// `R_n(t, s) x`, applying the factors directly to the vector.
    pub fn apply(&self, t: S, s: S, x: &Vector<S>) -> Result<Vector<S>> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.dim() });
        }
        let mut y = x.clone();
        for f in self.factors(t, s)? {
            y = f.matrix().mul_vec(&y);
        }
        Ok(y)
    }

    /// `‖R(t, s) − R(t, r) R(r, s)‖` for `s ≤ r ≤ t`.
    pub fn cocycle_defect(&self, t: S, r: S, s: S) -> Result<S> {
        self.check_times(r, s)?;
        self.check_times(t, r)?;
        let direct = self.operator(t, s)?;
        let composed = &self.operator(t, r)? * &self.operator(r, s)?;
        Ok(operator_norm(&(&direct - &composed)))
    }

    /// `max ‖R(t, s)‖_G e^{ω(t−s)} − 1` over the sampled pairs, in the family's metric.
    pub fn contraction_check(&self, omega: S, samples: &[(S, S)]) -> Result<S> {
        let mut worst = S::neg_infinity();
        for &(t, s) in samples {
            let norm = self.family.metric.operator_norm(&self.operator(t, s)?);
            worst = worst.max(norm * (omega * (t - s)).exp() - S::one());
        }
        Ok(worst)
    }

    /// Transfer operators `R_n(τ_{i+1}, τ_i)` of the uniform grid with `m`
    /// intervals on `[t0, t1]`.
    pub fn transfers(&self, t0: S, t1: S, m: usize) -> Result<Vec<Matrix<S>>> {
        if m == 0 {
            return Err(Error::InvalidInput("grid must have at least one interval".into()));
        }
        let dt = (t1 - t0) / S::from_usize_lossy(m);
        (0..m)
            .map(|i| {
                let a = t0 + dt * S::from_usize_lossy(i);
                let b = if i + 1 == m { t1 } else { t0 + dt * S::from_usize_lossy(i + 1) };
                self.operator(b, a)
            })
            .collect()
    }
}

enum Factor<'a, S> {
    Cached(&'a Matrix<S>),
    Owned(Matrix<S>),
}

impl<S> Factor<'_, S> {
    fn matrix(&self) -> &Matrix<S> {
        match self {
            Factor::Cached(m) => m,
            Factor::Owned(m) => m,
        }
    }
}

/// Convenience wrapper for `R_n(t, s) x`.
pub fn evolution_apply<S: Real>(r: &EvolutionSystem<S>, t: S, s: S, x: &Vector<S>) -> Result<Vector<S>> {
    r.apply(t, s, x)
}

/// Both sides of the parameter-continuity estimate
/// `‖R₁(t, s)v − R₂(t, s)v‖ ≤ ‖v‖_V ∫₀ᵀ ‖A₁(r) − A₂(r)‖_{L(V,E)} dr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityGap<S> {
    pub lhs: S,
    pub rhs: S,
}

/// Number of checkpoint intervals used for the `lhs` maximum.
const CONTINUITY_CHECKPOINTS: usize = 32;

/// Compares the evolution systems of two families against the integrated
/// generator gap, with `‖v‖_V = ‖A₁(0)v‖ + ‖v‖` and all norms taken in the
/// first family's metric.
///
/// `lhs` is maximized over pairs of checkpoint nodes (every `n/32`-th grid
/// node); the integral is the left Riemann sum over the frozen nodes, which is
/// exact for the frozen-coefficient generators.
pub fn family_continuity_gap<S: Real>(
    f1: &GeneratorFamily<S>,
    f2: &GeneratorFamily<S>,
    n: usize,
    v: &Vector<S>,
) -> Result<ContinuityGap<S>> {
    if f1.dim() != f2.dim() {
        return Err(Error::DimensionMismatch { expected: f1.dim(), found: f2.dim() });
    }
    if v.dim() != f1.dim() {
        return Err(Error::DimensionMismatch { expected: f1.dim(), found: v.dim() });
    }
    if (f1.period() - f2.period()).abs() > S::lit(1e-12) * f1.period() {
        return Err(Error::InvalidInput("families have different periods".into()));
    }
    let r1 = build_evolution(f1, n)?;
    let r2 = build_evolution(f2, n)?;
    let metric = f1.metric();
    let stride = (n / CONTINUITY_CHECKPOINTS).max(1);

    let mut lhs = S::zero();
    for l in (0..n).step_by(stride) {
        let mut y1 = v.clone();
        let mut y2 = v.clone();
        for k in l..n {
            y1 = r1.step(k).mul_vec(&y1);
            y2 = r2.step(k).mul_vec(&y2);
            if (k + 1 - l) % stride == 0 || k + 1 == n {
                lhs = lhs.max(metric.norm(&(&y1 - &y2)));
            }
        }
    }

    let a0 = metric.congruent(&f1.eval(S::zero()));
    let v_norm = a0.mul_vec(&metric.whiten(v)).norm() + metric.norm(v);
    // ‖B‖_{L(V,E)} ≤ sup ‖Bx‖ / sqrt(‖A₀x‖² + ‖x‖²), a generalized eigenvalue
    let v_gram = &(&a0.transpose() * &a0) + &Matrix::identity(f1.dim());
    let v_metric = Metric::new(v_gram)?;
    let mut integral = S::zero();
    for j in 0..n {
        let diff = metric.congruent(&(r1.frozen_generator(j) - r2.frozen_generator(j)));
        let gram = &diff.transpose() * &diff;
        integral = integral + v_metric.max_rayleigh(&gram).max(S::zero()).sqrt() * r1.step_size();
    }
    Ok(ContinuityGap { lhs, rhs: v_norm * integral })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn scalar_family() -> GeneratorFamily<f64> {
        GeneratorFamily::new(1, 1.0, |t: f64| Matrix::diag(&[-(2.0 + (2.0 * PI * t).sin())]))
            .with_omega(1.0)
            .periodic(true)
    }

    #[test]
    fn constant_family_collapses_to_exponential() {
        let m = Matrix::from_f64_rows(&[&[-1.0, 2.0], &[-0.5, -0.3]]).unwrap();
        let fam = GeneratorFamily::constant(m.clone(), 2.0);
        for n in [1, 3, 16] {
            let r = build_evolution(&fam, n).unwrap();
            for (t, s) in [(2.0, 0.0), (1.3, 0.2), (0.7, 0.7), (1.0, 0.5)] {
                let exact = mat_exp(&m, t - s).unwrap();
                assert!((&r.operator(t, s).unwrap() - &exact).max_abs() < 1e-13);
            }
        }
    }

    #[test]
    fn identity_on_the_diagonal() {
        let r = build_evolution(&scalar_family(), 8).unwrap();
        let x = Vector::from_f64(&[3.0]);
        for t in [0.0, 0.125, 0.3, 1.0] {
            assert_eq!(r.apply(t, t, &x).unwrap(), x);
            assert_eq!(r.operator(t, t).unwrap(), Matrix::identity(1));
        }
    }

    #[test]
    fn scalar_family_matches_closed_form() {
        let r = build_evolution(&scalar_family(), 1024).unwrap();
        let exact = |t: f64, s: f64| {
            let integral = 2.0 * (t - s) - ((2.0 * PI * t).cos() - (2.0 * PI * s).cos()) / (2.0 * PI);
            (-integral).exp()
        };
        for (t, s) in [(1.0, 0.0), (0.8, 0.1), (0.55, 0.45)] {
            let got = r.operator(t, s).unwrap()[(0, 0)];
            assert!((got - exact(t, s)).abs() < 1e-3, "{t} {s}: {got}");
        }
    }

    #[test]
    fn ordering_and_range_errors() {
        let r = build_evolution(&scalar_family(), 4).unwrap();
        assert!(matches!(r.operator(0.2, 0.5), Err(Error::Ordering { .. })));
        assert!(matches!(r.cocycle_defect(0.5, 0.6, 0.1), Err(Error::Ordering { .. })));
        assert!(matches!(r.operator(1.5, 0.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn subdivision_guard() {
        assert!(matches!(build_evolution(&scalar_family(), MAX_SUBDIVISIONS + 1), Err(Error::ResourceGuard(_))));
        assert!(build_evolution(&scalar_family(), 0).is_err());
    }

    #[test]
    fn grid_cocycle_is_exact() {
        let r = build_evolution(&scalar_family(), 64).unwrap();
        let h = r.step_size();
        for (a, b, c) in [(64, 30, 0), (40, 40, 10), (17, 3, 2)] {
            let d = r.cocycle_defect(h * a as f64, h * b as f64, h * c as f64).unwrap();
            assert!(d <= 1e-12, "{d}");
        }
    }

    #[test]
    fn validate_catches_bad_claims() {
        assert!(scalar_family().validate(64).is_ok());
        let overclaimed = scalar_family().with_omega(1.5);
        assert!(matches!(overclaimed.validate(64), Err(Error::InvalidFamily(_))));
        let aperiodic = GeneratorFamily::new(1, 1.0, |t: f64| Matrix::diag(&[-1.0 - t])).periodic(true);
        assert!(matches!(aperiodic.validate(16), Err(Error::InvalidFamily(_))));
    }

    #[test]
    fn contraction_check_detects_violation() {
        let fam = GeneratorFamily::constant(Matrix::scalar(2, -1.0), 1.0).with_omega(1.0);
        let r = build_evolution(&fam, 8).unwrap();
        let samples = [(1.0, 0.0), (0.5, 0.25), (0.9, 0.1)];
        assert!(r.contraction_check(1.0, &samples).unwrap() <= 1e-12);
        assert!(r.contraction_check(1.2, &samples).unwrap() > 0.1);
    }

    #[test]
    fn continuity_gap_for_identical_families() {
        let fam = scalar_family();
        let gap = family_continuity_gap(&fam, &fam, 64, &Vector::from_f64(&[1.0])).unwrap();
        assert!(gap.lhs <= 1e-12);
        assert_eq!(gap.rhs, 0.0);
        let other = GeneratorFamily::constant(Matrix::scalar(2, -1.0), 1.0);
        assert!(family_continuity_gap(&fam, &other, 8, &Vector::from_f64(&[1.0])).is_err());
    }
}
