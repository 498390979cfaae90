//! Contraction semigroups and Chernoff-type approximations.
//!
//! A [`ChernoffScheme`] is a contraction-valued family `L(λ, μ)` whose
//! difference quotient `λ⁻¹(L(λ, μ) − I)` tends to a generator `A(μ)`. Its
//! powers `L(λ_n, μ_n)^{k_n}` approach `exp(t A(μ₀))` and its scaled partial
//! sums approach `∫₀ᵗ exp(τ A(μ₀)) dτ` whenever `k_n λ_n → t`; the two
//! `chernoff_*_limit` functions tabulate those errors along a refinement
//! sequence.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linop::{mat_exp, operator_norm, resolvent, Matrix, Metric, Vector};
use crate::quad;
use crate::scalar::Real;

/// Slack allowed on `‖L(λ, μ)‖ ≤ 1`.
pub const CONTRACTION_SLACK: f64 = 1e-12;

/// Largest `ω` with `⟨x, Mx⟩_G ≤ −ω ⟨x, x⟩_G` for all `x`.
pub fn dissipativity_rate<S: Real>(m: &Matrix<S>, g: &Matrix<S>) -> Result<S> {
    if m.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: g.dim() });
    }
    let metric = Metric::new(g.clone())?;
    Ok(dissipativity_rate_in(m, &metric))
}

/// [`dissipativity_rate`] for an already factored metric.
pub fn dissipativity_rate_in<S: Real>(m: &Matrix<S>, metric: &Metric<S>) -> S {
    // ⟨x, Mx⟩_G = xᵀ (G M) x, whose symmetric part is ½(GM + MᵀG)
    let gm = metric.gram() * m;
    -metric.max_rayleigh(&gm)
}

/// A `C₀` semigroup `exp(t A)` claimed to contract at rate `omega` in a metric.
#[derive(Debug, Clone)]
pub struct ContractionSemigroup<S> {
    generator: Matrix<S>,
    omega: S,
    metric: Metric<S>,
}

impl<S: Real> ContractionSemigroup<S> {
    /// Validates the claimed decay rate against the exact dissipativity rate.
    pub fn new(generator: Matrix<S>, omega: S, metric: Option<Metric<S>>) -> Result<Self> {
        generator.ensure_finite()?;
        if omega < S::zero() {
            return Err(Error::InvalidInput("decay rate must be nonnegative".into()));
        }
        let metric = metric.unwrap_or_else(|| Metric::euclidean(generator.dim()));
        if metric.dim() != generator.dim() {
            return Err(Error::DimensionMismatch { expected: generator.dim(), found: metric.dim() });
        }
        let rate = dissipativity_rate_in(&generator, &metric);
        if rate < omega - S::lit(1e-10) {
            return Err(Error::Precondition(format!(
                "generator is dissipative only at rate {rate}, below the claimed {omega}"
            )));
        }
        Ok(ContractionSemigroup { generator, omega, metric })
    }

    pub fn generator(&self) -> &Matrix<S> {
        &self.generator
    }

    pub fn omega(&self) -> S {
        self.omega
    }

    pub fn metric(&self) -> &Metric<S> {
        &self.metric
    }

    pub fn at(&self, t: S) -> Result<Matrix<S>> {
        mat_exp(&self.generator, t)
    }

    /// `max_t ‖S(t)‖_G − e^{−ωt}` over the sampled times.
    pub fn bound_excess(&self, times: &[S]) -> Result<S> {
        let mut worst = S::neg_infinity();
        for &t in times {
            let norm = self.metric.operator_norm(&self.at(t)?);
            worst = worst.max(norm - (-self.omega * t).exp());
        }
        Ok(worst)
    }
}

/// Both sides of `‖e^{n(T−I)}x − Tⁿx‖ ≤ √n ‖x − Tx‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectBound<S> {
    pub lhs: S,
    pub rhs: S,
}

/// Evaluates the `√n` defect bound for a contraction `t_op`.
pub fn chernoff_defect<S: Real>(t_op: &Matrix<S>, x: &Vector<S>, n: usize) -> Result<DefectBound<S>> {
    if t_op.dim() != x.dim() {
        return Err(Error::DimensionMismatch { expected: t_op.dim(), found: x.dim() });
    }
    let norm = operator_norm(t_op);
    if norm > S::one() + S::lit(CONTRACTION_SLACK) {
        return Err(Error::Precondition(format!("operator norm {norm} exceeds 1")));
    }
    let nn = S::from_usize_lossy(n);
    let shifted = &(t_op - &Matrix::identity(t_op.dim())).scale(nn);
    let exp_part = mat_exp(shifted, S::one())?.mul_vec(x);
    let mut power = x.clone();
    for _ in 0..n {
        power = t_op.mul_vec(&power);
    }
    let lhs = (&exp_part - &power).norm();
    let rhs = nn.sqrt() * (x - &t_op.mul_vec(x)).norm();
    Ok(DefectBound { lhs, rhs })
}

type StepFn<S> = Arc<dyn Fn(S, S) -> Result<Matrix<S>> + Send + Sync>;
type GeneratorFn<S> = Arc<dyn Fn(S) -> Matrix<S> + Send + Sync>;

/// A contraction-valued approximation scheme `L(λ, μ)` with its limit generators `A(μ)`.
#[derive(Clone)]
pub struct ChernoffScheme<S> {
    dim: usize,
    step: StepFn<S>,
    limit: GeneratorFn<S>,
}

impl<S> std::fmt::Debug for ChernoffScheme<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChernoffScheme").field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl<S: Real> ChernoffScheme<S> {
    pub fn new(
        dim: usize,
        step: impl Fn(S, S) -> Result<Matrix<S>> + Send + Sync + 'static,
        limit: impl Fn(S) -> Matrix<S> + Send + Sync + 'static,
    ) -> Self {
        ChernoffScheme { dim, step: Arc::new(step), limit: Arc::new(limit) }
    }

    /// Backward-Euler scheme `L(λ, μ) = (I − λA(μ))⁻¹`.
    pub fn resolvent(dim: usize, generator: impl Fn(S) -> Matrix<S> + Send + Sync + 'static) -> Self {
        let generator: GeneratorFn<S> = Arc::new(generator);
        let g = generator.clone();
        let step = move |lambda: S, mu: S| {
            // (I − λA)⁻¹ = λ⁻¹ (λ⁻¹ I − A)⁻¹
            Ok(resolvent(&g(mu), S::one() / lambda)?.scale(S::one() / lambda))
        };
        ChernoffScheme { dim, step: Arc::new(step), limit: generator }
    }

    /// The exact scheme `L(λ, μ) = exp(λA(μ))`.
    pub fn exponential(dim: usize, generator: impl Fn(S) -> Matrix<S> + Send + Sync + 'static) -> Self {
        let generator: GeneratorFn<S> = Arc::new(generator);
        let g = generator.clone();
        let step = move |lambda: S, mu: S| mat_exp(&g(mu), lambda);
        ChernoffScheme { dim, step: Arc::new(step), limit: generator }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn step(&self, lambda: S, mu: S) -> Result<Matrix<S>> {
        if !(lambda > S::zero()) {
            return Err(Error::InvalidInput("step parameter λ must be positive".into()));
        }
        (self.step)(lambda, mu)
    }

    pub fn limit_generator(&self, mu: S) -> Matrix<S> {
        (self.limit)(mu)
    }

    /// Largest `‖L(λ, μ)‖` over the sampled parameters.
    pub fn max_step_norm(&self, lambdas: &[S], mus: &[S]) -> Result<S> {
        let mut worst = S::zero();
        for &l in lambdas {
            for &m in mus {
                worst = worst.max(operator_norm(&self.step(l, m)?));
            }
        }
        Ok(worst)
    }

    /// `max_i ‖λ⁻¹(L(λ, μ)eᵢ − eᵢ) − A(μ₀)eᵢ‖` over the basis vectors.
    pub fn consistency_gap(&self, lambda: S, mu: S, mu0: S) -> Result<S> {
        let l = self.step(lambda, mu)?;
        let a = self.limit_generator(mu0);
        let quotient = (&l - &Matrix::identity(self.dim)).scale(S::one() / lambda);
        let diff = &quotient - &a;
        Ok((0..self.dim).map(|j| diff.column(j).norm()).fold(S::zero(), S::max))
    }

    fn checked_step(&self, lambda: S, mu: S) -> Result<Matrix<S>> {
        let l = self.step(lambda, mu)?;
        let norm = operator_norm(&l);
        if norm > S::one() + S::lit(CONTRACTION_SLACK) {
            return Err(Error::Precondition(format!(
                "scheme is not a contraction at λ = {lambda}, μ = {mu}: ‖L‖ = {norm}"
            )));
        }
        Ok(l)
    }
}

/// How `(k_n, λ_n)` are generated from the refinement index `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequencePreset {
    /// `k_n = n`, `λ_n = t / n`.
    Uniform,
    /// `λ_n = 1 / n`, `k_n = ⌈t / λ_n⌉`.
    CeilStep,
}

/// A refinement sequence `(k_n, λ_n, μ_n)` with `k_n λ_n → t` and `μ_n → μ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChernoffSequence<S> {
    pub preset: SequencePreset,
    pub t: S,
    pub mu0: S,
    /// `μ_n = clamp(μ₀ + mu_offset / n, 0, 1)`.
    pub mu_offset: S,
    pub ns: Vec<usize>,
}

/// One term of a [`ChernoffSequence`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceTerm<S> {
    pub n: usize,
    pub k: usize,
    pub lambda: S,
    pub mu: S,
}

impl<S: Real> ChernoffSequence<S> {
    /// `n = n_min, 2 n_min, …, ≤ n_max`.
    pub fn doubling(preset: SequencePreset, t: S, mu0: S, n_min: usize, n_max: usize) -> Self {
        let mut ns = Vec::new();
        let mut n = n_min.max(1);
        while n <= n_max {
            ns.push(n);
            n *= 2;
        }
        ChernoffSequence { preset, t, mu0, mu_offset: S::zero(), ns }
    }

    pub fn with_mu_offset(mut self, offset: S) -> Self {
        self.mu_offset = offset;
        self
    }

    pub fn term(&self, n: usize) -> SequenceTerm<S> {
        let nn = S::from_usize_lossy(n.max(1));
        let (k, lambda) = match self.preset {
            SequencePreset::Uniform => (n, self.t / nn),
            SequencePreset::CeilStep => {
                let lambda = S::one() / nn;
                let k = (self.t / lambda).ceil().to_usize().unwrap_or(0);
                (k, lambda)
            }
        };
        let mu = (self.mu0 + self.mu_offset / nn).max(S::zero()).min(S::one());
        SequenceTerm { n, k, lambda, mu }
    }

    pub fn terms(&self) -> impl Iterator<Item = SequenceTerm<S>> + '_ {
        self.ns.iter().map(|&n| self.term(n))
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow<S> {
    pub term: SequenceTerm<S>,
    pub error: S,
}

/// Errors along a refinement sequence with the trend-based convergence verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable<S> {
    pub rows: Vec<ConvergenceRow<S>>,
    /// Last error below [`CONVERGENCE_TOL`] and the last three errors nonincreasing.
    pub converged: bool,
    /// `log(e_{n−1}/e_n) / log(n/n_{−1})` from the last two rows, when measurable.
    pub observed_rate: Option<S>,
}

/// Final-error threshold for declaring convergence.
pub const CONVERGENCE_TOL: f64 = 1e-3;

impl<S: Real> ConvergenceTable<S> {
    fn from_rows(rows: Vec<ConvergenceRow<S>>, scale: S) -> Self {
        let errors: Vec<S> = rows.iter().map(|r| r.error).collect();
        let slack = S::lit(1e-13) * (S::one() + scale);
        let last = errors.last().copied();
        let tail_ok = errors.len() >= 3
            && errors[errors.len() - 3..].windows(2).all(|w| w[1] <= w[0] + slack);
        let converged = tail_ok && last.is_some_and(|e| e < S::lit(CONVERGENCE_TOL));
        let observed_rate = match rows.as_slice() {
            [.., a, b] if a.error > slack && b.error > slack => {
                let ratio = S::from_usize_lossy(b.term.n) / S::from_usize_lossy(a.term.n);
                Some((a.error / b.error).ln() / ratio.ln())
            }
            _ => None,
        };
        ConvergenceTable { rows, converged, observed_rate }
    }

    pub fn final_error(&self) -> Option<S> {
        self.rows.last().map(|r| r.error)
    }
}

fn check_scheme_input<S: Real>(scheme: &ChernoffScheme<S>, x: &Vector<S>) -> Result<()> {
    if scheme.dim() != x.dim() {
        return Err(Error::DimensionMismatch { expected: scheme.dim(), found: x.dim() });
    }
    Ok(())
}

/// Tabulates `‖L(λ_n, μ_n)^{k_n} x − exp(t A(μ₀)) x‖`.
pub fn chernoff_power_limit<S: Real>(
    scheme: &ChernoffScheme<S>,
    seq: &ChernoffSequence<S>,
    x: &Vector<S>,
) -> Result<ConvergenceTable<S>> {
    check_scheme_input(scheme, x)?;
    let target = mat_exp(&scheme.limit_generator(seq.mu0), seq.t)?.mul_vec(x);
    let mut rows = Vec::with_capacity(seq.ns.len());
    for term in seq.terms() {
        let l = scheme.checked_step(term.lambda, term.mu)?;
        let mut y = x.clone();
        for _ in 0..term.k {
            y = l.mul_vec(&y);
        }
        rows.push(ConvergenceRow { term, error: (&y - &target).norm() });
    }
    Ok(ConvergenceTable::from_rows(rows, x.norm()))
}

/// `∫₀ᵗ exp(τA) x dτ` by refined Simpson quadrature.
pub fn semigroup_integral<S: Real>(a: &Matrix<S>, x: &Vector<S>, t: S, tol: S) -> Result<Vector<S>> {
    let eval = |tau: S| match mat_exp(a, tau) {
        Ok(e) => e.mul_vec(x).into_inner(),
        Err(_) => vec![S::nan(); x.dim()],
    };
    let q = quad::simpson(eval, S::zero(), t, tol)?;
    let v = Vector::new(q.value);
    if !v.is_finite() {
        return Err(Error::InvalidInput("semigroup integral is not finite".into()));
    }
    Ok(v)
}

/// Tabulates `‖λ_n Σ_{j<k_n} L(λ_n, μ_n)^j x − ∫₀ᵗ exp(τ A(μ₀)) x dτ‖`.
pub fn chernoff_sum_limit<S: Real>(
    scheme: &ChernoffScheme<S>,
    seq: &ChernoffSequence<S>,
    x: &Vector<S>,
) -> Result<ConvergenceTable<S>> {
    check_scheme_input(scheme, x)?;
    let target = semigroup_integral(&scheme.limit_generator(seq.mu0), x, seq.t, S::lit(1e-12))?;
    let mut rows = Vec::with_capacity(seq.ns.len());
    for term in seq.terms() {
        let l = scheme.checked_step(term.lambda, term.mu)?;
        let mut power = x.clone();
        let mut acc = Vector::zeros(x.dim());
        for _ in 0..term.k {
            acc += &power;
            power = l.mul_vec(&power);
        }
        let approx = acc.scale(term.lambda);
        rows.push(ConvergenceRow { term, error: (&approx - &target).norm() });
    }
    Ok(ConvergenceTable::from_rows(rows, x.norm()))
}
