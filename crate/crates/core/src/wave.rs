//! Spectral Galerkin model of the damped wave equation
//! `u_tt + β(t)u_t + Au + f(t, u) = 0` on an interval with Dirichlet ends.
//!
//! The state is `z = (a, b)` with `u = Σ aᵢφᵢ`, `v = u_t = Σ bᵢφᵢ` in the
//! orthonormal sine basis `φᵢ(x) = √(2/ℓ) sin(iπx/ℓ)`. The linear part is the
//! block generator `[[0, I], [−Λ, −β(t)I]]` and the state space carries the
//! η-inner product `Σ λᵢ a₁ᵢa₂ᵢ + Σ (b₁ᵢ + ηa₁ᵢ)(b₂ᵢ + ηa₂ᵢ)`.

use std::sync::Arc;

use crate::averaging::{monodromy, MonodromyReport, PeriodMapOptions};
use crate::error::{Error, Result};
use crate::evolsys::{build_evolution, GeneratorFamily};
use crate::linop::{symmetric_eigen, Matrix, Metric, Vector};
use crate::mild::{FixedPointMethod, FixedPointOptions, MildProblem, NonlinearField, Trajectory};
use crate::scalar::Real;
use crate::semigroup::dissipativity_rate_in;

/// Largest supported mode count.
pub const MAX_MODES: usize = 64;
/// `f_∞` this close to `−λᵢ` counts as resonant.
pub const RESONANCE_GAP: f64 = 1e-6;
/// Time samples used for `β₀`, `γ` and the numeric decay rate.
pub const RATE_SAMPLES: usize = 4096;
/// Required closure `‖z(0) − z(T)‖_η` of a periodic wave.
pub const PERIODIC_RESIDUAL: f64 = 1e-6;

type ScalarFn<S> = Arc<dyn Fn(S) -> S + Send + Sync>;
type NonlinFn<S> = Arc<dyn Fn(S, S) -> S + Send + Sync>;

/// Inputs of [`build_wave_model`].
#[derive(Clone)]
pub struct WaveParams<S> {
    pub ell: S,
    pub k: usize,
    pub period: S,
    /// Overrides the Dirichlet eigenvalues `(iπ/ℓ)²`.
    pub eigs: Option<Vec<S>>,
    beta: ScalarFn<S>,
    f: NonlinFn<S>,
    pub f_inf: S,
    /// Claimed Lipschitz constant of `f` in `s`; zero means "estimate".
    pub lipschitz: S,
    /// Claimed growth constant `|f(t, s)| ≤ c(1 + |s|)`; zero means "estimate".
    pub growth: S,
    /// Fixed `η`; `None` selects it by [`select_eta`].
    pub eta: Option<S>,
}

impl<S: std::fmt::Debug> std::fmt::Debug for WaveParams<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WaveParams")
            .field("ell", &self.ell)
            .field("k", &self.k)
            .field("period", &self.period)
            .field("f_inf", &self.f_inf)
            .field("eta", &self.eta)
            .finish_non_exhaustive()
    }
}

impl<S: Real> WaveParams<S> {
    /// `β ≡ 1`, `f ≡ 0`.
    pub fn new(ell: S, k: usize, period: S) -> Self {
        WaveParams {
            ell,
            k,
            period,
            eigs: None,
            beta: Arc::new(|_| S::one()),
            f: Arc::new(|_, _| S::zero()),
            f_inf: S::zero(),
            lipschitz: S::zero(),
            growth: S::zero(),
            eta: None,
        }
    }

    pub fn with_beta(mut self, beta: impl Fn(S) -> S + Send + Sync + 'static) -> Self {
        self.beta = Arc::new(beta);
        self
    }

    /// Nonlinearity with asymptotic slope `f_inf`.
    pub fn with_nonlinearity(mut self, f: impl Fn(S, S) -> S + Send + Sync + 'static, f_inf: S) -> Self {
        self.f = Arc::new(f);
        self.f_inf = f_inf;
        self
    }

    pub fn with_constants(mut self, lipschitz: S, growth: S) -> Self {
        self.lipschitz = lipschitz;
        self.growth = growth;
        self
    }

    pub fn with_eigenvalues(mut self, eigs: Vec<S>) -> Self {
        self.eigs = Some(eigs);
        self
    }

    pub fn with_eta(mut self, eta: S) -> Self {
        self.eta = Some(eta);
        self
    }
}

/// Gram matrix of the η-inner product with its equivalence constants to the
/// Euclidean norm: `lower |z|² ≤ ‖z‖²_η ≤ upper |z|²`.
#[derive(Debug, Clone)]
pub struct EtaMetric<S> {
    pub eta: S,
    pub metric: Metric<S>,
    pub lower: S,
    pub upper: S,
}

impl<S: Real> EtaMetric<S> {
    /// `η = 0` gives the product norm `|u|²_{1/2} + |v|²₀`.
    pub fn new(eigs: &[S], eta: S) -> Result<Self> {
        let k = eigs.len();
        let mut g = Matrix::zeros(2 * k);
        for (i, &l) in eigs.iter().enumerate() {
            g[(i, i)] = l + eta * eta;
            g[(i, k + i)] = eta;
            g[(k + i, i)] = eta;
            g[(k + i, k + i)] = S::one();
        }
        let (values, _) = symmetric_eigen(&g);
        let metric = Metric::new(g)?;
        Ok(EtaMetric { eta, metric, lower: values[0], upper: values[values.len() - 1] })
    }
}

/// `4k`-point collocation onto the first `k` sine modes.
#[derive(Debug, Clone)]
struct Collocation<S> {
    /// `basis[j * k + i] = φ_{i+1}(x_j)`.
    basis: Vec<S>,
    nodes: usize,
    weight: S,
}

impl<S: Real> Collocation<S> {
    fn new(ell: S, k: usize) -> Self {
        let nodes = 4 * k;
        let h = ell / S::from_usize_lossy(nodes + 1);
        let norm = (S::lit(2.0) / ell).sqrt();
        let mut basis = Vec::with_capacity(nodes * k);
        for j in 1..=nodes {
            let x = h * S::from_usize_lossy(j);
            for i in 1..=k {
                basis.push(norm * (S::PI() * S::from_usize_lossy(i) * x / ell).sin());
            }
        }
        Collocation { basis, nodes, weight: h }
    }

    /// `P_k [x ↦ g(u(x))]` for `u = Σ aᵢφᵢ`.
    fn project(&self, a: &[S], g: impl Fn(S) -> S) -> Vec<S> {
        let k = a.len();
        let mut out = vec![S::zero(); k];
        for j in 0..self.nodes {
            let row = &self.basis[j * k..(j + 1) * k];
            let u: S = row.iter().zip(a).map(|(&p, &c)| p * c).sum();
            let gu = g(u) * self.weight;
            for (o, &p) in out.iter_mut().zip(row) {
                *o = *o + p * gu;
            }
        }
        out
    }
}

/// Validated Galerkin model.
#[derive(Clone)]
pub struct WaveModel<S> {
    ell: S,
    k: usize,
    period: S,
    eigs: Vec<S>,
    beta: ScalarFn<S>,
    f: NonlinFn<S>,
    f_inf: S,
    lipschitz: S,
    growth: S,
    beta0: S,
    gamma: S,
    choice: EtaChoice<S>,
    eta: EtaMetric<S>,
    resonance_gap: S,
    colloc: Arc<Collocation<S>>,
}

impl<S: std::fmt::Debug> std::fmt::Debug for WaveModel<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WaveModel")
            .field("ell", &self.ell)
            .field("k", &self.k)
            .field("eigs", &self.eigs)
            .field("f_inf", &self.f_inf)
            .field("beta0", &self.beta0)
            .field("gamma", &self.gamma)
            .field("choice", &self.choice)
            .finish_non_exhaustive()
    }
}

/// Chosen `η` with the analytic and numeric decay rates in its metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaChoice<S> {
    pub eta: S,
    /// `min(η/2, β₀ − η − ηγ²/2)`.
    pub analytic_rate: S,
    /// `min_t` of the exact dissipativity rate of `A(t)` in the η-metric.
    pub numeric_rate: S,
}

fn golden_max<S: Real>(f: impl Fn(S) -> S, mut lo: S, mut hi: S, iters: usize) -> S {
    let r = (S::lit(5.0).sqrt() - S::one()) * S::lit(0.5);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    (lo + hi) * S::lit(0.5)
}

fn analytic_rate<S: Real>(eta: S, beta0: S, gamma: S) -> S {
    (eta * S::lit(0.5)).min(beta0 - eta - eta * gamma * gamma * S::lit(0.5))
}

/// Block generator `[[0, I], [−Λ, −bI]]`.
fn block_generator<S: Real>(eigs: &[S], b: S) -> Matrix<S> {
    let k = eigs.len();
    let mut m = Matrix::zeros(2 * k);
    for (i, &l) in eigs.iter().enumerate() {
        m[(i, k + i)] = S::one();
        m[(k + i, i)] = -l;
        m[(k + i, k + i)] = -b;
    }
    m
}

/// Exact rate of `A(t)` in the η-metric; the modes decouple, so it is the
/// smallest of the `2 × 2` per-mode rates.
fn rate_at<S: Real>(eigs: &[S], b: S, eta: S) -> S {
    eigs.iter()
        .map(|&l| {
            let block = block_generator(&[l], b);
            let metric = EtaMetric::new(&[l], eta).expect("2×2 η-metric is SPD");
            dissipativity_rate_in(&block, &metric.metric)
        })
        .fold(S::infinity(), S::min)
}

fn numeric_rate<S: Real>(eigs: &[S], beta: &ScalarFn<S>, period: S, eta: S) -> S {
    let h = period / S::from_usize_lossy(RATE_SAMPLES);
    let rate = |t: S| rate_at(eigs, beta(t), eta);
    let (mut best_t, mut best) = (S::zero(), S::infinity());
    for i in 0..=RATE_SAMPLES {
        let t = h * S::from_usize_lossy(i);
        let r = rate(t);
        if r < best {
            best = r;
            best_t = t;
        }
    }
    // refine the minimum between neighbouring samples
    let lo = (best_t - h).max(S::zero());
    let hi = (best_t + h).min(period);
    let t = golden_max(|t| -rate(t), lo, hi, 80);
    best.min(rate(t))
}

/// Maximises the analytic rate over `η ∈ (0, min(1, β₀/(1 + γ²/2)))` by
/// golden section and reports the numeric rate at the maximiser.
fn choose_eta<S: Real>(eigs: &[S], beta: &ScalarFn<S>, period: S, beta0: S, gamma: S) -> Result<EtaChoice<S>> {
    let upper = S::one().min(beta0 / (S::one() + gamma * gamma * S::lit(0.5)));
    if !(upper > S::zero()) {
        return Err(Error::Configuration("no admissible η: β₀ is not positive".into()));
    }
    let eta = golden_max(|e| analytic_rate(e, beta0, gamma), S::zero(), upper, 200);
    let analytic = analytic_rate(eta, beta0, gamma);
    if !(analytic > S::lit(1e-12)) {
        return Err(Error::Configuration(format!("no admissible η: analytic rate {analytic} at β₀ = {beta0}")));
    }
    Ok(EtaChoice { eta, analytic_rate: analytic, numeric_rate: numeric_rate(eigs, beta, period, eta) })
}

/// Checks the parameters and emits the model with its linear generator family.
/// The family carries the η-metric and the numeric decay rate.
pub fn build_wave_model<S: Real>(params: WaveParams<S>) -> Result<(WaveModel<S>, GeneratorFamily<S>)> {
    let WaveParams { ell, k, period, eigs, beta, f, f_inf, lipschitz, growth, eta } = params;
    if k == 0 || k > MAX_MODES {
        return Err(Error::DimensionCap { dim: k, cap: MAX_MODES });
    }
    if !(ell > S::zero()) || !ell.is_finite() {
        return Err(Error::InvalidInput("domain length must be positive".into()));
    }
    if !(period > S::zero()) || !period.is_finite() {
        return Err(Error::InvalidInput("period must be positive".into()));
    }
    let eigs = match eigs {
        Some(e) => {
            if e.len() != k {
                return Err(Error::DimensionMismatch { expected: k, found: e.len() });
            }
            if e.iter().any(|&l| !(l > S::zero())) || e.windows(2).any(|w| !(w[0] <= w[1])) {
                return Err(Error::InvalidInput("eigenvalues must be positive and nondecreasing".into()));
            }
            e
        }
        None => (1..=k).map(|i| (S::PI() * S::from_usize_lossy(i) / ell).powi(2)).collect(),
    };

    // damping: positive, periodic
    let h = period / S::from_usize_lossy(RATE_SAMPLES);
    let mut beta0 = S::infinity();
    let mut beta_max = S::neg_infinity();
    for i in 0..=RATE_SAMPLES {
        let b = beta(h * S::from_usize_lossy(i));
        if !b.is_finite() {
            return Err(Error::InvalidInput("β has non-finite values".into()));
        }
        beta0 = beta0.min(b);
        beta_max = beta_max.max(b);
    }
    if !(beta0 > S::zero()) {
        return Err(Error::InvalidInput(format!("β must stay positive; its minimum is {beta0}")));
    }
    if (beta(S::zero()) - beta(period)).abs() > S::lit(1e-12) {
        return Err(Error::InvalidInput("β(0) and β(T) differ".into()));
    }

    let (lipschitz, growth) = check_nonlinearity(&f, f_inf, period, lipschitz, growth)?;
    let gamma = (beta_max + S::one()) / eigs[0].sqrt();
    let choice = match eta {
        Some(e) => {
            if !(e >= S::zero() && e <= S::one()) {
                return Err(Error::InvalidInput(format!("η = {e} outside [0, 1]")));
            }
            EtaChoice {
                eta: e,
                analytic_rate: analytic_rate(e, beta0, gamma),
                numeric_rate: numeric_rate(&eigs, &beta, period, e),
            }
        }
        None => choose_eta(&eigs, &beta, period, beta0, gamma)?,
    };
    let eta_metric = EtaMetric::new(&eigs, choice.eta)?;
    let resonance_gap = eigs.iter().map(|&l| (l + f_inf).abs()).fold(S::infinity(), S::min);
    let model = WaveModel {
        ell,
        k,
        period,
        colloc: Arc::new(Collocation::new(ell, k)),
        eigs,
        beta,
        f,
        f_inf,
        lipschitz,
        growth,
        beta0,
        gamma,
        choice,
        eta: eta_metric,
        resonance_gap,
    };
    let family = model.family();
    Ok((model, family))
}

/// Sampled Lipschitz, growth, periodicity and slope checks on `f`; returns
/// the constants, estimated where none were claimed.
fn check_nonlinearity<S: Real>(f: &NonlinFn<S>, f_inf: S, period: S, lipschitz: S, growth: S) -> Result<(S, S)> {
    let slack = S::lit(1e-9);
    let times: Vec<S> = (0..=16).map(|i| period * S::from_usize_lossy(i) / S::lit(16.0)).collect();
    let values: Vec<S> = (-200..=200).map(|i| S::from_f64(f64::from(i) * 0.05).unwrap_or(S::zero())).collect();
    let mut lip = S::zero();
    let mut grow = S::zero();
    for &t in &times {
        let fs: Vec<S> = values.iter().map(|&s| f(t, s)).collect();
        if fs.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("f({t}, ·) has non-finite values")));
        }
        for i in 1..values.len() {
            lip = lip.max((fs[i] - fs[i - 1]).abs() / (values[i] - values[i - 1]));
        }
        for (&s, &v) in values.iter().zip(&fs) {
            grow = grow.max(v.abs() / (S::one() + s.abs()));
        }
        // slope corridor approaching f_inf
        let mut prev = S::infinity();
        for s in [1e2, 1e3, 1e4] {
            let s = S::lit(s);
            let dev = ((f(t, s) / s - f_inf).abs()).max((f(t, -s) / -s - f_inf).abs());
            if dev > prev * (S::one() + slack) + slack {
                return Err(Error::InvalidInput(format!("f(t, s)/s does not settle towards f_∞ = {f_inf}")));
            }
            prev = dev;
        }
        if prev > S::lit(1e-2) * (S::one() + f_inf.abs()) {
            return Err(Error::InvalidInput(format!("f(t, s)/s stays {prev} away from f_∞ = {f_inf} at |s| = 1e4")));
        }
    }
    for &s in &values {
        if (f(S::zero(), s) - f(period, s)).abs() > S::lit(1e-12) {
            return Err(Error::InvalidInput("f(0, s) and f(T, s) differ".into()));
        }
    }
    if lipschitz > S::zero() && lip > lipschitz * (S::one() + slack) + slack {
        return Err(Error::InvalidInput(format!("sampled Lipschitz ratio {lip} exceeds the claimed {lipschitz}")));
    }
    if growth > S::zero() && grow > growth * (S::one() + slack) + slack {
        return Err(Error::InvalidInput(format!("sampled growth ratio {grow} exceeds the claimed {growth}")));
    }
    let lipschitz = if lipschitz > S::zero() { lipschitz } else { lip };
    let growth = if growth > S::zero() { growth } else { grow };
    Ok((lipschitz, growth))
}

impl<S: Real> WaveModel<S> {
    pub fn k(&self) -> usize {
        self.k
    }

    /// State dimension `2k`.
    pub fn dim(&self) -> usize {
        2 * self.k
    }

    pub fn ell(&self) -> S {
        self.ell
    }

    pub fn period(&self) -> S {
        self.period
    }

    pub fn eigenvalues(&self) -> &[S] {
        &self.eigs
    }

    pub fn beta(&self, t: S) -> S {
        (self.beta)(t)
    }

    pub fn nonlinearity(&self, t: S, s: S) -> S {
        (self.f)(t, s)
    }

    pub fn beta0(&self) -> S {
        self.beta0
    }

    /// `γ = max_t λ₁^{−1/2}(β(t) + 1)`.
    pub fn gamma(&self) -> S {
        self.gamma
    }

    pub fn f_inf(&self) -> S {
        self.f_inf
    }

    pub fn lipschitz(&self) -> S {
        self.lipschitz
    }

    pub fn growth(&self) -> S {
        self.growth
    }

    pub fn eta(&self) -> S {
        self.choice.eta
    }

    pub fn eta_choice(&self) -> EtaChoice<S> {
        self.choice
    }

    pub fn eta_metric(&self) -> &EtaMetric<S> {
        &self.eta
    }

    /// `min |λᵢ + f_∞|`: the linearisation `(v, −Λu − f_∞u − βv)` has a
    /// nontrivial averaged kernel exactly when this vanishes.
    pub fn resonance_gap(&self) -> S {
        self.resonance_gap
    }

    pub fn is_resonant(&self) -> bool {
        self.resonance_gap <= S::lit(RESONANCE_GAP)
    }

    /// `A(t)` at one time.
    pub fn generator(&self, t: S) -> Matrix<S> {
        block_generator(&self.eigs, self.beta(t))
    }

    /// The linear family with the η-metric and numeric decay rate.
    pub fn family(&self) -> GeneratorFamily<S> {
        let eigs = self.eigs.clone();
        let beta = self.beta.clone();
        GeneratorFamily::new(self.dim(), self.period, move |t| block_generator(&eigs, beta(t)))
            .with_omega(self.choice.numeric_rate)
            .with_metric(self.eta.metric.clone())
            .periodic(true)
            .differentiable(true)
    }

    /// `𝐅_∞ = [[0, 0], [−f_∞ I, 0]]`.
    pub fn f_inf_block(&self) -> Matrix<S> {
        let k = self.k;
        let f_inf = self.f_inf;
        Matrix::from_fn(2 * k, move |i, j| if i >= k && j + k == i { -f_inf } else { S::zero() })
    }

    /// The lifted nonlinearity `𝐅(t, (a, b)) = (0, −P_k f(t, u))`.
    pub fn field(&self) -> NonlinearField<S> {
        let k = self.k;
        let f = self.f.clone();
        let colloc = self.colloc.clone();
        NonlinearField::new(2 * k, self.period, move |t, z| {
            let proj = colloc.project(&z.as_slice()[..k], |u| f(t, u));
            let mut out = vec![S::zero(); 2 * k];
            for (o, p) in out[k..].iter_mut().zip(proj) {
                *o = -p;
            }
            Vector::new(out)
        })
        .with_lipschitz(self.lipschitz)
        .periodic(true)
    }

    /// Modal forcing `(0, g(t))` for the linear problem `u_tt + βu_t + Au = g`.
    pub fn forcing_field(&self, g: impl Fn(S) -> Vector<S> + Send + Sync + 'static) -> NonlinearField<S> {
        let k = self.k;
        NonlinearField::forcing(2 * k, self.period, move |t| {
            let gt = g(t);
            let mut out = vec![S::zero(); 2 * k];
            out[k..].copy_from_slice(gt.as_slice());
            Vector::new(out)
        })
    }

    /// Galerkin projection `P_k` of a function on the interval.
    pub fn project(&self, g: impl Fn(S) -> S) -> Vector<S> {
        // project x ↦ g(x) by feeding the node coordinate through u = x
        let k = self.k;
        let nodes = self.colloc.nodes;
        let h = self.colloc.weight;
        let mut out = vec![S::zero(); k];
        for j in 0..nodes {
            let x = h * S::from_usize_lossy(j + 1);
            let gx = g(x) * h;
            for (i, o) in out.iter_mut().enumerate() {
                *o = *o + self.colloc.basis[j * k + i] * gx;
            }
        }
        Vector::new(out)
    }

    pub fn eta_inner(&self, z1: &Vector<S>, z2: &Vector<S>) -> Result<S> {
        eta_inner(z1, z2, &self.eigs, self.eta())
    }

    pub fn eta_norm(&self, z: &Vector<S>) -> S {
        self.eta_inner(z, z).unwrap_or(S::nan()).max(S::zero()).sqrt()
    }

    /// `½(|u|²_{1/2} + |v|²₀)`.
    pub fn energy(&self, z: &Vector<S>) -> S {
        let k = self.k;
        let s = z.as_slice();
        let pot: S = self.eigs.iter().zip(&s[..k]).map(|(&l, &a)| l * a * a).sum();
        let kin: S = s[k..].iter().map(|&b| b * b).sum();
        (pot + kin) * S::lit(0.5)
    }
}

/// `Σ λᵢ a₁ᵢa₂ᵢ + Σ (b₁ᵢ + ηa₁ᵢ)(b₂ᵢ + ηa₂ᵢ)`.
pub fn eta_inner<S: Real>(z1: &Vector<S>, z2: &Vector<S>, eigs: &[S], eta: S) -> Result<S> {
    let k = eigs.len();
    for z in [z1, z2] {
        if z.dim() != 2 * k {
            return Err(Error::DimensionMismatch { expected: 2 * k, found: z.dim() });
        }
    }
    let mut acc = S::zero();
    for (i, &l) in eigs.iter().enumerate() {
        let (a1, b1, a2, b2) = (z1[i], z1[k + i], z2[i], z2[k + i]);
        acc = acc + l * a1 * a2 + (b1 + eta * a1) * (b2 + eta * a2);
    }
    Ok(acc)
}

/// `(η*, analytic rate, numeric rate)` for a model, recomputed from scratch.
pub fn select_eta<S: Real>(model: &WaveModel<S>) -> Result<EtaChoice<S>> {
    choose_eta(&model.eigs, &model.beta, model.period, model.beta0, model.gamma)
}

/// Largest `|dE/dt − (−β|v|² + (g, v))|` over interior grid nodes of a
/// trajectory of the forced linear problem, with `dE/dt` by central differences.
pub fn energy_residual<S: Real>(traj: &Trajectory<S>, model: &WaveModel<S>, g: impl Fn(S) -> Vector<S>) -> S {
    let k = model.k;
    let energies: Vec<S> = traj.states.iter().map(|z| model.energy(z)).collect();
    let mut worst = S::zero();
    for i in 1..traj.times.len().saturating_sub(1) {
        let t = traj.times[i];
        let dt = traj.times[i + 1] - traj.times[i - 1];
        let lhs = (energies[i + 1] - energies[i - 1]) / dt;
        let v = &traj.states[i].as_slice()[k..];
        let gt = g(t);
        let rhs = -model.beta(t) * v.iter().map(|&b| b * b).sum::<S>()
            + gt.iter().zip(v).map(|(&f, &b)| f * b).sum::<S>();
        worst = worst.max((lhs - rhs).abs());
    }
    worst
}

/// Embedding `E_k → E_{k'}`: `aᵢ ↦ aᵢ`, `bᵢ ↦ b_{i}` in the larger block layout.
fn embed_index(i: usize, k: usize, kp: usize) -> usize {
    if i < k {
        i
    } else {
        kp + (i - k)
    }
}

/// `max ‖R^{(k')}(t, s)ιe_j − ι R^{(k)}(t, s)e_j‖` over the basis of `E_k`
/// and the given `(t, s)` pairs, for two families of mode counts `k < k'`.
pub fn invariance_gap<S: Real>(
    small: &GeneratorFamily<S>,
    large: &GeneratorFamily<S>,
    pairs: &[(S, S)],
    n: usize,
) -> Result<S> {
    let (k, kp) = (small.dim() / 2, large.dim() / 2);
    if !(k < kp) || small.dim() % 2 != 0 || large.dim() % 2 != 0 {
        return Err(Error::InvalidInput("need block families with k < k'".into()));
    }
    let rs = build_evolution(small, n)?;
    let rl = build_evolution(large, n)?;
    let mut gap = S::zero();
    for &(t, s) in pairs {
        let ms = rs.operator(t, s)?;
        let ml = rl.operator(t, s)?;
        for j in 0..2 * k {
            let jl = embed_index(j, k, kp);
            let mut embedded = vec![S::zero(); 2 * kp];
            for i in 0..2 * k {
                embedded[embed_index(i, k, kp)] = ms[(i, j)];
            }
            let diff: S = (0..2 * kp).map(|i| (ml[(i, jl)] - embedded[i]).powi(2)).sum::<S>().sqrt();
            gap = gap.max(diff);
        }
    }
    Ok(gap)
}

/// [`invariance_gap`] for two models sharing damping and leading eigenvalues.
pub fn spectral_invariance_gap<S: Real>(
    small: &WaveModel<S>,
    large: &WaveModel<S>,
    pairs: &[(S, S)],
    n: usize,
) -> Result<S> {
    if large.eigs.len() < small.eigs.len() || large.eigs[..small.k] != small.eigs[..] {
        return Err(Error::InvalidInput("models must share their leading eigenvalues".into()));
    }
    invariance_gap(&small.family(), &large.family(), pairs, n)
}

/// Nondegeneracy of the linearisation at infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct NondegeneracyReport<S> {
    pub rows: Vec<MonodromyReport<S>>,
    /// `det(Â + 𝐅_∞)`.
    pub averaged_det: S,
    pub kernel_trivial: bool,
    pub nondegenerate: bool,
}

/// Monodromy of `z' = λ(A(t) + 𝐅_∞)z` for each `λ`, plus the averaged kernel test.
pub fn linear_nondegeneracy<S: Real>(model: &WaveModel<S>, lambdas: &[S], n: usize) -> Result<NondegeneracyReport<S>> {
    let family = model.family();
    let block = model.f_inf_block();
    let a_hat = crate::averaging::average_generator(&family)?;
    let averaged_det = (&a_hat + &block).det();
    // det(Â + 𝐅_∞) = Π(λᵢ + f_∞), so compare against the same product scale
    let scale: S = model.eigs.iter().map(|&l| l + model.f_inf.abs()).fold(S::one(), |p, x| p * x);
    let kernel_trivial = averaged_det.abs() > S::lit(RESONANCE_GAP) * scale && !model.is_resonant();
    let rows = lambdas
        .iter()
        .map(|&l| {
            let b = block.clone();
            monodromy(&family, move |_| b.clone(), l, n)
        })
        .collect::<Result<Vec<_>>>()?;
    let nondegenerate = kernel_trivial && rows.iter().all(|r| r.nondegenerate);
    Ok(NondegeneracyReport { rows, averaged_det, kernel_trivial, nondegenerate })
}

/// A located periodic Galerkin solution.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicWave<S> {
    pub x: Vector<S>,
    pub trajectory: Trajectory<S>,
    /// `‖z(0) − z(T)‖_η`.
    pub residual: S,
    pub newton_iters: usize,
}

/// The period-map problem of the full nonlinear Galerkin system at `λ`.
pub fn wave_problem<S: Real>(model: &WaveModel<S>, lambda: S, opts: &PeriodMapOptions<S>) -> Result<MildProblem<S>> {
    opts.problem(&model.family(), &model.field(), lambda)
}

/// Shoots for `Φ_T(x) = x` with Newton and re-integrates from the result.
pub fn find_periodic_wave<S: Real>(
    model: &WaveModel<S>,
    lambda: S,
    x_init: &Vector<S>,
    opts: &PeriodMapOptions<S>,
) -> Result<PeriodicWave<S>> {
    if model.is_resonant() {
        return Err(Error::Configuration(format!(
            "f_∞ = {} is resonant with the spectrum (gap {})",
            model.f_inf,
            model.resonance_gap
        )));
    }
    let problem = wave_problem(model, lambda, opts)?;
    let fp_opts = FixedPointOptions { tol: opts.fixed_point_tol * S::lit(1e-2), max_iter: 60 };
    let fp = problem.fixed_point(x_init, FixedPointMethod::Newton, &fp_opts)?;
    let trajectory = problem.solve(&fp.x)?;
    let residual = model.eta_norm(&(trajectory.final_state() - trajectory.initial_state()));
    if !(residual <= S::lit(PERIODIC_RESIDUAL)) {
        return Err(Error::NoConvergence(format!("periodic residual {residual} above {PERIODIC_RESIDUAL}")));
    }
    Ok(PeriodicWave { x: fp.x, trajectory, residual, newton_iters: fp.iterations })
}
