//! Brouwer degree of vector fields on balls and boxes in dimension at most 4.
//!
//! The degree is computed by the regular-value method: zeros are located by
//! multi-start damped Newton, deduplicated, and their Jacobian signs summed.
//! In the plane an independent winding-number computation is available.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linop::{resolvent, Matrix, Vector};
use crate::scalar::Real;

/// Largest ambient dimension handled by the degree routines.
pub const DEGREE_DIM_CAP: usize = 4;
/// Zeros closer than this are the same zero.
pub const CLUSTER_RADIUS: f64 = 1e-6;
/// Zeros with a smaller Jacobian determinant are rejected as degenerate.
pub const DET_MIN: f64 = 1e-8;
/// Hard cap on boundary samples used by the winding number.
pub const WINDING_MAX_SAMPLES: usize = 1 << 20;

/// Bounded open set `U`.
#[derive(Debug, Clone, PartialEq)]
pub enum Region<S> {
    Ball { center: Vector<S>, radius: S },
    Box { lo: Vector<S>, hi: Vector<S> },
}

impl<S: Real> Region<S> {
    pub fn ball(center: Vector<S>, radius: S) -> Result<Self> {
        if !(radius > S::zero()) || !center.is_finite() {
            return Err(Error::InvalidInput("ball needs a finite center and positive radius".into()));
        }
        check_dim(center.dim())?;
        Ok(Region::Ball { center, radius })
    }

    pub fn cuboid(lo: Vector<S>, hi: Vector<S>) -> Result<Self> {
        if lo.dim() != hi.dim() {
            return Err(Error::DimensionMismatch { expected: lo.dim(), found: hi.dim() });
        }
        check_dim(lo.dim())?;
        if lo.iter().zip(hi.iter()).any(|(&a, &b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidInput("box corners must satisfy lo < hi in every coordinate".into()));
        }
        Ok(Region::Box { lo, hi })
    }

    /// The open interval `(a, b)`.
    pub fn interval(a: S, b: S) -> Result<Self> {
        Self::cuboid(Vector::new(vec![a]), Vector::new(vec![b]))
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Ball { center, .. } => center.dim(),
            Region::Box { lo, .. } => lo.dim(),
        }
    }

    /// Characteristic size: radius or largest half-width.
    pub fn size(&self) -> S {
        match self {
            Region::Ball { radius, .. } => *radius,
            Region::Box { lo, hi } => lo.iter().zip(hi.iter()).map(|(&a, &b)| (b - a) * S::lit(0.5)).fold(S::zero(), S::max),
        }
    }

    /// Distance from an interior point to `∂U` (negative outside).
    pub fn boundary_distance(&self, x: &Vector<S>) -> S {
        match self {
            Region::Ball { center, radius } => *radius - x.distance(center),
            Region::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi.iter()))
                .map(|(&v, (&a, &b))| (v - a).min(b - v))
                .fold(S::infinity(), S::min),
        }
    }

    pub fn center(&self) -> Vector<S> {
        match self {
            Region::Ball { center, .. } => center.clone(),
            Region::Box { lo, hi } => (lo + hi).scale(S::lit(0.5)),
        }
    }

    pub fn contains(&self, x: &Vector<S>) -> bool {
        match self {
            Region::Ball { center, radius } => x.distance(center) < *radius,
            Region::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi.iter())).all(|(&v, (&a, &b))| a < v && v < b),
        }
    }

    /// Maps a point of the cube `[-1, 1]^d` into the closed region.
    fn from_unit_cube(&self, u: &[S]) -> Vector<S> {
        match self {
            Region::Ball { center, radius } => {
                // radial stretch of the cube onto the ball
                let inf = u.iter().fold(S::zero(), |m, &v| m.max(v.abs()));
                let two = u.iter().map(|&v| v * v).sum::<S>().sqrt();
                let factor = if two > S::zero() { inf / two } else { S::zero() };
                Vector::new(u.iter().zip(center.iter()).map(|(&v, &c)| c + *radius * factor * v).collect())
            }
            Region::Box { lo, hi } => Vector::new(
                u.iter()
                    .zip(lo.iter().zip(hi.iter()))
                    .map(|(&v, (&a, &b))| a + (b - a) * (v + S::one()) * S::lit(0.5))
                    .collect(),
            ),
        }
    }

    /// Points on `∂U`: the image of a uniform grid on the faces of the cube,
    /// `per_axis` points along each face direction.
    pub fn boundary_samples(&self, per_axis: usize) -> Vec<Vector<S>> {
        let d = self.dim();
        // odd counts put samples on the coordinate hyperplanes through the centre
        let per_axis = per_axis.max(3) | 1;
        let line: Vec<S> = (0..per_axis)
            .map(|i| S::lit(-1.0) + S::lit(2.0) * S::from_usize_lossy(i) / S::from_usize_lossy(per_axis - 1))
            .collect();
        let mut out = Vec::new();
        for axis in 0..d {
            for side in [S::lit(-1.0), S::one()] {
                let face = d - 1;
                let count = per_axis.pow(face as u32);
                for mut idx in 0..count {
                    let mut u = vec![S::zero(); d];
                    for (k, slot) in u.iter_mut().enumerate() {
                        if k == axis {
                            *slot = side;
                        } else {
                            *slot = line[idx % per_axis];
                            idx /= per_axis;
                        }
                    }
                    out.push(self.from_unit_cube(&u));
                }
            }
        }
        out
    }

    /// Cell-centred interior grid with `per_axis` points per direction.
    pub fn interior_grid(&self, per_axis: usize) -> Vec<Vector<S>> {
        let d = self.dim();
        let per_axis = per_axis.max(1);
        let line: Vec<S> = (0..per_axis)
            .map(|i| {
                S::lit(-1.0) + (S::lit(2.0) * S::from_usize_lossy(i) + S::one()) / S::from_usize_lossy(per_axis)
            })
            .collect();
        (0..per_axis.pow(d as u32))
            .map(|mut idx| {
                let u: Vec<S> = (0..d)
                    .map(|_| {
                        let v = line[idx % per_axis];
                        idx /= per_axis;
                        v
                    })
                    .collect();
                self.from_unit_cube(&u)
            })
            .filter(|x| self.contains(x))
            .collect()
    }

    /// Closed boundary curve of a planar region, `s ∈ [0, 1)`.
    fn boundary_curve(&self, s: S) -> Vector<S> {
        match self {
            Region::Ball { center, radius } => {
                let theta = S::TAU() * s;
                Vector::new(vec![center[0] + *radius * theta.cos(), center[1] + *radius * theta.sin()])
            }
            Region::Box { lo, hi } => {
                let four = s * S::lit(4.0);
                let side = four.floor().to_usize().unwrap_or(0).min(3);
                let f = four - S::from_usize_lossy(side);
                let (x0, y0, x1, y1) = (lo[0], lo[1], hi[0], hi[1]);
                let p = match side {
                    0 => (x0 + (x1 - x0) * f, y0),
                    1 => (x1, y0 + (y1 - y0) * f),
                    2 => (x1 - (x1 - x0) * f, y1),
                    _ => (x0, y1 - (y1 - y0) * f),
                };
                Vector::new(vec![p.0, p.1])
            }
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > DEGREE_DIM_CAP {
        return Err(Error::DimensionCap { dim: d, cap: DEGREE_DIM_CAP });
    }
    Ok(())
}

/// Search controls for [`brouwer_degree`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeOptions {
    /// Newton starts per axis; the default gives `16^d` starts.
    pub starts_per_axis: usize,
    /// Boundary samples per face direction.
    pub boundary_per_axis: usize,
    pub newton_iter: usize,
}

impl Default for DegreeOptions {
    fn default() -> Self {
        DegreeOptions { starts_per_axis: 16, boundary_per_axis: 0, newton_iter: 60 }
    }
}

impl DegreeOptions {
    fn boundary_count(&self, d: usize) -> usize {
        if self.boundary_per_axis > 0 {
            return self.boundary_per_axis;
        }
        match d {
            1 | 2 => 257,
            3 => 25,
            _ => 11,
        }
    }
}

/// A regular zero of the field.
#[derive(Debug, Clone, PartialEq)]
pub struct Zero<S> {
    pub point: Vector<S>,
    pub det: S,
}

impl<S: Real> Zero<S> {
    pub fn sign(&self) -> i64 {
        if self.det > S::zero() {
            1
        } else {
            -1
        }
    }
}

/// Outcome of [`brouwer_degree`].
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeReport<S> {
    pub degree: i64,
    /// Zeros sorted lexicographically.
    pub zeros: Vec<Zero<S>>,
    /// Smallest field norm seen on the boundary samples.
    pub boundary_min: S,
    /// Admissibility threshold `δ` the boundary minimum was compared against.
    pub delta: S,
}

/// Smallest boundary norm and the sample attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCheck<S> {
    pub min_norm: S,
    pub argmin: Vector<S>,
    pub max_norm: S,
    pub delta: S,
}

impl<S: Real> BoundaryCheck<S> {
    pub fn admissible(&self) -> bool {
        self.min_norm > self.delta
    }

    fn into_error(self) -> Error {
        Error::InadmissibleRegion { sample: self.argmin.to_f64_vec(), norm: self.min_norm.to_f64_lossy() }
    }
}

/// Samples `‖g‖` on `∂U`; `δ = 1e-6 (1 + max ‖g‖)`.
pub fn boundary_check<S, G>(g: &G, region: &Region<S>, per_axis: usize) -> Result<BoundaryCheck<S>>
where
    S: Real,
    G: Fn(&Vector<S>) -> Result<Vector<S>> + Sync,
{
    let samples = region.boundary_samples(per_axis);
    let norms: Vec<S> = samples.par_iter().map(|x| g(x).map(|v| v.norm())).collect::<Result<_>>()?;
    let mut min_norm = S::infinity();
    let mut argmin = samples[0].clone();
    let mut max_norm = S::zero();
    for (x, &n) in samples.iter().zip(&norms) {
        if !(n >= min_norm) {
            min_norm = n;
            argmin = x.clone();
        }
        max_norm = max_norm.max(n);
    }
    let delta = S::lit(1e-6) * (S::one() + max_norm);
    Ok(BoundaryCheck { min_norm, argmin, max_norm, delta })
}

fn fd_step<S: Real>(x: S) -> S {
    S::lit(1e-6).max(S::epsilon().cbrt()) * S::one().max(x.abs())
}

/// Central-difference Jacobian with step `1e-6` (relative for large entries).
pub fn jacobian<S, G>(g: &G, x: &Vector<S>) -> Result<Matrix<S>>
where
    S: Real,
    G: Fn(&Vector<S>) -> Result<Vector<S>>,
{
    let d = x.dim();
    let mut jac = Matrix::zeros(d);
    for j in 0..d {
        let h = fd_step(x[j]);
        let mut plus = x.clone();
        plus[j] = plus[j] + h;
        let mut minus = x.clone();
        minus[j] = minus[j] - h;
        let (gp, gm) = (g(&plus)?, g(&minus)?);
        for i in 0..d {
            jac[(i, j)] = (gp[i] - gm[i]) / (h + h);
        }
    }
    Ok(jac)
}

/// Damped Newton from `start`; `None` unless `‖g‖` drops to `tol` before the
/// iterate wanders far outside `U`.
pub fn locate_zero<S, G>(g: &G, start: &Vector<S>, region: &Region<S>, tol: S, iters: usize) -> Option<Vector<S>>
where
    S: Real,
    G: Fn(&Vector<S>) -> Result<Vector<S>>,
{
    let mut x = start.clone();
    let mut gx = g(&x).ok()?;
    let mut norm = gx.norm();
    let escape = region.size() * S::lit(4.0);
    for _ in 0..iters {
        if norm <= tol {
            break;
        }
        let lu = jacobian(g, &x).ok()?.lu().ok()?;
        let step = -&lu.solve(&gx);
        let mut t = S::one();
        let mut moved = false;
        for _ in 0..25 {
            let mut trial = x.clone();
            trial.axpy(t, &step);
            if let Ok(gt) = g(&trial) {
                let nt = gt.norm();
                if nt.is_finite() && nt < norm {
                    x = trial;
                    gx = gt;
                    norm = nt;
                    moved = true;
                    break;
                }
            }
            t = t * S::lit(0.5);
        }
        if !moved {
            break;
        }
        if match region {
            Region::Ball { center, radius } => x.distance(center) > *radius + escape,
            Region::Box { .. } => x.distance(start) > escape + region.size() * S::lit(4.0),
        } {
            return None;
        }
    }
    (norm <= tol * S::lit(100.0)).then_some(x)
}

/// Brouwer degree of `g` on `U` for a fallible field.
pub fn brouwer_degree_fallible<S, G>(g: &G, region: &Region<S>, opts: &DegreeOptions) -> Result<DegreeReport<S>>
where
    S: Real,
    G: Fn(&Vector<S>) -> Result<Vector<S>> + Sync,
{
    let d = region.dim();
    check_dim(d)?;
    let boundary = boundary_check(g, region, opts.boundary_count(d))?;
    if !boundary.admissible() {
        return Err(boundary.into_error());
    }
    let scale = boundary.max_norm;
    let tol = S::lit(1e-10).max(S::epsilon() * S::lit(100.0)) * (S::one() + scale);
    let radius = S::lit(CLUSTER_RADIUS) * (S::one() + region.size());
    let starts = region.interior_grid(opts.starts_per_axis);
    let found: Vec<Vector<S>> = starts
        .par_iter()
        .filter_map(|s| locate_zero(g, s, region, tol, opts.newton_iter))
        .filter(|z| region.boundary_distance(z) > -radius)
        .collect();
    let mut found = found;
    found.sort_by(|a, b| lex_cmp(a, b));
    let mut distinct: Vec<Vector<S>> = Vec::new();
    for z in found {
        if distinct.iter().all(|w| w.distance(&z) > radius) {
            distinct.push(z);
        }
    }
    let mut zeros = Vec::with_capacity(distinct.len());
    for z in distinct {
        if region.boundary_distance(&z) <= radius {
            let norm = g(&z)?.norm();
            return Err(Error::InadmissibleRegion { sample: z.to_f64_vec(), norm: norm.to_f64_lossy() });
        }
        let det = jacobian(g, &z)?.det();
        if !(det.abs() >= S::lit(DET_MIN)) {
            return Err(Error::DegenerateZero { point: z.to_f64_vec(), det: det.to_f64_lossy() });
        }
        zeros.push(Zero { point: z, det });
    }
    let degree = zeros.iter().map(Zero::sign).sum();
    Ok(DegreeReport { degree, zeros, boundary_min: boundary.min_norm, delta: boundary.delta })
}

/// Brouwer degree of `g` on `U`.
pub fn brouwer_degree<S, G>(g: &G, region: &Region<S>, opts: &DegreeOptions) -> Result<DegreeReport<S>>
where
    S: Real,
    G: Fn(&Vector<S>) -> Vector<S> + Sync,
{
    brouwer_degree_fallible(&|x: &Vector<S>| Ok(g(x)), region, opts)
}

fn lex_cmp<S: Real>(a: &Vector<S>, b: &Vector<S>) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Winding number of a planar field along `∂U`, starting from `samples`
/// equispaced boundary points and bisecting until every angle step is
/// below `π/2`.
pub fn winding_number_2d<S, G>(g: &G, region: &Region<S>, samples: usize) -> Result<i64>
where
    S: Real,
    G: Fn(&Vector<S>) -> Vector<S>,
{
    if region.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: region.dim() });
    }
    let samples = samples.max(4);
    let eval = |s: S| -> (Vector<S>, Vector<S>) {
        let x = region.boundary_curve(s);
        let v = g(&x);
        (x, v)
    };
    let initial: Vec<(S, Vector<S>, Vector<S>)> = (0..samples)
        .map(|i| {
            let s = S::from_usize_lossy(i) / S::from_usize_lossy(samples);
            let (x, v) = eval(s);
            (s, x, v)
        })
        .collect();
    let scale = initial.iter().map(|(_, _, v)| v.norm()).fold(S::zero(), S::max);
    let delta = S::lit(1e-6) * (S::one() + scale);
    let check = |x: &Vector<S>, v: &Vector<S>| -> Result<()> {
        let n = v.norm();
        if !(n > delta) {
            return Err(Error::InadmissibleRegion { sample: x.to_f64_vec(), norm: n.to_f64_lossy() });
        }
        Ok(())
    };
    for (_, x, v) in &initial {
        check(x, v)?;
    }
    let quarter = S::FRAC_PI_2();
    let mut total = S::zero();
    let mut used = samples;
    for i in 0..samples {
        let (s0, _, v0) = &initial[i];
        let s1 = if i + 1 == samples { S::one() } else { initial[i + 1].0 };
        let v1 = &initial[(i + 1) % samples].2;
        // explicit stack of subintervals, processed left to right
        let mut stack = vec![(*s0, v0.clone(), s1, v1.clone())];
        while let Some((a, va, b, vb)) = stack.pop() {
            let step = angle_between(&va, &vb);
            if step.abs() < quarter {
                total = total + step;
                continue;
            }
            used += 1;
            if used > WINDING_MAX_SAMPLES {
                return Err(Error::OracleFailure(format!("more than {WINDING_MAX_SAMPLES} boundary samples needed")));
            }
            let mid = (a + b) * S::lit(0.5);
            let (xm, vm) = eval(mid);
            check(&xm, &vm)?;
            stack.push((mid, vm.clone(), b, vb));
            stack.push((a, va, mid, vm));
        }
    }
    let turns = total / S::TAU();
    Ok(turns.round().to_i64().unwrap_or(0))
}

fn angle_between<S: Real>(a: &Vector<S>, b: &Vector<S>) -> S {
    let cross = a[0] * b[1] - a[1] * b[0];
    let dot = a[0] * b[0] + a[1] * b[1];
    cross.atan2(dot)
}

/// `Deg(Â + F̂, U) := deg(I + Â⁻¹F̂, U)`.
pub fn deg_hat<S, F>(a_hat: &Matrix<S>, f_hat: &F, region: &Region<S>, opts: &DegreeOptions) -> Result<DegreeReport<S>>
where
    S: Real,
    F: Fn(&Vector<S>) -> Vector<S> + Sync,
{
    // Â⁻¹ = −(0·I − Â)⁻¹
    let a_inv = resolvent(a_hat, S::zero())?.scale(S::lit(-1.0));
    let field = |x: &Vector<S>| x + &a_inv.mul_vec(&f_hat(x));
    brouwer_degree(&field, region, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_ball(d: usize) -> Region<f64> {
        Region::ball(Vector::zeros(d), 1.0).unwrap()
    }

    fn power(m: u32, c: f64) -> impl Fn(&Vector<f64>) -> Vector<f64> + Sync {
        move |x| {
            let (mut re, mut im) = (1.0, 0.0);
            for _ in 0..m {
                (re, im) = (re * x[0] - im * x[1], re * x[1] + im * x[0]);
            }
            Vector::new(vec![re - c, im])
        }
    }

    #[test]
    fn identity_and_antipodal() {
        for d in 1..=4 {
            let opts = DegreeOptions { starts_per_axis: 4, ..Default::default() };
            let id = brouwer_degree(&|x: &Vector<f64>| x.clone(), &unit_ball(d), &opts).unwrap();
            assert_eq!(id.degree, 1);
            let anti = brouwer_degree(&|x: &Vector<f64>| -x, &unit_ball(d), &opts).unwrap();
            assert_eq!(anti.degree, if d % 2 == 0 { 1 } else { -1 });
        }
    }

    #[test]
    fn shifted_complex_square() {
        let rep = brouwer_degree(&power(2, 0.25), &unit_ball(2), &DegreeOptions::default()).unwrap();
        assert_eq!(rep.degree, 2);
        assert_eq!(rep.zeros.len(), 2);
    }

    #[test]
    fn pure_power_is_degenerate() {
        let err = brouwer_degree(&power(2, 0.0), &unit_ball(2), &DegreeOptions::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateZero { .. }));
    }

    #[test]
    fn winding_of_powers() {
        for m in 1..=3 {
            assert_eq!(winding_number_2d(&power(m, 0.0), &unit_ball(2), 16).unwrap(), m as i64);
        }
        let anti = |x: &Vector<f64>| -x;
        assert_eq!(winding_number_2d(&anti, &unit_ball(2), 16).unwrap(), 1);
        let sq = Region::cuboid(Vector::from_f64(&[-1.0, -1.0]), Vector::from_f64(&[1.0, 1.0])).unwrap();
        assert_eq!(winding_number_2d(&power(3, 0.1), &sq, 8).unwrap(), 3);
    }

    #[test]
    fn boundary_zero_is_inadmissible() {
        let g = |x: &Vector<f64>| Vector::new(vec![x[0] - 1.0, x[1]]);
        let err = brouwer_degree(&g, &unit_ball(2), &DegreeOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InadmissibleRegion { .. }));
        assert!(matches!(winding_number_2d(&g, &unit_ball(2), 64), Err(Error::InadmissibleRegion { .. })));
    }

    #[test]
    fn no_zero_gives_zero() {
        let g = |x: &Vector<f64>| Vector::new(vec![x[0] - 5.0]);
        let rep = brouwer_degree(&g, &Region::interval(0.0, 4.0).unwrap(), &DegreeOptions::default()).unwrap();
        assert_eq!(rep.degree, 0);
    }

    #[test]
    fn deg_hat_scalar() {
        let a = Matrix::diag(&[-1.0]);
        let f = |_: &Vector<f64>| Vector::new(vec![2.0]);
        let rep = deg_hat(&a, &f, &Region::interval(0.0, 4.0).unwrap(), &DegreeOptions::default()).unwrap();
        assert_eq!(rep.degree, 1);
        assert!((rep.zeros[0].point[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn deg_hat_singular() {
        let a = Matrix::diag(&[0.0, -1.0]);
        let f = |x: &Vector<f64>| x.clone();
        assert!(matches!(
            deg_hat(&a, &f, &unit_ball(2), &DegreeOptions::default()),
            Err(Error::SingularResolvent { .. })
        ));
    }

    #[test]
    fn too_many_dimensions() {
        assert!(matches!(Region::ball(Vector::<f64>::zeros(5), 1.0), Err(Error::DimensionCap { .. })));
    }
}
