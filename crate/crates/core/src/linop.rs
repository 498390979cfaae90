//! Dense finite-dimensional linear algebra.
//!
//! Everything the evolution machinery needs lives here: a square [`Matrix`]
//! and a [`Vector`] over any [`Real`] scalar, LU and Cholesky factorizations,
//! a cyclic Jacobi symmetric eigensolver, the Padé-13 scaling-and-squaring
//! matrix exponential, spectral norms (optionally in a weighted metric) and
//! resolvents.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest supported state dimension.
pub const DIM_CAP: usize = 256;

/// Condition number above which a resolvent is treated as singular.
pub const RESOLVENT_COND_MAX: f64 = 1e12;

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    if dim > DIM_CAP {
        return Err(Error::DimensionCap { dim, cap: DIM_CAP });
    }
    Ok(())
}

/// Dense real state vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vector<S>(Vec<S>);

impl<S: Real> Vector<S> {
    pub fn new(entries: Vec<S>) -> Self {
        Vector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![S::zero(); dim])
    }

    /// The `i`-th canonical basis vector.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = S::one();
        v
    }

    pub fn from_f64(entries: &[f64]) -> Self {
        Vector(entries.iter().map(|&x| S::lit(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<S> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, S> {
        self.0.iter()
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.0.iter().map(|x| x.to_f64_lossy()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn dot(&self, other: &Self) -> S {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(&a, &b)| a * b).sum()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> S {
        // scaled to avoid overflow for large entries
        let scale = self.max_abs();
        if scale == S::zero() || !scale.is_finite() {
            return scale;
        }
        let ss: S = self.0.iter().map(|&x| (x / scale) * (x / scale)).sum();
        scale * ss.sqrt()
    }

    pub fn max_abs(&self) -> S {
        self.0.iter().fold(S::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn scale(&self, a: S) -> Self {
        Vector(self.0.iter().map(|&x| a * x).collect())
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: S, x: &Self) {
        debug_assert_eq!(self.dim(), x.dim());
        for (y, &xi) in self.0.iter_mut().zip(&x.0) {
            *y = *y + a * xi;
        }
    }

    pub fn distance(&self, other: &Self) -> S {
        (self - other).norm()
    }
}

impl<S> Index<usize> for Vector<S> {
    type Output = S;
    fn index(&self, i: usize) -> &S {
        &self.0[i]
    }
}

impl<S> IndexMut<usize> for Vector<S> {
    fn index_mut(&mut self, i: usize) -> &mut S {
        &mut self.0[i]
    }
}

impl<S> From<Vec<S>> for Vector<S> {
    fn from(v: Vec<S>) -> Self {
        Vector(v)
    }
}

impl<S: Real> Add for &Vector<S> {
    type Output = Vector<S>;
    fn add(self, rhs: &Vector<S>) -> Vector<S> {
        debug_assert_eq!(self.dim(), rhs.dim());
        Vector(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a + b).collect())
    }
}

impl<S: Real> Sub for &Vector<S> {
    type Output = Vector<S>;
    fn sub(self, rhs: &Vector<S>) -> Vector<S> {
        debug_assert_eq!(self.dim(), rhs.dim());
        Vector(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a - b).collect())
    }
}

impl<S: Real> Neg for &Vector<S> {
    type Output = Vector<S>;
    fn neg(self) -> Vector<S> {
        Vector(self.0.iter().map(|&a| -a).collect())
    }
}

impl<S: Real> AddAssign<&Vector<S>> for Vector<S> {
    fn add_assign(&mut self, rhs: &Vector<S>) {
        self.axpy(S::one(), rhs);
    }
}

impl<S: Real> SubAssign<&Vector<S>> for Vector<S> {
    fn sub_assign(&mut self, rhs: &Vector<S>) {
        self.axpy(-S::one(), rhs);
    }
}

/// Dense square real matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    dim: usize,
    data: Vec<S>,
}

impl<S: Real> Matrix<S> {
    pub fn zeros(dim: usize) -> Self {
        Matrix { dim, data: vec![S::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, S::one())
    }

    /// `c * I`
    pub fn scalar(dim: usize, c: S) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = c;
        }
        m
    }

    pub fn diag(entries: &[S]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &d) in entries.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Matrix { dim, data }
    }

    /// Builds a matrix from rows, validating squareness, the dimension cap and finiteness.
    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self> {
        let dim = rows.len();
        check_dim(dim)?;
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        let m = Matrix { dim, data };
        m.ensure_finite()?;
        Ok(m)
    }

    pub fn from_f64_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<S>> = rows.iter().map(|r| r.iter().map(|&x| S::lit(x)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vector<S> {
        Vector((0..self.dim).map(|i| self[(i, j)]).collect())
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).iter().map(|x| x.to_f64_lossy()).collect()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput("matrix has non-finite entries".into()))
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn scale(&self, a: S) -> Self {
        Matrix { dim: self.dim, data: self.data.iter().map(|&x| a * x).collect() }
    }

    /// `½(M + Mᵀ)`
    pub fn symmetric_part(&self) -> Self {
        let half = S::lit(0.5);
        Self::from_fn(self.dim, |i, j| half * (self[(i, j)] + self[(j, i)]))
    }

    pub fn trace(&self) -> S {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> S {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self[(i, j)].abs()).sum::<S>())
            .fold(S::zero(), S::max)
    }

    pub fn norm_inf(&self) -> S {
        (0..self.dim)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<S>())
            .fold(S::zero(), S::max)
    }

    pub fn norm_fro(&self) -> S {
        self.data.iter().map(|&x| x * x).sum::<S>().sqrt()
    }

    pub fn max_abs(&self) -> S {
        self.data.iter().fold(S::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn mul_vec(&self, x: &Vector<S>) -> Vector<S> {
        debug_assert_eq!(self.dim, x.dim());
        Vector(
            (0..self.dim)
                .map(|i| self.row(i).iter().zip(x.iter()).map(|(&a, &b)| a * b).sum())
                .collect(),
        )
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = vec![S::zero(); n * n];
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == S::zero() {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o = *o + a * b;
                }
            }
        }
        Matrix { dim: n, data: out }
    }

    /// Copies `block` into the square sub-block starting at `(row, col)`.
    pub fn set_block(&mut self, row: usize, col: usize, block: &Self) {
        for i in 0..block.dim {
            for j in 0..block.dim {
                self[(row + i, col + j)] = block[(i, j)];
            }
        }
    }

    pub fn lu(&self) -> Result<Lu<S>> {
        Lu::new(self)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.lu()?.inverse()
    }

    pub fn det(&self) -> S {
        match Lu::new(self) {
            Ok(lu) => lu.det(),
            Err(_) => S::zero(),
        }
    }

    /// Converts to an `nalgebra` matrix in `f64`.
    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.dim, self.dim, |i, j| self[(i, j)].to_f64_lossy())
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.dim + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.dim + j]
    }
}

impl<S: Real> Add for &Matrix<S> {
    type Output = Matrix<S>;
    fn add(self, rhs: &Matrix<S>) -> Matrix<S> {
        debug_assert_eq!(self.dim, rhs.dim);
        Matrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect() }
    }
}

impl<S: Real> Sub for &Matrix<S> {
    type Output = Matrix<S>;
    fn sub(self, rhs: &Matrix<S>) -> Matrix<S> {
        debug_assert_eq!(self.dim, rhs.dim);
        Matrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect() }
    }
}

impl<S: Real> Mul for &Matrix<S> {
    type Output = Matrix<S>;
    fn mul(self, rhs: &Matrix<S>) -> Matrix<S> {
        self.matmul(rhs)
    }
}

impl<S: Real> Mul<&Vector<S>> for &Matrix<S> {
    type Output = Vector<S>;
    fn mul(self, rhs: &Vector<S>) -> Vector<S> {
        self.mul_vec(rhs)
    }
}

/// LU factorization with partial pivoting, `PA = LU`.
#[derive(Debug, Clone)]
pub struct Lu<S> {
    lu: Matrix<S>,
    perm: Vec<usize>,
    sign: S,
}

impl<S: Real> Lu<S> {
    pub fn new(m: &Matrix<S>) -> Result<Self> {
        m.ensure_finite()?;
        let n = m.dim;
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = S::one();
        let scale = m.max_abs().max(S::min_positive_value());
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, S::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot <= S::epsilon() * S::lit(1e-3) * scale {
                return Err(Error::SingularResolvent { condition: f64::INFINITY });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                if f != S::zero() {
                    for j in k + 1..n {
                        let v = lu[(k, j)];
                        lu[(i, j)] = lu[(i, j)] - f * v;
                    }
                }
            }
        }
        Ok(Lu { lu, perm, sign })
    }

    pub fn det(&self) -> S {
        (0..self.lu.dim).fold(self.sign, |acc, i| acc * self.lu[(i, i)])
    }

    pub fn solve(&self, b: &Vector<S>) -> Vector<S> {
        let n = self.lu.dim;
        let mut x: Vec<S> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc = acc - self.lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc = acc - self.lu[(i, j)] * x[j];
            }
            x[i] = acc / self.lu[(i, i)];
        }
        Vector(x)
    }

    /// Solves `A X = B` column by column.
    pub fn solve_matrix(&self, b: &Matrix<S>) -> Matrix<S> {
        let n = b.dim;
        let mut out = Matrix::zeros(n);
        for j in 0..n {
            let col = self.solve(&b.column(j));
            for i in 0..n {
                out[(i, j)] = col[i];
            }
        }
        out
    }

    pub fn inverse(&self) -> Result<Matrix<S>> {
        let inv = self.solve_matrix(&Matrix::identity(self.lu.dim));
        inv.ensure_finite()?;
        Ok(inv)
    }
}

/// Lower-triangular Cholesky factor `L` with `G = L Lᵀ`.
pub fn cholesky<S: Real>(g: &Matrix<S>) -> Result<Matrix<S>> {
    let n = g.dim();
    let asym = (g - &g.transpose()).max_abs();
    if asym > S::lit(1e-10) * (S::one() + g.max_abs()) {
        return Err(Error::InvalidMetric("metric matrix is not symmetric".into()));
    }
    let mut l = Matrix::zeros(n);
    for j in 0..n {
        let mut d = g[(j, j)];
        for k in 0..j {
            d = d - l[(j, k)] * l[(j, k)];
        }
        if !(d > S::zero()) {
            return Err(Error::InvalidMetric("metric matrix is not positive definite".into()));
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = g[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Symmetric eigen-decomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as columns.
pub fn symmetric_eigen<S: Real>(m: &Matrix<S>) -> (Vec<S>, Matrix<S>) {
    let n = m.dim();
    let mut a = m.symmetric_part();
    let mut v = Matrix::identity(n);
    let tiny = S::min_positive_value();
    for _sweep in 0..100 {
        let off: S = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        let total = a.norm_fro();
        if off.sqrt() <= S::epsilon() * S::lit(1e-2) * total || off <= tiny {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= tiny {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (S::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + S::one()).sqrt());
                let t = if theta == S::zero() { S::one() } else { t };
                let c = S::one() / (t * t + S::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

pub fn max_symmetric_eigenvalue<S: Real>(m: &Matrix<S>) -> S {
    let (vals, _) = symmetric_eigen(m);
    vals[vals.len() - 1]
}

/// Spectral norm `‖M‖₂`, the largest singular value.
pub fn operator_norm<S: Real>(m: &Matrix<S>) -> S {
    let scale = m.max_abs();
    if scale == S::zero() {
        return S::zero();
    }
    let unit = m.scale(S::one() / scale);
    let gram = &unit.transpose() * &unit;
    scale * max_symmetric_eigenvalue(&gram).max(S::zero()).sqrt()
}

/// Inner product `⟨x, y⟩_G = xᵀ G y` given by a symmetric positive-definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric<S> {
    gram: Matrix<S>,
    chol: Matrix<S>,
    chol_inv: Matrix<S>,
}

impl<S: Real> Metric<S> {
    pub fn new(gram: Matrix<S>) -> Result<Self> {
        gram.ensure_finite()?;
        let chol = cholesky(&gram)?;
        let chol_inv = chol.inverse().map_err(|_| Error::InvalidMetric("metric is numerically singular".into()))?;
        Ok(Metric { gram, chol, chol_inv })
    }

    pub fn euclidean(dim: usize) -> Self {
        let id = Matrix::identity(dim);
        Metric { gram: id.clone(), chol: id.clone(), chol_inv: id }
    }

    pub fn dim(&self) -> usize {
        self.gram.dim()
    }

    pub fn gram(&self) -> &Matrix<S> {
        &self.gram
    }

    pub fn inner(&self, x: &Vector<S>, y: &Vector<S>) -> S {
        x.dot(&self.gram.mul_vec(y))
    }

    pub fn norm(&self, x: &Vector<S>) -> S {
        self.inner(x, x).max(S::zero()).sqrt()
    }

    /// Maps coordinates into the frame where this metric is Euclidean: `y = Lᵀ x`.
    pub fn whiten(&self, x: &Vector<S>) -> Vector<S> {
        self.chol.transpose().mul_vec(x)
    }

    pub fn unwhiten(&self, y: &Vector<S>) -> Vector<S> {
        self.chol_inv.transpose().mul_vec(y)
    }

    /// The matrix `Lᵀ M L⁻ᵀ` representing `M` in whitened coordinates.
    pub fn congruent(&self, m: &Matrix<S>) -> Matrix<S> {
        &(&self.chol.transpose() * m) * &self.chol_inv.transpose()
    }

    /// Induced operator norm `sup ‖Mx‖_G / ‖x‖_G`.
    pub fn operator_norm(&self, m: &Matrix<S>) -> S {
        operator_norm(&self.congruent(m))
    }

    /// Largest eigenvalue of the symmetric pencil `(B, G)`: `sup xᵀBx / xᵀGx`.
    pub fn max_rayleigh(&self, b: &Matrix<S>) -> S {
        let reduced = &(&self.chol_inv * &b.symmetric_part()) * &self.chol_inv.transpose();
        max_symmetric_eigenvalue(&reduced)
    }
}

/// `exp(t M)` by scaling and squaring around the degree-13 Padé approximant.
pub fn mat_exp<S: Real>(m: &Matrix<S>, t: S) -> Result<Matrix<S>> {
    m.ensure_finite()?;
    if !t.is_finite() {
        return Err(Error::InvalidInput("non-finite time".into()));
    }
    if t < S::zero() {
        return Err(Error::Precondition("mat_exp requires t >= 0".into()));
    }
    let n = m.dim();
    if t == S::zero() || m.max_abs() == S::zero() {
        return Ok(Matrix::identity(n));
    }
    const PADE13: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;

    let a = m.scale(t);
    let norm = a.norm_1().to_f64_lossy();
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a.scale(S::lit(0.5f64.powi(squarings)));
    let b = |k: usize| S::lit(PADE13[k]);
    let id = Matrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let lin = |c6: S, c4: S, c2: S, c0: S| -> Matrix<S> {
        let mut out = a6.scale(c6);
        out = &out + &a4.scale(c4);
        out = &out + &a2.scale(c2);
        &out + &id.scale(c0)
    };
    let u_inner = &(&a6 * &lin(b(13), b(11), b(9), S::zero())) + &lin(b(7), b(5), b(3), b(1));
    let u = &a * &u_inner;
    let v = &(&a6 * &lin(b(12), b(10), b(8), S::zero())) + &lin(b(6), b(4), b(2), b(0));

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu()?.solve_matrix(&p);
    for _ in 0..squarings {
        r = &r * &r;
    }
    r.ensure_finite()?;
    Ok(r)
}

/// `(μI − M)⁻¹`, rejecting ill-conditioned shifts.
pub fn resolvent<S: Real>(m: &Matrix<S>, mu: S) -> Result<Matrix<S>> {
    m.ensure_finite()?;
    let shifted = &Matrix::scalar(m.dim(), mu) - m;
    let inv = match shifted.lu() {
        Ok(lu) => lu.inverse()?,
        Err(_) => return Err(Error::SingularResolvent { condition: f64::INFINITY }),
    };
    let cond = (shifted.norm_1() * inv.norm_1()).to_f64_lossy();
    if !(cond <= RESOLVENT_COND_MAX) {
        return Err(Error::SingularResolvent { condition: cond });
    }
    Ok(inv)
}

/// Complex eigenvalues `(re, im)` of a general real matrix, in `f64`.
pub fn eigenvalues<S: Real>(m: &Matrix<S>) -> Result<Vec<(f64, f64)>> {
    m.ensure_finite()?;
    let schur = nalgebra::linalg::Schur::try_new(m.to_nalgebra(), 1e-15, 10_000)
        .ok_or_else(|| Error::InvalidInput("Schur iteration did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect())
}
