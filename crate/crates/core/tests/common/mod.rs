#![allow(dead_code)]

use evolver_core::{Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Matrix<f64> {
    Matrix::from_fn(d, |_, _| rng.gen_range(-scale..scale))
}

pub fn random_vector(rng: &mut ChaCha8Rng, d: usize) -> Vector<f64> {
    Vector::new((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

/// `−(BBᵀ + cI) + (C − Cᵀ)`: symmetric part ≤ −c.
pub fn random_dissipative(rng: &mut ChaCha8Rng, d: usize, c: f64) -> Matrix<f64> {
    let b = random_matrix(rng, d, 1.0);
    let k = random_matrix(rng, d, 1.0);
    let sym = &(&b * &b.transpose()) + &Matrix::scalar(d, c);
    &(&k - &k.transpose()) - &sym
}

/// Classical RK4 for the matrix ODE `Y' = A(t) Y`, `Y(s) = I`, up to time `t`.
pub fn rk4_propagator(a: impl Fn(f64) -> Matrix<f64>, t: f64, s: f64, h: f64) -> Matrix<f64> {
    let d = a(s).dim();
    let steps = ((t - s) / h).ceil().max(1.0) as usize;
    let h = (t - s) / steps as f64;
    let mut y = Matrix::identity(d);
    for i in 0..steps {
        let tau = s + h * i as f64;
        let k1 = &a(tau) * &y;
        let k2 = &a(tau + h / 2.0) * &(&y + &k1.scale(h / 2.0));
        let k3 = &a(tau + h / 2.0) * &(&y + &k2.scale(h / 2.0));
        let k4 = &a(tau + h) * &(&y + &k3.scale(h));
        let incr = &(&k1 + &k2.scale(2.0)) + &(&k3.scale(2.0) + &k4);
        y = &y + &incr.scale(h / 6.0);
    }
    y
}

/// Classical RK4 for `z' = f(t, z)`, returning the state at every step.
pub fn rk4_path(f: impl Fn(f64, &Vector<f64>) -> Vector<f64>, z0: &Vector<f64>, t0: f64, t1: f64, steps: usize) -> Vec<Vector<f64>> {
    let h = (t1 - t0) / steps as f64;
    let mut z = z0.clone();
    let mut out = vec![z.clone()];
    for i in 0..steps {
        let t = t0 + h * i as f64;
        let k1 = f(t, &z);
        let mut tmp = z.clone();
        tmp.axpy(h / 2.0, &k1);
        let k2 = f(t + h / 2.0, &tmp);
        let mut tmp = z.clone();
        tmp.axpy(h / 2.0, &k2);
        let k3 = f(t + h / 2.0, &tmp);
        let mut tmp = z.clone();
        tmp.axpy(h, &k3);
        let k4 = f(t + h, &tmp);
        z.axpy(h / 6.0, &k1);
        z.axpy(h / 3.0, &k2);
        z.axpy(h / 3.0, &k3);
        z.axpy(h / 6.0, &k4);
        out.push(z.clone());
    }
    out
}

pub fn to_na(m: &Matrix<f64>) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(m.dim(), m.dim(), |i, j| m[(i, j)])
}

pub fn max_diff(a: &Matrix<f64>, b: &Matrix<f64>) -> f64 {
    (a - b).max_abs()
}
