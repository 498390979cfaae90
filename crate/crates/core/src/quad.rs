//! Composite Simpson quadrature with panel doubling, for vector-valued integrands.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Result of a refined quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature<S> {
    pub value: Vec<S>,
    /// Number of Simpson panels in the accepted rule.
    pub panels: usize,
    /// Max-norm difference between the last two refinements.
    pub estimate: S,
}

const MAX_PANELS: usize = 1 << 20;

/// Integrates `f` over `[a, b]` by composite Simpson, doubling the panel count
/// until two successive rules differ by less than `tol` in max norm.
///
/// Every refinement reuses the previous nodes, so the total cost is the
/// number of nodes in the final rule.
pub fn simpson<S, F>(f: F, a: S, b: S, tol: S) -> Result<Quadrature<S>>
where
    S: Real,
    F: Fn(S) -> Vec<S>,
{
    let width = b - a;
    let fa = f(a);
    let fb = f(b);
    let dim = fa.len();
    // trapezoid sums on 1 and 2 intervals
    let mut intervals = 1usize;
    let endpoint_sum: Vec<S> = fa.iter().zip(&fb).map(|(&x, &y)| x + y).collect();
    let mut interior_sum = vec![S::zero(); dim];
    let trap = |intervals: usize, ends: &[S], interior: &[S]| -> Vec<S> {
        let h = width / S::from_usize_lossy(intervals);
        ends.iter().zip(interior).map(|(&e, &i)| h * (e * S::lit(0.5) + i)).collect()
    };
    let mut prev_trap = trap(intervals, &endpoint_sum, &interior_sum);
    let mut prev_simpson: Option<Vec<S>> = None;
    loop {
        // add midpoints of the current intervals
        let h = width / S::from_usize_lossy(intervals);
        for k in 0..intervals {
            let x = a + h * (S::from_usize_lossy(k) + S::lit(0.5));
            for (acc, v) in interior_sum.iter_mut().zip(f(x)) {
                *acc = *acc + v;
            }
        }
        intervals *= 2;
        let cur_trap = trap(intervals, &endpoint_sum, &interior_sum);
        let cur_simpson: Vec<S> = cur_trap
            .iter()
            .zip(&prev_trap)
            .map(|(&t2, &t1)| (S::lit(4.0) * t2 - t1) / S::lit(3.0))
            .collect();
        if let Some(prev) = &prev_simpson {
            let diff = prev
                .iter()
                .zip(&cur_simpson)
                .fold(S::zero(), |m, (&p, &c)| m.max((p - c).abs()));
            if diff < tol && intervals >= 8 {
                return Ok(Quadrature { value: cur_simpson, panels: intervals / 2, estimate: diff });
            }
        }
        if intervals > MAX_PANELS {
            return Err(Error::ResourceGuard(format!(
                "quadrature did not reach tolerance {} within {} panels",
                tol, MAX_PANELS
            )));
        }
        prev_simpson = Some(cur_simpson);
        prev_trap = cur_trap;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_exponential() {
        let q = simpson(|t: f64| vec![(-t).exp(), t * t], 0.0, 1.0, 1e-12).unwrap();
        assert!((q.value[0] - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert!((q.value[1] - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn periodic_mean_is_exact() {
        let q = simpson(|t: f64| vec![(2.0 * std::f64::consts::PI * t).sin()], 0.0, 1.0, 1e-10).unwrap();
        assert!(q.value[0].abs() < 1e-14);
    }
}
