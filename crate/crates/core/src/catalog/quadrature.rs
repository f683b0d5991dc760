//! Quadrature fallbacks for sampled or callable data.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use super::grid::GridFunction;
use super::slow::damped_moment;
use crate::error::{Error, Result};

pub fn gauss_legendre(points: usize) -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(points.max(1)).expect("nonzero"))
}

/// Composite Gauss-Legendre over `panels` equal subintervals of `[a, b]`.
pub fn composite_gauss(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    panels: usize,
    mut f: impl FnMut(f64) -> f64,
) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == panels { b } else { lo + h };
            rule.integrate(lo, hi, &mut f)
        })
        .sum()
}

/// `t_i ↦ ∫_{t_0}^{t_i} e^{−λ(t_i−s)} q(s) ds` on every node of a 1-D grid,
/// where `q` is the piecewise-quadratic interpolant of the samples.
///
/// Each step uses exact exponential weights against the local quadratic
/// (nodes `i−1, i, i+1`, or `0, 1, 2` on the first cell), so the result is
/// third-order accurate independently of `λh`.
pub fn damped_integral_on_grid(lambda: f64, samples: &GridFunction) -> Result<GridFunction> {
    if samples.dims() != 1 {
        return Err(Error::GridMismatch("damped integral needs a 1-D grid".into()));
    }
    let axis = *samples.axis();
    if axis.count < 3 {
        return Err(Error::InvalidParameter {
            name: "count",
            reason: "quadratic interpolation needs at least 3 nodes".into(),
        });
    }
    let h = axis.step();
    let zero = Complex64::new(0.0, 0.0);
    let mu0 = damped_moment(lambda, 0, zero, h).re;
    let mu1 = damped_moment(lambda, 1, zero, h).re;
    let mu2 = damped_moment(lambda, 2, zero, h).re;
    let h2 = h * h;
    let centered = [
        (mu2 - h * mu1) / (2.0 * h2),
        (h2 * mu0 - mu2) / h2,
        (mu2 + h * mu1) / (2.0 * h2),
    ];
    let first = [
        (mu2 - 3.0 * h * mu1 + 2.0 * h2 * mu0) / (2.0 * h2),
        (2.0 * h * mu1 - mu2) / h2,
        (mu2 - h * mu1) / (2.0 * h2),
    ];
    let decay = (-lambda * h).exp();
    let v = samples.values();
    let mut out = vec![0.0; axis.count];
    for i in 0..axis.count - 1 {
        let local = if i == 0 {
            first[0] * v[0] + first[1] * v[1] + first[2] * v[2]
        } else {
            centered[0] * v[i - 1] + centered[1] * v[i] + centered[2] * v[i + 1]
        };
        out[i + 1] = decay * out[i] + local;
    }
    GridFunction::new_1d(axis, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::grid::Axis;
    use crate::catalog::slow::SlowFunction;

    #[test]
    fn composite_gauss_integrates_oscillation() {
        let rule = gauss_legendre(16);
        let v = composite_gauss(&rule, 0.0, 3.0, 40, |x| (20.0 * x).cos());
        assert!((v - (60.0f64).sin() / 20.0).abs() < 1e-14);
    }

    #[test]
    fn damped_integral_exact_for_quadratics() {
        let axis = Axis::new(0.0, 2.0, 41).unwrap();
        let g = SlowFunction::new(vec![
            crate::catalog::slow::Term::new(1.0, 2, 0.0),
            crate::catalog::slow::Term::new(-0.5, 1, 0.0),
            crate::catalog::slow::Term::new(0.25, 0, 0.0),
        ]);
        let samples = GridFunction::from_fn_1d(axis, |t| g.eval(t));
        for &lambda in &[0.0, 1.0, 9.0, 400.0] {
            let got = damped_integral_on_grid(lambda, &samples).unwrap();
            let exact = g.duhamel(lambda);
            for (i, t) in axis.points().into_iter().enumerate() {
                assert!((got.at(i) - exact.eval(t)).abs() < 1e-13, "λ={lambda} t={t}");
            }
        }
    }

    #[test]
    fn damped_integral_third_order() {
        let g = SlowFunction::exponential(1.0, 1.3);
        let err = |count: usize| {
            let axis = Axis::new(0.0, 1.0, count).unwrap();
            let s = GridFunction::from_fn_1d(axis, |t| g.eval(t));
            let got = damped_integral_on_grid(4.0, &s).unwrap();
            let exact = g.duhamel(4.0);
            axis.points()
                .into_iter()
                .enumerate()
                .map(|(i, t)| (got.at(i) - exact.eval(t)).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(65) / err(129);
        assert!(ratio > 7.0, "ratio {ratio}");
    }
}
