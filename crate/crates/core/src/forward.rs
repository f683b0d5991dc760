//! Spectral solution of `u_t = u_xx + f(x,t)·r(t, ωt)` with zero initial and
//! boundary data.
//!
//! Each sine mode obeys `u_n' = −n² u_n + f_n(t) r(t, ωt)`, so
//! `u_n(t) = ∫₀ᵗ e^{−n²(t−s)} f_n(s) r(s, ωs) ds`. For catalog data the
//! oscillatory part reduces to damped moments with complex rate `γ + ikω`,
//! which makes the cost and accuracy independent of `ω`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::quadrature::{composite_gauss, gauss_legendre};
use crate::catalog::slow::damped_moment;
use crate::catalog::{Axis, GridFunction, SineSeries, SlowFunction, SourceFactor};
use crate::error::{Error, Result};

pub const DEFAULT_MODES: usize = 32;

/// Tail estimates above this level are reported as warnings.
pub const TAIL_TOLERANCE: f64 = 1e-8;

const QUADRATURE_POINTS_PER_STEP: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatProblem {
    pub f: SineSeries,
    pub source: SourceFactor,
    pub omega: f64,
    pub horizon: f64,
    pub n_max: usize,
}

impl HeatProblem {
    pub fn new(
        f: SineSeries,
        source: SourceFactor,
        omega: f64,
        horizon: f64,
        n_max: usize,
    ) -> Result<Self> {
        let problem = Self {
            f,
            source,
            omega,
            horizon,
            n_max,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "omega",
                reason: format!("must be positive and finite, got {}", self.omega),
            });
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "horizon",
                reason: format!("must be positive and finite, got {}", self.horizon),
            });
        }
        if self.n_max == 0 {
            return Err(Error::InvalidParameter {
                name: "n_max",
                reason: "at least one mode required".into(),
            });
        }
        Ok(())
    }

    fn check_mode(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.n_max {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: format!("mode {n} outside 1..={}", self.n_max),
            });
        }
        Ok(())
    }

    /// `u_n(t)` in closed form.
    pub fn solve_mode(&self, n: usize, t: f64) -> Result<f64> {
        self.check_mode(n)?;
        let Some(f_n) = self.f.mode(n) else {
            return Ok(0.0);
        };
        Ok(mode_value(n, f_n, &self.source, self.omega, t))
    }

    /// `u_n(t)` by composite Gauss quadrature with `substeps_per_period`
    /// panels per fast period `2π/ω`; steps coarser than `π/(2ω)` are refused.
    pub fn solve_mode_quadrature(&self, n: usize, t: f64, substeps_per_period: usize) -> Result<f64> {
        self.check_mode(n)?;
        let Some(f_n) = self.f.mode(n) else {
            return Ok(0.0);
        };
        let omega = self.omega;
        solve_mode_callable(
            n,
            |s| f_n.eval(s),
            |s, tau| self.source.eval(s, tau),
            omega,
            t,
            substeps_per_period,
        )
    }

    /// Tail estimate `Σ_{n>N} sup_t |f_n| · sup_t |r| / n²` over stored modes
    /// beyond the truncation level.
    pub fn tail_estimate(&self, samples: usize) -> f64 {
        let r_sup = (0..samples.max(2))
            .map(|i| {
                let t = self.horizon * i as f64 / (samples.max(2) - 1) as f64;
                self.source.amplitude_bound(t)
            })
            .fold(0.0, f64::max);
        self.f
            .tail_modes(self.n_max)
            .map(|(n, f_n)| f_n.sup_on(0.0, self.horizon, samples) * r_sup / (n * n) as f64)
            .sum()
    }
}

/// `∫₀ᵗ e^{−n²(t−s)} f_n(s)·[r₀(s) + r₁(s, ωs)] ds` for catalog data.
pub fn mode_value(n: usize, f_n: &SlowFunction, source: &SourceFactor, omega: f64, t: f64) -> f64 {
    let lambda = (n * n) as f64;
    let mut value = (f_n * &source.r0).duhamel_at(lambda, t);
    for (k, a, b) in source.r1.harmonics() {
        let freq = k as f64 * omega;
        // cos kωs = Re e^{ikωs}, sin kωs = Im e^{ikωs}
        for term in (f_n * a).terms() {
            let rate = Complex64::new(term.rate, freq);
            value += term.coeff * damped_moment(lambda, term.power, rate, t).re;
        }
        for term in (f_n * b).terms() {
            let rate = Complex64::new(term.rate, freq);
            value += term.coeff * damped_moment(lambda, term.power, rate, t).im;
        }
    }
    value
}

/// Quadrature fallback for arbitrary callables `f_n(s)` and `r(s, τ)`.
pub fn solve_mode_callable(
    n: usize,
    f_n: impl Fn(f64) -> f64,
    r: impl Fn(f64, f64) -> f64,
    omega: f64,
    t: f64,
    substeps_per_period: usize,
) -> Result<f64> {
    if substeps_per_period == 0 {
        return Err(Error::InvalidParameter {
            name: "substeps_per_period",
            reason: "must be positive".into(),
        });
    }
    let step = 2.0 * PI / (omega * substeps_per_period as f64);
    let limit = PI / (2.0 * omega);
    if step > limit * (1.0 + 1e-12) {
        return Err(Error::UnderResolved { step, limit });
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    let lambda = (n * n) as f64;
    let panels = (t / step).ceil() as usize;
    let rule = gauss_legendre(QUADRATURE_POINTS_PER_STEP);
    let value = composite_gauss(&rule, 0.0, t, panels, |s| {
        (-lambda * (t - s)).exp() * f_n(s) * r(s, omega * s)
    });
    crate::error::ensure_finite("quadrature mode value", value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardSolution {
    /// `u_ω(x_i, t_j)` on `[0, π] × [0, T]`, x-major.
    pub field: GridFunction,
    pub tail_estimate: f64,
    pub warnings: Vec<String>,
}

/// Mode amplitudes `u_n(t_j)` for `n = 1..=N` on a time axis, time-major.
pub fn mode_table(problem: &HeatProblem, time: &Axis) -> Vec<Vec<f64>> {
    let f = problem.f.truncated(problem.n_max);
    let modes: Vec<(usize, &SlowFunction)> = f.modes().collect();
    time.points()
        .into_par_iter()
        .map(|t| {
            let mut row = vec![0.0; problem.n_max];
            for &(n, f_n) in &modes {
                row[n - 1] = mode_value(n, f_n, &problem.source, problem.omega, t);
            }
            row
        })
        .collect()
}

/// Assemble `Σ_n a_n(t_j) sin(n x_i)` from a time-major amplitude table.
pub fn synthesize(x_axis: Axis, t_axis: Axis, table: &[Vec<f64>]) -> GridFunction {
    let xs = x_axis.points();
    let values: Vec<f64> = xs
        .par_iter()
        .flat_map_iter(|&x| {
            let sines: Vec<f64> = (1..=table.first().map_or(0, Vec::len))
                .map(|n| (n as f64 * x).sin())
                .collect();
            table
                .iter()
                .map(move |row| row.iter().zip(&sines).map(|(a, s)| a * s).sum::<f64>())
                .collect::<Vec<_>>()
        })
        .collect();
    GridFunction::new_2d(x_axis, t_axis, values).expect("grid shape")
}

pub fn solve_heat(problem: &HeatProblem, x_count: usize, t_count: usize) -> Result<ForwardSolution> {
    problem.validate()?;
    let x_axis = Axis::new(0.0, PI, x_count)?;
    let t_axis = Axis::new(0.0, problem.horizon, t_count)?;
    let table = mode_table(problem, &t_axis);
    let field = synthesize(x_axis, t_axis, &table);
    let tail_estimate = problem.tail_estimate(t_count.min(257));
    let mut warnings = Vec::new();
    if tail_estimate > TAIL_TOLERANCE {
        warnings.push(format!(
            "mode truncation at N = {} leaves an estimated tail of {tail_estimate:.3e}",
            problem.n_max
        ));
    }
    Ok(ForwardSolution {
        field,
        tail_estimate,
        warnings,
    })
}

/// Restriction of a 2-D `(x, t)` field to `x = x0`, linear in `x`.
pub fn trace(u: &GridFunction, x0: f64) -> Result<GridFunction> {
    if u.dims() != 2 {
        return Err(Error::GridMismatch("trace needs a 2-D (x, t) field".into()));
    }
    let x_axis = u.axes()[0];
    if !(x0 > x_axis.start && x0 < x_axis.end) {
        return Err(Error::OutsideDomain {
            name: "x0",
            value: x0,
            upper: x_axis.end,
        });
    }
    let t_axis = u.axes()[1];
    let pos = (x0 - x_axis.start) / x_axis.step();
    let nearest = pos.round();
    let (i, theta) = if (pos - nearest).abs() < 1e-9 {
        (nearest as usize, 0.0)
    } else {
        let i = (pos.floor() as usize).min(x_axis.count - 2);
        (i, pos - i as f64)
    };
    let values = (0..t_axis.count)
        .map(|j| {
            if theta == 0.0 {
                u.at2(i, j)
            } else {
                (1.0 - theta) * u.at2(i, j) + theta * u.at2(i + 1, j)
            }
        })
        .collect();
    GridFunction::new_1d(t_axis, values)
}
