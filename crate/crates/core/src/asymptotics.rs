//! Two-term two-scale expansion `U_ω = u₀ + ω⁻¹(u₁ + v₁(·, ·, ωt))`.
//!
//! * `u₀` solves the averaged problem `u₀_t = u₀_xx + f·r₀`;
//! * `v₁ = f·Φ` with `Φ` the zero-mean fast antiderivative of `r₁`;
//! * `u₁` is the heat-semigroup evolution of `−v₁(x, 0, 0)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{Axis, FastProfile, GridFunction, SineSeries, SlowFunction, SourceFactor};
use crate::error::{Error, Result};
use crate::forward::{mode_table, synthesize, HeatProblem};

/// Minimum number of time samples per fast period `2π/ω` in residual grids.
pub const POINTS_PER_PERIOD: usize = 16;

/// Leading term `u₀(x,t) = Σ_n sin nx ∫₀ᵗ e^{−n²(t−s)} f_n(s) r₀(s) ds`,
/// stored as closed-form mode amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadingTerm {
    f: SineSeries,
    r0: SlowFunction,
    modes: Vec<(usize, SlowFunction)>,
}

pub fn leading_term(f: &SineSeries, r0: &SlowFunction, n_max: usize) -> LeadingTerm {
    let f = f.truncated(n_max);
    let modes = f
        .modes()
        .map(|(n, f_n)| (n, (f_n * r0).duhamel((n * n) as f64)))
        .filter(|(_, m)| !m.is_zero())
        .collect();
    LeadingTerm {
        f,
        r0: r0.clone(),
        modes,
    }
}

impl LeadingTerm {
    pub fn modes(&self) -> &[(usize, SlowFunction)] {
        &self.modes
    }

    pub fn mode(&self, n: usize) -> Option<&SlowFunction> {
        self.modes.iter().find(|(m, _)| *m == n).map(|(_, f)| f)
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.modes
            .iter()
            .map(|(n, a)| a.eval(t) * (*n as f64 * x).sin())
            .sum()
    }

    /// `t ↦ u₀(x₀, t)` in closed form.
    pub fn trace(&self, x0: f64) -> SlowFunction {
        self.modes.iter().fold(SlowFunction::zero(), |acc, (n, a)| {
            &acc + &a.scale((*n as f64 * x0).sin())
        })
    }

    /// `∂u₀/∂t − ∂²u₀/∂x² − f·r₀` from the closed-form mode derivatives.
    pub fn pde_residual(&self, x: f64, t: f64) -> f64 {
        let r0 = self.r0.eval(t);
        self.f
            .modes()
            .map(|(n, f_n)| {
                let lambda = (n * n) as f64;
                let (a, da) = self
                    .mode(n)
                    .map_or((0.0, 0.0), |a| (a.eval(t), a.derivative().eval(t)));
                (da + lambda * a - f_n.eval(t) * r0) * (n as f64 * x).sin()
            })
            .sum()
    }
}

/// Fast corrector `v₁(x,t,τ) = f(x,t)·Φ(t,τ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FastCorrector {
    f: SineSeries,
    profile: FastProfile,
}

pub fn corrector_v1(f: &SineSeries, r1: &FastProfile) -> FastCorrector {
    FastCorrector {
        f: f.clone(),
        profile: r1.antiderivative_zero_mean(),
    }
}

impl FastCorrector {
    /// `Φ(t, τ)`, the zero-mean fast antiderivative of `r₁`.
    pub fn profile(&self) -> &FastProfile {
        &self.profile
    }

    pub fn eval(&self, x: f64, t: f64, tau: f64) -> f64 {
        if self.profile.is_zero() {
            return 0.0;
        }
        self.f.eval(x, t) * self.profile.eval(t, tau)
    }

    /// `τ ↦ v₁(x₀, t, τ)` as a fast profile.
    pub fn trace(&self, x0: f64) -> FastProfile {
        self.profile.scale_slow(&self.f.at_point(x0))
    }
}

/// Initial-layer term `u₁(x,t) = c·Σ_n f_n(0) sin nx e^{−n²t}` with
/// `c = ⟨∫₀^τ r₁(0,s) ds⟩_τ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialLayer {
    amplitude: f64,
    modes: Vec<(usize, f64)>,
}

pub fn initial_layer_u1(f: &SineSeries, r1: &FastProfile, n_max: usize) -> InitialLayer {
    let amplitude = r1.antiderivative_mean().eval(0.0);
    let modes = if amplitude == 0.0 {
        Vec::new()
    } else {
        f.truncated(n_max)
            .coefficients_at(0.0)
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .collect()
    };
    InitialLayer { amplitude, modes }
}

impl InitialLayer {
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Amplitude of mode `n` at time `t`.
    pub fn mode_value(&self, n: usize, t: f64) -> f64 {
        self.modes
            .iter()
            .find(|(m, _)| *m == n)
            .map_or(0.0, |(_, c)| self.amplitude * c * (-((n * n) as f64) * t).exp())
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.modes
            .iter()
            .map(|&(n, c)| self.amplitude * c * (n as f64 * x).sin() * (-((n * n) as f64) * t).exp())
            .sum()
    }

    /// `t ↦ u₁(x₀, t)` in closed form.
    pub fn trace(&self, x0: f64) -> SlowFunction {
        self.modes.iter().fold(SlowFunction::zero(), |acc, &(n, c)| {
            &acc + &SlowFunction::exponential(
                self.amplitude * c * (n as f64 * x0).sin(),
                -((n * n) as f64),
            )
        })
    }
}

/// Truncation level of the expansion used in residual measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExpansionOrder {
    /// `u₀` only.
    First,
    /// `u₀ + ω⁻¹(u₁ + v₁)`.
    Second,
}

impl TryFrom<u8> for ExpansionOrder {
    type Error = Error;

    fn try_from(order: u8) -> Result<Self> {
        match order {
            1 => Ok(Self::First),
            2 => Ok(Self::Second),
            _ => Err(Error::InvalidParameter {
                name: "order",
                reason: format!("expansion order must be 1 or 2, got {order}"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticExpansion {
    pub u0: LeadingTerm,
    pub v1: FastCorrector,
    pub u1: InitialLayer,
    pub horizon: f64,
}

impl AsymptoticExpansion {
    pub fn new(f: &SineSeries, source: &SourceFactor, n_max: usize, horizon: f64) -> Self {
        let f = f.truncated(n_max);
        Self {
            u0: leading_term(&f, &source.r0, n_max),
            v1: corrector_v1(&f, &source.r1),
            u1: initial_layer_u1(&f, &source.r1, n_max),
            horizon,
        }
    }

    pub fn from_problem(problem: &HeatProblem) -> Self {
        Self::new(&problem.f, &problem.source, problem.n_max, problem.horizon)
    }

    pub fn eval(&self, x: f64, t: f64, omega: f64, order: ExpansionOrder) -> f64 {
        let lead = self.u0.eval(x, t);
        match order {
            ExpansionOrder::First => lead,
            ExpansionOrder::Second => {
                lead + (self.u1.eval(x, t) + self.v1.eval(x, t, omega * t)) / omega
            }
        }
    }

    /// `U_ω` on `[0, π] × [0, T]`.
    pub fn compose(&self, omega: f64, x_count: usize, t_count: usize) -> Result<GridFunction> {
        check_omega(omega)?;
        let x_axis = Axis::new(0.0, PI, x_count)?;
        let t_axis = Axis::new(0.0, self.horizon, t_count)?;
        Ok(self.field(omega, ExpansionOrder::Second, x_axis, t_axis))
    }

    fn field(&self, omega: f64, order: ExpansionOrder, x_axis: Axis, t_axis: Axis) -> GridFunction {
        let ts = t_axis.points();
        let values: Vec<f64> = x_axis
            .points()
            .par_iter()
            .flat_map_iter(|&x| {
                ts.iter()
                    .map(move |&t| self.eval(x, t, omega, order))
                    .collect::<Vec<_>>()
            })
            .collect();
        GridFunction::new_2d(x_axis, t_axis, values).expect("grid shape")
    }

    /// Matching defect `u₁(x, 0) + v₁(x, 0, 0)`.
    pub fn matching_defect(&self, x: f64) -> f64 {
        self.u1.eval(x, 0.0) + self.v1.eval(x, 0.0, 0.0)
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "omega",
            reason: format!("must be positive and finite, got {omega}"),
        })
    }
}

/// Smallest time-grid count with at least [`POINTS_PER_PERIOD`] samples per
/// fast period on `[0, T]`.
pub fn resolving_time_count(omega: f64, horizon: f64) -> usize {
    (POINTS_PER_PERIOD as f64 * omega * horizon / (2.0 * PI)).ceil() as usize + 1
}

/// `sup |u_ω − U|` over the grid, where `U` is the expansion truncated at
/// `order`. Grids with fewer than [`POINTS_PER_PERIOD`] time samples per
/// fast period are rejected.
pub fn residual_norm(
    problem: &HeatProblem,
    expansion: &AsymptoticExpansion,
    order: ExpansionOrder,
    x_count: usize,
    t_count: usize,
) -> Result<f64> {
    problem.validate()?;
    let x_axis = Axis::new(0.0, PI, x_count)?;
    let t_axis = Axis::new(0.0, problem.horizon, t_count)?;
    let per_period = (t_count - 1) as f64 * 2.0 * PI / (problem.omega * problem.horizon);
    if per_period < POINTS_PER_PERIOD as f64 {
        return Err(Error::CoarseGrid {
            per_period,
            required: POINTS_PER_PERIOD,
        });
    }
    let exact = synthesize(x_axis, t_axis, &mode_table(problem, &t_axis));
    let approx = expansion.field(problem.omega, order, x_axis, t_axis);
    exact.sup_diff(&approx)
}
