//! Second-kind Volterra equations `g(t)l(t) + ∫₀ᵗ K(t,s) l(s) ds = μ(t)`
//! solved by product-trapezoidal marching.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::catalog::{Axis, GridFunction, SineSeries, SlowFunction, TimeSignal};
use crate::error::{ensure_finite, Error, Result};

pub const DEFAULT_GRID: usize = 2048;
pub const DEFAULT_DIAGONAL_FLOOR: f64 = 1e-8;

/// Step denominators below this magnitude abort the march.
pub const SINGULAR_DENOMINATOR: f64 = 1e-12;

/// `|sin n x₀|` below this is treated as an exact node.
pub const NODE_TOLERANCE: f64 = 1e-13;

/// One separable piece `c(s)·e^{−λ(t−s)}` of a kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMode {
    pub decay: f64,
    pub coeff: SlowFunction,
}

/// `K(t,s) = Σ c_n(s)·e^{−λ_n(t−s)}` with the discarded modes kept for a
/// truncation bound.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModalKernel {
    pub modes: Vec<KernelMode>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tail: Vec<KernelMode>,
}

impl ModalKernel {
    pub fn new(modes: Vec<KernelMode>) -> Self {
        Self {
            modes,
            tail: Vec::new(),
        }
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        self.modes
            .iter()
            .map(|m| m.coeff.eval(s) * (-m.decay * (t - s)).exp())
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.modes.iter().all(|m| m.coeff.is_zero())
    }

    /// `Σ_tail sup_{[0,T]} |c_n|`, a bound on the dropped part of `K`.
    pub fn tail_bound(&self, horizon: f64) -> f64 {
        self.tail
            .iter()
            .map(|m| m.coeff.sup_on(0.0, horizon, 257))
            .sum()
    }
}

pub type KernelFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Kernel {
    Modal(ModalKernel),
    General(KernelFn),
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Modal(k) => f.debug_tuple("Modal").field(k).finish(),
            Kernel::General(_) => f.write_str("General(<fn>)"),
        }
    }
}

impl Kernel {
    pub fn general(k: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Kernel::General(Arc::new(k))
    }

    pub fn zero() -> Self {
        Kernel::Modal(ModalKernel::default())
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        match self {
            Kernel::Modal(k) => k.eval(t, s),
            Kernel::General(k) => k(t, s),
        }
    }
}

impl From<ModalKernel> for Kernel {
    fn from(k: ModalKernel) -> Self {
        Kernel::Modal(k)
    }
}

/// `K(t,s) = −Σ_{n≤N} n² f_n(s) sin(n x₀) e^{−n²(t−s)}`.
pub fn build_kernel(f: &SineSeries, x0: f64, n_max: usize) -> Result<ModalKernel> {
    if !(x0 > 0.0 && x0 < PI) {
        return Err(Error::OutsideDomain {
            name: "x0",
            value: x0,
            upper: PI,
        });
    }
    let mode = |n: usize, f_n: &SlowFunction| {
        let lambda = (n * n) as f64;
        // x₀ on a node of sin nx: drop the rounding residue of sin(nx₀)
        let sine = (n as f64 * x0).sin();
        let sine = if sine.abs() < NODE_TOLERANCE { 0.0 } else { sine };
        KernelMode {
            decay: lambda,
            coeff: f_n.scale(-lambda * sine),
        }
    };
    let keep = |m: &KernelMode| !m.coeff.is_zero();
    let limit = f.truncation().map_or(n_max, |m| m.min(n_max));
    Ok(ModalKernel {
        modes: f
            .modes()
            .filter(|&(n, _)| n <= limit)
            .map(|(n, c)| mode(n, c))
            .filter(keep)
            .collect(),
        tail: f
            .tail_modes(limit)
            .map(|(n, c)| mode(n, c))
            .filter(keep)
            .collect(),
    })
}

#[derive(Debug, Clone)]
pub struct VolterraProblem {
    pub diagonal: TimeSignal,
    pub kernel: Kernel,
    pub rhs: TimeSignal,
    pub horizon: f64,
    pub grid_count: usize,
    pub diagonal_floor: f64,
}

impl VolterraProblem {
    pub fn new(
        diagonal: impl Into<TimeSignal>,
        kernel: impl Into<Kernel>,
        rhs: impl Into<TimeSignal>,
        horizon: f64,
        grid_count: usize,
    ) -> Self {
        Self {
            diagonal: diagonal.into(),
            kernel: kernel.into(),
            rhs: rhs.into(),
            horizon,
            grid_count,
            diagonal_floor: DEFAULT_DIAGONAL_FLOOR,
        }
    }

    pub fn with_grid(&self, grid_count: usize) -> Self {
        Self {
            grid_count,
            ..self.clone()
        }
    }

    pub fn axis(&self) -> Result<Axis> {
        Axis::new(0.0, self.horizon, self.grid_count)
    }

    fn sample(&self, axis: &Axis) -> Result<(Vec<f64>, Vec<f64>)> {
        let ts = axis.points();
        let mut g = Vec::with_capacity(ts.len());
        let mut mu = Vec::with_capacity(ts.len());
        for &t in &ts {
            let gi = ensure_finite("Volterra diagonal", self.diagonal.eval(t)?)?;
            if gi.abs() < self.diagonal_floor {
                return Err(Error::DegenerateDiagonal {
                    t,
                    value: gi,
                    floor: self.diagonal_floor,
                });
            }
            g.push(gi);
            mu.push(ensure_finite("Volterra right-hand side", self.rhs.eval(t)?)?);
        }
        Ok((g, mu))
    }

    /// Product-trapezoidal solution on `grid_count` equispaced nodes of `[0, T]`.
    pub fn solve(&self) -> Result<GridFunction> {
        let axis = self.axis()?;
        let (g, mu) = self.sample(&axis)?;
        let ts = axis.points();
        let h = axis.step();
        let l = match &self.kernel {
            Kernel::Modal(k) => march_modal(k, &ts, h, &g, &mu)?,
            Kernel::General(k) => march_general(k.as_ref(), &ts, h, &g, &mu)?,
        };
        GridFunction::new_1d(axis, l)
    }

    /// Richardson combination `(4·l_{h/2} − l_h)/3` of the solutions on this
    /// grid and on its midpoint refinement, reported on this grid.
    pub fn solve_extrapolated(&self) -> Result<GridFunction> {
        let coarse = self.solve()?;
        let fine = self.with_grid(2 * self.grid_count - 1).solve()?;
        let values = coarse
            .values()
            .iter()
            .enumerate()
            .map(|(i, &c)| (4.0 * fine.at(2 * i) - c) / 3.0)
            .collect();
        GridFunction::new_1d(*coarse.axis(), values)
    }

    /// `max_i |g_i l_i + h Σ_j w_ij K(t_i,t_j) l_j − μ_i|` evaluated directly
    /// with the trapezoid weights used by [`solve`](Self::solve).
    pub fn discrete_residual(&self, l: &GridFunction) -> Result<f64> {
        let axis = self.axis()?;
        if l.axes() != [axis] {
            return Err(Error::GridMismatch(
                "solution grid differs from the problem grid".into(),
            ));
        }
        let (g, mu) = self.sample(&axis)?;
        let ts = axis.points();
        let h = axis.step();
        let lv = l.values();
        let mut worst = (g[0] * lv[0] - mu[0]).abs();
        for i in 1..ts.len() {
            let mut sum = 0.5 * (self.kernel.eval(ts[i], ts[0]) * lv[0]
                + self.kernel.eval(ts[i], ts[i]) * lv[i]);
            for j in 1..i {
                sum += self.kernel.eval(ts[i], ts[j]) * lv[j];
            }
            worst = worst.max((g[i] * lv[i] + h * sum - mu[i]).abs());
        }
        Ok(worst)
    }
}

fn step_value(t: f64, numerator: f64, denominator: f64) -> Result<f64> {
    if denominator.abs() < SINGULAR_DENOMINATOR {
        return Err(Error::SingularVolterra { t, denominator });
    }
    ensure_finite("Volterra solution", numerator / denominator)
}

fn march_general(
    k: &(dyn Fn(f64, f64) -> f64 + Send + Sync),
    ts: &[f64],
    h: f64,
    g: &[f64],
    mu: &[f64],
) -> Result<Vec<f64>> {
    let mut l = Vec::with_capacity(ts.len());
    l.push(step_value(ts[0], mu[0], g[0])?);
    for i in 1..ts.len() {
        let mut sum = 0.5 * k(ts[i], ts[0]) * l[0];
        for j in 1..i {
            sum += k(ts[i], ts[j]) * l[j];
        }
        let denominator = g[i] + 0.5 * h * k(ts[i], ts[i]);
        l.push(step_value(ts[i], mu[i] - h * sum, denominator)?);
    }
    Ok(l)
}

/// Same scheme as [`march_general`] with the history sum of each mode
/// carried forward: `acc(i+1) = e^{−λ(t_{i+1}−t_i)}(acc(i) + w_i c(t_i) l_i)`.
fn march_modal(k: &ModalKernel, ts: &[f64], h: f64, g: &[f64], mu: &[f64]) -> Result<Vec<f64>> {
    let mut l = Vec::with_capacity(ts.len());
    l.push(step_value(ts[0], mu[0], g[0])?);
    let mut acc = vec![0.0; k.modes.len()];
    let mut c_prev: Vec<f64> = k.modes.iter().map(|m| m.coeff.eval(ts[0])).collect();
    for i in 1..ts.len() {
        let dt = ts[i] - ts[i - 1];
        let weight = if i == 1 { 0.5 } else { 1.0 };
        let mut history = 0.0;
        let mut diag = 0.0;
        for (n, m) in k.modes.iter().enumerate() {
            acc[n] = (-m.decay * dt).exp() * (acc[n] + weight * c_prev[n] * l[i - 1]);
            history += acc[n];
            c_prev[n] = m.coeff.eval(ts[i]);
            diag += c_prev[n];
        }
        let denominator = g[i] + 0.5 * h * diag;
        l.push(step_value(ts[i], mu[i] - h * history, denominator)?);
    }
    Ok(l)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceFlag {
    Regular,
    /// Errors already at rounding level; no order can be read off.
    Degenerate,
    /// Errors did not decrease along the ladder.
    NonMonotone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub grids: Vec<usize>,
    pub steps: Vec<f64>,
    /// Sup errors against the reference, or successive differences in
    /// Richardson mode (one fewer entry than `grids`).
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log h`.
    pub order: Option<f64>,
    pub flag: ConvergenceFlag,
}

/// Observed order of [`VolterraProblem::solve`] along a ladder of grid counts.
///
/// With a `reference` the error on each grid is the sup distance to it;
/// otherwise each solution is compared with the next finer one, sampled at the
/// coarse nodes by cubic interpolation.
pub fn convergence_order(
    problem: &VolterraProblem,
    ladder: &[usize],
    reference: Option<&dyn Fn(f64) -> f64>,
) -> Result<ConvergenceReport> {
    let needed = if reference.is_some() { 2 } else { 3 };
    if ladder.len() < needed {
        return Err(Error::InvalidParameter {
            name: "ladder",
            reason: format!("at least {needed} grids required"),
        });
    }
    let solutions = ladder
        .iter()
        .map(|&m| problem.with_grid(m).solve())
        .collect::<Result<Vec<_>>>()?;
    let steps: Vec<f64> = solutions.iter().map(|s| s.axis().step()).collect();
    let mut scale = 0.0f64;
    let (errors, hs) = match reference {
        Some(exact) => {
            let errors = solutions
                .iter()
                .map(|s| {
                    s.axis()
                        .points()
                        .into_iter()
                        .zip(s.values())
                        .map(|(t, v)| {
                            let e = exact(t);
                            scale = scale.max(e.abs());
                            (v - e).abs()
                        })
                        .fold(0.0, f64::max)
                })
                .collect::<Vec<_>>();
            (errors, steps.clone())
        }
        None => {
            let mut errors = Vec::with_capacity(solutions.len() - 1);
            for pair in solutions.windows(2) {
                let mut e = 0.0f64;
                for (t, v) in pair[0].axis().points().into_iter().zip(pair[0].values()) {
                    scale = scale.max(v.abs());
                    e = e.max((v - pair[1].interpolate_cubic(t)?).abs());
                }
                errors.push(e);
            }
            (errors, steps[..steps.len() - 1].to_vec())
        }
    };
    let rounding = 1e-13 * (1.0 + scale);
    let (order, flag) = if errors.iter().all(|&e| e <= rounding) {
        (None, ConvergenceFlag::Degenerate)
    } else {
        let slope = log_slope(&hs, &errors);
        let monotone = errors.windows(2).all(|w| w[1] < w[0]);
        let flag = if monotone {
            ConvergenceFlag::Regular
        } else {
            ConvergenceFlag::NonMonotone
        };
        (Some(slope), flag)
    };
    Ok(ConvergenceReport {
        grids: ladder.to_vec(),
        steps,
        errors,
        order,
        flag,
    })
}

fn log_slope(hs: &[f64], errors: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = hs
        .iter()
        .zip(errors)
        .filter(|(_, &e)| e > 0.0)
        .map(|(&h, &e)| (h.ln(), e.ln()))
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x / n, b + y / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| {
        (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
    });
    sxy / sxx
}
