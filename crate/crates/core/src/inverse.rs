//! Source reconstruction from asymptotic observations.
//!
//! * Problem 1: `f` known, recover `r = r₀ + r₁` from traces at `x₀`.
//! * Problem 2: `r₀` known, recover a time-independent `f` from `u₀(·, t₀)`.
//! * Problem 3: `r₀` known, recover `f` and `r₁`, checking the `x₀` trace.
//! * Problem 4: recover an `N`-harmonic `f` together with `r` from traces at
//!   `N` points on a time window.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::catalog::quadrature::damped_integral_on_grid;
use crate::catalog::{
    duhamel_weight, sine_coefficients, Axis, FastProfile, GridFunction, SineSeries, SlowFunction,
    TimeSignal,
};
use crate::error::{ensure_finite, Error, Result};
use crate::volterra::{build_kernel, VolterraProblem, DEFAULT_GRID};

/// `n ∈ M₀` when `|Λ_n| < LAMBDA_TOLERANCE · n⁻²`.
pub const LAMBDA_TOLERANCE: f64 = 1e-10;
/// Default consistency tolerance, relative to `1 + ‖data‖`.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-6;
/// Default `ψ_n ≈ 0` threshold on `M₀`, relative to `1 + ‖ψ‖∞`.
pub const PSI_TOLERANCE: f64 = 1e-12;
/// Smallest admissible reciprocal condition number of `(sin n x_j)`.
pub const RCOND_THRESHOLD: f64 = 1e-10;
/// `|l(t₀)|` and `|f(x₀)|` below this are treated as zero.
pub const AMPLITUDE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseSettings {
    pub n_max: usize,
    /// Volterra grid points on `[0, T]`.
    pub grid: usize,
    pub lambda_tolerance: f64,
    /// Absolute `ψ` threshold; `None` means `PSI_TOLERANCE·(1 + ‖ψ‖∞)`.
    pub psi_tolerance: Option<f64>,
    pub consistency_tolerance: f64,
    /// Combine the Volterra solutions on `M` and `2M − 1` points by
    /// Richardson extrapolation.
    pub extrapolate: bool,
}

impl Default for InverseSettings {
    fn default() -> Self {
        Self {
            n_max: crate::forward::DEFAULT_MODES,
            grid: DEFAULT_GRID,
            lambda_tolerance: LAMBDA_TOLERANCE,
            psi_tolerance: None,
            consistency_tolerance: CONSISTENCY_TOLERANCE,
            extrapolate: true,
        }
    }
}

impl InverseSettings {
    fn solve(&self, problem: &VolterraProblem) -> Result<GridFunction> {
        if self.extrapolate {
            problem.solve_extrapolated()
        } else {
            problem.solve()
        }
    }
}

fn check_point(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x < PI {
        Ok(())
    } else {
        Err(Error::OutsideDomain {
            name,
            value: x,
            upper: PI,
        })
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {v}"),
        })
    }
}

/// `r₁ = p(t,τ)/d(t)` for a fast numerator and a slow divisor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FastQuotient {
    pub numerator: FastProfile,
    pub divisor: SlowFunction,
}

impl FastQuotient {
    pub fn eval(&self, t: f64, tau: f64) -> f64 {
        self.numerator.eval(t, tau) / self.divisor.eval(t)
    }

    /// Catalog form, available when the divisor is a single exponential.
    pub fn exact(&self) -> Option<FastProfile> {
        if self.numerator.is_zero() {
            return Some(FastProfile::zero());
        }
        self.divisor
            .reciprocal()
            .map(|inv| self.numerator.scale_slow(&inv))
    }
}

/// The `φ₁` implied by `φ₂` and `f`:
/// `φ₁(t) = −φ₂(0,0)/f(x₀,0) · Σ_n f_n(0) sin(n x₀) e^{−n²t}`.
pub fn derive_phi1(
    phi2: &FastProfile,
    f: &SineSeries,
    x0: f64,
    n_max: usize,
) -> Result<SlowFunction> {
    check_point("x0", x0)?;
    let f = f.truncated(n_max);
    let f00 = f.eval(x0, 0.0);
    if f00.abs() < AMPLITUDE_FLOOR {
        return Err(Error::VanishingAmplitude(format!(
            "f(x0, 0) = {f00:e} at x0 = {x0}"
        )));
    }
    // ⟨∫₀^τ ∂φ₂/∂τ ds⟩ = −φ₂(0,0) for zero-mean φ₂
    let c = -phi2.at_phase_zero().eval(0.0);
    if c == 0.0 {
        return Ok(SlowFunction::zero());
    }
    Ok(f.coefficients_at(0.0)
        .into_iter()
        .fold(SlowFunction::zero(), |acc, (n, f_n)| {
            &acc + &SlowFunction::exponential(
                c / f00 * f_n * (n as f64 * x0).sin(),
                -((n * n) as f64),
            )
        }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationP1 {
    pub x0: f64,
    /// `φ₀(t) = u₀(x₀, t)` on `[0, T]`.
    pub phi0: TimeSignal,
    /// `φ₂(t, τ) = v₁(x₀, t, τ)`.
    pub phi2: FastProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi1: Option<SlowFunction>,
    pub horizon: f64,
}

impl ObservationP1 {
    pub fn validate(&self) -> Result<()> {
        check_point("x0", self.x0)?;
        check_positive("horizon", self.horizon)?;
        check_trace_origin("phi0", &self.phi0, self.horizon)
    }
}

fn check_trace_origin(name: &'static str, signal: &TimeSignal, horizon: f64) -> Result<()> {
    let at_zero = signal.eval(0.0)?;
    let scale = match signal {
        TimeSignal::Catalog(f) => f.sup_on(0.0, horizon, 65),
        TimeSignal::Sampled(g) => g.sup_norm(),
    };
    if at_zero.abs() > 1e-10 * (1.0 + scale) {
        return Err(Error::InvalidParameter {
            name,
            reason: format!("trace must vanish at t = 0, got {at_zero:e}"),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P1Recovery {
    pub r0: GridFunction,
    pub r1: FastQuotient,
    /// `φ₁` implied by `φ₂` and `f`.
    pub phi1: SlowFunction,
    /// `sup |φ₁ − φ₁^{obs}|` when an observed `φ₁` is supplied.
    pub phi1_mismatch: Option<f64>,
    pub kernel_tail_bound: f64,
}

/// Recovers `r₀` from `f(x₀,t) r₀(t) + ∫₀ᵗ K(t,s) r₀(s) ds = φ₀′(t)` and
/// `r₁ = ∂φ₂/∂τ / f(x₀, t)`.
pub fn recover_problem1(
    obs: &ObservationP1,
    f: &SineSeries,
    settings: &InverseSettings,
) -> Result<P1Recovery> {
    obs.validate()?;
    let kernel = build_kernel(f, obs.x0, settings.n_max)?;
    let f = f.truncated(settings.n_max);
    let g = f.at_point(obs.x0);
    let kernel_tail_bound = kernel.tail_bound(obs.horizon);
    let problem = VolterraProblem::new(
        g.clone(),
        kernel,
        obs.phi0.derivative()?,
        obs.horizon,
        settings.grid,
    );
    let r0 = settings.solve(&problem)?;
    let phi1 = derive_phi1(&obs.phi2, &f, obs.x0, settings.n_max)?;
    let phi1_mismatch = obs
        .phi1
        .as_ref()
        .map(|p| (&phi1 - p).sup_on(0.0, obs.horizon, settings.grid));
    Ok(P1Recovery {
        r0,
        r1: FastQuotient {
            numerator: obs.phi2.derivative(),
            divisor: g,
        },
        phi1,
        phi1_mismatch,
        kernel_tail_bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSpectrum {
    pub t0: f64,
    /// `Λ_n(t₀)` for `n = 1..=N`.
    pub values: Vec<f64>,
    pub zero_set: Vec<usize>,
    /// `min_n n²Λ_n` and `max_n n²Λ_n`.
    pub scaled_min: f64,
    pub scaled_max: f64,
}

impl LambdaSpectrum {
    pub fn value(&self, n: usize) -> f64 {
        self.values[n - 1]
    }

    /// `n²Λ_n` keeps one sign and stays away from zero.
    pub fn keeps_sign(&self) -> bool {
        self.scaled_min > 0.0 || self.scaled_max < 0.0
    }
}

/// `Λ_n(t₀) = ∫₀^{t₀} e^{−n²(t₀−s)} r₀(s) ds` in closed form.
pub fn lambda_spectrum(r0: &SlowFunction, t0: f64, n_max: usize, tol: f64) -> LambdaSpectrum {
    let values: Vec<f64> = (1..=n_max).map(|n| duhamel_weight(n, r0, t0)).collect();
    let zero_set = values
        .iter()
        .enumerate()
        .filter(|&(i, v)| v.abs() < tol / ((i + 1) * (i + 1)) as f64)
        .map(|(i, _)| i + 1)
        .collect();
    let scaled = values
        .iter()
        .enumerate()
        .map(|(i, v)| ((i + 1) * (i + 1)) as f64 * v);
    let (scaled_min, scaled_max) = scaled.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    LambdaSpectrum {
        t0,
        values,
        zero_set,
        scaled_min,
        scaled_max,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationP2 {
    pub t0: f64,
    /// Sine coefficients of `ψ(x) = u₀(x, t₀)`.
    pub psi: SineSeries,
}

impl ObservationP2 {
    /// Samples `ψ` and extracts its first `n_max` sine coefficients. The
    /// second value is a warning when `n⁴|ψ_n|` grows over the upper half of
    /// the modes, which a `C⁴` profile would not do.
    pub fn from_profile(
        t0: f64,
        psi: impl Fn(f64) -> f64,
        n_max: usize,
    ) -> Result<(Self, Option<String>)> {
        let series = sine_coefficients(psi, n_max, crate::catalog::sine::DEFAULT_QUADRATURE_POINTS)?;
        let weighted: Vec<f64> = series
            .coefficients_at(0.0)
            .into_iter()
            .map(|(n, c)| (n as f64).powi(4) * c.abs())
            .collect();
        let half = weighted.len() / 2;
        let lower = weighted[..half.max(1)].iter().fold(0.0f64, |m, &v| m.max(v));
        let upper = weighted[half..].iter().fold(0.0f64, |m, &v| m.max(v));
        let warning = (upper > 10.0 * lower.max(1e-300) && upper > 1e-8).then(|| {
            format!("n^4|psi_n| grows from {lower:e} to {upper:e}: profile may not be C^4")
        });
        Ok((Self { t0, psi: series }, warning))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Solvability {
    Unique,
    /// `f_n` for the listed modes is arbitrary and was set to zero.
    NonUnique { free_modes: Vec<usize> },
    /// `ψ_n ≠ 0` while `Λ_n = 0` for the listed modes.
    Unsolvable { offending: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P2Recovery {
    /// `None` when the data admit no solution.
    pub f: Option<SineSeries>,
    pub spectrum: LambdaSpectrum,
    pub solvability: Solvability,
    pub psi_tolerance: f64,
    pub warnings: Vec<String>,
}

/// `f_n = ψ_n / Λ_n` off the zero set, with the solvability dichotomy on it.
pub fn recover_problem2(
    obs: &ObservationP2,
    r0: &SlowFunction,
    settings: &InverseSettings,
) -> Result<P2Recovery> {
    check_positive("t0", obs.t0)?;
    let spectrum = lambda_spectrum(r0, obs.t0, settings.n_max, settings.lambda_tolerance);
    let psi = obs.psi.truncated(settings.n_max);
    let coeffs: Vec<f64> = (1..=settings.n_max)
        .map(|n| psi.mode(n).map_or(0.0, |c| c.eval(obs.t0)))
        .collect();
    let psi_norm = coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let psi_tolerance = settings
        .psi_tolerance
        .unwrap_or(PSI_TOLERANCE * (1.0 + psi_norm));
    let mut warnings = Vec::new();
    if r0.eval(obs.t0).abs() < AMPLITUDE_FLOOR {
        warnings.push(format!("r0(t0) = {:e} vanishes", r0.eval(obs.t0)));
    }
    let offending: Vec<usize> = spectrum
        .zero_set
        .iter()
        .copied()
        .filter(|&n| coeffs[n - 1].abs() > psi_tolerance)
        .collect();
    if !offending.is_empty() {
        return Ok(P2Recovery {
            f: None,
            spectrum,
            solvability: Solvability::Unsolvable { offending },
            psi_tolerance,
            warnings,
        });
    }
    let mut f = SineSeries::new().with_truncation(settings.n_max);
    for n in 1..=settings.n_max {
        if !spectrum.zero_set.contains(&n) {
            let f_n = ensure_finite("recovered f_n", coeffs[n - 1] / spectrum.value(n))?;
            f.add_mode(n, &SlowFunction::constant(f_n));
        }
    }
    let solvability = if spectrum.zero_set.is_empty() {
        Solvability::Unique
    } else {
        Solvability::NonUnique {
            free_modes: spectrum.zero_set.clone(),
        }
    };
    Ok(P2Recovery {
        f: Some(f),
        spectrum,
        solvability,
        psi_tolerance,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P3Recovery {
    pub f: SineSeries,
    pub r1: FastProfile,
    pub spectrum: LambdaSpectrum,
    /// `sup_t |f(x₀)r₀ + ∫₀ᵗK r₀ − φ₀′|` on `[0, T]`.
    pub congruence_residual: f64,
    pub tolerance: f64,
    pub consistent: bool,
}

/// Problem 3: `f` from `ψ` by division, `r₁ = ∂φ₂/∂τ / f(x₀)`, and the
/// congruence check of `φ₀` against the known `r₀`.
pub fn recover_problem3(
    psi_obs: &ObservationP2,
    trace_obs: &ObservationP1,
    r0: &SlowFunction,
    settings: &InverseSettings,
) -> Result<P3Recovery> {
    trace_obs.validate()?;
    let p2 = recover_problem2(psi_obs, r0, settings)?;
    if !p2.spectrum.zero_set.is_empty() {
        return Err(Error::VanishingAmplitude(format!(
            "Lambda_n(t0) vanishes for n in {:?}",
            p2.spectrum.zero_set
        )));
    }
    let f = p2.f.expect("unique branch carries f");
    let x0 = trace_obs.x0;
    let f_x0 = f.eval(x0, 0.0);
    if f_x0.abs() < AMPLITUDE_FLOOR {
        return Err(Error::VanishingAmplitude(format!(
            "recovered f(x0) = {f_x0:e} at x0 = {x0}"
        )));
    }
    let kernel = build_kernel(&f, x0, settings.n_max)?;
    let history: Vec<(f64, SlowFunction)> = kernel
        .modes
        .iter()
        .map(|m| (m.coeff.eval(0.0), r0.duhamel(m.decay)))
        .collect();
    let dphi0 = trace_obs.phi0.derivative()?;
    let axis = Axis::new(0.0, trace_obs.horizon, settings.grid.max(2))?;
    let mut residual = 0.0f64;
    let mut scale = 0.0f64;
    for t in axis.points() {
        let target = dphi0.eval(t)?;
        let lhs = f_x0 * r0.eval(t) + history.iter().map(|(c, d)| c * d.eval(t)).sum::<f64>();
        residual = residual.max((lhs - target).abs());
        scale = scale.max(target.abs());
    }
    let tolerance = settings.consistency_tolerance * (1.0 + scale);
    Ok(P3Recovery {
        r1: trace_obs.phi2.derivative().scale(1.0 / f_x0),
        f,
        spectrum: p2.spectrum,
        congruence_residual: residual,
        tolerance,
        consistent: residual <= tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationP4 {
    pub t0: f64,
    pub delta: f64,
    /// `x₀, x₁, …, x_{N−1}`; the first point carries `φ₀` and `φ₂`.
    pub x_points: Vec<f64>,
    pub phi0: TimeSignal,
    pub phi2: FastProfile,
    /// `α_j(t) = u₀(x_j, t)` for `j = 1..N−1`.
    pub alpha: Vec<TimeSignal>,
    pub horizon: f64,
}

impl ObservationP4 {
    pub fn harmonics(&self) -> usize {
        self.x_points.len()
    }

    pub fn window(&self) -> (f64, f64) {
        (self.t0 - self.delta, self.t0 + self.delta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_points.is_empty() {
            return Err(Error::InvalidParameter {
                name: "x_points",
                reason: "at least one observation point required".into(),
            });
        }
        for &x in &self.x_points {
            check_point("x_points", x)?;
        }
        for (i, a) in self.x_points.iter().enumerate() {
            if self.x_points[..i].iter().any(|b| (a - b).abs() < 1e-12) {
                return Err(Error::InvalidParameter {
                    name: "x_points",
                    reason: format!("duplicate observation point {a}"),
                });
            }
        }
        if self.alpha.len() + 1 != self.x_points.len() {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!(
                    "{} traces for {} points; expected one per point after x0",
                    self.alpha.len(),
                    self.x_points.len()
                ),
            });
        }
        check_positive("horizon", self.horizon)?;
        check_positive("delta", self.delta)?;
        let (lo, hi) = self.window();
        if !(lo > 0.0 && hi <= self.horizon) {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: format!("window [{lo}, {hi}] must lie in (0, {}]", self.horizon),
            });
        }
        check_trace_origin("phi0", &self.phi0, self.horizon)
    }

    /// `A_{jn} = sin(n x_j)`.
    pub fn point_matrix(&self) -> DMatrix<f64> {
        let n = self.harmonics();
        DMatrix::from_fn(n, n, |j, k| ((k + 1) as f64 * self.x_points[j]).sin())
    }

    fn traces(&self) -> impl Iterator<Item = &TimeSignal> {
        std::iter::once(&self.phi0).chain(&self.alpha)
    }
}

/// `σ_min/σ_max` of the point matrix.
pub fn reciprocal_condition(a: &DMatrix<f64>) -> f64 {
    let sv = a.singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

fn solve_points(a: &DMatrix<f64>, rhs: Vec<f64>) -> Result<Vec<f64>> {
    let rcond = reciprocal_condition(a);
    if rcond.is_nan() || rcond < RCOND_THRESHOLD {
        return Err(Error::IllConditioned {
            rcond,
            threshold: RCOND_THRESHOLD,
        });
    }
    let b = DVector::from_vec(rhs);
    let x = a.clone().lu().solve(&b).ok_or(Error::IllConditioned {
        rcond,
        threshold: RCOND_THRESHOLD,
    })?;
    x.iter()
        .map(|&v| ensure_finite("point system solution", v))
        .collect()
}

/// `Σ_n ψ_n sin n x_j = (φ₀(t₀), α_j(t₀))`.
pub fn solve_psi_system(obs: &ObservationP4) -> Result<Vec<f64>> {
    let rhs = obs
        .traces()
        .map(|s| s.eval(obs.t0))
        .collect::<Result<Vec<_>>>()?;
    solve_points(&obs.point_matrix(), rhs)
}

/// `Σ_n f_n sin n x_j = Σ_n n²ψ_n sin n x_j + (φ₀′(t₀), α_j′(t₀))`.
pub fn solve_f_system(obs: &ObservationP4, psi: &[f64]) -> Result<Vec<f64>> {
    let a = obs.point_matrix();
    let weighted = DVector::from_iterator(
        psi.len(),
        psi.iter()
            .enumerate()
            .map(|(i, p)| ((i + 1) * (i + 1)) as f64 * p),
    );
    let base = &a * weighted;
    let rhs = obs
        .traces()
        .zip(base.iter())
        .map(|(s, b)| Ok(b + s.derivative()?.eval(obs.t0)?))
        .collect::<Result<Vec<_>>>()?;
    solve_points(&a, rhs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P4Recovery {
    pub psi: Vec<f64>,
    /// Solution of the `f` system before normalization.
    pub f_system: Vec<f64>,
    /// `f` rescaled by `l(t₀)` so that `r₀(t₀) = 1`.
    pub f: SineSeries,
    pub scale: f64,
    pub r0: GridFunction,
    pub r1: FastProfile,
    pub rcond: f64,
    /// `sup_window |Σ_n sin(n x_j) F_n ∫₀ᵗ e^{−n²(t−s)} r₀ ds − α_j(t)|`, per `j`.
    pub point_residuals: Vec<f64>,
    pub consistency_residual: f64,
    pub tolerance: f64,
    pub consistent: bool,
}

/// Problem 4 pipeline: point systems, Volterra equation for `r₀`,
/// normalization `r₀(t₀) = 1` and the window consistency check.
pub fn recover_problem4(obs: &ObservationP4, settings: &InverseSettings) -> Result<P4Recovery> {
    obs.validate()?;
    let n = obs.harmonics();
    let rcond = reciprocal_condition(&obs.point_matrix());
    let psi = solve_psi_system(obs)?;
    let f_system = solve_f_system(obs, &psi)?;
    let x0 = obs.x_points[0];
    let series = |coeffs: &[f64]| {
        let pairs: Vec<(usize, f64)> = coeffs.iter().enumerate().map(|(i, &c)| (i + 1, c)).collect();
        SineSeries::from_constants(&pairs).with_truncation(n)
    };
    let f_raw = series(&f_system);
    let f_x0 = f_raw.eval(x0, 0.0);
    let f_norm = f_system.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if f_x0.abs() < AMPLITUDE_FLOOR * (1.0 + f_norm) {
        return Err(Error::VanishingAmplitude(format!(
            "sum_n f_n sin(n x0) = {f_x0:e}"
        )));
    }
    let problem = VolterraProblem::new(
        SlowFunction::constant(f_x0),
        build_kernel(&f_raw, x0, n)?,
        obs.phi0.derivative()?,
        obs.horizon,
        settings.grid,
    );
    let l = settings.solve(&problem)?;
    let scale = l.interpolate_cubic(obs.t0)?;
    if scale.abs() < AMPLITUDE_FLOOR {
        return Err(Error::VanishingAmplitude(format!(
            "l(t0) = {scale:e} cannot be normalized"
        )));
    }
    let r0 = l.map(|v| v / scale);
    let f_coeffs: Vec<f64> = f_system.iter().map(|c| c * scale).collect();
    let f = series(&f_coeffs);

    let (lo, hi) = obs.window();
    // grid nodes inside the window plus both window ends
    let mut window: Vec<f64> = r0
        .axis()
        .points()
        .into_iter()
        .filter(|&t| t > lo && t < hi)
        .collect();
    window.push(lo);
    window.push(hi);
    let duhamel = (1..=n)
        .map(|k| damped_integral_on_grid((k * k) as f64, &r0))
        .collect::<Result<Vec<_>>>()?;
    let mut point_residuals = Vec::with_capacity(obs.alpha.len());
    let mut alpha_norm = 0.0f64;
    for (j, alpha) in obs.alpha.iter().enumerate() {
        let xj = obs.x_points[j + 1];
        let mut worst = 0.0f64;
        for &t in &window {
            let mut model = 0.0;
            for k in 1..=n {
                model += (k as f64 * xj).sin() * f_coeffs[k - 1] * duhamel[k - 1].interpolate_cubic(t)?;
            }
            let target = alpha.eval(t)?;
            alpha_norm = alpha_norm.max(target.abs());
            worst = worst.max((model - target).abs());
        }
        point_residuals.push(worst);
    }
    let consistency_residual = point_residuals.iter().fold(0.0f64, |m, &v| m.max(v));
    let tolerance = settings.consistency_tolerance * (1.0 + alpha_norm);
    Ok(P4Recovery {
        r1: obs.phi2.derivative().scale(1.0 / f.eval(x0, 0.0)),
        psi,
        f_system,
        f,
        scale,
        r0,
        rcond,
        point_residuals,
        consistency_residual,
        tolerance,
        consistent: consistency_residual <= tolerance,
    })
}
