//! Sine series on `[0, π]` with slow-time coefficients.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::grid::{Axis, GridFunction};
use super::quadrature::{composite_gauss, gauss_legendre};
use super::slow::SlowFunction;
use crate::error::{ensure_finite, Error, Result};

/// Default Gauss-Legendre points per mode oscillation for coefficient
/// extraction; doubled until successive results agree.
pub const DEFAULT_QUADRATURE_POINTS: usize = 64;
const COEFFICIENT_AGREEMENT: f64 = 1e-12;
const MAX_QUADRATURE_POINTS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModeRecord {
    n: usize,
    coeff: SlowFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SeriesRecord {
    modes: Vec<ModeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_max: Option<usize>,
}

/// `f(x, t) = Σ_n f_n(t) sin nx`.
///
/// Vanishes at `x = 0` and `x = π` by construction.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeriesRecord", into = "SeriesRecord")]
pub struct SineSeries {
    modes: BTreeMap<usize, SlowFunction>,
    n_max: Option<usize>,
}

impl TryFrom<SeriesRecord> for SineSeries {
    type Error = Error;

    fn try_from(record: SeriesRecord) -> Result<Self> {
        let mut out = Self::new();
        for mode in record.modes {
            if mode.n == 0 {
                return Err(Error::InvalidParameter {
                    name: "n",
                    reason: "sine modes start at n = 1".into(),
                });
            }
            out.add_mode(mode.n, &mode.coeff);
        }
        out.n_max = record.n_max;
        Ok(out)
    }
}

impl From<SineSeries> for SeriesRecord {
    fn from(s: SineSeries) -> Self {
        SeriesRecord {
            modes: s
                .modes
                .into_iter()
                .map(|(n, coeff)| ModeRecord { n, coeff })
                .collect(),
            n_max: s.n_max,
        }
    }
}

impl SineSeries {
    pub fn new() -> Self {
        Self::default()
    }

    /// Time-independent series from `(n, f_n)` pairs.
    pub fn from_constants(coeffs: &[(usize, f64)]) -> Self {
        let mut s = Self::new();
        for &(n, c) in coeffs {
            s.add_mode(n, &SlowFunction::constant(c));
        }
        s
    }

    pub fn with_mode(mut self, n: usize, coeff: SlowFunction) -> Self {
        self.add_mode(n, &coeff);
        self
    }

    pub fn add_mode(&mut self, n: usize, coeff: &SlowFunction) {
        assert!(n >= 1, "sine modes start at n = 1");
        let entry = self.modes.entry(n).or_default();
        *entry = &*entry + coeff;
        if entry.is_zero() {
            self.modes.remove(&n);
        }
    }

    pub fn with_truncation(mut self, n_max: usize) -> Self {
        self.n_max = Some(n_max);
        self
    }

    pub fn truncation(&self) -> Option<usize> {
        self.n_max
    }

    /// Modes up to `n_max` (and the stored truncation, if any).
    pub fn truncated(&self, n_max: usize) -> Self {
        let limit = self.n_max.map_or(n_max, |m| m.min(n_max));
        Self {
            modes: self
                .modes
                .range(..=limit)
                .map(|(&n, c)| (n, c.clone()))
                .collect(),
            n_max: Some(limit),
        }
    }

    pub fn mode(&self, n: usize) -> Option<&SlowFunction> {
        if self.n_max.is_some_and(|m| n > m) {
            return None;
        }
        self.modes.get(&n)
    }

    /// Active `(n, f_n)` pairs respecting the truncation level.
    pub fn modes(&self) -> impl Iterator<Item = (usize, &SlowFunction)> {
        let limit = self.n_max.unwrap_or(usize::MAX);
        self.modes.range(..=limit).map(|(&n, c)| (n, c))
    }

    /// Stored modes beyond the truncation level.
    pub fn tail_modes(&self, n_max: usize) -> impl Iterator<Item = (usize, &SlowFunction)> {
        self.modes.range(n_max + 1..).map(|(&n, c)| (n, c))
    }

    pub fn max_mode(&self) -> usize {
        self.modes().map(|(n, _)| n).last().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.modes().next().is_none()
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.modes()
            .map(|(n, c)| c.eval(t) * (n as f64 * x).sin())
            .sum()
    }

    /// `t ↦ f(x₀, t)` as a slow-time function.
    pub fn at_point(&self, x0: f64) -> SlowFunction {
        self.modes()
            .fold(SlowFunction::zero(), |acc, (n, c)| {
                &acc + &c.scale((n as f64 * x0).sin())
            })
    }

    /// `(n, f_n(t))` for all active modes.
    pub fn coefficients_at(&self, t: f64) -> Vec<(usize, f64)> {
        self.modes().map(|(n, c)| (n, c.eval(t))).collect()
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = Self {
            modes: BTreeMap::new(),
            n_max: self.n_max,
        };
        for (n, f) in self.modes() {
            out.add_mode(n, &f.scale(c));
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = Self::new();
        for (n, f) in self.modes().chain(other.modes()) {
            out.add_mode(n, f);
        }
        out
    }

    /// `∂²f/∂x²`, i.e. `f_n ↦ −n² f_n`.
    pub fn second_derivative(&self) -> Self {
        let mut out = Self::new();
        for (n, f) in self.modes() {
            out.add_mode(n, &f.scale(-((n * n) as f64)));
        }
        out.n_max = self.n_max;
        out
    }
}

fn mode_coefficient(samples: &dyn Fn(f64) -> f64, n: usize, points: usize) -> f64 {
    let rule = gauss_legendre(points);
    let panels = n.div_ceil(2).max(1);
    2.0 / PI * composite_gauss(&rule, 0.0, PI, panels, |s| samples(s) * (n as f64 * s).sin())
}

/// `f_n = (2/π)∫₀^π f(s) sin ns ds` for `n = 1..=n_max`, returned as a series
/// of constants.
///
/// Each coefficient starts from `quadrature_points` Gauss points per mode
/// oscillation and doubles the rule until two successive values differ by
/// less than `1e-12`.
pub fn sine_coefficients(
    f: impl Fn(f64) -> f64,
    n_max: usize,
    quadrature_points: usize,
) -> Result<SineSeries> {
    if n_max == 0 {
        return Err(Error::InvalidParameter {
            name: "n_max",
            reason: "at least one mode required".into(),
        });
    }
    let non_finite = std::cell::Cell::new(None);
    let guarded = |s: f64| {
        let v = f(s);
        if !v.is_finite() && non_finite.get().is_none() {
            non_finite.set(Some(v));
        }
        v
    };
    let mut series = SineSeries::new().with_truncation(n_max);
    for n in 1..=n_max {
        let mut points = quadrature_points.max(2);
        let mut value = mode_coefficient(&guarded, n, points);
        if let Some(v) = non_finite.get() {
            return Err(Error::NonFinite {
                context: "sampled function for sine coefficients".into(),
                value: v,
            });
        }
        while points < MAX_QUADRATURE_POINTS {
            points *= 2;
            let refined = mode_coefficient(&guarded, n, points);
            let converged = (refined - value).abs() < COEFFICIENT_AGREEMENT;
            value = refined;
            if converged {
                break;
            }
        }
        ensure_finite("sine coefficient", value)?;
        series.add_mode(n, &SlowFunction::constant(value));
    }
    Ok(series)
}

/// Sine coefficients of a space-time callable sampled on a time axis:
/// element `n − 1` holds `t_j ↦ f_n(t_j)`.
pub fn sine_coefficient_samples(
    f: impl Fn(f64, f64) -> f64,
    n_max: usize,
    time: Axis,
    quadrature_points: usize,
) -> Result<Vec<GridFunction>> {
    let mut per_mode = vec![Vec::with_capacity(time.count); n_max];
    for t in time.points() {
        let series = sine_coefficients(|x| f(x, t), n_max, quadrature_points)?;
        for (n, column) in per_mode.iter_mut().enumerate() {
            column.push(series.mode(n + 1).map_or(0.0, |c| c.eval(0.0)));
        }
    }
    per_mode
        .into_iter()
        .map(|values| GridFunction::new_1d(time, values))
        .collect()
}
