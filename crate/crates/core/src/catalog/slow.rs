//! Slow-time functions: finite sums `Σ c·tᵐ·e^{γt}`.
//!
//! The class is closed under addition, products, differentiation, shifts of
//! the rate and integration from zero, and it is also closed under the
//! damped convolution `g ↦ ∫₀ᵗ e^{−λ(t−s)} g(s) ds`. Every integral the
//! solvers need is therefore available in closed form.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `t` at which the near-resonant series of [`SlowFunction::duhamel`]
/// is summed to rounding accuracy.
pub const SERIES_HORIZON: f64 = 10.0;

/// `|γ + λ|` below which the symbolic Duhamel transform of a `t^m` term is
/// expanded as a power series instead of the closed form, whose rounding
/// error grows like `m!/|γ + λ|^{m+1}`.
fn series_cutoff(power: u32) -> f64 {
    let factorial: f64 = (1..=power).map(f64::from).product();
    (factorial * 1e-3).powf(1.0 / f64::from(power + 1)).min(0.5)
}

/// One term `coeff · t^power · e^{rate·t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    #[serde(default)]
    pub power: u32,
    #[serde(default)]
    pub rate: f64,
}

impl Term {
    pub fn new(coeff: f64, power: u32, rate: f64) -> Self {
        Self { coeff, power, rate }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let poly = if self.power == 0 {
            1.0
        } else {
            t.powi(self.power as i32)
        };
        let exp = if self.rate == 0.0 {
            1.0
        } else {
            (self.rate * t).exp()
        };
        self.coeff * poly * exp
    }

    fn key_cmp(&self, other: &Term) -> Ordering {
        self.rate
            .total_cmp(&other.rate)
            .then(self.power.cmp(&other.power))
    }
}

/// A finite sum of [`Term`]s, kept sorted by `(rate, power)` with like terms
/// merged and zero coefficients dropped.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Term>", into = "Vec<Term>")]
pub struct SlowFunction {
    terms: Vec<Term>,
}

impl TryFrom<Vec<Term>> for SlowFunction {
    type Error = Error;

    fn try_from(terms: Vec<Term>) -> Result<Self> {
        for term in &terms {
            if !term.coeff.is_finite() || !term.rate.is_finite() {
                return Err(Error::NonFinite {
                    context: "slow-function term".into(),
                    value: if term.coeff.is_finite() {
                        term.rate
                    } else {
                        term.coeff
                    },
                });
            }
        }
        Ok(Self::new(terms))
    }
}

impl From<SlowFunction> for Vec<Term> {
    fn from(f: SlowFunction) -> Self {
        f.terms
    }
}

impl SlowFunction {
    pub fn new(mut terms: Vec<Term>) -> Self {
        terms.sort_by(Term::key_cmp);
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for term in terms {
            match merged.last_mut() {
                Some(last) if last.key_cmp(&term) == Ordering::Equal => last.coeff += term.coeff,
                _ => merged.push(term),
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        Self { terms: merged }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![Term::new(c, 0, 0.0)])
    }

    pub fn monomial(c: f64, power: u32) -> Self {
        Self::new(vec![Term::new(c, power, 0.0)])
    }

    pub fn exponential(c: f64, rate: f64) -> Self {
        Self::new(vec![Term::new(c, 0, rate)])
    }

    pub fn term(c: f64, power: u32, rate: f64) -> Self {
        Self::new(vec![Term::new(c, power, rate)])
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.eval(t)).sum()
    }

    /// Sum of `|term(t)|`, the natural magnitude scale for cancellation checks.
    pub fn eval_abs(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.eval(t).abs()).sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        Self::new(
            self.terms
                .iter()
                .map(|t| Term::new(t.coeff * c, t.power, t.rate))
                .collect(),
        )
    }

    /// Multiplication by `e^{λt}`.
    pub fn shift_rate(&self, lambda: f64) -> Self {
        Self::new(
            self.terms
                .iter()
                .map(|t| Term::new(t.coeff, t.power, t.rate + lambda))
                .collect(),
        )
    }

    pub fn derivative(&self) -> Self {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            if t.power > 0 {
                out.push(Term::new(t.coeff * t.power as f64, t.power - 1, t.rate));
            }
            if t.rate != 0.0 {
                out.push(Term::new(t.coeff * t.rate, t.power, t.rate));
            }
        }
        Self::new(out)
    }

    /// `t ↦ ∫₀ᵗ g(s) ds`.
    pub fn integral_from_zero(&self) -> Self {
        self.duhamel(0.0)
    }

    /// Closed form of `t ↦ ∫₀ᵗ e^{−λ(t−s)} g(s) ds`.
    ///
    /// With `b = γ + λ`, terms whose `|b|` is below a power-dependent cutoff
    /// (at most `0.5`) use `e^{−λt}·Σ_k b^k t^{m+k+1}/(k!(m+k+1))`, truncated
    /// once the terms are negligible for `t ≤ SERIES_HORIZON`. The resonant
    /// case `b = 0` keeps only `e^{−λt}·t^{m+1}/(m+1)`.
    pub fn duhamel(&self, lambda: f64) -> Self {
        let mut out = Vec::new();
        for term in &self.terms {
            let b = term.rate + lambda;
            let m = term.power;
            if b.abs() < series_cutoff(m) {
                let x = b.abs() * SERIES_HORIZON;
                let mut weight = 1.0;
                let mut magnitude = 1.0;
                for k in 0..200u32 {
                    out.push(Term::new(
                        term.coeff * weight / f64::from(m + k + 1),
                        m + k + 1,
                        -lambda,
                    ));
                    weight *= b / f64::from(k + 1);
                    magnitude *= x / f64::from(k + 1);
                    if magnitude < 1e-18 {
                        break;
                    }
                }
                continue;
            }
            // ∫₀ᵗ s^m e^{bs} ds = e^{bt}·P(t) − P(0),
            // P(t) = Σ_j (−1)^j m!/(m−j)! t^{m−j} / b^{j+1}
            let inv_b = 1.0 / b;
            let mut falling = 1.0;
            let mut inv_pow = inv_b;
            let mut sign = 1.0;
            for j in 0..=m {
                out.push(Term::new(
                    term.coeff * sign * falling * inv_pow,
                    m - j,
                    term.rate,
                ));
                if j < m {
                    falling *= (m - j) as f64;
                    inv_pow *= inv_b;
                    sign = -sign;
                }
            }
            // after the loop: falling = m!, inv_pow = b^{-(m+1)}, sign = (−1)^m
            out.push(Term::new(-term.coeff * sign * falling * inv_pow, 0, -lambda));
        }
        Self::new(out)
    }

    /// Numerically stable evaluation of `∫₀ᵗ e^{−λ(t−s)} g(s) ds`.
    pub fn duhamel_at(&self, lambda: f64, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| {
                term.coeff * damped_moment(lambda, term.power, Complex64::new(term.rate, 0.0), t).re
            })
            .sum()
    }

    /// Exact reciprocal, available when the function is a single pure
    /// exponential `c·e^{γt}`.
    pub fn reciprocal(&self) -> Option<Self> {
        match self.terms.as_slice() {
            [t] if t.power == 0 => Some(Self::exponential(1.0 / t.coeff, -t.rate)),
            _ => None,
        }
    }

    /// Largest absolute value over `count` equispaced samples of `[a, b]`.
    pub fn sup_on(&self, a: f64, b: f64, count: usize) -> f64 {
        let count = count.max(2);
        (0..count)
            .map(|i| {
                let t = a + (b - a) * i as f64 / (count - 1) as f64;
                self.eval(t).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Smallest absolute value over `count` equispaced samples of `[a, b]`.
    pub fn inf_abs_on(&self, a: f64, b: f64, count: usize) -> f64 {
        let count = count.max(2);
        (0..count)
            .map(|i| {
                let t = a + (b - a) * i as f64 / (count - 1) as f64;
                self.eval(t).abs()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

impl Add for &SlowFunction {
    type Output = SlowFunction;

    fn add(self, rhs: &SlowFunction) -> SlowFunction {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&rhs.terms);
        SlowFunction::new(terms)
    }
}

impl Add for SlowFunction {
    type Output = SlowFunction;

    fn add(self, rhs: SlowFunction) -> SlowFunction {
        &self + &rhs
    }
}

impl Neg for &SlowFunction {
    type Output = SlowFunction;

    fn neg(self) -> SlowFunction {
        self.scale(-1.0)
    }
}

impl Sub for &SlowFunction {
    type Output = SlowFunction;

    fn sub(self, rhs: &SlowFunction) -> SlowFunction {
        self + &(-rhs)
    }
}

impl Mul for &SlowFunction {
    type Output = SlowFunction;

    fn mul(self, rhs: &SlowFunction) -> SlowFunction {
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                terms.push(Term::new(a.coeff * b.coeff, a.power + b.power, a.rate + b.rate));
            }
        }
        SlowFunction::new(terms)
    }
}

/// `∫₀ᵗ e^{−λ(t−s)} s^m e^{ρs} ds` for complex `ρ`.
///
/// With `b = λ + ρ` the integral is `e^{−λt}∫₀ᵗ s^m e^{bs} ds`. For small
/// `|b|t` the power series of the inner integral is summed directly, which
/// covers the resonant case `b = 0` and avoids cancellation near it; otherwise
/// the antiderivative is split as `e^{ρt}P(t) − e^{−λt}P(0)` so that neither
/// factor overflows for large `λ`.
pub fn damped_moment(lambda: f64, power: u32, rate: Complex64, t: f64) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let b = rate + lambda;
    let m = power as i32;
    let bt = b * t;
    if bt.norm() <= power as f64 + 2.0 {
        // Σ_k (bt)^k / k! · t^{m+1} / (m+k+1)
        let mut sum = Complex64::new(0.0, 0.0);
        let mut factor = Complex64::new(1.0, 0.0);
        for k in 0..200 {
            let term = factor / (m + k + 1) as f64;
            sum += term;
            if k > 2 && term.norm() <= 1e-18 * sum.norm() {
                break;
            }
            factor *= bt / (k + 1) as f64;
        }
        return sum * t.powi(m + 1) * (-lambda * t).exp();
    }
    let inv_b = b.inv();
    let mut p_t = Complex64::new(0.0, 0.0);
    let mut falling = 1.0;
    let mut inv_pow = inv_b;
    let mut sign = 1.0;
    for j in 0..=m {
        p_t += inv_pow * (sign * falling * t.powi(m - j));
        if j < m {
            falling *= (m - j) as f64;
            inv_pow *= inv_b;
            sign = -sign;
        }
    }
    let p_0 = inv_pow * (sign * falling);
    (rate * t).exp() * p_t - p_0 * (-lambda * t).exp()
}

/// `∫₀ᵗ e^{−n²(t−s)} g(s) ds`, the mode-`n` Duhamel weight of `g`.
pub fn duhamel_weight(n: usize, g: &SlowFunction, t: f64) -> f64 {
    g.duhamel_at((n * n) as f64, t)
}
