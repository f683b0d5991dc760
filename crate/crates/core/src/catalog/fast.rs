//! Zero-mean trigonometric polynomials in the fast phase `τ` whose amplitudes
//! are slow-time functions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::slow::SlowFunction;
use crate::error::{Error, Result};

/// One harmonic `a(t)·cos kτ + b(t)·sin kτ`, `k ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub k: u32,
    #[serde(default)]
    pub cos: SlowFunction,
    #[serde(default)]
    pub sin: SlowFunction,
}

/// `p(t, τ) = Σ_k a_k(t) cos kτ + b_k(t) sin kτ`.
///
/// There is no `k = 0` harmonic, so the fast mean `⟨p(t, ·)⟩_τ` vanishes
/// identically and 2π-periodicity holds by construction.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Harmonic>", into = "Vec<Harmonic>")]
pub struct FastProfile {
    harmonics: BTreeMap<u32, (SlowFunction, SlowFunction)>,
}

impl TryFrom<Vec<Harmonic>> for FastProfile {
    type Error = Error;

    fn try_from(harmonics: Vec<Harmonic>) -> Result<Self> {
        Self::new(harmonics)
    }
}

impl From<FastProfile> for Vec<Harmonic> {
    fn from(p: FastProfile) -> Self {
        p.harmonics
            .into_iter()
            .map(|(k, (cos, sin))| Harmonic { k, cos, sin })
            .collect()
    }
}

impl FastProfile {
    pub fn new(harmonics: Vec<Harmonic>) -> Result<Self> {
        let mut out = Self::zero();
        for h in harmonics {
            if h.k == 0 {
                return Err(Error::InvalidParameter {
                    name: "k",
                    reason: "harmonic index must be positive (zero-mean profile)".into(),
                });
            }
            out.add_harmonic(h.k, &h.cos, &h.sin);
        }
        Ok(out)
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `a(t)·cos kτ`.
    pub fn cosine(k: u32, a: SlowFunction) -> Self {
        assert!(k > 0, "harmonic index must be positive");
        let mut p = Self::zero();
        p.add_harmonic(k, &a, &SlowFunction::zero());
        p
    }

    /// `b(t)·sin kτ`.
    pub fn sine(k: u32, b: SlowFunction) -> Self {
        assert!(k > 0, "harmonic index must be positive");
        let mut p = Self::zero();
        p.add_harmonic(k, &SlowFunction::zero(), &b);
        p
    }

    fn add_harmonic(&mut self, k: u32, cos: &SlowFunction, sin: &SlowFunction) {
        let entry = self
            .harmonics
            .entry(k)
            .or_insert_with(|| (SlowFunction::zero(), SlowFunction::zero()));
        entry.0 = &entry.0 + cos;
        entry.1 = &entry.1 + sin;
        if entry.0.is_zero() && entry.1.is_zero() {
            self.harmonics.remove(&k);
        }
    }

    fn from_map(map: impl IntoIterator<Item = (u32, (SlowFunction, SlowFunction))>) -> Self {
        let harmonics = map
            .into_iter()
            .filter(|(_, (a, b))| !(a.is_zero() && b.is_zero()))
            .collect();
        Self { harmonics }
    }

    pub fn is_zero(&self) -> bool {
        self.harmonics.is_empty()
    }

    /// Iterates `(k, a_k, b_k)` in increasing `k`.
    pub fn harmonics(&self) -> impl Iterator<Item = (u32, &SlowFunction, &SlowFunction)> {
        self.harmonics.iter().map(|(&k, (a, b))| (k, a, b))
    }

    pub fn eval(&self, t: f64, tau: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|(&k, (a, b))| {
                let (s, c) = (k as f64 * tau).sin_cos();
                a.eval(t) * c + b.eval(t) * s
            })
            .sum()
    }

    /// `∫₀^τ p(t,s) ds − ⟨∫₀^τ p(t,s) ds⟩_τ`.
    ///
    /// `cos kτ ↦ sin kτ / k` and `sin kτ ↦ −cos kτ / k`; the constant `1/k`
    /// produced by the lower limit is exactly the fast mean and drops out.
    pub fn antiderivative_zero_mean(&self) -> Self {
        Self::from_map(self.harmonics.iter().map(|(&k, (a, b))| {
            let inv_k = 1.0 / k as f64;
            (k, (b.scale(-inv_k), a.scale(inv_k)))
        }))
    }

    /// `∂p/∂τ`.
    pub fn derivative(&self) -> Self {
        Self::from_map(self.harmonics.iter().map(|(&k, (a, b))| {
            let kf = k as f64;
            (k, (b.scale(kf), a.scale(-kf)))
        }))
    }

    /// `⟨∫₀^τ p(t,s) ds⟩_τ = Σ_k b_k(t)/k`.
    pub fn antiderivative_mean(&self) -> SlowFunction {
        self.harmonics
            .iter()
            .fold(SlowFunction::zero(), |acc, (&k, (_, b))| {
                &acc + &b.scale(1.0 / k as f64)
            })
    }

    /// `p(t, 0) = Σ_k a_k(t)`.
    pub fn at_phase_zero(&self) -> SlowFunction {
        self.harmonics
            .values()
            .fold(SlowFunction::zero(), |acc, (a, _)| &acc + a)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_map(
            self.harmonics
                .iter()
                .map(|(&k, (a, b))| (k, (a.scale(c), b.scale(c)))),
        )
    }

    /// Pointwise product with a slow-time function.
    pub fn scale_slow(&self, g: &SlowFunction) -> Self {
        Self::from_map(
            self.harmonics
                .iter()
                .map(|(&k, (a, b))| (k, (a * g, b * g))),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, (a, b)) in &other.harmonics {
            out.add_harmonic(k, a, b);
        }
        out
    }

    pub fn max_harmonic(&self) -> Option<u32> {
        self.harmonics.keys().next_back().copied()
    }

    /// Upper bound `Σ_k |a_k(t)| + |b_k(t)|` on `|p(t, ·)|`.
    pub fn amplitude_bound(&self, t: f64) -> f64 {
        self.harmonics
            .values()
            .map(|(a, b)| a.eval(t).abs() + b.eval(t).abs())
            .sum()
    }
}
