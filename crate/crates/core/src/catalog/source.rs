use serde::{Deserialize, Serialize};

use super::fast::FastProfile;
use super::slow::SlowFunction;

/// Class-(A) source factor `r(t, τ) = r₀(t) + r₁(t, τ)` with `⟨r₁⟩_τ = 0`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SourceFactor {
    #[serde(default)]
    pub r0: SlowFunction,
    #[serde(default)]
    pub r1: FastProfile,
}

impl SourceFactor {
    pub fn new(r0: SlowFunction, r1: FastProfile) -> Self {
        Self { r0, r1 }
    }

    pub fn eval(&self, t: f64, tau: f64) -> f64 {
        self.r0.eval(t) + self.r1.eval(t, tau)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            r0: &self.r0 + &other.r0,
            r1: self.r1.add(&other.r1),
        }
    }

    /// `|r(t, ·)|` bound: `|r₀(t)| + Σ_k |a_k(t)| + |b_k(t)|`.
    pub fn amplitude_bound(&self, t: f64) -> f64 {
        self.r0.eval(t).abs() + self.r1.amplitude_bound(t)
    }
}
