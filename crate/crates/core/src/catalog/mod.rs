//! Closed-form function catalog: slow-time exponential polynomials, fast-phase
//! trigonometric profiles, sine series, and grid sampling with quadrature
//! fallbacks.

pub mod fast;
pub mod grid;
pub mod quadrature;
pub mod signal;
pub mod sine;
pub mod slow;
pub mod source;

pub use fast::{FastProfile, Harmonic};
pub use grid::{Axis, GridFunction};
pub use signal::TimeSignal;
pub use sine::{sine_coefficient_samples, sine_coefficients, SineSeries};
pub use slow::{damped_moment, duhamel_weight, SlowFunction, Term};
pub use source::SourceFactor;
