//! Forward solver, two-scale asymptotics and source reconstruction for the
//! heat equation `u_t = u_xx + f(x,t)·r(t, ωt)` on `(0, π) × (0, T)` with
//! homogeneous initial and boundary data.

pub mod asymptotics;
pub mod catalog;
pub mod error;
pub mod forward;
pub mod inverse;
pub mod volterra;

pub use catalog::{
    duhamel_weight, sine_coefficients, Axis, FastProfile, GridFunction, Harmonic, SineSeries,
    SlowFunction, SourceFactor, Term, TimeSignal,
};
pub use error::{Error, Result};
