//! Shared inputs for the benchmarks.

use std::f64::consts::PI;

use osk_core::inverse::ObservationP4;
use osk_core::{FastProfile, SineSeries, SlowFunction, SourceFactor, Term};

/// `f = sin x + sin 2x`.
pub fn worked_f() -> SineSeries {
    SineSeries::from_constants(&[(1, 1.0), (2, 1.0)])
}

/// `r = t + sin τ`.
pub fn worked_source() -> SourceFactor {
    SourceFactor::new(
        SlowFunction::monomial(1.0, 1),
        FastProfile::sine(1, SlowFunction::constant(1.0)),
    )
}

/// Smooth `f` with `n_max` decaying modes.
pub fn wide_f(n_max: usize) -> SineSeries {
    let mut f = SineSeries::new();
    for n in 1..=n_max {
        let c = 1.0 / (n * n) as f64;
        f.add_mode(n, &SlowFunction::new(vec![Term::new(c, 0, 0.0), Term::new(0.1 * c, 1, -0.5)]));
    }
    f
}

pub fn worked_p4() -> ObservationP4 {
    let c = 3f64.sqrt() / 32.0;
    let alpha = SlowFunction::new(vec![
        Term::new(0.5, 1, 0.0),
        Term::new(0.5, 0, -1.0),
        Term::new(-0.5, 0, 0.0),
        Term::new(4.0 * c, 1, 0.0),
        Term::new(c, 0, -4.0),
        Term::new(-c, 0, 0.0),
    ]);
    let phi0 = SlowFunction::new(vec![
        Term::new(1.0, 0, -1.0),
        Term::new(1.0, 1, 0.0),
        Term::new(-1.0, 0, 0.0),
    ]);
    ObservationP4 {
        t0: 1.0,
        delta: 0.5,
        x_points: vec![PI / 2.0, PI / 6.0],
        phi0: phi0.into(),
        phi2: FastProfile::cosine(1, SlowFunction::constant(-1.0)),
        alpha: vec![alpha.into()],
        horizon: 2.0,
    }
}
