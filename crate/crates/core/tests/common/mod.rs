#![allow(dead_code)]

use std::f64::consts::PI;

use osk_core::inverse::ObservationP4;
use osk_core::{FastProfile, GridFunction, SineSeries, SlowFunction, SourceFactor, Term};
use rand::Rng;

pub fn one() -> SlowFunction {
    SlowFunction::constant(1.0)
}

/// `f = sin x + sin 2x`.
pub fn worked_f() -> SineSeries {
    SineSeries::from_constants(&[(1, 1.0), (2, 1.0)])
}

/// `r = t + sin τ`.
pub fn worked_source() -> SourceFactor {
    SourceFactor::new(SlowFunction::monomial(1.0, 1), FastProfile::sine(1, one()))
}

/// `e^{−t} + t − 1`.
pub fn worked_phi0() -> SlowFunction {
    SlowFunction::new(vec![
        Term::new(1.0, 0, -1.0),
        Term::new(1.0, 1, 0.0),
        Term::new(-1.0, 0, 0.0),
    ])
}

/// `½(t + e^{−t} − 1) + (√3/32)(4t + e^{−4t} − 1)`.
pub fn worked_alpha() -> SlowFunction {
    let c = 3f64.sqrt() / 32.0;
    SlowFunction::new(vec![
        Term::new(0.5, 1, 0.0),
        Term::new(0.5, 0, -1.0),
        Term::new(-0.5, 0, 0.0),
        Term::new(4.0 * c, 1, 0.0),
        Term::new(c, 0, -4.0),
        Term::new(-c, 0, 0.0),
    ])
}

pub fn worked_phi2() -> FastProfile {
    FastProfile::cosine(1, SlowFunction::constant(-1.0))
}

pub fn worked_p4() -> ObservationP4 {
    ObservationP4 {
        t0: 1.0,
        delta: 0.5,
        x_points: vec![PI / 2.0, PI / 6.0],
        phi0: worked_phi0().into(),
        phi2: worked_phi2(),
        alpha: vec![worked_alpha().into()],
        horizon: 2.0,
    }
}

pub fn sup_error(g: &GridFunction, exact: impl Fn(f64) -> f64) -> f64 {
    g.axis()
        .points()
        .into_iter()
        .zip(g.values())
        .fold(0.0, |m, (t, v)| m.max((v - exact(t)).abs()))
}

/// Same harmonics, powers and rates; coefficients and rates equal to `rel`.
pub fn profiles_match(a: &FastProfile, b: &FastProfile, rel: f64) -> bool {
    let ha: Vec<_> = a.harmonics().collect();
    let hb: Vec<_> = b.harmonics().collect();
    ha.len() == hb.len()
        && ha.iter().zip(&hb).all(|((ka, ca, sa), (kb, cb, sb))| {
            ka == kb && slow_match(ca, cb, rel) && slow_match(sa, sb, rel)
        })
}

pub fn slow_match(a: &SlowFunction, b: &SlowFunction, rel: f64) -> bool {
    a.terms().len() == b.terms().len()
        && a.terms().iter().zip(b.terms()).all(|(u, v)| {
            u.power == v.power
                && (u.rate - v.rate).abs() <= rel * (1.0 + v.rate.abs())
                && (u.coeff - v.coeff).abs() <= rel * v.coeff.abs().max(1e-300)
        })
}

/// Separable `f(x,t) = e^{γt}·Σ_{n≤3} F_n sin nx` with `|f(x₀, ·)| ≥ 0.3 e^{γt}`
/// and an observation point `x₀`.
pub fn random_separable_f(rng: &mut impl Rng) -> (SineSeries, f64) {
    loop {
        let gamma = rng.random_range(-0.3..0.3);
        let amps = [
            rng.random_range(0.8..1.5),
            rng.random_range(-0.3..0.3),
            rng.random_range(-0.3..0.3),
        ];
        let x0: f64 = rng.random_range(0.6..2.5);
        let at_x0: f64 = amps
            .iter()
            .enumerate()
            .map(|(i, a)| a * ((i + 1) as f64 * x0).sin())
            .sum();
        if at_x0.abs() < 0.3 {
            continue;
        }
        let mut f = SineSeries::new();
        for (i, a) in amps.iter().enumerate() {
            f.add_mode(i + 1, &SlowFunction::exponential(*a, gamma));
        }
        return (f, x0);
    }
}

/// Class-(A) source: slow part `c₀ + c₁t + c₂e^{βt}`, fast part with one or
/// two harmonics carrying slow coefficients.
pub fn random_source(rng: &mut impl Rng) -> SourceFactor {
    let r0 = SlowFunction::new(vec![
        Term::new(rng.random_range(-1.0..1.0), 0, 0.0),
        Term::new(rng.random_range(-1.0..1.0), 1, 0.0),
        Term::new(rng.random_range(-1.0..1.0), 0, rng.random_range(-0.4..0.4)),
    ]);
    let k1 = rng.random_range(1..=3u32);
    let mut r1 = FastProfile::cosine(k1, SlowFunction::constant(rng.random_range(-1.0..1.0)));
    r1 = r1.add(&FastProfile::sine(
        k1 + rng.random_range(0..=2u32),
        SlowFunction::new(vec![
            Term::new(rng.random_range(-1.0..1.0), 0, 0.0),
            Term::new(rng.random_range(-0.5..0.5), 1, rng.random_range(-0.4..0.4)),
        ]),
    ));
    SourceFactor::new(r0, r1)
}

/// Strictly positive `r₀ = c₀ + Σ c t^m e^{γt}` with positive coefficients.
pub fn random_positive_r0(rng: &mut impl Rng) -> SlowFunction {
    let mut terms = vec![Term::new(rng.random_range(0.05..1.0), 0, 0.0)];
    for _ in 0..rng.random_range(1..=3) {
        terms.push(Term::new(
            rng.random_range(0.0..2.0),
            rng.random_range(0..=3u32),
            rng.random_range(-2.0..1.0),
        ));
    }
    SlowFunction::new(terms)
}
