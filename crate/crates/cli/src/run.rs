//! Dispatch of a validated scenario to the solver modules.

use std::time::Instant;

use anyhow::{Context, Result};
use osk_core::asymptotics::{resolving_time_count, residual_norm, AsymptoticExpansion, ExpansionOrder};
use osk_core::forward::{solve_heat, HeatProblem};
use osk_core::inverse::{
    recover_problem1, recover_problem2, recover_problem3, recover_problem4, InverseSettings,
    ObservationP1, ObservationP2, ObservationP4, P1Recovery, P2Recovery, P3Recovery, P4Recovery,
    Solvability,
};
use osk_core::{Axis, FastProfile, GridFunction, SlowFunction, SourceFactor};
use serde::Serialize;

use crate::scenario::{Kind, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// Observations contradict each other or the model.
    Inconsistent,
    /// No source reproduces the data.
    Unsolvable,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Inconsistent | Status::Unsolvable => 2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticSample {
    pub x: f64,
    pub t: f64,
    pub u0: f64,
    pub u1: f64,
    pub v1: f64,
    pub expansion: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub omega: f64,
    pub residual_order1: f64,
    pub residual_order2: f64,
    pub omega_times_residual2: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Outcome {
    Forward {
        field: GridFunction,
        tail_estimate: f64,
        warnings: Vec<String>,
    },
    Asymptotics {
        expansion: AsymptoticExpansion,
        samples: Vec<AsymptoticSample>,
        residual_order1: f64,
        residual_order2: f64,
        residual_t_count: usize,
    },
    Inverse1 {
        recovery: P1Recovery,
        /// `r₁` in catalog form when the divisor allows it.
        r1_exact: Option<FastProfile>,
    },
    Inverse2 {
        recovery: P2Recovery,
    },
    Inverse3 {
        recovery: P3Recovery,
    },
    Inverse4 {
        recovery: P4Recovery,
    },
    Convergence {
        rows: Vec<ConvergenceRow>,
        /// `ω·residual₂` strictly decreases along the ladder.
        monotone: bool,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub kind: Kind,
    pub status: Status,
    /// Complete input, defaults included.
    pub input: Scenario,
    pub result: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

pub fn settings(s: &Scenario) -> InverseSettings {
    InverseSettings {
        n_max: s.n_max.expect("defaults applied"),
        grid: s.grid.expect("defaults applied"),
        lambda_tolerance: s.lambda_tolerance.expect("defaults applied"),
        psi_tolerance: s.psi_tolerance,
        consistency_tolerance: s.consistency_tolerance.expect("defaults applied"),
        extrapolate: s.extrapolate.expect("defaults applied"),
    }
}

fn source(s: &Scenario) -> SourceFactor {
    SourceFactor::new(
        s.r0.clone().unwrap_or_default(),
        s.r1.clone().unwrap_or_default(),
    )
}

fn heat_problem(s: &Scenario, omega: f64) -> Result<HeatProblem> {
    let problem = HeatProblem {
        f: s.f.clone().expect("validated"),
        source: source(s),
        omega,
        horizon: s.horizon.expect("validated"),
        n_max: s.n_max.expect("defaults applied"),
    };
    problem.validate()?;
    Ok(problem)
}

fn trace_observation(s: &Scenario) -> ObservationP1 {
    ObservationP1 {
        x0: s.x0.expect("validated"),
        phi0: s.phi0.clone().expect("validated").into(),
        phi2: s.phi2.clone().expect("validated"),
        phi1: s.phi1.clone(),
        horizon: s.horizon.expect("validated"),
    }
}

fn psi_observation(s: &Scenario) -> ObservationP2 {
    ObservationP2 {
        t0: s.t0.expect("validated"),
        psi: s.psi.clone().expect("validated"),
    }
}

/// Runs `kind` on the scenario. `timing` adds wall-clock time to the
/// report, which makes the output non-reproducible.
pub fn run(scenario: &Scenario, kind: Kind, timing: bool) -> Result<RunReport> {
    scenario.validate_for(kind)?;
    let start = Instant::now();
    let (status, result) = dispatch(scenario, kind).with_context(|| format!("{kind} run failed"))?;
    let mut input = scenario.clone();
    input.kind = Some(kind);
    Ok(RunReport {
        version: env!("CARGO_PKG_VERSION"),
        kind,
        status,
        input,
        result,
        timing_ms: timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    })
}

fn dispatch(s: &Scenario, kind: Kind) -> Result<(Status, Outcome)> {
    let x_count = s.x_count.expect("defaults applied");
    let t_count = s.t_count.expect("defaults applied");
    let settings = settings(s);
    Ok(match kind {
        Kind::Forward => {
            let problem = heat_problem(s, s.omega.expect("validated"))?;
            let sol = solve_heat(&problem, x_count, t_count)?;
            (
                Status::Ok,
                Outcome::Forward {
                    field: sol.field,
                    tail_estimate: sol.tail_estimate,
                    warnings: sol.warnings,
                },
            )
        }
        Kind::Asymptotics => {
            let omega = s.omega.expect("validated");
            let problem = heat_problem(s, omega)?;
            let exp = AsymptoticExpansion::from_problem(&problem);
            let x_axis = Axis::new(0.0, std::f64::consts::PI, x_count)?;
            let t_axis = Axis::new(0.0, problem.horizon, t_count)?;
            let mut samples = Vec::with_capacity(x_count * t_count);
            for x in x_axis.points() {
                for t in t_axis.points() {
                    let u0 = exp.u0.eval(x, t);
                    let u1 = exp.u1.eval(x, t);
                    let v1 = exp.v1.eval(x, t, omega * t);
                    samples.push(AsymptoticSample {
                        x,
                        t,
                        u0,
                        u1,
                        v1,
                        expansion: u0 + (u1 + v1) / omega,
                    });
                }
            }
            let resolving = resolving_time_count(omega, problem.horizon).max(t_count);
            let residual_order1 = residual_norm(&problem, &exp, ExpansionOrder::First, x_count, resolving)?;
            let residual_order2 = residual_norm(&problem, &exp, ExpansionOrder::Second, x_count, resolving)?;
            (
                Status::Ok,
                Outcome::Asymptotics {
                    expansion: exp,
                    samples,
                    residual_order1,
                    residual_order2,
                    residual_t_count: resolving,
                },
            )
        }
        Kind::Convergence => {
            let ladder = s.omega_ladder.clone().expect("validated");
            let mut rows = Vec::with_capacity(ladder.len());
            for omega in ladder {
                let problem = heat_problem(s, omega)?;
                let exp = AsymptoticExpansion::from_problem(&problem);
                let count = resolving_time_count(omega, problem.horizon);
                let r1 = residual_norm(&problem, &exp, ExpansionOrder::First, x_count, count)?;
                let r2 = residual_norm(&problem, &exp, ExpansionOrder::Second, x_count, count)?;
                rows.push(ConvergenceRow {
                    omega,
                    residual_order1: r1,
                    residual_order2: r2,
                    omega_times_residual2: omega * r2,
                });
            }
            let monotone = rows
                .windows(2)
                .all(|w| w[1].omega_times_residual2 < w[0].omega_times_residual2);
            (Status::Ok, Outcome::Convergence { rows, monotone })
        }
        Kind::Inverse1 => {
            let recovery = recover_problem1(&trace_observation(s), s.f.as_ref().expect("validated"), &settings)?;
            let r1_exact = recovery.r1.exact();
            (Status::Ok, Outcome::Inverse1 { recovery, r1_exact })
        }
        Kind::Inverse2 => {
            let recovery = recover_problem2(&psi_observation(s), s.r0.as_ref().expect("validated"), &settings)?;
            let status = match recovery.solvability {
                Solvability::Unsolvable { .. } => Status::Unsolvable,
                _ => Status::Ok,
            };
            (status, Outcome::Inverse2 { recovery })
        }
        Kind::Inverse3 => {
            let recovery = recover_problem3(
                &psi_observation(s),
                &trace_observation(s),
                s.r0.as_ref().expect("validated"),
                &settings,
            )?;
            let status = if recovery.consistent {
                Status::Ok
            } else {
                Status::Inconsistent
            };
            (status, Outcome::Inverse3 { recovery })
        }
        Kind::Inverse4 => {
            let obs = ObservationP4 {
                t0: s.t0.expect("validated"),
                delta: s.delta.expect("validated"),
                x_points: s.x_points.clone().expect("validated"),
                phi0: s.phi0.clone().expect("validated").into(),
                phi2: s.phi2.clone().expect("validated"),
                alpha: s
                    .alpha
                    .clone()
                    .expect("validated")
                    .into_iter()
                    .map(SlowFunction::into)
                    .collect(),
                horizon: s.horizon.expect("validated"),
            };
            let recovery = recover_problem4(&obs, &settings)?;
            let status = if recovery.consistent {
                Status::Ok
            } else {
                Status::Inconsistent
            };
            (status, Outcome::Inverse4 { recovery })
        }
    })
}
