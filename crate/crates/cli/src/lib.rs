//! Scenario files, dispatch and report writers behind the `osk` binary.

pub mod emit;
pub mod run;
pub mod scenario;

pub use emit::{emit, Format};
pub use run::{run, ConvergenceRow, Outcome, RunReport, Status};
pub use scenario::{builtin, parse_scenario, parse_str, serialize, Kind, Scenario, ScenarioError};
