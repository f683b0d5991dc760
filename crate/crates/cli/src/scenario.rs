//! Scenario files: a flat TOML table of numeric parameters followed by
//! function definitions in catalog term-list form.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use osk_core::forward::DEFAULT_MODES;
use osk_core::inverse::{CONSISTENCY_TOLERANCE, LAMBDA_TOLERANCE};
use osk_core::volterra::DEFAULT_GRID;
use osk_core::{FastProfile, SineSeries, SlowFunction, Term};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_X_COUNT: usize = 33;
pub const DEFAULT_T_COUNT: usize = 65;
pub const DEFAULT_OMEGA_LADDER: [f64; 4] = [64.0, 128.0, 256.0, 512.0];
pub const BUILTIN_PREFIX: &str = "builtin:";
pub const BUILTIN_NAMES: [&str; 1] = ["worked-example"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Forward,
    Asymptotics,
    Inverse1,
    Inverse2,
    Inverse3,
    Inverse4,
    Convergence,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Forward => "forward",
            Kind::Asymptotics => "asymptotics",
            Kind::Inverse1 => "inverse1",
            Kind::Inverse2 => "inverse2",
            Kind::Inverse3 => "inverse3",
            Kind::Inverse4 => "inverse4",
            Kind::Convergence => "convergence",
        }
    }

    fn required(self) -> &'static [&'static str] {
        match self {
            Kind::Forward | Kind::Asymptotics => &["f", "omega", "horizon"],
            Kind::Convergence => &["f", "horizon"],
            Kind::Inverse1 => &["f", "x0", "phi0", "phi2", "horizon"],
            Kind::Inverse2 => &["psi", "r0", "t0"],
            Kind::Inverse3 => &["psi", "r0", "t0", "x0", "phi0", "phi2", "horizon"],
            Kind::Inverse4 => &["t0", "delta", "x_points", "phi0", "phi2", "alpha", "horizon"],
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("scenario is empty")]
    Empty,
    #[error("malformed scenario: {0}")]
    Syntax(String),
    #[error("unknown built-in scenario `{0}` (available: worked-example)")]
    UnknownBuiltin(String),
    #[error("field `{field}` is required for kind `{kind}`")]
    MissingField { field: &'static str, kind: Kind },
    #[error("field `{field}` = {value} is out of range: {reason}")]
    OutOfRange {
        field: &'static str,
        value: String,
        reason: String,
    },
    #[error("scenario declares kind `{declared}` but `{requested}` was requested")]
    KindMismatch { declared: Kind, requested: Kind },
    #[error("scenario does not declare a kind")]
    NoKind,
}

/// All inputs of one run. Fields not used by the selected kind are ignored
/// but kept in the echo.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_ladder: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_points: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Volterra grid points on `[0, T]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consistency_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extrapolate: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<SineSeries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<SineSeries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<SlowFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1: Option<FastProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi0: Option<SlowFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi1: Option<SlowFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi2: Option<FastProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<SlowFunction>>,
}

/// Reads a scenario from a file, or a built-in one from `builtin:NAME`.
/// Defaults are filled in and every numeric field is range-checked.
pub fn parse_scenario(path: &str) -> Result<Scenario, ScenarioError> {
    if let Some(name) = path.strip_prefix(BUILTIN_PREFIX) {
        return builtin(name);
    }
    let text = std::fs::read_to_string(Path::new(path)).map_err(|source| ScenarioError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario =
        toml::from_str(text).map_err(|e| ScenarioError::Syntax(e.to_string().trim_end().to_owned()))?;
    if scenario == Scenario::default() {
        return Err(ScenarioError::Empty);
    }
    let scenario = scenario.with_defaults();
    scenario.check_ranges()?;
    Ok(scenario)
}

pub fn serialize(scenario: &Scenario) -> String {
    toml::to_string(scenario).expect("scenario fields are TOML-representable")
}

pub fn builtin(name: &str) -> Result<Scenario, ScenarioError> {
    match name {
        "worked-example" => Ok(worked_example().with_defaults()),
        other => Err(ScenarioError::UnknownBuiltin(other.to_owned())),
    }
}

/// `f = sin x + sin 2x`, `r = t + sin τ`, observed at `x₀ = π/2` and
/// `x₁ = π/6` with `t₀ = 1`.
fn worked_example() -> Scenario {
    let c = 3f64.sqrt() / 32.0;
    let one = SlowFunction::constant(1.0);
    Scenario {
        omega: Some(64.0),
        omega_ladder: Some(DEFAULT_OMEGA_LADDER.to_vec()),
        horizon: Some(2.0),
        t0: Some(1.0),
        delta: Some(0.5),
        x0: Some(PI / 2.0),
        x_points: Some(vec![PI / 2.0, PI / 6.0]),
        f: Some(SineSeries::from_constants(&[(1, 1.0), (2, 1.0)])),
        psi: Some(SineSeries::from_constants(&[
            (1, 1.0 / std::f64::consts::E),
            (2, (3.0 + (-4.0f64).exp()) / 16.0),
        ])),
        r0: Some(SlowFunction::monomial(1.0, 1)),
        r1: Some(FastProfile::sine(1, one)),
        phi0: Some(SlowFunction::new(vec![
            Term::new(1.0, 0, -1.0),
            Term::new(1.0, 1, 0.0),
            Term::new(-1.0, 0, 0.0),
        ])),
        phi2: Some(FastProfile::cosine(1, SlowFunction::constant(-1.0))),
        alpha: Some(vec![SlowFunction::new(vec![
            Term::new(0.5, 1, 0.0),
            Term::new(0.5, 0, -1.0),
            Term::new(-0.5, 0, 0.0),
            Term::new(4.0 * c, 1, 0.0),
            Term::new(c, 0, -4.0),
            Term::new(-c, 0, 0.0),
        ])]),
        ..Scenario::default()
    }
}

impl Scenario {
    pub fn with_defaults(mut self) -> Self {
        self.n_max.get_or_insert(DEFAULT_MODES);
        self.grid.get_or_insert(DEFAULT_GRID);
        self.x_count.get_or_insert(DEFAULT_X_COUNT);
        self.t_count.get_or_insert(DEFAULT_T_COUNT);
        self.lambda_tolerance.get_or_insert(LAMBDA_TOLERANCE);
        self.consistency_tolerance.get_or_insert(CONSISTENCY_TOLERANCE);
        self.extrapolate.get_or_insert(true);
        self
    }

    /// Resolves the kind to run: the requested one, which must agree with
    /// the declared one when both are present.
    pub fn resolve_kind(&self, requested: Option<Kind>) -> Result<Kind, ScenarioError> {
        match (self.kind, requested) {
            (Some(declared), Some(requested)) if declared != requested => {
                Err(ScenarioError::KindMismatch { declared, requested })
            }
            (_, Some(k)) | (Some(k), None) => Ok(k),
            (None, None) => Err(ScenarioError::NoKind),
        }
    }

    /// Checks that every field the kind needs is present.
    pub fn validate_for(&self, kind: Kind) -> Result<(), ScenarioError> {
        self.check_ranges()?;
        for &field in kind.required() {
            if !self.has(field) {
                return Err(ScenarioError::MissingField { field, kind });
            }
        }
        if kind == Kind::Inverse4 {
            let points = self.x_points.as_ref().map_or(0, Vec::len);
            let alphas = self.alpha.as_ref().map_or(0, Vec::len);
            if points < 1 || alphas + 1 != points {
                return Err(out_of_range(
                    "alpha",
                    alphas,
                    format!("need one alpha per interior point, {} for {points} x_points", points.saturating_sub(1)),
                ));
            }
            let (t0, delta, horizon) = (self.t0.unwrap(), self.delta.unwrap(), self.horizon.unwrap());
            if t0 - delta <= 0.0 || t0 + delta > horizon {
                return Err(out_of_range(
                    "delta",
                    delta,
                    format!("window [t0 - delta, t0 + delta] must lie in (0, {horizon}]"),
                ));
            }
        }
        if kind == Kind::Convergence && self.omega_ladder.as_ref().is_none_or(Vec::is_empty) {
            return Err(ScenarioError::MissingField {
                field: "omega_ladder",
                kind,
            });
        }
        Ok(())
    }

    fn has(&self, field: &str) -> bool {
        match field {
            "f" => self.f.is_some(),
            "psi" => self.psi.is_some(),
            "r0" => self.r0.is_some(),
            "phi0" => self.phi0.is_some(),
            "phi2" => self.phi2.is_some(),
            "alpha" => self.alpha.is_some(),
            "omega" => self.omega.is_some(),
            "horizon" => self.horizon.is_some(),
            "t0" => self.t0.is_some(),
            "delta" => self.delta.is_some(),
            "x0" => self.x0.is_some(),
            "x_points" => self.x_points.is_some(),
            _ => unreachable!("unknown required field {field}"),
        }
    }

    fn check_ranges(&self) -> Result<(), ScenarioError> {
        for (field, value) in [
            ("omega", self.omega),
            ("horizon", self.horizon),
            ("t0", self.t0),
            ("delta", self.delta),
            ("lambda_tolerance", self.lambda_tolerance),
            ("psi_tolerance", self.psi_tolerance),
            ("consistency_tolerance", self.consistency_tolerance),
        ] {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(out_of_range(field, v, "must be positive and finite".into()));
                }
            }
        }
        if let (Some(t0), Some(horizon)) = (self.t0, self.horizon) {
            if t0 > horizon {
                return Err(out_of_range("t0", t0, format!("must not exceed horizon {horizon}")));
            }
        }
        if let Some(x0) = self.x0 {
            check_point("x0", x0)?;
        }
        for &x in self.x_points.iter().flatten() {
            check_point("x_points", x)?;
        }
        if let Some(ladder) = &self.omega_ladder {
            for &w in ladder {
                if !(w > 0.0 && w.is_finite()) {
                    return Err(out_of_range("omega_ladder", w, "must be positive and finite".into()));
                }
            }
        }
        for (field, value, min) in [
            ("n_max", self.n_max, 1),
            ("grid", self.grid, 3),
            ("x_count", self.x_count, 2),
            ("t_count", self.t_count, 2),
        ] {
            if let Some(v) = value {
                if v < min {
                    return Err(out_of_range(field, v, format!("must be at least {min}")));
                }
            }
        }
        Ok(())
    }
}

fn check_point(field: &'static str, x: f64) -> Result<(), ScenarioError> {
    if x > 0.0 && x < PI {
        Ok(())
    } else {
        Err(out_of_range(field, x, "must lie in the open interval (0, pi)".into()))
    }
}

fn out_of_range(field: &'static str, value: impl fmt::Display, reason: String) -> ScenarioError {
    ScenarioError::OutOfRange {
        field,
        value: value.to_string(),
        reason,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_points() {
        let s = builtin("worked-example").unwrap();
        assert_eq!(s.t0, Some(1.0));
        assert_eq!(s.x0, Some(PI / 2.0));
        assert_eq!(s.x_points, Some(vec![PI / 2.0, PI / 6.0]));
        assert_eq!(s.grid, Some(DEFAULT_GRID));
        assert_eq!(s.n_max, Some(DEFAULT_MODES));
        for kind in [
            Kind::Forward,
            Kind::Asymptotics,
            Kind::Inverse1,
            Kind::Inverse2,
            Kind::Inverse3,
            Kind::Inverse4,
            Kind::Convergence,
        ] {
            s.validate_for(kind).unwrap();
        }
    }

    #[test]
    fn empty_and_blank_files_are_rejected() {
        assert!(matches!(parse_str(""), Err(ScenarioError::Empty)));
        assert!(matches!(parse_str("  \n# nothing\n"), Err(ScenarioError::Empty)));
    }

    #[test]
    fn unknown_kind_and_field() {
        let err = parse_str("kind = \"inverse9\"\n").unwrap_err().to_string();
        assert!(err.contains("inverse9"), "{err}");
        let err = parse_str("omega = 1.0\nomegaa = 2.0\n").unwrap_err().to_string();
        assert!(err.contains("omegaa"), "{err}");
    }

    #[test]
    fn errors_name_the_field() {
        let err = parse_str("x0 = 4.0\n").unwrap_err();
        assert!(matches!(err, ScenarioError::OutOfRange { field: "x0", .. }));
        let err = parse_str("x_points = [1.0, 0.0]\n").unwrap_err();
        assert!(matches!(err, ScenarioError::OutOfRange { field: "x_points", .. }));
        let s = parse_str("kind = \"inverse2\"\nt0 = 1.0\n").unwrap();
        let err = s.validate_for(Kind::Inverse2).unwrap_err();
        assert!(matches!(err, ScenarioError::MissingField { field: "psi", .. }));
    }

    #[test]
    fn kind_resolution() {
        let s = parse_str("kind = \"forward\"\n").unwrap();
        assert_eq!(s.resolve_kind(None).unwrap(), Kind::Forward);
        assert_eq!(s.resolve_kind(Some(Kind::Forward)).unwrap(), Kind::Forward);
        assert!(matches!(
            s.resolve_kind(Some(Kind::Inverse4)),
            Err(ScenarioError::KindMismatch { .. })
        ));
        let s = builtin("worked-example").unwrap();
        assert!(matches!(s.resolve_kind(None), Err(ScenarioError::NoKind)));
    }

    #[test]
    fn function_grammar() {
        let text = r#"
kind = "forward"
omega = 10.0
horizon = 1.0
r0 = [{ coeff = 1.0, power = 1 }]

[f]
modes = [{ n = 1, coeff = [{ coeff = 1.0 }] }, { n = 3, coeff = [{ coeff = 0.5, rate = -1.0 }] }]

[[r1]]
k = 2
sin = [{ coeff = 1.0 }]
"#;
        let s = parse_str(text).unwrap();
        assert_eq!(s.f.as_ref().unwrap().eval(PI / 2.0, 0.0), 1.0 - 0.5);
        assert_eq!(s.r0.as_ref().unwrap().eval(3.0), 3.0);
        assert_eq!(s.r1.as_ref().unwrap().eval(0.0, PI / 4.0), 1.0);
    }
}
