use serde::{Deserialize, Serialize};

use super::grid::GridFunction;
use super::slow::SlowFunction;
use crate::error::Result;

/// A scalar function of time given either in closed form or as samples.
///
/// Sampled signals are read back with local cubic interpolation and
/// differentiated with fourth-order finite differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeSignal {
    Catalog(SlowFunction),
    Sampled(GridFunction),
}

impl TimeSignal {
    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            TimeSignal::Catalog(f) => Ok(f.eval(t)),
            TimeSignal::Sampled(g) => g.interpolate_cubic(t),
        }
    }

    pub fn derivative(&self) -> Result<TimeSignal> {
        Ok(match self {
            TimeSignal::Catalog(f) => TimeSignal::Catalog(f.derivative()),
            TimeSignal::Sampled(g) => TimeSignal::Sampled(g.derivative()?),
        })
    }

    pub fn as_catalog(&self) -> Option<&SlowFunction> {
        match self {
            TimeSignal::Catalog(f) => Some(f),
            TimeSignal::Sampled(_) => None,
        }
    }
}

impl From<SlowFunction> for TimeSignal {
    fn from(f: SlowFunction) -> Self {
        TimeSignal::Catalog(f)
    }
}

impl From<GridFunction> for TimeSignal {
    fn from(g: GridFunction) -> Self {
        TimeSignal::Sampled(g)
    }
}
