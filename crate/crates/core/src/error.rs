use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value {value} encountered in {context}")]
    NonFinite { context: String, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("point {name} = {value} lies outside the open interval (0, {upper})")]
    OutsideDomain {
        name: &'static str,
        value: f64,
        upper: f64,
    },

    #[error("under-resolved oscillation: step {step:e} exceeds π/(2ω) = {limit:e}")]
    UnderResolved { step: f64, limit: f64 },

    #[error("grid has {per_period:.2} time points per fast period, at least {required} required")]
    CoarseGrid { per_period: f64, required: usize },

    #[error("singular Volterra equation at t = {t}: |denominator| = {denominator:e}")]
    SingularVolterra { t: f64, denominator: f64 },

    #[error("diagonal coefficient {value:e} at t = {t} is below the solvability floor {floor:e}")]
    DegenerateDiagonal { t: f64, value: f64, floor: f64 },

    #[error("ill-conditioned point matrix: reciprocal condition {rcond:e} < {threshold:e}")]
    IllConditioned { rcond: f64, threshold: f64 },

    #[error("vanishing amplitude: {0}")]
    VanishingAmplitude(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(context: &str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite {
            context: context.to_owned(),
            value,
        })
    }
}
