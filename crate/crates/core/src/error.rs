use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate shock: v_plus equals v_minus ({0})")]
    DegenerateShock(f64),

    #[error("Lax condition violated: need v_minus < v_plus, got v_minus = {v_minus}, v_plus = {v_plus}")]
    LaxViolation { v_minus: f64, v_plus: f64 },

    #[error("non-positive specific volume {value} at index {index}")]
    NonPositiveVolume { index: usize, value: f64 },

    #[error("shock strength {delta} exceeds the configured ceiling {ceiling}")]
    StrengthAboveCeiling { delta: f64, ceiling: f64 },

    #[error("no heteroclinic connection found: {0}")]
    NoConnection(String),

    #[error("unexpected spectrum at the left rest point: unstable dimension {0}")]
    UnexpectedSpectrum(usize),

    #[error("Newton iteration diverged after {iterations} iterations (last residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("zero denominator: {0}")]
    ZeroDenominator(&'static str),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("config validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("unsupported document: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Fails with [`Error::NonPositiveVolume`] on the first `v <= 0` (or NaN).
pub(crate) fn check_positive(v: &[f64]) -> Result<()> {
    match v.iter().position(|&x| !(x > 0.0)) {
        Some(index) => Err(Error::NonPositiveVolume {
            index,
            value: v[index],
        }),
        None => Ok(()),
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}
