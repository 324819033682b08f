use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid value for `{key}`: {reason}")]
    InvalidSpec { key: String, reason: String },

    #[error("adaptive step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("energy drift {drift:e} exceeds the allowed {allowed:e}")]
    EnergyDrift { drift: f64, allowed: f64 },

    #[error("shooting did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular shooting Jacobian (det J = {det_j:e}) at iteration {iteration}")]
    SingularShootingJacobian { det_j: f64, iteration: usize },

    #[error("focal point at t = {time} (det J = {det_j:e})")]
    FocalPoint { time: f64, det_j: f64 },

    #[error("focal point inside the path interval at t = {time}")]
    FocalPointInInterior { time: f64 },

    #[error("turning point at t = {time} (y = {momentum:e})")]
    TurningPoint { time: f64, momentum: f64 },

    #[error("turning point inside the interval at t = {time} (|y| = {momentum:e})")]
    TurningPointInInterval { time: f64, momentum: f64 },

    #[error("operation requires one degree of freedom, got n = {n}")]
    NotOneDof { n: usize },

    #[error("time {t} outside the trajectory span [{t0}, {t1}]")]
    OutOfRange { t: f64, t0: f64, t1: f64 },
}

impl Error {
    pub(crate) fn spec(key: &str, reason: impl Into<String>) -> Self {
        Error::InvalidSpec {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    /// The focal or turning time carried by hypothesis-violation errors.
    pub fn offending_time(&self) -> Option<f64> {
        match self {
            Error::FocalPoint { time, .. }
            | Error::FocalPointInInterior { time }
            | Error::TurningPoint { time, .. }
            | Error::TurningPointInInterval { time, .. } => Some(*time),
            _ => None,
        }
    }

    /// True for failures caused by a focal or turning point on the path.
    pub fn is_hypothesis_violation(&self) -> bool {
        matches!(
            self,
            Error::FocalPoint { .. }
                | Error::FocalPointInInterior { .. }
                | Error::TurningPoint { .. }
                | Error::TurningPointInInterval { .. }
                | Error::SingularShootingJacobian { .. }
        )
    }
}

/// Non-fatal conditions attached to reports.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Two roots fell inside one scan cell; a coarser grid could have missed them.
    GridTooCoarse { cell_start: f64, cell_end: f64 },
    /// The wavefunction does not decay at the grid boundary.
    BoundaryLeak { side: BoundarySide, ratio: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySide {
    Left,
    Right,
}
