use std::path::PathBuf;

use semiclassic::{Error as CoreError, Warning};
use serde_json::{json, Value};

pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_HYPOTHESIS: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("boundary leak with --strict ({} warnings)", warnings.len())]
    Strict { warnings: Vec<Warning> },
}

impl CliError {
    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Strict { .. } => EXIT_NUMERICAL,
            CliError::Core(e) if e.is_hypothesis_violation() => EXIT_HYPOTHESIS,
            CliError::Core(
                CoreError::InvalidSpec { .. } | CoreError::InvalidInput(_) | CoreError::NotOneDof { .. },
            ) => EXIT_CONFIG,
            CliError::Core(_) => EXIT_NUMERICAL,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Io { .. } => "io",
            CliError::Strict { .. } => "boundary_leak",
            CliError::Core(e) => match e {
                CoreError::InvalidInput(_) => "invalid_input",
                CoreError::InvalidSpec { .. } => "invalid_spec",
                CoreError::StepSizeUnderflow { .. } => "step_size_underflow",
                CoreError::EnergyDrift { .. } => "energy_drift",
                CoreError::NoConvergence { .. } => "no_convergence",
                CoreError::SingularShootingJacobian { .. } => "singular_shooting_jacobian",
                CoreError::FocalPoint { .. } => "focal_point",
                CoreError::FocalPointInInterior { .. } => "focal_point_in_interior",
                CoreError::TurningPoint { .. } => "turning_point",
                CoreError::TurningPointInInterval { .. } => "turning_point_in_interval",
                CoreError::NotOneDof { .. } => "not_one_dof",
                CoreError::OutOfRange { .. } => "out_of_range",
            },
        }
    }

    /// Machine-readable payload written to stderr.
    pub fn to_json(&self) -> Value {
        let mut out = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        let key = match self {
            CliError::Config { key, .. } | CliError::Core(CoreError::InvalidSpec { key, .. }) => Some(key.as_str()),
            CliError::Core(CoreError::NotOneDof { .. }) => Some("mass"),
            CliError::Io { .. } => Some("output.dir"),
            _ => None,
        };
        if let Some(k) = key {
            out["key"] = json!(k);
        }
        if let CliError::Core(e) = self {
            if let Some(t) = e.offending_time() {
                out["time"] = json!(t);
            }
        }
        if let CliError::Strict { warnings } = self {
            out["warnings"] = json!(warnings);
        }
        out
    }
}

pub type CliResult<T> = Result<T, CliError>;
