use ncadmm_core::{AdmmError, NumericsError};
use ncadmm_ct::CtError;
use ncadmm_quantile::QuantileError;
use thiserror::Error;

/// Failure classes of the runner, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn config(field: &str, message: impl std::fmt::Display) -> Self {
        CliError::Config(format!("{field}: {message}"))
    }

    pub fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

impl From<QuantileError> for CliError {
    fn from(err: QuantileError) -> Self {
        match err {
            QuantileError::InvalidSpec { field, message } => {
                let key = match field {
                    "noise" => "quantile.noise_df".to_string(),
                    "sigma" => "experiment.sigmas".to_string(),
                    other => format!("quantile.{other}"),
                };
                CliError::config(&key, message)
            }
            QuantileError::Io(e) => e.into(),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<CtError> for CliError {
    fn from(err: CtError) -> Self {
        match err {
            CtError::Geometry(_)
            | CtError::UnknownMaterial(_)
            | CtError::Thresholds(_)
            | CtError::Spectral(_)
            | CtError::Parse { .. }
            | CtError::Dimension { .. } => CliError::config("ct", err),
            CtError::Io(e) => e.into(),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<AdmmError> for CliError {
    fn from(err: AdmmError) -> Self {
        CliError::Numerical(err.to_string())
    }
}

impl From<NumericsError> for CliError {
    fn from(err: NumericsError) -> Self {
        match err {
            NumericsError::Io(e) => CliError::Io(e),
            other => CliError::Numerical(other.to_string()),
        }
    }
}
