use serde::Serialize;
use thiserror::Error;

use rosenau::petviashvili::IterationRecord;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] rosenau::Error),
}

/// Body of `error.json`.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub exit_code: u8,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub history: Option<Vec<IterationRecord>>,
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical failures, 4 for I/O.
    pub fn exit_code(&self) -> u8 {
        use rosenau::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                E::Config(_)
                | E::LengthMismatch { .. }
                | E::UnsupportedOrder(_)
                | E::Modulus(_)
                | E::CaseConstraint { .. } => 2,
                E::Io(_) | E::Json(_) => 4,
                _ => 3,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            3 => "numerical",
            _ => "io",
        }
    }

    pub fn report(&self) -> ErrorReport {
        let history = match self {
            CliError::Core(rosenau::Error::NonConvergence { history }) => Some(history.clone()),
            _ => None,
        };
        ErrorReport {
            kind: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
            history,
        }
    }

    /// One-line remedy printed after the message.
    pub fn hint(&self) -> Option<&'static str> {
        use rosenau::Error as E;
        match self {
            CliError::Core(E::NonConvergence { .. }) => {
                Some("raise --max-iters, loosen the tolerances, or enlarge the domain")
            }
            CliError::Core(E::Instability { .. }) => Some("increase --M or reduce the amplitude"),
            CliError::Core(E::Domain { .. }) => Some("non-integer p needs a nonnegative solution"),
            CliError::Core(E::Io(_)) => Some("check that --output-dir is writable"),
            _ => None,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(rosenau::Error::Io(e))
    }
}
