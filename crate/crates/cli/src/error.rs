use minent_core::LabError;
use thiserror::Error;

/// Errors of the command-line layer, each mapped to an exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or malformed configuration, or parameters outside a module's preconditions.
    #[error("configuration error: {0}")]
    Config(String),

    /// A computation failed after the configuration was accepted.
    #[error("{name} failed: {source}")]
    Runtime { name: String, source: LabError },

    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    /// Exit status: 1 for configuration errors, 2 for failed computations.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Runtime { .. } => 2,
        }
    }
}

/// Attach a step name to a core error. Precondition violations of the owning
/// module are configuration errors; anything else is a failed computation.
pub(crate) fn lab(name: &str) -> impl Fn(LabError) -> CliError + '_ {
    move |e| match e {
        LabError::InvalidParameter(_)
        | LabError::InvalidRef(_)
        | LabError::InvalidWord(_)
        | LabError::OutOfRange { .. }
        | LabError::InvertedInterval { .. }
        | LabError::NoSolution { .. }
        | LabError::Parse { .. } => CliError::Config(format!("{name}: {e}")),
        other => CliError::Runtime { name: name.to_string(), source: other },
    }
}
