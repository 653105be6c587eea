use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Certification or verification did not pass.
    #[error("{0}")]
    Failed(String),

    #[error("{}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },

    #[error("{}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] cascol::Error),
}

impl CliError {
    /// 1 for a failed check, 2 for bad input, 3 for everything else.
    pub fn exit_code(&self) -> u8 {
        use cascol::Error as E;
        match self {
            CliError::Failed(_) => 1,
            CliError::Config(_) | CliError::Read { .. } => 2,
            CliError::Write { .. } => 3,
            CliError::Core(e) => match e {
                E::Verification(_) => 1,
                E::Config(_) | E::Parse(_) | E::Precondition(_) | E::InsufficientData(_) | E::Degenerate => 2,
                E::Supercritical { .. } | E::Integration { .. } | E::Generation(_) | E::Internal(_) | E::Io(_) => 3,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
