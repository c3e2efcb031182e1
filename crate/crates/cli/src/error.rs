use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] soop_core::Error),
}

impl CliError {
    /// 2 for anything the user can fix in the invocation or its inputs,
    /// 1 for failures while running.
    pub fn exit_code(&self) -> u8 {
        use soop_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Read { .. } => 2,
            CliError::Write { .. } => 1,
            CliError::Core(e) => match e {
                E::Config { .. }
                | E::InvalidParameter { .. }
                | E::InvalidSignalSpec { .. }
                | E::NoTleRecords(_)
                | E::EmptyInput(_)
                | E::InconsistentOfdm(_)
                | E::EndfireSingularity(_) => 2,
                _ => 1,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
