use std::path::Path;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Core(#[from] trs_core::Error),

    /// A result that should be impossible, such as an infeasible emitted match.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Core(trs_core::Error::io(path, e))
    }

    /// 1 for bad input, 2 for invariant violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Invariant(_) => 2,
            CliError::Core(e) => match e {
                trs_core::Error::FractionalRelaxation { .. } | trs_core::Error::Solver(_) => 2,
                _ => 1,
            },
        }
    }
}
