//! Library side of the `sparsectl` command-line tool: system-file parsing,
//! test-system generators and command dispatch producing JSON reports.

pub mod generate;
pub mod pretty;
pub mod run;
pub mod system;

use thiserror::Error;

pub use generate::{generate_system, GeneratorKind};
pub use run::{run_command, Command, Options, RunReport};
pub use system::{parse_system_file, parse_system_text, SystemFile};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("numeric error: {0}")]
    Numeric(String),
}

impl CliError {
    /// 1 for bad input, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

impl From<sparsectl::Error> for CliError {
    fn from(e: sparsectl::Error) -> Self {
        match e {
            sparsectl::Error::Numeric(msg) => CliError::Numeric(msg),
            sparsectl::Error::Input(msg) => CliError::Input(msg),
            other => CliError::Input(other.to_string()),
        }
    }
}
