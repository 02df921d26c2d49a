use std::path::Path;

/// Process exit code for a successful command.
pub const EXIT_OK: i32 = 0;
/// Exit code for unusable configuration, flags or scene files.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for failures while computing or writing results.
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    pub(crate) fn io(path: &Path, e: std::io::Error) -> CliError {
        CliError::Runtime(format!("{}: {e}", path.display()))
    }
}

impl From<railray::Error> for CliError {
    fn from(e: railray::Error) -> CliError {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
