use std::fmt;

use reliefnav::Error;

pub const EXIT_MISSING: u8 = 2;
pub const EXIT_MALFORMED: u8 = 3;
pub const EXIT_INFEASIBLE: u8 = 4;
pub const EXIT_FEW_ROUTES: u8 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => EXIT_MISSING,
            Error::Io { .. } => EXIT_MISSING,
            Error::Infeasible(_) | Error::Range { .. } => EXIT_INFEASIBLE,
            _ => EXIT_MALFORMED,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::new(EXIT_MALFORMED, e.to_string())
    }
}

/// Fails with exit code 2 unless `path` exists.
pub fn require_file(path: &std::path::Path, what: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::new(EXIT_MISSING, format!("{what} file not found: {}", path.display())))
    }
}
