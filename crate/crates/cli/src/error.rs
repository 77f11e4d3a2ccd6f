use std::fmt;
use std::path::Path;

/// Exit code for invalid input, parameters or flags.
pub const EXIT_INVALID: i32 = 1;
/// Exit code for file-system and parse failures.
pub const EXIT_IO: i32 = 2;

/// A failure reported as one line, `error[<kind>]: <message>`.
#[derive(Debug)]
pub struct CliError {
    pub kind: String,
    pub message: String,
    pub code: i32,
}

impl CliError {
    pub fn invalid(kind: &str, message: impl Into<String>) -> Self {
        CliError { kind: kind.into(), message: message.into(), code: EXIT_INVALID }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::invalid("Usage", message)
    }

    /// Attaches the file the error came from.
    pub fn at(path: &Path) -> impl FnOnce(a2g_core::Error) -> CliError + '_ {
        move |e| {
            let mut err = CliError::from(e);
            err.message = format!("{}: {}", path.display(), err.message);
            err
        }
    }
}

impl From<a2g_core::Error> for CliError {
    fn from(e: a2g_core::Error) -> Self {
        CliError {
            kind: e.kind().to_string(),
            message: e.to_string(),
            code: if e.is_io() { EXIT_IO } else { EXIT_INVALID },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one_line: String = self.message.split_whitespace().collect::<Vec<_>>().join(" ");
        write!(f, "error[{}]: {}", self.kind, one_line)
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;
