use std::fmt;

/// A command failure with its process exit code: 1 I/O, 2 validation,
/// 3 numerical divergence, 64 usage.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
    /// Library error behind the failure, if any.
    pub cause: Option<emomap::Error>,
}

impl Failure {
    pub const IO: u8 = 1;
    pub const VALIDATION: u8 = 2;
    pub const NUMERIC: u8 = 3;
    pub const USAGE: u8 = 64;

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: Self::IO, message: message.into(), cause: None }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self { code: Self::VALIDATION, message: message.into(), cause: None }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: Self::USAGE, message: message.into(), cause: None }
    }

    pub fn context(mut self, what: &str) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub fn exit_code(e: &emomap::Error) -> u8 {
    match e {
        emomap::Error::Io { .. } => Failure::IO,
        emomap::Error::Divergence { .. } => Failure::NUMERIC,
        _ => Failure::VALIDATION,
    }
}

impl From<emomap::Error> for Failure {
    fn from(e: emomap::Error) -> Self {
        Self {
            code: exit_code(&e),
            message: e.to_string(),
            cause: Some(e),
        }
    }
}
