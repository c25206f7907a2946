use std::fmt;

use stablefield::Error;

pub const PASS: u8 = 0;
pub const ASSERTION: u8 = 1;
pub const USAGE: u8 = 2;
pub const DOMAIN: u8 = 3;

/// A failed command with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: USAGE, message: message.into() }
    }

    pub fn assertion(message: impl Into<String>) -> Self {
        Failure { code: ASSERTION, message: message.into() }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Failure::usage(format!("cannot write {}: {e}", path.display()))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_input_error() { USAGE } else { DOMAIN };
        Failure { code, message: e.to_string() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}
