use std::fmt;

/// Bad flags, config entries or input files.
#[derive(Debug, Clone)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// A verification did not meet its tolerance.
    ToleranceFailed,
}

pub const SUCCESS: u8 = 0;
pub const TOLERANCE: u8 = 1;
pub const USAGE: u8 = 2;
pub const NUMERICAL: u8 = 3;

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Success => SUCCESS,
            Outcome::ToleranceFailed => TOLERANCE,
        }
    }
}

/// Exit code for a failed command: 3 for divergence or a trajectory leaving
/// the domain, 2 for everything else.
pub fn error_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<mlhjb::Error>() {
            return match e {
                mlhjb::Error::Divergence { .. } | mlhjb::Error::StateEscape { .. } => NUMERICAL,
                _ => USAGE,
            };
        }
    }
    USAGE
}
