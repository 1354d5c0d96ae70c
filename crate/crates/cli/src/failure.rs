//! Exit-code discipline: 0 success, 2 validation (bad flags, malformed
//! or missing input, inconsistent shapes), 3 runtime (output IO).

use std::fmt;

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Failure::Validation(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        Failure::Runtime(msg.into())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "{m}"),
            Failure::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<sireg_core::Error> for Failure {
    fn from(e: sireg_core::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

pub type CliResult<T> = Result<T, Failure>;
