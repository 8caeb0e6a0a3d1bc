use std::fmt;
use std::process::ExitCode;

/// Command failure with its exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, parameters or configuration; exit status 2.
    Usage(String),
    /// A computation failed; exit status 3.
    Numeric(String),
}

impl Failure {
    pub fn code(&self) -> ExitCode {
        match self {
            Failure::Usage(_) => ExitCode::from(2),
            Failure::Numeric(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

/// Attaches the name of the failing operation to a library error.
pub trait Context<T> {
    fn during(self, op: &str) -> Result<T, Failure>;
}

impl<T> Context<T> for nhil::Result<T> {
    fn during(self, op: &str) -> Result<T, Failure> {
        self.map_err(|e| wrap(e, op))
    }
}

pub fn wrap(e: nhil::Error, op: &str) -> Failure {
    match e {
        nhil::Error::InvalidParams(m) => Failure::Usage(format!("invalid parameters: {m}")),
        e => Failure::Numeric(format!("{op}: {e}")),
    }
}
