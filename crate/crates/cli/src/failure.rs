use serde::Serialize;
use socratic_core::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BACKEND: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

/// Structured error written to stderr as one JSON line.
#[derive(Debug, Serialize)]
pub struct Failure {
    pub kind: &'static str,
    pub message: String,
    pub exit_code: i32,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { kind: "usage", message: message.into(), exit_code: EXIT_USAGE }
    }
}

/// Config and usage problems exit 2, backend failures 3, bad input data 4.
/// A frame-scoped error takes the code of its cause.
fn classify(e: &Error) -> (&'static str, i32) {
    match e.root() {
        Error::Backend { .. } => ("backend", EXIT_BACKEND),
        Error::ContextOverflow { .. } => ("context_overflow", EXIT_BACKEND),
        Error::Unparseable { .. } => ("unparseable", EXIT_BACKEND),
        Error::Precondition(_) => ("precondition", EXIT_USAGE),
        Error::MissingAdapter(_) => ("missing_adapter", EXIT_USAGE),
        Error::MissingIndex(_) => ("missing_index", EXIT_USAGE),
        Error::Irreducible { .. } => ("irreducible", EXIT_USAGE),
        Error::DimensionMismatch { .. } => ("dimension_mismatch", EXIT_INPUT),
        Error::ZeroNorm => ("zero_norm", EXIT_INPUT),
        Error::NonFinite(_) => ("non_finite", EXIT_INPUT),
        Error::Empty(_) => ("empty", EXIT_INPUT),
        Error::UnknownLocator(_) => ("unknown_locator", EXIT_INPUT),
        Error::Format { .. } => ("format", EXIT_INPUT),
        Error::Io { .. } => ("io", EXIT_INPUT),
        Error::Json(_) => ("json", EXIT_INPUT),
        Error::AtFrame { .. } => unreachable!("root() unwraps frame context"),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (kind, exit_code) = classify(&e);
        Self { kind, message: e.to_string(), exit_code }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e).into()
    }
}

pub type CliResult<T> = Result<T, Failure>;
