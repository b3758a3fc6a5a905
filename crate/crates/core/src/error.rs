use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the pipeline can surface.
///
/// The variants group into the CLI exit-code families: usage (1),
/// input format (2) and computation (3). See [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("input too short: need at least {needed} samples, got {got}")]
    InputTooShort { needed: usize, got: usize },

    #[error("insufficient beats: need at least {needed}, got {got}")]
    InsufficientBeats { needed: usize, got: usize },

    #[error("insufficient data: need at least {needed} intervals, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("every interval was rejected by NN screening")]
    EmptyAfterCleaning,

    #[error("insufficient cohort: need at least {needed} subjects, got {got}")]
    InsufficientCohort { needed: usize, got: usize },

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("empty input")]
    EmptyInput,

    #[error("format error at row {row}: {message}")]
    Format { row: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("stage `{stage}` failed for subject `{subject}`: {source}")]
    Stage {
        stage: &'static str,
        subject: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// Wraps `self` with the pipeline stage and subject it came from.
    pub fn in_stage(self, stage: &'static str, subject: &str) -> Self {
        Error::Stage {
            stage,
            subject: subject.to_owned(),
            source: Box::new(self),
        }
    }

    /// The innermost error, looking through stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// Message of the innermost error without its category prefix.
    pub(crate) fn root_message(&self) -> String {
        match self.root() {
            Error::Config(m) | Error::Parameter(m) => m.clone(),
            other => other.to_string(),
        }
    }

    /// Process exit code: 1 usage, 2 input format, 3 computation.
    pub fn exit_code(&self) -> u8 {
        match self.root() {
            Error::Config(_) => 1,
            Error::Format { .. }
            | Error::EmptyInput
            | Error::Io { .. }
            | Error::Json(_)
            | Error::Schema(_) => 2,
            _ => 3,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_wrapping_keeps_exit_code_of_root() {
        let e = Error::InsufficientBeats { needed: 2, got: 0 }.in_stage("detect", "s01");
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().contains("detect"));
        assert!(e.to_string().contains("s01"));

        let e = Error::Format {
            row: 4,
            message: "NaN".into(),
        }
        .in_stage("read", "s02");
        assert_eq!(e.exit_code(), 2);
        assert_eq!(Error::Config("x".into()).exit_code(), 1);
    }
}
