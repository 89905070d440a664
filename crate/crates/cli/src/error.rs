use std::path::PathBuf;

use bell_lab::harness::HarnessError;
use bell_lab::lhv::LhvError;
use bell_lab::quantum::QuantumError;
use bell_lab::relativity::RelativityError;
use bell_lab::CorrelationError;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
    #[error(transparent)]
    Lhv(#[from] LhvError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Relativity(#[from] RelativityError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Parse,
    Numeric,
    DeskScale,
}

impl ErrorKind {
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorKind::Validation | ErrorKind::Parse => 2,
            ErrorKind::Numeric => 3,
            ErrorKind::DeskScale => 4,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ErrorKind::Validation => "validation",
            ErrorKind::Parse => "parse",
            ErrorKind::Numeric => "numeric_failure",
            ErrorKind::DeskScale => "desk_scale_exceeded",
        }
    }
}

fn lhv_kind(e: &LhvError) -> ErrorKind {
    match e {
        LhvError::CapExceeded { .. } => ErrorKind::DeskScale,
        LhvError::NumericalFailure(_) => ErrorKind::Numeric,
        _ => ErrorKind::Validation,
    }
}

impl CliError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            CliError::Lhv(e) | CliError::Harness(HarnessError::Lhv(e)) => lhv_kind(e),
            CliError::Parse { .. } => ErrorKind::Parse,
            _ => ErrorKind::Validation,
        }
    }

    pub fn to_json(&self) -> Value {
        let kind = self.kind();
        let mut body = json!({
            "kind": kind.name(),
            "exit_code": kind.exit_code(),
            "message": self.to_string(),
        });
        if let CliError::Parse { path, .. } | CliError::Read { path, .. } = self {
            body["path"] = json!(path);
        }
        json!({ "error": body })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let numeric = CliError::Lhv(LhvError::NumericalFailure("stalled".into()));
        assert_eq!(numeric.kind().exit_code(), 3);
        let cap = CliError::Harness(HarnessError::Lhv(LhvError::CapExceeded {
            count: "10".into(),
            cap: 1,
        }));
        assert_eq!(cap.kind().exit_code(), 4);
        assert_eq!(CliError::Invalid("x".into()).kind().exit_code(), 2);
        let parse = CliError::Parse {
            path: "b.json".into(),
            message: "eof".into(),
        };
        assert_eq!(parse.to_json()["error"]["kind"], "parse");
        assert_eq!(parse.to_json()["error"]["path"], "b.json");
    }
}
