use std::path::PathBuf;

use thiserror::Error;

/// A single problem found while validating parameters or a config file.
#[derive(Clone, Debug, PartialEq)]
pub struct Issue {
    /// Dotted path to the offending key, e.g. `material.mu`.
    pub path: String,
    pub message: String,
}

impl Issue {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Issue {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Issue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn join(issues: &[Issue]) -> String {
    issues
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible state: {0}")]
    Infeasible(String),

    #[error("invalid parameters: {}", join(.0))]
    InvalidParams(Vec<Issue>),

    #[error("invalid config: {}", join(.0))]
    Config(Vec<Issue>),

    #[error("solver failure in {stage}: {detail} (residual {residual:e})")]
    Solver {
        stage: &'static str,
        detail: String,
        residual: f64,
    },

    #[error("step {step} of segment {segment}: {source}")]
    AtStep {
        segment: usize,
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown column `{name}`; available: {}", .available.join(", "))]
    UnknownColumn {
        name: String,
        available: Vec<String>,
    },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn solver(stage: &'static str, detail: impl Into<String>, residual: f64) -> Self {
        Error::Solver {
            stage,
            detail: detail.into(),
            residual,
        }
    }

    /// Strips step coordinates.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
