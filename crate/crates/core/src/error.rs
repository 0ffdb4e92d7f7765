use nfvplan_milp::SolverError;

use crate::model::Violation;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("scenario has {} violation(s); first: {}", .0.len(), .0.first().map(ToString::to_string).unwrap_or_default())]
    Invalid(Vec<Violation>),
    #[error("unknown {kind} `{id}`")]
    UnknownId { kind: &'static str, id: String },
    #[error("stage {index} out of range for a chain of length {len}")]
    StageOutOfRange { index: usize, len: usize },
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error("instance too large: {vars} variables exceeds the budget of {budget}")]
    TooLarge { vars: usize, budget: usize },
    #[error("recomputed cost {recomputed} disagrees with solver objective {objective}")]
    CostMismatch { recomputed: f64, objective: f64 },
    #[error("no plan available: {0}")]
    NoPlan(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    /// A solver error cut a multi-solve run short; finished rows are kept.
    #[error("{source}; partial report attached")]
    Incomplete {
        source: SolverError,
        partial: Box<crate::analysis::Partial>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            msg: {
                let full = e.to_string();
                let suffix = format!(" at line {} column {}", e.line(), e.column());
                full.strip_suffix(&suffix).unwrap_or(&full).to_string()
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
