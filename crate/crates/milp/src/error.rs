use thiserror::Error;

/// Best known state of a branch-and-bound search that ran out of nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialResult {
    /// Objective and point of the best integral solution found, if any.
    pub incumbent: Option<(f64, Vec<f64>)>,
    /// Smallest LP bound among the nodes that were still open.
    pub bound: f64,
    pub nodes: usize,
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("numerical breakdown in simplex: {0}")]
    SolverNumerics(String),

    #[error("LP relaxation is unbounded")]
    Unbounded,

    #[error("node budget of {budget} exhausted (best bound {:.6}, incumbent {:?})", .partial.bound, .partial.incumbent.as_ref().map(|(obj, _)| *obj))]
    BudgetExhausted { budget: usize, partial: PartialResult },

    #[error("brute force refuses {0} binaries (limit {1})")]
    TooManyBinaries(usize, usize),

    #[error("dense tableau of {rows}x{cols} exceeds the cell budget of {budget}")]
    TooLarge {
        rows: usize,
        cols: usize,
        budget: usize,
    },

    #[error("LP text, line {line}: {msg}")]
    LpParse { line: usize, msg: String },
}

pub type Result<T, E = SolverError> = std::result::Result<T, E>;
