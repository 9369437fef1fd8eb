use std::io;

use thiserror::Error;

use crate::decomp::DecompReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fault set of size {size} exceeds the fault bound f={bound}")]
    TooManyFaults { size: usize, bound: usize },

    #[error("decomposition failed after {swaps} swaps: {report}")]
    DecompositionFailed { swaps: usize, report: Box<DecompReport> },

    #[error("subset label bound violated: {0}")]
    InternalBoundViolated(String),

    #[error("labels were produced by different backends ({0:?} vs {1:?})")]
    BackendMismatch([u8; 4], [u8; 4]),

    #[error("unknown connectivity backend tag {0:?}")]
    UnknownBackend([u8; 4]),

    #[error("labels do not belong to one labeling: {0}")]
    LabelMix(String),

    #[error("malformed encoding: {0}")]
    MalformedBits(String),

    #[error("warm-up recursion budget exceeded: more than {cap} sub-instances")]
    RecursionBudgetExceeded { cap: usize },

    #[error("verification needs {queries} queries, over the budget of {budget}")]
    BudgetExceeded { queries: u128, budget: u128 },

    #[error("instance generation failed: {0}")]
    GenerationFailed(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn malformed(msg: impl Into<String>) -> Self {
        Error::MalformedBits(msg.into())
    }

    pub(crate) fn mix(msg: impl Into<String>) -> Self {
        Error::LabelMix(msg.into())
    }
}
