use crate::solver::SolveTrace;
use crate::vector::DenseVector;

/// Errors produced by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The inner equality-constrained subproblem exhausted its iteration
    /// budget before the KKT certificate passed. Carries the best iterate
    /// seen and its residuals.
    #[error(
        "inner solver did not converge in {iterations} iterations \
         (feasibility {feasibility:.3e}, stationarity {stationarity:.3e})"
    )]
    NotConverged {
        iterations: usize,
        feasibility: f64,
        stationarity: f64,
        best: DenseVector,
    },

    /// An outer DCA iteration was aborted because its inner solve failed.
    /// `partial` holds the trace of the completed outer iterations (its
    /// status is reported as max-iterations) with the last accepted iterate.
    #[error("dca aborted at outer iteration {outer}: {source}")]
    DcaAborted {
        outer: usize,
        partial: Box<SolveTrace>,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
