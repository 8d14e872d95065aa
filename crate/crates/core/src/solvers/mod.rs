//! Small dense LP and SDP solvers.
//!
//! Both are deterministic: the same input produces a bitwise identical report.

mod lp;
mod sdp;

pub use lp::{solve_lp, LinearProgram, LP_TOLERANCE};
pub use sdp::{
    solve_sdp, SdpSolution, SemidefiniteProgram, SparseSymmetric, MAX_SDP_DIM, SDP_TOLERANCE,
};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

/// Feasibility and optimality residuals at the returned point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    /// Absolute difference between primal and dual objective values.
    pub gap: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport<S> {
    pub status: SolveStatus,
    pub value: f64,
    pub solution: S,
    pub iterations: usize,
    pub residuals: Residuals,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("problem is infeasible (phase-one optimum {0:e})")]
    Infeasible(f64),
    #[error("problem is unbounded")]
    Unbounded,
    #[error("numerical failure after {iterations} iterations: {reason}")]
    NumericalFailure {
        iterations: usize,
        reason: String,
        residuals: Option<Residuals>,
    },
}

impl SolverError {
    pub fn status(&self) -> Option<SolveStatus> {
        match self {
            SolverError::Malformed(_) => None,
            SolverError::Infeasible(_) => Some(SolveStatus::Infeasible),
            SolverError::Unbounded => Some(SolveStatus::Unbounded),
            SolverError::NumericalFailure { .. } => Some(SolveStatus::NumericalFailure),
        }
    }
}
