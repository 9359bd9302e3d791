//! Error types shared across the solver stack.

use thiserror::Error;

use crate::cognition::ApgTrace;
use crate::equilibrium::BrTrace;
use crate::gne::GneOutcome;

/// Errors produced by the equilibrium, cognition, and GNE solvers.
#[derive(Debug, Error)]
pub enum SolveError {
    /// The effective influence system could not be factorized. Cannot occur
    /// for games that satisfy diagonal dominance; guards invalid input.
    #[error("singular effective influence system: {0}")]
    SingularSystem(String),

    /// Best-response dynamics exhausted `max_iters` without the sup-norm
    /// change dropping below tolerance.
    #[error("best-response dynamics did not converge within {max_iters} sweeps")]
    BrNonConvergence { max_iters: usize, trace: BrTrace },

    /// The proximal-gradient solver exhausted its iteration budget.
    #[error("proximal solver did not converge within {max_iters} iterations")]
    ApgNonConvergence {
        max_iters: usize,
        trace: Box<ApgTrace>,
    },

    /// The L1-weight calibration could not bracket the requested attention
    /// budget. Carries the scan of attempted (alpha, l1-mass) pairs.
    #[error("alpha calibration failed to bracket budget {beta}")]
    CalibrationFailure {
        beta: f64,
        attempts: Vec<(f64, f64)>,
    },

    /// The outer alternation exhausted `max_rounds`. The boxed outcome holds
    /// the full round trace with `converged == false`.
    #[error("GNE alternation did not converge within {rounds} rounds")]
    GneNonConvergence {
        rounds: usize,
        outcome: Box<GneOutcome>,
    },

    /// A configuration value violates a documented precondition.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An input is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
}
