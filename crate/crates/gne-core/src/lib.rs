//! Solver library for interdependent security-investment games with
//! limited-attention players.
//!
//! The model couples two layers. In the investment layer each agent picks a
//! security spend that best-responds to the neighbor investments it
//! *perceives*; with attention weights fixed, the equilibrium solves a
//! diagonally dominant linear system ([`equilibrium`]). In the cognition
//! layer each agent shapes those attention weights by minimizing a
//! box-constrained, L1-penalized quadratic built from the current
//! investments ([`prox`], [`cognition`]). Alternating the two layers to a
//! joint fixed point, verifying it, and classifying the attention patterns
//! it exhibits is the job of [`gne`].

pub mod cognition;
pub mod equilibrium;
pub mod error;
pub mod game;
pub mod gne;
pub mod prox;
pub mod reference;

pub use cognition::{
    apg_convex, apg_nonconvex, calibrate_alpha, calibrate_alpha_with_tol, fixed_point_residual,
    pg_step, solve_cognition,
    ApgConfig, ApgPath, ApgStep, ApgTrace, BRACKET_TOL, BUDGET_TOL,
};
pub use equilibrium::{
    brne_direct, brne_iterate, decoupled_profile, effective_system, rational_ne, BrMethod,
    BrSolverConfig, BrTrace,
};
pub use error::SolveError;
pub use game::{
    peer_indices, CognitionProfile, InvestmentProfile, SecurityGame, ValidationReport, Violation,
};
pub use gne::{
    detect_phenomena, fill_set, gne_solve, homogeneous_closed_form, verify_gne, BudgetMode,
    GneConfig, GneOutcome, PartisanshipReport, PhenomenaReport, ProbeFailure, ProbeKind,
    RoundRecord, VerificationReport, PROBE_TOL, STATIONARITY_TOL,
};
pub use prox::{
    prox_l1_box, prox_l1_box_scalar, proj_box, soft_threshold, soft_threshold_scalar,
    LambdaMatrix, ProxProblem, QValue, LIP_FLOOR,
};
