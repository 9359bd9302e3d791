//! Committed reference instance for the monitored (nonconvex) path: a
//! fixed indefinite 9x9 symmetric matrix at L1 weight 100, together with
//! the critical point the solver reaches from several starting points.
//!
//! The matrix was drawn once from a seeded generator (eigenvalues span
//! roughly -168 to +165, so the quadratic is clearly indefinite) and is
//! frozen here so descent and initialization-robustness checks run against
//! stable data. The solution was produced by the monitored path at
//! tolerance 1e-12 and cross-checked by forty random restarts, all of
//! which land on the same point.

use nalgebra::{DMatrix, DVector};

use crate::prox::ProxProblem;

/// Dimension of the reference instance (9 peers of a 10-agent network).
pub const DIM: usize = 9;

/// L1 weight the instance is solved at.
pub const ALPHA: f64 = 100.0;

/// Row-major entries of the symmetric indefinite matrix.
pub const LAMBDA: [[f64; DIM]; DIM] = [
    [51.86, 34.96, 3.48, -0.87, -17.21, 57.36, 58.2, 6.71, -32.65],
    [34.96, 29.59, 56.65, 0.87, 32.65, 21.94, -41.73, 54.42, 12.72],
    [3.48, 56.65, 46.36, -28.44, 20.11, 26.78, 2.43, -11.28, 42.56],
    [-0.87, 0.87, -28.44, -56.5, -17.43, 41.93, -43.02, -56.9, -14.19],
    [-17.21, 32.65, 20.11, -17.43, -43.95, -37.01, -56.88, -26.92, 33.33],
    [57.36, 21.94, 26.78, 41.93, -37.01, 50.72, 8.95, -51.09, -23.57],
    [58.2, -41.73, 2.43, -43.02, -56.88, 8.95, 21.79, -34.7, 12.26],
    [6.71, 54.42, -11.28, -56.9, -26.92, -51.09, -34.7, -55.65, -16.76],
    [-32.65, 12.72, 42.56, -14.19, 33.33, -23.57, 12.26, -16.76, 17.2],
];

/// Attention vector the monitored path converges to (tolerance 1e-12).
pub const SOLUTION: [f64; DIM] = [
    0.5180330478522622,
    1.0,
    0.004254637477867584,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
];

/// Objective value at [`SOLUTION`].
pub const OBJECTIVE: f64 = -94.24161880060163;

/// Builds the reference problem.
pub fn problem() -> ProxProblem {
    let flat: Vec<f64> = LAMBDA.iter().flatten().copied().collect();
    ProxProblem::from_dense(
        DMatrix::from_row_slice(DIM, DIM, &flat),
        ALPHA,
        0,
        (1..=DIM).collect(),
    )
    .expect("reference matrix is square and symmetric")
}

/// The frozen critical point as a vector.
pub fn solution() -> DVector<f64> {
    DVector::from_row_slice(&SOLUTION)
}
