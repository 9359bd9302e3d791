//! Proximal calculus for the cognition program: soft-thresholding, unit-box
//! projection, their composition, and the per-agent quadratic data
//! (the matrix `Lambda`, its gradient, and Lipschitz constant).
//!
//! Game-built problems carry `Lambda = v v^T / R_ii` with
//! `v_j = R_ij u_j`, which is rank-one PSD; matrix-vector products then
//! reduce to two dot products. A dense representation is kept for
//! externally supplied (possibly indefinite) matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::SolveError;
use crate::game::{peer_indices, InvestmentProfile, SecurityGame};

/// Smallest admissible Lipschitz constant. When the coupling vector
/// vanishes (`u = 0`) the quadratic part is identically zero and any step
/// size works; the floor keeps `1 / lip` finite.
pub const LIP_FLOOR: f64 = 1e-12;

/// Fraction of the admissible step bound `1 / lip` used by default.
const DEFAULT_STEP_FRACTION: f64 = 0.9;

/// The quadratic coefficient matrix of one agent's cognition program.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaMatrix {
    /// `v v^T * scale`, the structure every game-built problem has.
    RankOne { v: DVector<f64>, scale: f64 },
    /// Arbitrary symmetric matrix (externally supplied instances).
    Dense(DMatrix<f64>),
}

impl LambdaMatrix {
    pub fn dim(&self) -> usize {
        match self {
            Self::RankOne { v, .. } => v.len(),
            Self::Dense(m) => m.nrows(),
        }
    }

    /// `Lambda x`.
    pub fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::RankOne { v, scale } => v * (v.dot(x) * scale),
            Self::Dense(m) => m * x,
        }
    }

    /// `x^T Lambda x`.
    pub fn quad(&self, x: &DVector<f64>) -> f64 {
        match self {
            Self::RankOne { v, scale } => {
                let s = v.dot(x);
                s * s * scale
            }
            Self::Dense(m) => x.dot(&(m * x)),
        }
    }

    /// `e^T Lambda x` with `e` the all-ones vector.
    pub fn ones_dot(&self, x: &DVector<f64>) -> f64 {
        match self {
            Self::RankOne { v, scale } => v.sum() * v.dot(x) * scale,
            Self::Dense(m) => (m * x).sum(),
        }
    }

    /// Materializes the dense matrix (cheap at desk scale).
    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Self::RankOne { v, scale } => {
                let mut m = v * v.transpose();
                m *= *scale;
                m
            }
            Self::Dense(m) => m.clone(),
        }
    }

    /// Spectral norm. Exact for the rank-one form (`|v|^2 * scale`);
    /// symmetric eigendecomposition otherwise.
    pub fn spectral_norm(&self) -> f64 {
        match self {
            Self::RankOne { v, scale } => v.norm_squared() * scale,
            Self::Dense(m) => m
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .fold(0.0f64, |acc, ev| acc.max(ev.abs())),
        }
    }

    /// Whether the matrix is positive semidefinite (within a small
    /// eigenvalue tolerance for the dense form).
    pub fn is_psd(&self) -> bool {
        match self {
            Self::RankOne { scale, .. } => *scale >= 0.0,
            Self::Dense(m) => {
                let scale = self.spectral_norm().max(1.0);
                m.clone()
                    .symmetric_eigen()
                    .eigenvalues
                    .iter()
                    .all(|ev| *ev >= -1e-10 * scale)
            }
        }
    }
}

/// One agent's cognition-program instance: quadratic data, L1 weight,
/// Lipschitz constant, step sizes, and the coordinate-to-agent map.
#[derive(Debug, Clone)]
pub struct ProxProblem {
    lambda: LambdaMatrix,
    /// L1 weight (unit cost of attention).
    pub alpha: f64,
    /// Lipschitz constant of the smooth gradient.
    pub lip: f64,
    /// Step size of the monitor / fixed-point step; in `(0, 1/lip)`.
    pub step_x: f64,
    /// Step size of the accelerated step; in `(0, 1/lip)`.
    pub step_y: f64,
    /// Owning agent.
    pub owner: usize,
    /// Agent index represented by each coordinate (the peers of `owner`).
    pub index_map: Vec<usize>,
}

impl ProxProblem {
    /// Builds agent `owner`'s problem from the game at the investment
    /// profile `u`: `Lambda = v v^T / R_ii` with `v_j = R_ij u_j`, and the
    /// exact Lipschitz constant `|v|^2 / R_ii`. The L1 weight starts at 0;
    /// see [`ProxProblem::with_alpha`] and the calibration routine.
    pub fn from_game(game: &SecurityGame, owner: usize, u: &InvestmentProfile) -> Self {
        let n = game.n_agents();
        assert!(owner < n, "agent index {owner} out of range for {n} agents");
        assert_eq!(u.len(), n, "investment profile length mismatch");
        let index_map = peer_indices(n, owner);
        let v = DVector::from_iterator(
            index_map.len(),
            index_map.iter().map(|&j| game.cross_influence(owner, j) * u.0[j]),
        );
        let scale = 1.0 / game.self_influence(owner);
        let lip = (v.norm_squared() * scale).max(LIP_FLOOR);
        let step = DEFAULT_STEP_FRACTION / lip;
        Self {
            lambda: LambdaMatrix::RankOne { v, scale },
            alpha: 0.0,
            lip,
            step_x: step,
            step_y: step,
            owner,
            index_map,
        }
    }

    /// Wraps an externally supplied symmetric matrix (checked to 1e-12
    /// relative asymmetry). The Lipschitz constant is the spectral norm.
    pub fn from_dense(
        matrix: DMatrix<f64>,
        alpha: f64,
        owner: usize,
        index_map: Vec<usize>,
    ) -> Result<Self, SolveError> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(SolveError::InvalidConfig(format!(
                "lambda matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if index_map.len() != n {
            return Err(SolveError::InvalidConfig(
                "index map length must match the matrix dimension".into(),
            ));
        }
        let scale = matrix.amax().max(1.0);
        for i in 0..n {
            for j in (i + 1)..n {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-12 * scale {
                    return Err(SolveError::InvalidConfig(format!(
                        "lambda matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        if alpha < 0.0 {
            return Err(SolveError::InvalidConfig("alpha must be nonnegative".into()));
        }
        let lambda = LambdaMatrix::Dense(matrix);
        let lip = lambda.spectral_norm().max(LIP_FLOOR);
        let step = DEFAULT_STEP_FRACTION / lip;
        Ok(Self {
            lambda,
            alpha,
            lip,
            step_x: step,
            step_y: step,
            owner,
            index_map,
        })
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        assert!(alpha >= 0.0, "alpha must be nonnegative");
        self.alpha = alpha;
        self
    }

    /// Overrides both step sizes; each must lie in `(0, 1/lip)`.
    pub fn with_steps(mut self, step_x: f64, step_y: f64) -> Result<Self, SolveError> {
        let bound = 1.0 / self.lip;
        if !(step_x > 0.0 && step_x < bound && step_y > 0.0 && step_y < bound) {
            return Err(SolveError::InvalidConfig(format!(
                "step sizes must lie in (0, {bound:.3e})"
            )));
        }
        self.step_x = step_x;
        self.step_y = step_y;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.lambda.dim()
    }

    pub fn lambda(&self) -> &LambdaMatrix {
        &self.lambda
    }

    /// Gradient of the smooth part: `Lambda (m - e)`.
    pub fn grad_f1(&self, m: &DVector<f64>) -> DVector<f64> {
        assert_eq!(m.len(), self.dim(), "coordinate dimension mismatch");
        let shifted = m.map(|x| x - 1.0);
        self.lambda.matvec(&shifted)
    }

    /// Smooth part `f1(m) = 1/2 m^T Lambda m - e^T Lambda m`.
    pub fn f1(&self, m: &DVector<f64>) -> f64 {
        0.5 * self.lambda.quad(m) - self.lambda.ones_dot(m)
    }

    /// Full objective `f1 + alpha |m|_1` when `m` lies in the unit box
    /// (within 1e-12 slack); the infeasible sentinel otherwise.
    pub fn objective(&self, m: &DVector<f64>) -> QValue {
        if m.iter().any(|x| !(*x >= -1e-12 && *x <= 1.0 + 1e-12)) {
            return QValue::INFEASIBLE;
        }
        let l1: f64 = m.iter().map(|x| x.abs()).sum();
        QValue::finite(self.f1(m) + self.alpha * l1)
    }
}

/// Extended-real objective value. Infeasible points carry the maximum
/// finite value and a flag rather than a floating-point infinity, keeping
/// every comparison total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QValue {
    pub value: f64,
    pub feasible: bool,
}

impl QValue {
    pub const INFEASIBLE: Self = Self {
        value: f64::MAX,
        feasible: false,
    };

    pub fn finite(value: f64) -> Self {
        Self {
            value,
            feasible: true,
        }
    }

    /// Total order: any feasible value precedes the infeasible sentinel.
    pub fn le(&self, other: &Self) -> bool {
        match (self.feasible, other.feasible) {
            (true, true) => self.value <= other.value,
            (true, false) => true,
            (false, false) => true,
            (false, true) => false,
        }
    }

    /// [`QValue::le`] with an absolute slack on the comparison. Descent
    /// steps near a fixed point improve the objective by less than one
    /// ulp; comparing exactly would reject them and stall the iterate.
    pub fn le_with_slack(&self, other: &Self, slack: f64) -> bool {
        match (self.feasible, other.feasible) {
            (true, true) => self.value <= other.value + slack,
            (true, false) => true,
            (false, false) => true,
            (false, true) => false,
        }
    }
}

/// Componentwise soft-threshold `(x - t)_+ - (-x - t)_+` with `t >= 0`.
pub fn soft_threshold(x: &DVector<f64>, t: f64) -> DVector<f64> {
    debug_assert!(t >= 0.0, "threshold must be nonnegative");
    x.map(|xi| soft_threshold_scalar(xi, t))
}

pub fn soft_threshold_scalar(x: f64, t: f64) -> f64 {
    (x - t).max(0.0) - (-x - t).max(0.0)
}

/// Componentwise projection onto the unit box `[0, 1]`.
pub fn proj_box(x: &DVector<f64>) -> DVector<f64> {
    x.map(|xi| xi.clamp(0.0, 1.0))
}

/// Proximal map of `t * alpha |.|_1 + box indicator` evaluated with
/// threshold `t`: the box projection composed with the soft-threshold.
/// Equals the exact minimizer of the composite prox subproblem.
pub fn prox_l1_box(x: &DVector<f64>, t: f64) -> DVector<f64> {
    x.map(|xi| prox_l1_box_scalar(xi, t))
}

pub fn prox_l1_box_scalar(x: f64, t: f64) -> f64 {
    soft_threshold_scalar(x, t).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};

    use crate::game::SecurityGame;

    fn homogeneous_game(n: usize, diag: f64, off: f64, ret: f64) -> SecurityGame {
        let mut influence = DMatrix::from_element(n, n, off);
        influence.fill_diagonal(diag);
        SecurityGame::new(
            influence,
            DVector::from_element(n, ret),
            DVector::from_element(n, 3.0),
        )
        .unwrap()
    }

    #[test]
    fn lambda_from_homogeneous_game() {
        let game = homogeneous_game(10, 20.0, 1.0, 25.0);
        let u = InvestmentProfile::constant(10, 25.0 / 17.0);
        let p = ProxProblem::from_game(&game, 0, &u);
        let dense = p.lambda().to_dense();
        let expected_entry = (25.0 / 17.0_f64).powi(2) / 20.0;
        for i in 0..9 {
            for j in 0..9 {
                assert_relative_eq!(dense[(i, j)], expected_entry, max_relative = 1e-12);
            }
        }
        assert_relative_eq!(p.lip, 9.0 * expected_entry, max_relative = 1e-12);
    }

    #[test]
    fn lambda_zero_investment_hits_lip_floor() {
        let game = homogeneous_game(4, 20.0, 1.0, 25.0);
        let p = ProxProblem::from_game(&game, 1, &InvestmentProfile::zeros(4));
        assert_eq!(p.lambda().to_dense(), DMatrix::zeros(3, 3));
        assert_eq!(p.lip, LIP_FLOOR);
        assert!(p.step_x.is_finite());
    }

    #[test]
    fn lambda_hand_assembled_outer_product() {
        // Agent 0 of a 3-agent game with R_00 = 4, R_01 = 2, R_02 = 1 and
        // u = (., 1, 3): v = (2, 3), Lambda = [[4,6],[6,9]]/4, lip = 13/4.
        let influence = DMatrix::from_row_slice(3, 3, &[4.0, 2.0, 1.0, 0.0, 4.0, 1.0, 1.0, 1.0, 4.0]);
        let game = SecurityGame::new(
            influence,
            DVector::from_element(3, 1.0),
            DVector::from_element(3, 1.0),
        )
        .unwrap();
        let u = InvestmentProfile::from_vec(vec![0.7, 1.0, 3.0]);
        let p = ProxProblem::from_game(&game, 0, &u);
        let dense = p.lambda().to_dense();
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, 1.5, 1.5, 2.25]);
        assert_relative_eq!((dense - expected).amax(), 0.0, epsilon = 1e-14);
        assert_relative_eq!(p.lip, 13.0 / 4.0, max_relative = 1e-14);
        assert_eq!(p.index_map, vec![1, 2]);
    }

    #[test]
    fn grad_vanishes_at_ones() {
        let game = homogeneous_game(6, 20.0, 1.0, 25.0);
        let u = InvestmentProfile::constant(6, 1.5);
        let p = ProxProblem::from_game(&game, 2, &u);
        let e = DVector::from_element(5, 1.0);
        assert_eq!(p.grad_f1(&e).amax(), 0.0);
    }

    #[test]
    fn grad_at_zero_is_minus_lambda_ones() {
        let game = homogeneous_game(5, 20.0, 1.0, 25.0);
        let u = InvestmentProfile::constant(5, 2.0);
        let p = ProxProblem::from_game(&game, 0, &u);
        let zero = DVector::zeros(4);
        let expected = -(p.lambda().to_dense() * DVector::from_element(4, 1.0));
        assert_relative_eq!((p.grad_f1(&zero) - expected).amax(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn soft_threshold_branches() {
        assert_relative_eq!(soft_threshold_scalar(0.5, 0.2), 0.3, max_relative = 1e-15);
        assert_eq!(soft_threshold_scalar(0.15, 0.2), 0.0);
        assert_relative_eq!(soft_threshold_scalar(-0.5, 0.2), -0.3, max_relative = 1e-15);
    }

    #[test]
    fn box_projection_branches() {
        let x = DVector::from_vec(vec![1.7, -0.2, 0.4]);
        let p = proj_box(&x);
        assert_eq!(p[0], 1.0);
        assert_eq!(p[1], 0.0);
        assert_eq!(p[2], 0.4);
    }

    #[test]
    fn composed_prox_cases() {
        assert_eq!(prox_l1_box_scalar(1.6, 0.2), 1.0);
        assert_eq!(prox_l1_box_scalar(0.15, 0.2), 0.0);
        assert_eq!(prox_l1_box_scalar(-3.0, 0.5), 0.0);
    }

    #[test]
    fn objective_cases() {
        let game = homogeneous_game(10, 20.0, 1.0, 25.0);
        let u = InvestmentProfile::constant(10, 25.0 / 17.0);
        let p = ProxProblem::from_game(&game, 0, &u).with_alpha(0.3 * (25.0 / 17.0_f64).powi(2));

        let zero = DVector::zeros(9);
        assert_eq!(p.objective(&zero), QValue::finite(0.0));

        let outside = DVector::from_element(9, 1.2);
        assert!(!p.objective(&outside).feasible);

        // symbolic expansion at m = e/3: 1/2 m'Lm - e'Lm + 3 alpha
        let third = DVector::from_element(9, 1.0 / 3.0);
        let lam = (25.0 / 17.0_f64).powi(2) / 20.0;
        let expected = 0.5 * 81.0 * lam / 9.0 - 81.0 * lam / 3.0 + p.alpha * 3.0;
        let q = p.objective(&third);
        assert!(q.feasible);
        assert_relative_eq!(q.value, expected, max_relative = 1e-12);
    }

    #[test]
    fn qvalue_ordering_is_total() {
        let a = QValue::finite(1.0);
        let b = QValue::finite(2.0);
        assert!(a.le(&b));
        assert!(!b.le(&a));
        assert!(a.le(&QValue::INFEASIBLE));
        assert!(QValue::INFEASIBLE.le(&QValue::INFEASIBLE));
        assert!(!QValue::INFEASIBLE.le(&a));
    }

    #[test]
    fn dense_rejects_asymmetric_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.2, 1.0]);
        assert!(ProxProblem::from_dense(m, 1.0, 0, vec![1, 2]).is_err());
    }
}
