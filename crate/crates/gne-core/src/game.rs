//! Game data model: the influence network, investment and attention
//! profiles, both cost functions, and the risk of bounded perception.
//!
//! Conventions used throughout the crate:
//! * `influence[(i, j)]` holds the coefficient with which agent `j`'s
//!   investment offsets agent `i`'s risk; the diagonal holds agent `i`'s
//!   own marginal cost coefficient (units unit/k$^2).
//! * Attention rows are stored as full length-`N` vectors whose self entry
//!   is structurally zero; every norm and sum skips the self index. This
//!   avoids (N-1)-coordinate index remapping in the public API.
//! * Units (unit, k$) are documentation only; nothing is checked at runtime.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::SolveError;

/// The fixed environment of both decision layers: influence matrix,
/// investment returns, and per-agent attention budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct SecurityGame {
    influence: DMatrix<f64>,
    returns: DVector<f64>,
    budgets: DVector<f64>,
}

impl SecurityGame {
    /// Builds a game from its raw parts. Only shape consistency is enforced
    /// here; semantic invariants are reported by [`SecurityGame::validate`].
    pub fn new(
        influence: DMatrix<f64>,
        returns: DVector<f64>,
        budgets: DVector<f64>,
    ) -> Result<Self, SolveError> {
        let n = influence.nrows();
        if influence.ncols() != n {
            return Err(SolveError::InvalidConfig(format!(
                "influence matrix must be square, got {}x{}",
                influence.nrows(),
                influence.ncols()
            )));
        }
        if returns.len() != n || budgets.len() != n {
            return Err(SolveError::InvalidConfig(format!(
                "returns ({}) and budgets ({}) must match the {} agents",
                returns.len(),
                budgets.len(),
                n
            )));
        }
        if n == 0 {
            return Err(SolveError::InvalidConfig("game needs at least one agent".into()));
        }
        Ok(Self {
            influence,
            returns,
            budgets,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.influence.nrows()
    }

    pub fn influence(&self) -> &DMatrix<f64> {
        &self.influence
    }

    /// Own-cost coefficient of agent `i` (the diagonal entry).
    pub fn self_influence(&self, i: usize) -> f64 {
        self.influence[(i, i)]
    }

    /// Influence of agent `j`'s investment on agent `i`'s risk.
    pub fn cross_influence(&self, i: usize, j: usize) -> f64 {
        self.influence[(i, j)]
    }

    pub fn returns(&self) -> &DVector<f64> {
        &self.returns
    }

    pub fn investment_return(&self, i: usize) -> f64 {
        self.returns[i]
    }

    pub fn budgets(&self) -> &DVector<f64> {
        &self.budgets
    }

    pub fn budget(&self, i: usize) -> f64 {
        self.budgets[i]
    }

    /// Checks every game invariant and reports each violation with the
    /// offending row or entry. Violations are data, not failures.
    pub fn validate(&self) -> ValidationReport {
        let n = self.n_agents();
        let mut violations = Vec::new();
        for i in 0..n {
            let diag = self.influence[(i, i)];
            if !diag.is_finite() || diag <= 0.0 {
                violations.push(Violation::NonPositiveDiagonal { row: i, value: diag });
            }
            let mut off_sum = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let v = self.influence[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    violations.push(Violation::NegativeOffDiagonal {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                off_sum += v;
            }
            let dominant = matches!(
                diag.partial_cmp(&off_sum),
                Some(std::cmp::Ordering::Greater)
            );
            if !dominant {
                violations.push(Violation::NotDiagonallyDominant {
                    row: i,
                    diagonal: diag,
                    off_diagonal_sum: off_sum,
                });
            }
            let r = self.returns[i];
            if !r.is_finite() || r <= 0.0 {
                violations.push(Violation::NonPositiveReturn { index: i, value: r });
            }
            let b = self.budgets[i];
            let cap = (n - 1) as f64;
            if !b.is_finite() || b <= 0.0 || b > cap {
                violations.push(Violation::BudgetOutOfRange {
                    index: i,
                    value: b,
                    cap,
                });
            }
        }
        ValidationReport { violations }
    }

    /// Real cost of agent `i` at the profile `u`:
    /// `1/2 R_ii u_i^2 - r_i u_i - sum_{j != i} R_ij u_i u_j`.
    ///
    /// Panics if `i` is out of range.
    pub fn true_cost(&self, i: usize, u: &InvestmentProfile) -> f64 {
        let n = self.n_agents();
        assert!(i < n, "agent index {i} out of range for {n} agents");
        assert_eq!(u.len(), n, "investment profile length mismatch");
        let ui = u.0[i];
        let mut coupling = 0.0;
        for j in 0..n {
            if j != i {
                coupling += self.influence[(i, j)] * u.0[j];
            }
        }
        0.5 * self.influence[(i, i)] * ui * ui - self.returns[i] * ui - ui * coupling
    }

    /// Cost of agent `i` as perceived through the attention row `m_i`:
    /// the coupling term is weighted by `m_i[j]`. With `m_i = 1` this equals
    /// [`SecurityGame::true_cost`]; the self entry of `m_i` is ignored.
    ///
    /// Panics if `i` is out of range.
    pub fn perceived_cost(&self, i: usize, u: &InvestmentProfile, m_i: &DVector<f64>) -> f64 {
        let n = self.n_agents();
        assert!(i < n, "agent index {i} out of range for {n} agents");
        assert_eq!(u.len(), n, "investment profile length mismatch");
        assert_eq!(m_i.len(), n, "attention row length mismatch");
        let ui = u.0[i];
        let mut coupling = 0.0;
        for j in 0..n {
            if j != i {
                coupling += m_i[j] * self.influence[(i, j)] * u.0[j];
            }
        }
        0.5 * self.influence[(i, i)] * ui * ui - self.returns[i] * ui - ui * coupling
    }

    /// Risk of bounded perception of agent `i`: the excess real cost from
    /// best-responding to the perceived rather than true neighbor
    /// investments,
    /// `1/2 sum_{j,k != i} (1-m_j)(1-m_k) R_ij R_ik u_j u_k / R_ii`.
    ///
    /// The double sum collapses to a square, which is what we evaluate;
    /// the result is nonnegative for every input.
    ///
    /// Panics if `i` is out of range.
    pub fn rbp(&self, i: usize, u: &InvestmentProfile, m_i: &DVector<f64>) -> f64 {
        let n = self.n_agents();
        assert!(i < n, "agent index {i} out of range for {n} agents");
        assert_eq!(u.len(), n, "investment profile length mismatch");
        assert_eq!(m_i.len(), n, "attention row length mismatch");
        let mut unperceived = 0.0;
        for j in 0..n {
            if j != i {
                unperceived += (1.0 - m_i[j]) * self.influence[(i, j)] * u.0[j];
            }
        }
        0.5 * unperceived * unperceived / self.influence[(i, i)]
    }
}

/// Result of [`SecurityGame::validate`]: empty means the game is valid.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A single violated game invariant, naming the offending row or entry.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonPositiveDiagonal { row: usize, value: f64 },
    NegativeOffDiagonal { row: usize, col: usize, value: f64 },
    NotDiagonallyDominant { row: usize, diagonal: f64, off_diagonal_sum: f64 },
    NonPositiveReturn { index: usize, value: f64 },
    BudgetOutOfRange { index: usize, value: f64, cap: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonPositiveDiagonal { row, value } => {
                write!(f, "row {row}: diagonal must be positive, got {value}")
            }
            Self::NegativeOffDiagonal { row, col, value } => {
                write!(f, "entry ({row}, {col}): off-diagonal must be nonnegative, got {value}")
            }
            Self::NotDiagonallyDominant { row, diagonal, off_diagonal_sum } => {
                write!(
                    f,
                    "row {row} not diagonally dominant: {diagonal} <= {off_diagonal_sum}"
                )
            }
            Self::NonPositiveReturn { index, value } => {
                write!(f, "return {index}: must be positive, got {value}")
            }
            Self::BudgetOutOfRange { index, value, cap } => {
                write!(f, "budget {index}: must lie in (0, {cap}], got {value}")
            }
        }
    }
}

/// The vector `u` of security investments (k$ per agent).
#[derive(Debug, Clone, PartialEq)]
pub struct InvestmentProfile(pub DVector<f64>);

impl InvestmentProfile {
    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        Self(DVector::from_vec(values))
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self(DVector::from_element(n, value))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Finite and componentwise nonnegative.
    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|v| v.is_finite() && *v >= 0.0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).amax()
    }
}

/// The stack of per-agent attention rows: row `i` holds agent `i`'s weights
/// over the other agents in `[0, 1]`, with the self entry fixed at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CognitionProfile {
    weights: DMatrix<f64>,
}

impl CognitionProfile {
    /// Accepts a square matrix of weights, zeroing the diagonal and clamping
    /// entries that violate the unit box by at most `1e-12`. Larger
    /// violations are an error.
    pub fn from_matrix(mut weights: DMatrix<f64>) -> Result<Self, SolveError> {
        let n = weights.nrows();
        if weights.ncols() != n {
            return Err(SolveError::InvalidConfig(format!(
                "attention matrix must be square, got {}x{}",
                weights.nrows(),
                weights.ncols()
            )));
        }
        for i in 0..n {
            weights[(i, i)] = 0.0;
            for j in 0..n {
                let w = weights[(i, j)];
                if !w.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&w) {
                    return Err(SolveError::InvalidConfig(format!(
                        "attention entry ({i}, {j}) = {w} outside [0, 1]"
                    )));
                }
                weights[(i, j)] = w.clamp(0.0, 1.0);
            }
        }
        Ok(Self { weights })
    }

    /// All-ones off-diagonal: the fully rational profile.
    pub fn full(n: usize) -> Self {
        let mut weights = DMatrix::from_element(n, n, 1.0);
        weights.fill_diagonal(0.0);
        Self { weights }
    }

    /// Row `i` uniform at `budget_i / (N - 1)`: the budget-feasible
    /// symmetric starting profile.
    pub fn uniform_budget(budgets: &DVector<f64>) -> Self {
        let n = budgets.len();
        let mut weights = DMatrix::zeros(n, n);
        for i in 0..n {
            let fill = if n > 1 {
                (budgets[i] / (n - 1) as f64).clamp(0.0, 1.0)
            } else {
                0.0
            };
            for j in 0..n {
                if j != i {
                    weights[(i, j)] = fill;
                }
            }
        }
        Self { weights }
    }

    pub fn n_agents(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    /// Agent `i`'s attention row as a full length-`N` vector (self entry 0).
    pub fn row(&self, i: usize) -> DVector<f64> {
        self.weights.row(i).transpose()
    }

    /// L1 mass of row `i`; the structurally zero self entry contributes
    /// nothing.
    pub fn row_l1(&self, i: usize) -> f64 {
        self.weights.row(i).iter().map(|w| w.abs()).sum()
    }

    /// Writes the `N-1` coordinates `coords` back into row `i` at the agent
    /// indices listed in `index_map`.
    pub fn set_row_from_coords(&mut self, i: usize, coords: &DVector<f64>, index_map: &[usize]) {
        assert_eq!(coords.len(), index_map.len(), "coordinate count mismatch");
        for (c, &j) in coords.iter().zip(index_map) {
            assert_ne!(j, i, "index map must not contain the owner");
            self.weights[(i, j)] = *c;
        }
    }

    /// Extracts row `i` as `N-1` coordinates following `index_map`.
    pub fn row_coords(&self, i: usize, index_map: &[usize]) -> DVector<f64> {
        DVector::from_iterator(index_map.len(), index_map.iter().map(|&j| self.weights[(i, j)]))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.weights - &other.weights).amax()
    }
}

/// Ordered list of the `N-1` agent indices `j != i` that agent `i`'s
/// cognition coordinates represent.
pub fn peer_indices(n: usize, i: usize) -> Vec<usize> {
    (0..n).filter(|&j| j != i).collect()
}
