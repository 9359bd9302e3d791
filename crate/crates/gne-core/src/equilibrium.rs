//! Investment-layer solvers: the effective linear system induced by an
//! attention profile, a direct LU solve, and Gauss-Seidel / Jacobi
//! best-response dynamics.

use nalgebra::{DMatrix, DVector};

use crate::error::SolveError;
use crate::game::{CognitionProfile, InvestmentProfile, SecurityGame};

/// Iteration scheme for [`brne_iterate`], or the dense reference path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrMethod {
    GaussSeidel,
    Jacobi,
    Direct,
}

/// Configuration of the investment-layer solve.
#[derive(Debug, Clone)]
pub struct BrSolverConfig {
    pub method: BrMethod,
    /// Sup-norm change threshold between sweeps.
    pub tol: f64,
    pub max_iters: usize,
    /// Starting profile; `None` uses the decoupled solution `r_i / R_ii`,
    /// which is nonnegative and close to the fixed point.
    pub initial: Option<InvestmentProfile>,
}

impl Default for BrSolverConfig {
    fn default() -> Self {
        Self {
            method: BrMethod::Direct,
            tol: 1e-10,
            max_iters: 10_000,
            initial: None,
        }
    }
}

/// Sweep-by-sweep record of a best-response run.
#[derive(Debug, Clone)]
pub struct BrTrace {
    pub iterates: Vec<InvestmentProfile>,
    pub converged: bool,
    pub iterations_used: usize,
}

/// Assembles the effective system `(R^s, r)` under the attention profile
/// `m`: diagonal `R_ii`, off-diagonal `-m_ij R_ij`. With full attention this
/// is the fully rational first-order-condition system.
pub fn effective_system(game: &SecurityGame, m: &CognitionProfile) -> (DMatrix<f64>, DVector<f64>) {
    let n = game.n_agents();
    let mut system = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            system[(i, j)] = if i == j {
                game.self_influence(i)
            } else {
                -m.weight(i, j) * game.cross_influence(i, j)
            };
        }
    }
    (system, game.returns().clone())
}

/// The decoupled starting point `r_i / R_ii`.
pub fn decoupled_profile(game: &SecurityGame) -> InvestmentProfile {
    let n = game.n_agents();
    InvestmentProfile(DVector::from_iterator(
        n,
        (0..n).map(|i| game.investment_return(i) / game.self_influence(i)),
    ))
}

/// Solves `R^s u = r` by dense LU with partial pivoting. Under diagonal
/// dominance the system is nonsingular and the residual satisfies
/// `|R^s u - r|_inf < 1e-9 * (1 + |r|_inf)`, which is checked.
pub fn brne_direct(game: &SecurityGame, m: &CognitionProfile) -> Result<InvestmentProfile, SolveError> {
    let (system, rhs) = effective_system(game, m);
    let lu = system.clone().lu();
    let u = lu
        .solve(&rhs)
        .ok_or_else(|| SolveError::SingularSystem("LU pivoting failed".into()))?;
    let residual = (&system * &u - &rhs).amax();
    let bound = 1e-9 * (1.0 + rhs.amax());
    if residual >= bound {
        return Err(SolveError::SingularSystem(format!(
            "solve residual {residual:.3e} exceeds {bound:.3e}; system ill-conditioned"
        )));
    }
    Ok(InvestmentProfile(u))
}

/// Bounded-rational best-response dynamics
/// `u_i <- (sum_{j != i} m_ij R_ij u_j + r_i) / R_ii`, swept either from the
/// previous iterate (Jacobi) or in place in ascending agent order
/// (Gauss-Seidel), until the sup-norm change drops below `cfg.tol`.
pub fn brne_iterate(
    game: &SecurityGame,
    m: &CognitionProfile,
    cfg: &BrSolverConfig,
) -> Result<(InvestmentProfile, BrTrace), SolveError> {
    if cfg.method == BrMethod::Direct {
        return Err(SolveError::InvalidConfig(
            "brne_iterate requires gauss-seidel or jacobi; use brne_direct".into(),
        ));
    }
    if cfg.tol <= 0.0 || cfg.max_iters == 0 {
        return Err(SolveError::InvalidConfig(
            "tol must be positive and max_iters at least 1".into(),
        ));
    }
    let n = game.n_agents();
    let mut current = cfg
        .initial
        .clone()
        .unwrap_or_else(|| decoupled_profile(game));
    if current.len() != n {
        return Err(SolveError::InvalidConfig(format!(
            "initial profile has {} entries for {} agents",
            current.len(),
            n
        )));
    }
    let mut iterates = vec![current.clone()];

    for iter in 1..=cfg.max_iters {
        let next = match cfg.method {
            BrMethod::Jacobi => {
                let mut next = DVector::zeros(n);
                for i in 0..n {
                    next[i] = best_response(game, m, i, &current.0);
                }
                next
            }
            BrMethod::GaussSeidel => {
                let mut next = current.0.clone();
                for i in 0..n {
                    next[i] = best_response(game, m, i, &next);
                }
                next
            }
            BrMethod::Direct => unreachable!(),
        };
        let change = (&next - &current.0).amax();
        current = InvestmentProfile(next);
        iterates.push(current.clone());
        if change < cfg.tol {
            return Ok((
                current,
                BrTrace {
                    iterates,
                    converged: true,
                    iterations_used: iter,
                },
            ));
        }
    }
    Err(SolveError::BrNonConvergence {
        max_iters: cfg.max_iters,
        trace: BrTrace {
            iterates,
            converged: false,
            iterations_used: cfg.max_iters,
        },
    })
}

fn best_response(game: &SecurityGame, m: &CognitionProfile, i: usize, u: &DVector<f64>) -> f64 {
    let n = game.n_agents();
    let mut perceived = 0.0;
    for j in 0..n {
        if j != i {
            perceived += m.weight(i, j) * game.cross_influence(i, j) * u[j];
        }
    }
    (perceived + game.investment_return(i)) / game.self_influence(i)
}

/// Fully rational Nash equilibrium: the direct solve with full attention.
pub fn rational_ne(game: &SecurityGame) -> Result<InvestmentProfile, SolveError> {
    brne_direct(game, &CognitionProfile::full(game.n_agents()))
}
