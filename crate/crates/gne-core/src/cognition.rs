//! Attention-network formation: accelerated proximal-gradient solvers for
//! the per-agent cognition program, and bisection calibration of the L1
//! weight to hit an attention budget.
//!
//! Two paths share one engine. The monitored path interleaves an
//! unaccelerated proximal-gradient step whose objective value gates
//! acceptance, which guarantees descent even for indefinite quadratics.
//! The convex path drops the monitor and accepts an accelerated step only
//! if it does not increase the objective.

use nalgebra::DVector;

use crate::error::SolveError;
use crate::prox::{prox_l1_box, ProxProblem};

/// Which acceptance rule produced the result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApgPath {
    Convex,
    Nonconvex,
}

/// Configuration of one cognition solve.
#[derive(Debug, Clone)]
pub struct ApgConfig {
    /// Sup-norm threshold applied to both the iterate change and the
    /// proximal fixed-point residual.
    pub tol: f64,
    pub max_iters: usize,
    /// Starting point in the unit box. `None` falls back to the box
    /// midpoint; budget-driven callers pass the uniform budget fill.
    pub initial_m: Option<DVector<f64>>,
    /// Forces the monitored path even for PSD quadratics (testing hook).
    pub force_nonconvex: bool,
    /// Records per-iteration snapshots in the trace.
    pub record_steps: bool,
}

impl Default for ApgConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 50_000,
            initial_m: None,
            force_nonconvex: false,
            record_steps: false,
        }
    }
}

/// One recorded iteration (only when `record_steps` is set).
#[derive(Debug, Clone)]
pub struct ApgStep {
    /// Objective at the incumbent before this iteration.
    pub q_x_before: f64,
    /// Objective of the accelerated candidate.
    pub q_z: f64,
    /// Objective of the unaccelerated step from the incumbent.
    pub q_monitor: f64,
    /// Objective after acceptance.
    pub q_x_after: f64,
    /// Squared distance between the unaccelerated step and the incumbent.
    pub monitor_dist_sq: f64,
    pub extrapolated: DVector<f64>,
    pub candidate: DVector<f64>,
    pub accepted: DVector<f64>,
}

/// Iteration record of a cognition solve.
#[derive(Debug, Clone)]
pub struct ApgTrace {
    /// Gate sequence: objective of the monitor step on the nonconvex path,
    /// of the incumbent on the convex path. Nonincreasing in both cases.
    pub q_values: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
    pub path: ApgPath,
    /// Sup-norm proximal fixed-point residual at the returned point.
    pub final_residual: f64,
    pub steps: Option<Vec<ApgStep>>,
}

/// One proximal-gradient step from `point` with the given step size.
pub fn pg_step(p: &ProxProblem, point: &DVector<f64>, step: f64) -> DVector<f64> {
    let grad = p.grad_f1(point);
    prox_l1_box(&(point - step * grad), step * p.alpha)
}

/// Sup-norm distance between `m` and one proximal-gradient step from it;
/// zero exactly at critical points of the composite objective.
pub fn fixed_point_residual(p: &ProxProblem, m: &DVector<f64>) -> f64 {
    (pg_step(p, m, p.step_x) - m).amax()
}

/// Monitored accelerated proximal-gradient method for a general (possibly
/// indefinite) quadratic. Returns a critical point with proximal
/// fixed-point residual below `10 * cfg.tol`.
pub fn apg_nonconvex(
    p: &ProxProblem,
    cfg: &ApgConfig,
) -> Result<(DVector<f64>, ApgTrace), SolveError> {
    run_apg(p, cfg, ApgPath::Nonconvex)
}

/// Accelerated variant without the monitor step, valid when the quadratic
/// is PSD; the acceptance rule keeps the objective nonincreasing.
pub fn apg_convex(
    p: &ProxProblem,
    cfg: &ApgConfig,
) -> Result<(DVector<f64>, ApgTrace), SolveError> {
    run_apg(p, cfg, ApgPath::Convex)
}

/// Dispatches on positive semidefiniteness: game-built problems take the
/// convex path, externally supplied indefinite quadratics the monitored
/// one. `cfg.force_nonconvex` overrides.
pub fn solve_cognition(
    p: &ProxProblem,
    cfg: &ApgConfig,
) -> Result<(DVector<f64>, ApgTrace), SolveError> {
    if !cfg.force_nonconvex && p.lambda().is_psd() {
        apg_convex(p, cfg)
    } else {
        apg_nonconvex(p, cfg)
    }
}

fn run_apg(
    p: &ProxProblem,
    cfg: &ApgConfig,
    path: ApgPath,
) -> Result<(DVector<f64>, ApgTrace), SolveError> {
    let dim = p.dim();
    if cfg.tol <= 0.0 || cfg.max_iters == 0 {
        return Err(SolveError::InvalidConfig(
            "tol must be positive and max_iters at least 1".into(),
        ));
    }
    let init = match &cfg.initial_m {
        Some(m) => {
            if m.len() != dim {
                return Err(SolveError::InvalidConfig(format!(
                    "initial point has {} coordinates, problem has {dim}",
                    m.len()
                )));
            }
            if m.iter().any(|x| !(*x >= 0.0 && *x <= 1.0)) {
                return Err(SolveError::InvalidConfig(
                    "initial point must lie in the unit box".into(),
                ));
            }
            m.clone()
        }
        None => DVector::from_element(dim, 0.5),
    };

    // t0 = t1 = 1 and z1 = x0 = x1 = init make the first extrapolation a
    // plain proximal-gradient step from the starting point.
    let mut x_prev = init.clone();
    let mut x = init.clone();
    let mut z = init;
    let mut t_prev = 1.0_f64;
    let mut t = 1.0_f64;
    let mut q_x = p.objective(&x);
    let mut change = f64::INFINITY;
    let mut q_values = Vec::new();
    let mut steps: Option<Vec<ApgStep>> = cfg.record_steps.then(Vec::new);

    for iter in 1..=cfg.max_iters {
        // Unaccelerated step from the incumbent: the monitor on the
        // nonconvex path, and in both cases the fixed-point residual probe.
        let monitor = pg_step(p, &x, p.step_x);
        let residual = (&monitor - &x).amax();
        if change < cfg.tol && residual < cfg.tol {
            return Ok((
                x,
                ApgTrace {
                    q_values,
                    iterations_used: iter - 1,
                    converged: true,
                    path,
                    final_residual: residual,
                    steps,
                },
            ));
        }

        let y = &x + (&z - &x) * (t_prev / t) + (&x - &x_prev) * ((t_prev - 1.0) / t);
        let z_next = pg_step(p, &y, p.step_y);
        let q_z = p.objective(&z_next);
        let t_next = 0.5 * (1.0 + (4.0 * t * t + 1.0).sqrt());

        let mut restart = false;
        let (x_next, q_x_next, q_gate, monitor_dist_sq) = match path {
            ApgPath::Nonconvex => {
                let q_v = p.objective(&monitor);
                let dist_sq = (&monitor - &x).norm_squared();
                if q_z.le(&q_v) {
                    (z_next.clone(), q_z, q_v, dist_sq)
                } else {
                    (monitor.clone(), q_v, q_v, dist_sq)
                }
            }
            ApgPath::Convex => {
                let slack = 1e-13 * (1.0 + q_x.value.abs());
                if q_z.le_with_slack(&q_x, slack) {
                    (z_next.clone(), q_z, q_z, 0.0)
                } else {
                    // Rejected extrapolation: drop the momentum so the next
                    // candidate is a plain descending proximal step.
                    // Without the reset the candidate can ripple around
                    // flat directions of a rank-one quadratic indefinitely.
                    restart = true;
                    (x.clone(), q_x, q_x, 0.0)
                }
            }
        };
        q_values.push(q_gate.value);
        if let Some(records) = steps.as_mut() {
            records.push(ApgStep {
                q_x_before: q_x.value,
                q_z: q_z.value,
                q_monitor: p.objective(&monitor).value,
                q_x_after: q_x_next.value,
                monitor_dist_sq,
                extrapolated: y.clone(),
                candidate: z_next.clone(),
                accepted: x_next.clone(),
            });
        }

        change = (&x_next - &x).amax();
        x_prev = std::mem::replace(&mut x, x_next);
        if restart {
            z = x.clone();
            t_prev = 1.0;
            t = 1.0;
        } else {
            z = z_next;
            t_prev = std::mem::replace(&mut t, t_next);
        }
        q_x = q_x_next;
    }

    let final_residual = fixed_point_residual(p, &x);
    Err(SolveError::ApgNonConvergence {
        max_iters: cfg.max_iters,
        trace: Box::new(ApgTrace {
            q_values,
            iterations_used: cfg.max_iters,
            converged: false,
            path,
            final_residual,
            steps,
        }),
    })
}

/// Absolute tolerance on `|m(alpha)|_1 - beta` at which calibration stops.
pub const BUDGET_TOL: f64 = 1e-4;

/// Bracket width below which bisection stops and returns the midpoint.
pub const BRACKET_TOL: f64 = 1e-12;

/// Finds the L1 weight at which the solved attention mass `|m(alpha)|_1`
/// matches the budget `beta`, by bisection over `[0, max_j (Lambda e)_j]`.
/// The mass is nonincreasing in `alpha` for game-built (rank-one PSD)
/// problems, so the bracket is sound. Returns the final weight, the solved
/// coordinates, and the trace of the final solve.
///
/// `beta >= N-1` short-circuits to full attention with zero weight.
pub fn calibrate_alpha(
    p: &ProxProblem,
    beta: f64,
    cfg: &ApgConfig,
) -> Result<(f64, DVector<f64>, ApgTrace), SolveError> {
    calibrate_alpha_with_tol(p, beta, cfg, BUDGET_TOL)
}

/// [`calibrate_alpha`] with an explicit stop on `|mass - beta|`. The outer
/// GNE alternation calls this with a tolerance well below its own, so the
/// calibration bias never dominates the equilibrium accuracy.
pub fn calibrate_alpha_with_tol(
    p: &ProxProblem,
    beta: f64,
    cfg: &ApgConfig,
    budget_tol: f64,
) -> Result<(f64, DVector<f64>, ApgTrace), SolveError> {
    let dim = p.dim();
    let cap = dim as f64;
    if !beta.is_finite() || beta <= 0.0 || beta > cap {
        return Err(SolveError::Domain(format!(
            "budget {beta} outside (0, {cap}]"
        )));
    }
    if !budget_tol.is_finite() || budget_tol <= 0.0 {
        return Err(SolveError::InvalidConfig(
            "budget tolerance must be positive".into(),
        ));
    }
    if beta >= cap {
        let e = DVector::from_element(dim, 1.0);
        let full_cfg = ApgConfig {
            initial_m: Some(e),
            ..cfg.clone()
        };
        let (m, trace) = solve_cognition(&p.clone().with_alpha(0.0), &full_cfg)?;
        return Ok((0.0, m, trace));
    }

    let solve = |alpha: f64| -> Result<(DVector<f64>, ApgTrace), SolveError> {
        solve_cognition(&p.clone().with_alpha(alpha), cfg)
    };
    let l1 = |m: &DVector<f64>| -> f64 { m.iter().map(|v| v.abs()).sum() };

    let mut attempts = Vec::new();
    let (m_lo, trace_lo) = solve(0.0)?;
    let mass_lo = l1(&m_lo);
    attempts.push((0.0, mass_lo));
    if (mass_lo - beta).abs() < budget_tol {
        return Ok((0.0, m_lo, trace_lo));
    }
    if mass_lo < beta {
        // no alpha can add mass beyond the unweighted optimum
        return Err(SolveError::CalibrationFailure { beta, attempts });
    }

    // At alpha >= max_j (Lambda e)_j the zero vector satisfies the
    // subgradient condition, so the mass there is (numerically) zero.
    let e = DVector::from_element(dim, 1.0);
    let mut hi = p
        .lambda()
        .matvec(&e)
        .iter()
        .fold(0.0_f64, |acc, g| acc.max(*g));
    if hi <= 0.0 {
        return Err(SolveError::CalibrationFailure { beta, attempts });
    }
    let (mut m_hi, mut trace_hi) = solve(hi)?;
    let mut mass_hi = l1(&m_hi);
    attempts.push((hi, mass_hi));
    for _ in 0..8 {
        if mass_hi <= beta {
            break;
        }
        hi *= 2.0;
        let (m, trace) = solve(hi)?;
        mass_hi = l1(&m);
        m_hi = m;
        trace_hi = trace;
        attempts.push((hi, mass_hi));
    }
    if (mass_hi - beta).abs() < budget_tol {
        return Ok((hi, m_hi, trace_hi));
    }
    if mass_hi > beta {
        return Err(SolveError::CalibrationFailure { beta, attempts });
    }

    let mut lo = 0.0;
    loop {
        let mid = 0.5 * (lo + hi);
        let (m, trace) = solve(mid)?;
        let mass = l1(&m);
        attempts.push((mid, mass));
        if (mass - beta).abs() < budget_tol || hi - lo < BRACKET_TOL {
            return Ok((mid, m, trace));
        }
        if mass > beta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};

    use crate::game::{InvestmentProfile, SecurityGame};

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
    fn zero_quadratic_collapses_to_zero_in_one_accepted_step() {
        let game = homogeneous_game(5, 20.0, 1.0, 25.0);
        let p = ProxProblem::from_game(&game, 0, &InvestmentProfile::zeros(5)).with_alpha(0.7);
        let cfg = ApgConfig {
            initial_m: Some(DVector::from_element(4, 0.9)),
            ..ApgConfig::default()
        };
        let (m, trace) = apg_nonconvex(&p, &cfg).unwrap();
        assert_eq!(m, DVector::zeros(4));
        assert!(trace.converged);
        assert!(trace.iterations_used <= 3);
    }

    #[test]
    fn zero_weight_fills_attention_fully() {
        let game = homogeneous_game(6, 20.0, 1.0, 25.0);
        let u = InvestmentProfile::constant(6, 1.5);
        let p = ProxProblem::from_game(&game, 2, &u);
        let (m, trace) = solve_cognition(&p, &ApgConfig::default()).unwrap();
        assert_eq!(trace.path, ApgPath::Convex);
        for v in m.iter() {
            assert_relative_eq!(*v, 1.0, epsilon = 1e-6);
        }
        // the monitored path reaches the same limit
        let (m, trace) = apg_nonconvex(&p, &ApgConfig::default()).unwrap();
        assert_eq!(trace.path, ApgPath::Nonconvex);
        for v in m.iter() {
            assert_relative_eq!(*v, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn huge_weight_silences_attention() {
        let game = homogeneous_game(6, 20.0, 1.0, 25.0);
        let u = InvestmentProfile::constant(6, 1.5);
        let p0 = ProxProblem::from_game(&game, 2, &u);
        let e = DVector::from_element(5, 1.0);
        let alpha = p0.lambda().matvec(&e).amax() + 1.0;
        let (m, _) = solve_cognition(&p0.with_alpha(alpha), &ApgConfig::default()).unwrap();
        assert_eq!(m, DVector::zeros(5));
    }

    #[test]
    fn calibration_hits_homogeneous_third() {
        let game = homogeneous_game(10, 20.0, 1.0, 25.0);
        let u = InvestmentProfile::constant(10, 25.0 / 17.0);
        let p = ProxProblem::from_game(&game, 0, &u);
        let cfg = ApgConfig {
            initial_m: Some(DVector::from_element(9, 3.0 / 9.0)),
            ..ApgConfig::default()
        };
        let (alpha, m, _) = calibrate_alpha(&p, 3.0, &cfg).unwrap();
        let mass: f64 = m.iter().sum();
        assert!((mass - 3.0).abs() < BUDGET_TOL);
        for v in m.iter() {
            assert_relative_eq!(*v, 1.0 / 3.0, epsilon = 1e-4);
        }
        // interior symmetric optimum pins alpha to 6 u^2 / 20
        assert_relative_eq!(alpha, 0.3 * (25.0 / 17.0_f64).powi(2), epsilon = 1e-3);
    }

    #[test]
    fn calibration_full_budget_returns_zero_weight() {
        let game = homogeneous_game(5, 20.0, 1.0, 25.0);
        let u = InvestmentProfile::constant(5, 1.0);
        let p = ProxProblem::from_game(&game, 1, &u);
        let (alpha, m, _) = calibrate_alpha(&p, 4.0, &ApgConfig::default()).unwrap();
        assert_eq!(alpha, 0.0);
        assert_eq!(m, DVector::from_element(4, 1.0));
    }

    #[test]
    fn calibration_rejects_budget_outside_domain() {
        let game = homogeneous_game(4, 20.0, 1.0, 25.0);
        let u = InvestmentProfile::constant(4, 1.0);
        let p = ProxProblem::from_game(&game, 0, &u);
        assert!(matches!(
            calibrate_alpha(&p, 0.0, &ApgConfig::default()),
            Err(SolveError::Domain(_))
        ));
        assert!(matches!(
            calibrate_alpha(&p, 3.5, &ApgConfig::default()),
            Err(SolveError::Domain(_))
        ));
    }

    #[test]
    fn rejects_initial_point_outside_box() {
        let game = homogeneous_game(4, 20.0, 1.0, 25.0);
        let u = InvestmentProfile::constant(4, 1.0);
        let p = ProxProblem::from_game(&game, 0, &u);
        let cfg = ApgConfig {
            initial_m: Some(DVector::from_element(3, 1.5)),
            ..ApgConfig::default()
        };
        assert!(matches!(
            apg_convex(&p, &cfg),
            Err(SolveError::InvalidConfig(_))
        ));
    }
}
