//! Joint equilibrium of both layers: alternate the investment-layer solve
//! with per-agent attention formation until neither moves, then verify the
//! fixed point and classify the attention patterns it exhibits.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::cognition::{calibrate_alpha_with_tol, fixed_point_residual, solve_cognition, ApgConfig};
use crate::equilibrium::{brne_direct, brne_iterate, BrMethod, BrSolverConfig};
use crate::error::SolveError;
use crate::game::{peer_indices, CognitionProfile, InvestmentProfile, SecurityGame};
use crate::prox::ProxProblem;

/// How each agent's L1 weight is chosen every round.
#[derive(Debug, Clone)]
pub enum BudgetMode {
    /// Calibrate `alpha_i` so the attention mass hits the game's `beta_i`.
    PerAgentBudget,
    /// Hold the given `alpha_i` fixed across rounds.
    FixedAlpha(DVector<f64>),
}

/// Configuration of the outer alternation.
#[derive(Debug, Clone)]
pub struct GneConfig {
    /// Sup-norm change of the concatenated `(u, m)` between rounds.
    pub outer_tol: f64,
    pub max_rounds: usize,
    pub br: BrSolverConfig,
    pub apg: ApgConfig,
    pub budget_mode: BudgetMode,
    /// Stop tolerance of the per-round weight calibration; kept two orders
    /// below `outer_tol` so the calibration bias never limits the
    /// equilibrium accuracy.
    pub budget_tol: f64,
}

impl Default for GneConfig {
    fn default() -> Self {
        Self {
            outer_tol: 1e-6,
            max_rounds: 1_000,
            br: BrSolverConfig::default(),
            apg: ApgConfig::default(),
            budget_mode: BudgetMode::PerAgentBudget,
            budget_tol: 1e-8,
        }
    }
}

/// Snapshot of one alternation round.
#[derive(Debug, Clone)]
pub struct RoundRecord {
    pub u: InvestmentProfile,
    pub m: CognitionProfile,
    pub alphas: DVector<f64>,
    /// Gate-objective sequence of each agent's cognition solve this round.
    pub q_traces: Vec<Vec<f64>>,
}

/// Converged (or truncated) outcome of the alternation.
#[derive(Debug, Clone)]
pub struct GneOutcome {
    pub u_star: InvestmentProfile,
    pub m_star: CognitionProfile,
    pub alphas: DVector<f64>,
    /// Realized risk of bounded perception per agent at the fixed point.
    pub rbp: DVector<f64>,
    pub rounds_used: usize,
    pub converged: bool,
    pub round_trace: Vec<RoundRecord>,
}

/// Alternates the investment solve and the per-agent attention solves until
/// the concatenated `(u, m)` moves less than `cfg.outer_tol` between
/// rounds. Attention starts uniform at `beta_i / (N-1)`; all agents update
/// simultaneously from the same investment profile within a round, so the
/// result does not depend on agent ordering or thread schedule.
pub fn gne_solve(game: &SecurityGame, cfg: &GneConfig) -> Result<GneOutcome, SolveError> {
    let n = game.n_agents();
    if cfg.outer_tol <= 0.0 || cfg.max_rounds == 0 {
        return Err(SolveError::InvalidConfig(
            "outer_tol must be positive and max_rounds at least 1".into(),
        ));
    }
    if let BudgetMode::FixedAlpha(alphas) = &cfg.budget_mode {
        if alphas.len() != n {
            return Err(SolveError::InvalidConfig(format!(
                "fixed alpha vector has {} entries for {} agents",
                alphas.len(),
                n
            )));
        }
        if alphas.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(SolveError::InvalidConfig(
                "fixed alphas must be finite and nonnegative".into(),
            ));
        }
    }

    let mut m = CognitionProfile::uniform_budget(game.budgets());
    let mut u = cfg
        .br
        .initial
        .clone()
        .unwrap_or_else(|| crate::equilibrium::decoupled_profile(game));
    let mut alphas = DVector::zeros(n);
    let mut round_trace: Vec<RoundRecord> = Vec::new();
    let mut converged = false;
    let mut rounds_used = 0;

    for round in 1..=cfg.max_rounds {
        rounds_used = round;
        let u_next = match cfg.br.method {
            BrMethod::Direct => brne_direct(game, &m)?,
            _ => brne_iterate(game, &m, &cfg.br)?.0,
        };

        let solves: Vec<(DVector<f64>, f64, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|i| solve_agent_attention(game, i, &u_next, cfg))
            .collect::<Result<Vec<_>, SolveError>>()?;

        let mut m_next = m.clone();
        let mut q_traces = Vec::with_capacity(n);
        let mut alphas_next = DVector::zeros(n);
        for (i, (coords, alpha, q_trace)) in solves.into_iter().enumerate() {
            let index_map = peer_indices(n, i);
            m_next.set_row_from_coords(i, &coords, &index_map);
            alphas_next[i] = alpha;
            q_traces.push(q_trace);
        }

        let change = u_next
            .max_abs_diff(&u)
            .max(m_next.max_abs_diff(&m));
        u = u_next;
        m = m_next;
        alphas = alphas_next;
        round_trace.push(RoundRecord {
            u: u.clone(),
            m: m.clone(),
            alphas: alphas.clone(),
            q_traces,
        });
        if change < cfg.outer_tol {
            converged = true;
            break;
        }
    }

    if converged {
        // Within a round the investments are solved against the previous
        // round's attention profile. The returned pair must satisfy the
        // effective system at the *final* profile, so align once more.
        u = match cfg.br.method {
            BrMethod::Direct => brne_direct(game, &m)?,
            _ => brne_iterate(game, &m, &cfg.br)?.0,
        };
    }

    let rbp = DVector::from_iterator(n, (0..n).map(|i| game.rbp(i, &u, &m.row(i))));
    let outcome = GneOutcome {
        u_star: u,
        m_star: m,
        alphas,
        rbp,
        rounds_used,
        converged,
        round_trace,
    };
    if outcome.converged {
        Ok(outcome)
    } else {
        Err(SolveError::GneNonConvergence {
            rounds: rounds_used,
            outcome: Box::new(outcome),
        })
    }
}

fn solve_agent_attention(
    game: &SecurityGame,
    i: usize,
    u: &InvestmentProfile,
    cfg: &GneConfig,
) -> Result<(DVector<f64>, f64, Vec<f64>), SolveError> {
    let _n = game.n_agents();
    let problem = ProxProblem::from_game(game, i, u);
    let dim = problem.dim();
    let uniform = |mass: f64| {
        DVector::from_element(dim, (mass / dim as f64).clamp(0.0, 1.0))
    };
    match &cfg.budget_mode {
        BudgetMode::PerAgentBudget => {
            let apg = ApgConfig {
                initial_m: Some(
                    cfg.apg
                        .initial_m
                        .clone()
                        .unwrap_or_else(|| uniform(game.budget(i))),
                ),
                ..cfg.apg.clone()
            };
            let (alpha, coords, trace) =
                calibrate_alpha_with_tol(&problem, game.budget(i), &apg, cfg.budget_tol)?;
            Ok((coords, alpha, trace.q_values))
        }
        BudgetMode::FixedAlpha(alphas) => {
            let apg = ApgConfig {
                initial_m: Some(
                    cfg.apg
                        .initial_m
                        .clone()
                        .unwrap_or_else(|| uniform(game.budget(i))),
                ),
                ..cfg.apg.clone()
            };
            let (coords, trace) = solve_cognition(&problem.with_alpha(alphas[i]), &apg)?;
            Ok((coords, alphas[i], trace.q_values))
        }
    }
}

/// One failed unilateral-deviation probe.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeFailure {
    pub agent: usize,
    pub kind: ProbeKind,
    /// How much the deviation lowered the agent's objective.
    pub improvement: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeKind {
    Investment,
    Attention,
}

/// Result of [`verify_gne`].
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub passed: bool,
    /// Sup-norm residual of the effective linear system at `(u*, m*)`.
    pub brne_residual: f64,
    /// Per-agent proximal fixed-point residual of the attention solve.
    pub cognition_residuals: Vec<f64>,
    pub probe_failures: Vec<ProbeFailure>,
    pub n_probes: usize,
    pub seed: u64,
}

/// Residual threshold of the two stationarity checks.
pub const STATIONARITY_TOL: f64 = 1e-8;

/// Largest objective improvement a random deviation may exhibit.
pub const PROBE_TOL: f64 = 1e-7;

/// Checks the claimed equilibrium three ways: the investment profile must
/// satisfy the effective linear system at `m*`, each attention row must be
/// a proximal fixed point of its own program, and `n_probes` random
/// unilateral deviations per agent (investment rescale in `[0.5, 1.5]`
/// against the perceived cost; box-projected Gaussian attention steps of
/// scale 0.1 against the cognition objective) must not improve anything by
/// more than [`PROBE_TOL`]. The seed is recorded for replay.
pub fn verify_gne(
    game: &SecurityGame,
    outcome: &GneOutcome,
    n_probes: usize,
    seed: u64,
) -> VerificationReport {
    assert!(outcome.converged, "verify_gne needs a converged outcome");
    let n = game.n_agents();
    let u = &outcome.u_star;
    let m = &outcome.m_star;

    let (system, rhs) = crate::equilibrium::effective_system(game, m);
    let brne_residual = (system * &u.0 - rhs).amax();

    let mut cognition_residuals = Vec::with_capacity(n);
    let mut probe_failures = Vec::new();
    for i in 0..n {
        let index_map = peer_indices(n, i);
        let problem = ProxProblem::from_game(game, i, u).with_alpha(outcome.alphas[i]);
        let coords = m.row_coords(i, &index_map);
        cognition_residuals.push(fixed_point_residual(&problem, &coords));

        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let row = m.row(i);
        let base_perceived = game.perceived_cost(i, u, &row);
        let base_q = problem.objective(&coords);
        for _ in 0..n_probes {
            // investment deviation with attention fixed
            let factor: f64 = rng.gen_range(0.5..1.5);
            let mut u_dev = u.clone();
            u_dev.0[i] *= factor;
            let dev_cost = game.perceived_cost(i, &u_dev, &row);
            if base_perceived - dev_cost > PROBE_TOL {
                probe_failures.push(ProbeFailure {
                    agent: i,
                    kind: ProbeKind::Investment,
                    improvement: base_perceived - dev_cost,
                });
            }

            // box-feasible attention deviation, scored by the cognition
            // objective (its smooth part is the re-best-responded real cost)
            let noise = DVector::from_iterator(
                coords.len(),
                (0..coords.len()).map(|_| {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    0.1 * g
                }),
            );
            let m_dev = crate::prox::proj_box(&(&coords + noise));
            let dev_q = problem.objective(&m_dev);
            if dev_q.feasible && base_q.feasible && base_q.value - dev_q.value > PROBE_TOL {
                probe_failures.push(ProbeFailure {
                    agent: i,
                    kind: ProbeKind::Attention,
                    improvement: base_q.value - dev_q.value,
                });
            }
        }
    }

    let passed = brne_residual < STATIONARITY_TOL
        && cognition_residuals.iter().all(|r| *r < STATIONARITY_TOL)
        && probe_failures.is_empty();
    VerificationReport {
        passed,
        brne_residual,
        cognition_residuals,
        probe_failures,
        n_probes,
        seed,
    }
}

/// Attention-mass split of every agent over a group partition.
#[derive(Debug, Clone)]
pub struct PartisanshipReport {
    /// `mass_fraction[i][g]` is the share of agent `i`'s attention mass
    /// that lands in group `g`.
    pub mass_fraction: Vec<Vec<f64>>,
    /// Group that received at least `1 - 1e-3` of every agent's mass.
    pub dominant_group: Option<usize>,
}

/// Qualitative structure of a converged attention profile.
#[derive(Debug, Clone)]
pub struct PhenomenaReport {
    /// Agents each agent attends to (weight above the support threshold).
    pub supports: Vec<Vec<usize>>,
    /// Agents present in the support of every other agent.
    pub critical_set: Vec<usize>,
    pub partisanship: Option<PartisanshipReport>,
}

/// Classifies the converged attention profile: per-agent supports at
/// `support_eps`, the critical set, and — when a group partition is given —
/// the partisanship mass split.
pub fn detect_phenomena(
    game: &SecurityGame,
    outcome: &GneOutcome,
    group_labels: Option<&[usize]>,
    support_eps: f64,
) -> PhenomenaReport {
    assert!(support_eps > 0.0, "support threshold must be positive");
    let n = game.n_agents();
    let m = &outcome.m_star;

    let supports: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && m.weight(i, j) > support_eps)
                .collect()
        })
        .collect();

    let critical_set: Vec<usize> = (0..n)
        .filter(|&j| {
            (0..n)
                .filter(|&i| i != j)
                .all(|i| m.weight(i, j) > support_eps)
        })
        .collect();

    let partisanship = group_labels.map(|labels| {
        assert_eq!(labels.len(), n, "one group label per agent");
        let n_groups = labels.iter().copied().max().map_or(0, |g| g + 1);
        let mut mass_fraction = vec![vec![0.0; n_groups]; n];
        for (i, fractions) in mass_fraction.iter_mut().enumerate() {
            let total = m.row_l1(i);
            if total > 0.0 {
                for j in 0..n {
                    if j != i {
                        fractions[labels[j]] += m.weight(i, j) / total;
                    }
                }
            }
        }
        let dominant_group = (0..n_groups)
            .find(|&g| mass_fraction.iter().all(|row| row[g] >= 1.0 - 1e-3));
        PartisanshipReport {
            mass_fraction,
            dominant_group,
        }
    });

    PhenomenaReport {
        supports,
        critical_set,
        partisanship,
    }
}

/// Agents attended to (by anyone) at the larger budget but by no one at the
/// smaller one: the attention overflow between two outcomes of the same
/// game solved at budgets `beta < beta_prime`.
pub fn fill_set(low: &GneOutcome, high: &GneOutcome, support_eps: f64) -> Vec<usize> {
    let n = low.m_star.n_agents();
    assert_eq!(high.m_star.n_agents(), n, "outcomes must share the game");
    let union = |outcome: &GneOutcome| -> Vec<bool> {
        let mut seen = vec![false; n];
        for i in 0..n {
            for (j, seen_j) in seen.iter_mut().enumerate() {
                if j != i && outcome.m_star.weight(i, j) > support_eps {
                    *seen_j = true;
                }
            }
        }
        seen
    };
    let low_seen = union(low);
    let high_seen = union(high);
    (0..n)
        .filter(|&j| high_seen[j] && !low_seen[j])
        .collect()
}

/// Closed-form fixed point for homogeneous games: attention spreads the
/// budget uniformly, `m = beta / (N-1)`, and the investment solves
/// `u = r / (R1 - beta R2)`.
pub fn homogeneous_closed_form(
    self_influence: f64,
    cross_influence: f64,
    investment_return: f64,
    n: usize,
    beta: f64,
) -> Result<(f64, f64), SolveError> {
    if n < 2 {
        return Err(SolveError::Domain("need at least two agents".into()));
    }
    let cap = (n - 1) as f64;
    if !beta.is_finite() || beta < 0.0 || beta > cap {
        return Err(SolveError::Domain(format!(
            "budget {beta} outside [0, {cap}]"
        )));
    }
    let denom = self_influence - beta * cross_influence;
    if denom <= 0.0 {
        return Err(SolveError::Domain(format!(
            "effective self-influence {denom} not positive"
        )));
    }
    Ok((beta / cap, investment_return / denom))
}
