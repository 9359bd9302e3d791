//! JSON configuration schema. A parsed file resolves every default, so the
//! `config_echo` written into a report is itself a complete, re-runnable
//! configuration.

use serde::{Deserialize, Serialize};

use gne_core::equilibrium::{BrMethod, BrSolverConfig};
use gne_core::gne::{BudgetMode, GneConfig};

pub const SCHEMA_VERSION: u32 = 1;

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}
fn default_seed() -> u64 {
    42
}
fn default_probes() -> usize {
    100
}
fn default_support_eps() -> f64 {
    1e-3
}

/// Top-level run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Seed for the verification probes; echoed for replay.
    #[serde(default = "default_seed")]
    pub rng_seed: u64,
    /// Unilateral-deviation probes per agent during verification.
    #[serde(default = "default_probes")]
    pub n_probes: usize,
    /// Attention weight above which an agent counts as attended to.
    #[serde(default = "default_support_eps")]
    pub support_eps: f64,
    /// When set, the same game is solved again with every budget replaced
    /// by this value and the attention overflow between the two outcomes
    /// is reported.
    #[serde(default)]
    pub fill_baseline_budget: Option<f64>,
}

fn d_n10() -> usize {
    10
}
fn d_self() -> f64 {
    20.0
}
fn d_cross() -> f64 {
    1.0
}
fn d_return() -> f64 {
    25.0
}
fn d_budget() -> f64 {
    3.0
}
fn d_group_sizes() -> [usize; 2] {
    [5, 10]
}
fn d_group_returns() -> [f64; 2] {
    [40.0, 25.0]
}

/// Game family to generate. All families produce games that must pass
/// validation before any solver runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScenarioConfig {
    /// Identical agents: uniform influence, return, and budget.
    Homogeneous {
        #[serde(default = "d_n10")]
        n_agents: usize,
        #[serde(default = "d_self")]
        self_influence: f64,
        #[serde(default = "d_cross")]
        cross_influence: f64,
        #[serde(default = "d_return")]
        investment_return: f64,
        #[serde(default = "d_budget")]
        budget: f64,
    },
    /// Two groups that differ only in their investment return.
    TwoGroup {
        #[serde(default = "d_group_sizes")]
        group_sizes: [usize; 2],
        #[serde(default = "d_group_returns")]
        group_returns: [f64; 2],
        #[serde(default = "d_self")]
        self_influence: f64,
        #[serde(default = "d_cross")]
        cross_influence: f64,
        #[serde(default = "d_budget")]
        budget: f64,
    },
    /// Heterogeneous self-influence `3 sin(i) + 20` and return `15 + 2i`
    /// over 1-based agent labels (radians), unit cross influence.
    HeterogeneousSine {
        #[serde(default = "d_n10")]
        n_agents: usize,
        #[serde(default = "d_budget")]
        budget: f64,
    },
    /// Explicit matrices, row-major.
    Custom {
        influence: Vec<Vec<f64>>,
        returns: Vec<f64>,
        budgets: Vec<f64>,
        #[serde(default)]
        group_labels: Option<Vec<usize>>,
    },
}

fn d_outer_tol() -> f64 {
    1e-6
}
fn d_max_rounds() -> usize {
    1_000
}
fn d_br_tol() -> f64 {
    1e-10
}
fn d_br_max_iters() -> usize {
    10_000
}
fn d_apg_tol() -> f64 {
    1e-10
}
fn d_apg_max_iters() -> usize {
    50_000
}
fn d_budget_tol() -> f64 {
    1e-8
}

/// Solver overrides; every field has the library default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "d_outer_tol")]
    pub outer_tol: f64,
    #[serde(default = "d_max_rounds")]
    pub max_rounds: usize,
    #[serde(default)]
    pub br_method: BrMethodConfig,
    #[serde(default = "d_br_tol")]
    pub br_tol: f64,
    #[serde(default = "d_br_max_iters")]
    pub br_max_iters: usize,
    #[serde(default = "d_apg_tol")]
    pub apg_tol: f64,
    #[serde(default = "d_apg_max_iters")]
    pub apg_max_iters: usize,
    #[serde(default)]
    pub force_nonconvex_path: bool,
    #[serde(default = "d_budget_tol")]
    pub budget_tol: f64,
    #[serde(default)]
    pub budget_mode: BudgetModeConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            outer_tol: d_outer_tol(),
            max_rounds: d_max_rounds(),
            br_method: BrMethodConfig::default(),
            br_tol: d_br_tol(),
            br_max_iters: d_br_max_iters(),
            apg_tol: d_apg_tol(),
            apg_max_iters: d_apg_max_iters(),
            force_nonconvex_path: false,
            budget_tol: d_budget_tol(),
            budget_mode: BudgetModeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BrMethodConfig {
    #[default]
    Direct,
    GaussSeidel,
    Jacobi,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetModeConfig {
    /// Calibrate each agent's L1 weight to its attention budget.
    #[default]
    Budget,
    /// Hold these per-agent L1 weights fixed.
    FixedAlpha(Vec<f64>),
}

impl SolverConfig {
    /// Translates the serialized knobs into the library configuration.
    pub fn to_gne_config(&self, n_agents: usize) -> Result<GneConfig, String> {
        let budget_mode = match &self.budget_mode {
            BudgetModeConfig::Budget => BudgetMode::PerAgentBudget,
            BudgetModeConfig::FixedAlpha(alphas) => {
                if alphas.len() != n_agents {
                    return Err(format!(
                        "solver.budget_mode.fixed-alpha needs {n_agents} entries, got {}",
                        alphas.len()
                    ));
                }
                BudgetMode::FixedAlpha(nalgebra::DVector::from_vec(alphas.clone()))
            }
        };
        Ok(GneConfig {
            outer_tol: self.outer_tol,
            max_rounds: self.max_rounds,
            br: BrSolverConfig {
                method: match self.br_method {
                    BrMethodConfig::Direct => BrMethod::Direct,
                    BrMethodConfig::GaussSeidel => BrMethod::GaussSeidel,
                    BrMethodConfig::Jacobi => BrMethod::Jacobi,
                },
                tol: self.br_tol,
                max_iters: self.br_max_iters,
                initial: None,
            },
            apg: gne_core::cognition::ApgConfig {
                tol: self.apg_tol,
                max_iters: self.apg_max_iters,
                initial_m: None,
                force_nonconvex: self.force_nonconvex_path,
                record_steps: false,
            },
            budget_mode,
            budget_tol: self.budget_tol,
        })
    }
}

/// Ready-made configurations for the built-in studies.
pub fn builtin_config(name: &str) -> Option<ConfigFile> {
    let scenario = match name {
        "homogeneous" => ScenarioConfig::Homogeneous {
            n_agents: d_n10(),
            self_influence: d_self(),
            cross_influence: d_cross(),
            investment_return: d_return(),
            budget: d_budget(),
        },
        "two-group" => ScenarioConfig::TwoGroup {
            group_sizes: d_group_sizes(),
            group_returns: d_group_returns(),
            self_influence: d_self(),
            cross_influence: d_cross(),
            budget: d_budget(),
        },
        "two-group-beta8" => ScenarioConfig::TwoGroup {
            group_sizes: d_group_sizes(),
            group_returns: d_group_returns(),
            self_influence: d_self(),
            cross_influence: d_cross(),
            budget: 8.0,
        },
        "heterogeneous-sine" => ScenarioConfig::HeterogeneousSine {
            n_agents: d_n10(),
            budget: d_budget(),
        },
        _ => return None,
    };
    let fill_baseline_budget = if name == "two-group-beta8" {
        Some(3.0)
    } else {
        None
    };
    Some(ConfigFile {
        schema_version: SCHEMA_VERSION,
        scenario,
        solver: SolverConfig::default(),
        rng_seed: default_seed(),
        n_probes: default_probes(),
        support_eps: default_support_eps(),
        fill_baseline_budget,
    })
}

pub const BUILTIN_NAMES: [&str; 4] = [
    "homogeneous",
    "two-group",
    "two-group-beta8",
    "heterogeneous-sine",
];
