//! Command-line front end: scenario generation, JSON config ingestion,
//! solving, verification, phenomena detection, and report emission.
//!
//! Exit codes: 0 converged and verified, 1 input error, 2 solver
//! non-convergence, 3 verification failure.

pub mod config;
pub mod report;
pub mod scenario;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use gne_core::error::SolveError;
use gne_core::gne::{detect_phenomena, fill_set, gne_solve, verify_gne, GneOutcome};

use config::{builtin_config, ConfigFile, BUILTIN_NAMES};
use report::{
    agent_table, emit_report, phenomena_summary, summary_from_outcome, verification_summary,
    RunReport,
};
use scenario::{build_scenario, with_budget, BuiltScenario};

#[derive(Parser)]
#[command(
    name = "gne",
    version,
    about = "Gestalt Nash equilibria of security-investment games with limited-attention players"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a configuration, verify the equilibrium, and write the report
    Solve {
        /// JSON configuration file
        config: PathBuf,
        /// Output directory for summary.json, cognition.csv, and traces
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write u_trace.csv and q_trace_agent<i>.csv
        #[arg(long)]
        trace: bool,
        /// Stdout format of the results
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        /// Override the configuration's verification seed
        #[arg(long)]
        seed: Option<u64>,
        /// Suppress stdout (files are still written)
        #[arg(long)]
        quiet: bool,
        /// Worker threads for per-agent solves (default: machine parallelism)
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print a ready-made configuration for a built-in study
    Scenario {
        /// One of: homogeneous, two-group, two-group-beta8, heterogeneous-sine
        name: String,
    },
    /// Check the game a configuration generates without solving it
    Validate {
        /// JSON configuration file
        config: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

/// Runs the CLI on the given argument list and returns the process exit
/// code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version through this path with code 0
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Solve {
            config,
            out,
            trace,
            format,
            seed,
            quiet,
            threads,
        } => solve_command(&config, &out, trace, format, seed, quiet, threads),
        Command::Scenario { name } => scenario_command(&name),
        Command::Validate { config } => validate_command(&config),
    }
}

fn load_config(path: &Path) -> Result<ConfigFile, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let cfg: ConfigFile = serde_json::from_str(&text).map_err(|e| {
        format!(
            "{}: line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        )
    })?;
    if cfg.schema_version != config::SCHEMA_VERSION {
        return Err(format!(
            "{}: schema_version {} not supported (expected {})",
            path.display(),
            cfg.schema_version,
            config::SCHEMA_VERSION
        ));
    }
    Ok(cfg)
}

fn validate_command(path: &Path) -> i32 {
    let cfg = match load_config(path) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let built = match build_scenario(&cfg.scenario) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let report = built.game.validate();
    if report.is_ok() {
        println!(
            "ok: {} agents, game satisfies all invariants",
            built.game.n_agents()
        );
        0
    } else {
        for violation in &report.violations {
            eprintln!("validation: {}", describe_violation(violation));
        }
        1
    }
}

/// Renders a violation with 1-based agent labels, matching every other
/// CLI-facing index.
fn describe_violation(violation: &gne_core::game::Violation) -> String {
    use gne_core::game::Violation::*;
    match violation {
        NonPositiveDiagonal { row, value } => {
            format!("row {}: diagonal must be positive, got {value}", row + 1)
        }
        NegativeOffDiagonal { row, col, value } => format!(
            "entry ({}, {}): off-diagonal must be nonnegative, got {value}",
            row + 1,
            col + 1
        ),
        NotDiagonallyDominant {
            row,
            diagonal,
            off_diagonal_sum,
        } => format!(
            "row {} not diagonally dominant: {diagonal} <= {off_diagonal_sum}",
            row + 1
        ),
        NonPositiveReturn { index, value } => {
            format!("return {}: must be positive, got {value}", index + 1)
        }
        BudgetOutOfRange { index, value, cap } => format!(
            "budget {}: must lie in (0, {cap}], got {value}",
            index + 1
        ),
    }
}

fn scenario_command(name: &str) -> i32 {
    match builtin_config(name) {
        Some(cfg) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&cfg).expect("config serializes")
            );
            0
        }
        None => {
            eprintln!(
                "error: unknown scenario '{name}'; expected one of: {}",
                BUILTIN_NAMES.join(", ")
            );
            1
        }
    }
}

/// Everything `solve` produces, for in-process callers.
pub struct SolveOutput {
    pub report: RunReport,
    pub exit_code: i32,
}

/// Solves a fully resolved configuration. The baseline budget, when set,
/// triggers a second solve of the same game at that budget for the
/// attention-overflow comparison.
pub fn solve_config(cfg: &ConfigFile) -> Result<SolveOutput, String> {
    let built = build_scenario(&cfg.scenario)?;
    let validation = built.game.validate();
    if !validation.is_ok() {
        let mut msg = String::from("game fails validation:");
        for violation in &validation.violations {
            msg.push_str(&format!("\n  {}", describe_violation(violation)));
        }
        return Err(msg);
    }
    let gne_cfg = cfg.solver.to_gne_config(built.game.n_agents())?;

    let started = Instant::now();
    match gne_solve(&built.game, &gne_cfg) {
        Ok(outcome) => {
            let verification = verify_gne(&built.game, &outcome, cfg.n_probes, cfg.rng_seed);
            let phenomena = detect_phenomena(
                &built.game,
                &outcome,
                built.group_labels.as_deref(),
                cfg.support_eps,
            );
            let fill = match cfg.fill_baseline_budget {
                Some(budget) => Some(solve_fill_baseline(cfg, &built, &outcome, budget)?),
                None => None,
            };
            let wall = started.elapsed().as_secs_f64();
            let passed = verification.passed;
            let summary = summary_from_outcome(
                &outcome,
                Some(phenomena_summary(&phenomena, fill)),
                Some(verification_summary(&verification)),
                cfg.clone(),
            );
            Ok(SolveOutput {
                report: RunReport {
                    summary,
                    outcome,
                    wall_time_seconds: wall,
                },
                exit_code: if passed { 0 } else { 3 },
            })
        }
        Err(SolveError::GneNonConvergence { outcome, .. }) => {
            let wall = started.elapsed().as_secs_f64();
            let summary = summary_from_outcome(&outcome, None, None, cfg.clone());
            Ok(SolveOutput {
                report: RunReport {
                    summary,
                    outcome: *outcome,
                    wall_time_seconds: wall,
                },
                exit_code: 2,
            })
        }
        Err(e) => Err(e.to_string()),
    }
}

/// Solves the same game at the baseline budget and reports the agents
/// attended to only at the larger of the two budgets.
fn solve_fill_baseline(
    cfg: &ConfigFile,
    built: &BuiltScenario,
    main_outcome: &GneOutcome,
    baseline_budget: f64,
) -> Result<Vec<usize>, String> {
    let baseline_scenario = with_budget(&cfg.scenario, baseline_budget);
    let baseline = build_scenario(&baseline_scenario)?;
    let report = baseline.game.validate();
    if !report.is_ok() {
        return Err(format!(
            "fill_baseline_budget {baseline_budget} produces an invalid game"
        ));
    }
    let gne_cfg = cfg.solver.to_gne_config(baseline.game.n_agents())?;
    let baseline_outcome = gne_solve(&baseline.game, &gne_cfg)
        .map_err(|e| format!("baseline solve failed: {e}"))?;

    let main_budget_mean = built.game.budgets().mean();
    let (low, high) = if baseline_budget <= main_budget_mean {
        (&baseline_outcome, main_outcome)
    } else {
        (main_outcome, &baseline_outcome)
    };
    Ok(fill_set(low, high, cfg.support_eps))
}

#[allow(clippy::too_many_arguments)]
fn solve_command(
    path: &Path,
    out: &Path,
    trace: bool,
    format: OutputFormat,
    seed: Option<u64>,
    quiet: bool,
    threads: Option<usize>,
) -> i32 {
    let mut cfg = match load_config(path) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    if let Some(seed) = seed {
        cfg.rng_seed = seed;
    }

    let run = || solve_config(&cfg);
    let result = match threads {
        Some(t) => {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
                Ok(pool) => pool,
                Err(e) => {
                    eprintln!("error: thread pool: {e}");
                    return 1;
                }
            };
            pool.install(run)
        }
        None => run(),
    };

    let output = match result {
        Ok(output) => output,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };

    if let Err(e) = emit_report(&output.report, out, trace) {
        eprintln!("error: {e}");
        return 1;
    }

    if !quiet {
        match format {
            OutputFormat::Json => {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&output.report.summary)
                        .expect("summary serializes")
                );
            }
            OutputFormat::Csv => {
                print!("{}", agent_table(&output.report.summary));
            }
        }
        eprintln!(
            "{} in {} rounds, wall time {:.3} s, report in {}",
            if output.report.summary.converged {
                "converged"
            } else {
                "stopped"
            },
            output.report.summary.rounds_used,
            output.report.wall_time_seconds,
            out.display()
        );
    }
    output.exit_code
}
