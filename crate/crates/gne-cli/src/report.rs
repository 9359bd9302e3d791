//! Report assembly and file emission: `summary.json`, `cognition.csv`, and
//! the per-round trace CSVs. Agent indices in every emitted artifact are
//! 1-based, matching the scenario definitions; group indices follow the
//! labels given in the scenario.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use gne_core::gne::{GneOutcome, PhenomenaReport, VerificationReport};

use crate::config::ConfigFile;

/// Everything `summary.json` holds. Field order is the file's key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub u_star: Vec<f64>,
    /// Attention matrix, row-major; row `i` is agent `i+1`'s weights.
    pub m_star: Vec<Vec<f64>>,
    pub alphas: Vec<f64>,
    pub rbp: Vec<f64>,
    pub rounds_used: usize,
    pub converged: bool,
    pub phenomena: Option<PhenomenaSummary>,
    pub verification: Option<VerificationSummary>,
    pub config_echo: ConfigFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhenomenaSummary {
    /// Agents each agent attends to; 1-based.
    pub supports: Vec<Vec<usize>>,
    /// Agents in everyone's support; 1-based.
    pub critical_set: Vec<usize>,
    pub partisanship: Option<PartisanshipSummary>,
    /// Agents attended to only at the larger of the two compared budgets;
    /// 1-based; present when a baseline budget was solved.
    pub fill_set: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartisanshipSummary {
    /// `mass_fraction[i][g]`: share of agent `i+1`'s attention mass in
    /// group `g`.
    pub mass_fraction: Vec<Vec<f64>>,
    pub dominant_group: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationSummary {
    pub passed: bool,
    pub brne_residual: f64,
    pub cognition_residuals: Vec<f64>,
    pub probe_failures: Vec<ProbeFailureSummary>,
    pub n_probes: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeFailureSummary {
    /// 1-based agent.
    pub agent: usize,
    pub kind: String,
    pub improvement: f64,
}

/// A finished run: the summary plus wall time. Wall time deliberately
/// stays out of `summary.json` so identical configurations reproduce the
/// file byte for byte.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub summary: Summary,
    pub outcome: GneOutcome,
    pub wall_time_seconds: f64,
}

fn one_based(indices: &[usize]) -> Vec<usize> {
    indices.iter().map(|i| i + 1).collect()
}

pub fn phenomena_summary(
    report: &PhenomenaReport,
    fill: Option<Vec<usize>>,
) -> PhenomenaSummary {
    PhenomenaSummary {
        supports: report.supports.iter().map(|s| one_based(s)).collect(),
        critical_set: one_based(&report.critical_set),
        partisanship: report.partisanship.as_ref().map(|p| PartisanshipSummary {
            mass_fraction: p.mass_fraction.clone(),
            dominant_group: p.dominant_group,
        }),
        fill_set: fill.map(|f| one_based(&f)),
    }
}

pub fn verification_summary(report: &VerificationReport) -> VerificationSummary {
    VerificationSummary {
        passed: report.passed,
        brne_residual: report.brne_residual,
        cognition_residuals: report.cognition_residuals.clone(),
        probe_failures: report
            .probe_failures
            .iter()
            .map(|f| ProbeFailureSummary {
                agent: f.agent + 1,
                kind: match f.kind {
                    gne_core::gne::ProbeKind::Investment => "investment".into(),
                    gne_core::gne::ProbeKind::Attention => "attention".into(),
                },
                improvement: f.improvement,
            })
            .collect(),
        n_probes: report.n_probes,
        seed: report.seed,
    }
}

pub fn summary_from_outcome(
    outcome: &GneOutcome,
    phenomena: Option<PhenomenaSummary>,
    verification: Option<VerificationSummary>,
    config_echo: ConfigFile,
) -> Summary {
    let n = outcome.u_star.len();
    Summary {
        schema_version: config_echo.schema_version,
        u_star: outcome.u_star.0.iter().copied().collect(),
        m_star: (0..n)
            .map(|i| (0..n).map(|j| outcome.m_star.weight(i, j)).collect())
            .collect(),
        alphas: outcome.alphas.iter().copied().collect(),
        rbp: outcome.rbp.iter().copied().collect(),
        rounds_used: outcome.rounds_used,
        converged: outcome.converged,
        phenomena,
        verification,
        config_echo,
    }
}

/// Plain decimal with `digits` significant digits ("0" for zero). Values
/// large enough to carry more integer digits keep them.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

const SIG_DIGITS: usize = 12;

/// Writes `summary.json` and `cognition.csv`, plus `u_trace.csv` and one
/// `q_trace_agent<i>.csv` per agent when `trace` is set. Returns the paths
/// written. I/O errors carry the failing path.
pub fn emit_report(
    report: &RunReport,
    dir: &Path,
    trace: bool,
) -> Result<Vec<PathBuf>, String> {
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let mut written = Vec::new();

    let summary_path = dir.join("summary.json");
    let json = serde_json::to_string_pretty(&report.summary)
        .map_err(|e| format!("summary serialization: {e}"))?;
    fs::write(&summary_path, json.as_bytes())
        .map_err(|e| format!("{}: {e}", summary_path.display()))?;
    written.push(summary_path);

    let cognition_path = dir.join("cognition.csv");
    let mut rows = String::new();
    for row in &report.summary.m_star {
        let cells: Vec<String> = row.iter().map(|v| format_sig(*v, SIG_DIGITS)).collect();
        rows.push_str(&cells.join(","));
        rows.push('\n');
    }
    fs::write(&cognition_path, rows.as_bytes())
        .map_err(|e| format!("{}: {e}", cognition_path.display()))?;
    written.push(cognition_path);

    if trace {
        let n = report.summary.u_star.len();
        let u_path = dir.join("u_trace.csv");
        {
            let mut file = fs::File::create(&u_path)
                .map_err(|e| format!("{}: {e}", u_path.display()))?;
            let header: Vec<String> =
                std::iter::once("round".to_string())
                    .chain((1..=n).map(|i| format!("u{i}")))
                    .collect();
            writeln!(file, "{}", header.join(","))
                .map_err(|e| format!("{}: {e}", u_path.display()))?;
            for (round, record) in report.outcome.round_trace.iter().enumerate() {
                let cells: Vec<String> = std::iter::once((round + 1).to_string())
                    .chain(record.u.0.iter().map(|v| format_sig(*v, SIG_DIGITS)))
                    .collect();
                writeln!(file, "{}", cells.join(","))
                    .map_err(|e| format!("{}: {e}", u_path.display()))?;
            }
            written.push(u_path);
        }
        for agent in 0..n {
            let q_path = dir.join(format!("q_trace_agent{}.csv", agent + 1));
            let mut file = fs::File::create(&q_path)
                .map_err(|e| format!("{}: {e}", q_path.display()))?;
            writeln!(file, "round,iteration,q")
                .map_err(|e| format!("{}: {e}", q_path.display()))?;
            for (round, record) in report.outcome.round_trace.iter().enumerate() {
                for (iter, q) in record.q_traces[agent].iter().enumerate() {
                    writeln!(
                        file,
                        "{},{},{}",
                        round + 1,
                        iter + 1,
                        format_sig(*q, SIG_DIGITS)
                    )
                    .map_err(|e| format!("{}: {e}", q_path.display()))?;
                }
            }
            written.push(q_path);
        }
    }
    Ok(written)
}

/// Per-agent results as a small CSV table (stdout format `csv`).
pub fn agent_table(summary: &Summary) -> String {
    let mut out = String::from("agent,u,alpha,rbp\n");
    for i in 0..summary.u_star.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            i + 1,
            format_sig(summary.u_star[i], SIG_DIGITS),
            format_sig(summary.alphas[i], SIG_DIGITS),
            format_sig(summary.rbp[i], SIG_DIGITS),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig(0.0, 12), "0");
        assert_eq!(format_sig(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_sig(25.0 / 17.0, 12), "1.47058823529");
        assert_eq!(format_sig(-0.5, 12), "-0.500000000000");
        assert_eq!(format_sig(1234.5678901234, 12), "1234.56789012");
    }
}
