//! Turns a scenario description into a concrete game plus optional group
//! labels for the phenomena report.

use nalgebra::{DMatrix, DVector};

use gne_core::game::SecurityGame;

use crate::config::ScenarioConfig;

/// A generated game together with its group partition, when the scenario
/// defines one.
#[derive(Debug, Clone)]
pub struct BuiltScenario {
    pub game: SecurityGame,
    pub group_labels: Option<Vec<usize>>,
}

/// Builds the game a scenario describes. Shape errors name the offending
/// field; the returned game still has to pass validation before solving.
pub fn build_scenario(cfg: &ScenarioConfig) -> Result<BuiltScenario, String> {
    match cfg {
        ScenarioConfig::Homogeneous {
            n_agents,
            self_influence,
            cross_influence,
            investment_return,
            budget,
        } => {
            let n = *n_agents;
            if n < 2 {
                return Err("scenario.n_agents: need at least two agents".into());
            }
            let mut influence = DMatrix::from_element(n, n, *cross_influence);
            influence.fill_diagonal(*self_influence);
            let game = SecurityGame::new(
                influence,
                DVector::from_element(n, *investment_return),
                DVector::from_element(n, *budget),
            )
            .map_err(|e| e.to_string())?;
            Ok(BuiltScenario {
                game,
                group_labels: None,
            })
        }
        ScenarioConfig::TwoGroup {
            group_sizes,
            group_returns,
            self_influence,
            cross_influence,
            budget,
        } => {
            if group_sizes.contains(&0) {
                return Err("scenario.group_sizes: both groups need agents".into());
            }
            let n = group_sizes[0] + group_sizes[1];
            let mut influence = DMatrix::from_element(n, n, *cross_influence);
            influence.fill_diagonal(*self_influence);
            let returns = DVector::from_iterator(
                n,
                (0..n).map(|i| {
                    if i < group_sizes[0] {
                        group_returns[0]
                    } else {
                        group_returns[1]
                    }
                }),
            );
            let game =
                SecurityGame::new(influence, returns, DVector::from_element(n, *budget))
                    .map_err(|e| e.to_string())?;
            let labels = (0..n).map(|i| usize::from(i >= group_sizes[0])).collect();
            Ok(BuiltScenario {
                game,
                group_labels: Some(labels),
            })
        }
        ScenarioConfig::HeterogeneousSine { n_agents, budget } => {
            let n = *n_agents;
            if n < 2 {
                return Err("scenario.n_agents: need at least two agents".into());
            }
            let mut influence = DMatrix::from_element(n, n, 1.0);
            for k in 0..n {
                let label = (k + 1) as f64; // 1-based label, radians
                influence[(k, k)] = 3.0 * label.sin() + 20.0;
            }
            let returns =
                DVector::from_iterator(n, (0..n).map(|k| 15.0 + 2.0 * (k + 1) as f64));
            let game =
                SecurityGame::new(influence, returns, DVector::from_element(n, *budget))
                    .map_err(|e| e.to_string())?;
            Ok(BuiltScenario {
                game,
                group_labels: None,
            })
        }
        ScenarioConfig::Custom {
            influence,
            returns,
            budgets,
            group_labels,
        } => {
            let n = influence.len();
            if n == 0 {
                return Err("scenario.influence: matrix is empty".into());
            }
            if influence.iter().any(|row| row.len() != n) {
                return Err("scenario.influence: matrix must be square".into());
            }
            if returns.len() != n {
                return Err(format!(
                    "scenario.returns: expected {n} entries, got {}",
                    returns.len()
                ));
            }
            if budgets.len() != n {
                return Err(format!(
                    "scenario.budgets: expected {n} entries, got {}",
                    budgets.len()
                ));
            }
            if let Some(labels) = group_labels {
                if labels.len() != n {
                    return Err(format!(
                        "scenario.group_labels: expected {n} entries, got {}",
                        labels.len()
                    ));
                }
            }
            let flat: Vec<f64> = influence.iter().flatten().copied().collect();
            let game = SecurityGame::new(
                DMatrix::from_row_slice(n, n, &flat),
                DVector::from_vec(returns.clone()),
                DVector::from_vec(budgets.clone()),
            )
            .map_err(|e| e.to_string())?;
            Ok(BuiltScenario {
                game,
                group_labels: group_labels.clone(),
            })
        }
    }
}

/// The same scenario with every attention budget replaced, for the
/// attention-overflow comparison between two budget levels.
pub fn with_budget(cfg: &ScenarioConfig, budget: f64) -> ScenarioConfig {
    let mut out = cfg.clone();
    match &mut out {
        ScenarioConfig::Homogeneous { budget: b, .. }
        | ScenarioConfig::TwoGroup { budget: b, .. }
        | ScenarioConfig::HeterogeneousSine { budget: b, .. } => *b = budget,
        ScenarioConfig::Custom { budgets, .. } => {
            budgets.iter_mut().for_each(|b| *b = budget);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::builtin_config;

    #[test]
    fn homogeneous_defaults_match_reported_parameters() {
        let cfg = builtin_config("homogeneous").unwrap();
        let built = build_scenario(&cfg.scenario).unwrap();
        assert_eq!(built.game.n_agents(), 10);
        assert_eq!(built.game.self_influence(0), 20.0);
        assert_eq!(built.game.cross_influence(0, 1), 1.0);
        assert_eq!(built.game.investment_return(0), 25.0);
        assert!(built.game.validate().is_ok());
    }

    #[test]
    fn sine_scenario_evaluates_in_radians() {
        let cfg = builtin_config("heterogeneous-sine").unwrap();
        let built = build_scenario(&cfg.scenario).unwrap();
        // agent with 1-based label 5
        let expected = 3.0 * (5.0_f64).sin() + 20.0;
        assert!((built.game.self_influence(4) - expected).abs() < 1e-12);
        assert!((built.game.self_influence(4) - 17.123).abs() < 1e-3);
        assert_eq!(built.game.investment_return(4), 25.0);
        assert!(built.game.validate().is_ok());
    }

    #[test]
    fn two_group_scenario_shapes_returns() {
        let cfg = builtin_config("two-group").unwrap();
        let built = build_scenario(&cfg.scenario).unwrap();
        assert_eq!(built.game.n_agents(), 15);
        for i in 0..5 {
            assert_eq!(built.game.investment_return(i), 40.0);
        }
        for i in 5..15 {
            assert_eq!(built.game.investment_return(i), 25.0);
        }
        assert_eq!(
            built.group_labels.unwrap(),
            (0..15).map(|i| usize::from(i >= 5)).collect::<Vec<_>>()
        );
    }

    #[test]
    fn all_builtins_validate() {
        for name in crate::config::BUILTIN_NAMES {
            let cfg = builtin_config(name).unwrap();
            let built = build_scenario(&cfg.scenario).unwrap();
            assert!(built.game.validate().is_ok(), "{name} fails validation");
        }
    }

    #[test]
    fn custom_scenario_rejects_ragged_matrix() {
        let cfg = ScenarioConfig::Custom {
            influence: vec![vec![2.0, 0.1], vec![0.1]],
            returns: vec![1.0, 1.0],
            budgets: vec![1.0, 1.0],
            group_labels: None,
        };
        let err = build_scenario(&cfg).unwrap_err();
        assert!(err.contains("influence"));
    }
}
