//! Experiment configuration. Every constant the harness uses lives here and can be
//! overridden from a TOML file.

use std::path::{Path, PathBuf};

use pachs_core::models::PushTCriticWeights;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    /// Edge evaluations per open-loop query.
    pub evaluation_budget: u64,
    /// Seconds per open-loop query, if set.
    pub time_budget: Option<f64>,
    pub repetitions: u32,
    pub workers: usize,
    /// Evaluation counts at which the solved-fraction curve is sampled.
    pub curve_budgets: Vec<u64>,
    pub pachs: PachsSettings,
    pub rollout: RolloutSettings,
    pub beam: BeamSettings,
    pub epase: EpaseSettings,
    pub nav: NavModels,
    pub pusht: PushTModels,
    pub closed_loop: ClosedLoopConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            evaluation_budget: 50_000,
            time_budget: None,
            repetitions: 3,
            workers: 1,
            curve_budgets: vec![5_000, 20_000, 50_000],
            pachs: PachsSettings::default(),
            rollout: RolloutSettings::default(),
            beam: BeamSettings::default(),
            epase: EpaseSettings::default(),
            nav: NavModels::default(),
            pusht: PushTModels::default(),
            closed_loop: ClosedLoopConfig::default(),
        }
    }
}

/// A section given in a config file must set both fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchParams {
    pub weight: f64,
    pub batch_size: usize,
}

/// PACHS settings per task family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PachsSettings {
    pub nav: SearchParams,
    pub pusht: SearchParams,
}

impl Default for PachsSettings {
    fn default() -> Self {
        PachsSettings {
            nav: SearchParams {
                weight: 2.0,
                batch_size: 8,
            },
            pusht: SearchParams {
                weight: 16.0,
                batch_size: 4,
            },
        }
    }
}


#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RolloutSettings {
    pub max_steps: usize,
    /// Concurrent episodes of the parallel variant.
    pub batch_size: usize,
}

impl Default for RolloutSettings {
    fn default() -> Self {
        RolloutSettings {
            max_steps: 200,
            batch_size: 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeamSettings {
    pub width: usize,
    pub samples: usize,
    pub max_layers: usize,
}

impl Default for BeamSettings {
    fn default() -> Self {
        BeamSettings {
            width: 16,
            samples: 8,
            max_layers: 400,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpaseSettings {
    pub weight: f64,
    /// Length of the axis moves of the fixed eight-move action set.
    pub step: f64,
}

impl Default for EpaseSettings {
    fn default() -> Self {
        EpaseSettings {
            weight: 2.0,
            step: 0.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NavCritic {
    /// Straight-line distance to the goal.
    Surrogate,
    /// Distance field of the occupancy grid.
    Grid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NavModels {
    pub sigma: f64,
    pub critic: NavCritic,
    pub lattice: Vec<f64>,
    pub grid_cell: f64,
    /// MLP weight files replacing the surrogate actor or critic.
    pub actor_weights: Option<PathBuf>,
    pub critic_weights: Option<PathBuf>,
}

impl Default for NavModels {
    fn default() -> Self {
        NavModels {
            sigma: 0.1,
            critic: NavCritic::Surrogate,
            lattice: vec![0.05, 0.05],
            grid_cell: 0.05,
            actor_weights: None,
            critic_weights: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PushTModels {
    pub sigma: f64,
    pub critic: PushTCriticWeights,
    /// Pusher x/y, object x/y, object angle.
    pub lattice: Vec<f64>,
    pub actor_weights: Option<PathBuf>,
    pub critic_weights: Option<PathBuf>,
}

impl Default for PushTModels {
    fn default() -> Self {
        PushTModels {
            sigma: 0.02,
            critic: PushTCriticWeights::default(),
            lattice: vec![0.02, 0.02, 0.01, 0.01, 0.05],
            actor_weights: None,
            critic_weights: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClosedLoopConfig {
    /// Actions executed per plan.
    pub horizon: usize,
    pub max_replans: u32,
    /// Evaluations per planning query.
    pub query_budget: u64,
    /// Seconds per planning query; replaces the evaluation budget when set.
    pub query_time: Option<f64>,
}

impl Default for ClosedLoopConfig {
    fn default() -> Self {
        ClosedLoopConfig {
            horizon: 10,
            max_replans: 30,
            query_budget: 2_000,
            query_time: None,
        }
    }
}

impl ClosedLoopConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.max_replans == 0 {
            return Err(BenchError::Config(
                "closed loop horizon and max_replans must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

impl BenchConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            BenchError::Line { line, message, .. } => BenchError::Line {
                path: path.to_path_buf(),
                line,
                message,
            },
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: BenchConfig = toml::from_str(text).map_err(|e| BenchError::Line {
            path: PathBuf::from("<config>"),
            line: e
                .span()
                .map(|s| text[..s.start].matches('\n').count() + 1)
                .unwrap_or(0),
            message: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 || self.repetitions == 0 {
            return Err(BenchError::Config("workers and repetitions must be >= 1".into()));
        }
        self.closed_loop.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = BenchConfig::default();
        assert_eq!(BenchConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg =
            BenchConfig::parse("evaluation_budget = 10\n[pachs.pusht]\nweight = 1.5\nbatch_size = 2\n").unwrap();
        assert_eq!(cfg.evaluation_budget, 10);
        assert_eq!(cfg.pachs.pusht.weight, 1.5);
        assert_eq!(cfg.pachs.pusht.batch_size, 2);
        assert_eq!(cfg.pachs.nav, PachsSettings::default().nav);
        assert_eq!(cfg.beam, BeamSettings::default());
    }

    #[test]
    fn unknown_key_names_line() {
        let err = BenchConfig::parse("repetitions = 2\n\n[beam]\nwidht = 3\n").unwrap_err();
        match err {
            BenchError::Line { line, .. } => assert_eq!(line, 4),
            other => panic!("{other}"),
        }
        match BenchConfig::parse("[pachs.nav]\nweight = 1.0\n").unwrap_err() {
            BenchError::Line { message, .. } => assert!(message.contains("batch_size"), "{message}"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn closed_loop_limits() {
        let err = BenchConfig::parse("[closed_loop]\nhorizon = 0\n").unwrap_err();
        assert!(matches!(err, BenchError::Config(_)));
    }
}
