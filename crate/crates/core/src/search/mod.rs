//! Parallel edge-based best-first search.
//!
//! A coordinator pops edges from OPEN in ascending priority and hands them to a pool
//! of workers. Dummy edges ask a worker to expand their source state (one batched
//! actor call and one batched critic call); real edges ask a worker to run the
//! environment transition. All bookkeeping happens under a single lock; model and
//! environment calls never do.

mod engine;
mod lock;

use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use engine::run_search;
pub use lock::search_lock_held;

use crate::envs::Problem;
use crate::error::{Error, Result};
use crate::graph::Path;
use crate::metrics::{PlanStatus, RunMetrics};
use crate::models::ModelPair;
use crate::vector::StateVec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// Heuristic weight `w`.
    pub weight: f64,
    pub num_workers: usize,
    /// Actions sampled per state expansion (`K`).
    pub batch_size: usize,
    /// Lattice cell size per state dimension.
    pub resolution: Vec<f64>,
    pub evaluation_budget: Option<u64>,
    /// Seconds.
    pub time_budget: Option<f64>,
    pub expansion_budget: Option<u64>,
    pub rng_seed: u64,
    /// Keep the sequence of popped edges in the result.
    pub record_trace: bool,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            weight: 1.0,
            num_workers: 1,
            batch_size: 8,
            resolution: Vec::new(),
            evaluation_budget: None,
            time_budget: None,
            expansion_budget: None,
            rng_seed: 0,
            record_trace: false,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.weight >= 0.0 && self.weight.is_finite()) {
            return Err(Error::Config(format!("weight must be >= 0, got {}", self.weight)));
        }
        if self.num_workers == 0 {
            return Err(Error::Config("num_workers must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if self.resolution.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::Config(format!(
                "lattice resolution must be positive, got {:?}",
                self.resolution
            )));
        }
        if let Some(t) = self.time_budget {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("time budget must be >= 0, got {t}")));
            }
        }
        Ok(())
    }

    pub fn time_budget_duration(&self) -> Option<Duration> {
        self.time_budget.map(Duration::from_secs_f64)
    }
}

/// One popped OPEN entry, recorded when `record_trace` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopRecord {
    pub source: usize,
    pub dummy: bool,
    pub f: f64,
    pub g: f64,
}

#[derive(Clone, Debug)]
pub struct PlanResult {
    pub path: Path,
    pub status: PlanStatus,
    pub metrics: RunMetrics,
    pub trace: Vec<PopRecord>,
    /// Live OPEN entries when the search stopped.
    pub open_remaining: usize,
}

/// A state-only heuristic. `+inf` marks states that cannot reach the goal.
pub type StateHeuristic = Arc<dyn Fn(&StateVec) -> f64 + Send + Sync>;

/// How outgoing edges are ranked.
#[derive(Clone)]
pub enum EdgeScoring {
    /// `g(s) + w * q(s, a)` with `q` from the critic; successors reuse `q - c`.
    Critic,
    /// `g(s) + w * h(s)` for every outgoing edge of `s`.
    StateHeuristic(StateHeuristic),
}

pub fn edge_priority(g_s: f64, q: f64, w: f64) -> f64 {
    g_s + w * q
}

/// Priority of the dummy edge of a newly reached state, reusing the edge's `q`.
pub fn successor_priority(g_new: f64, q_edge: f64, c_edge: f64, w: f64) -> f64 {
    g_new + w * (q_edge - c_edge)
}

pub const PLANNER_ID: &str = "pachs";

pub fn plan(problem: &Problem, models: &ModelPair, cfg: &PlannerConfig) -> Result<PlanResult> {
    run_search(problem, models, cfg, &EdgeScoring::Critic, PLANNER_ID)
}

/// Like [`plan`], but requires a time budget; when it runs out the best partial path
/// is returned.
pub fn plan_anytime(
    problem: &Problem,
    models: &ModelPair,
    cfg: &PlannerConfig,
) -> Result<PlanResult> {
    if cfg.time_budget.is_none() {
        return Err(Error::Config("anytime planning needs a time budget".into()));
    }
    plan(problem, models, cfg)
}
