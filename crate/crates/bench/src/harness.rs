//! Model construction, planner dispatch and path validation.

use std::fmt;
use std::path::Path as FsPath;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use pachs_core::baselines::{
    beam_search, epase_style, grid_heuristic, parallel_rollout, single_rollout, BeamConfig, FixedActions,
    RolloutConfig,
};
use pachs_core::envs::{GridHeuristic, Instance, Problem, World};
use pachs_core::graph::Path;
use pachs_core::metrics::RunMetrics;
use pachs_core::models::{
    king_moves, load_weights, ActionSampler, CostToGo, GridDistanceCritic, MlpActor, MlpCritic, ModelPair,
    NavSurrogate, PushTSurrogate,
};
use pachs_core::search::{plan, PlanResult, PlannerConfig};
use serde::{Deserialize, Serialize};

use crate::config::{BenchConfig, NavCritic};
use crate::error::{BenchError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlannerKind {
    Pachs,
    SingleRollout,
    ParallelRollout,
    Beam,
    Epase,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 5] = [
        PlannerKind::Pachs,
        PlannerKind::SingleRollout,
        PlannerKind::ParallelRollout,
        PlannerKind::Beam,
        PlannerKind::Epase,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PlannerKind::Pachs => "pachs",
            PlannerKind::SingleRollout => "single-rollout",
            PlannerKind::ParallelRollout => "parallel-rollout",
            PlannerKind::Beam => "beam",
            PlannerKind::Epase => "epase",
        }
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlannerKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        PlannerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| BenchError::Config(format!("unknown planner '{s}'")))
    }
}

/// Limits for one planning query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QueryBudget {
    pub evaluations: u64,
    pub seconds: Option<f64>,
}

impl QueryBudget {
    pub fn open_loop(cfg: &BenchConfig) -> Self {
        QueryBudget {
            evaluations: cfg.evaluation_budget,
            seconds: cfg.time_budget,
        }
    }
}

fn mlp_actor(path: &FsPath, max_norm: f64) -> Result<Arc<dyn ActionSampler>> {
    Ok(Arc::new(MlpActor::new(load_weights(path)?)?.with_max_norm(max_norm)))
}

fn mlp_critic(path: &FsPath) -> Result<Arc<dyn CostToGo>> {
    Ok(Arc::new(MlpCritic::new(load_weights(path)?)?))
}

/// Actor and critic for `inst` as selected by the config.
pub fn build_models(inst: &Instance, cfg: &BenchConfig) -> Result<ModelPair> {
    match &inst.world {
        World::Nav { env, .. } => {
            let s = &cfg.nav;
            let surrogate = Arc::new(NavSurrogate::new(env.goal_center, s.sigma, env.max_action_norm)?);
            let actor: Arc<dyn ActionSampler> = match &s.actor_weights {
                Some(p) => mlp_actor(p, env.max_action_norm)?,
                None => surrogate.clone(),
            };
            let critic: Arc<dyn CostToGo> = match (&s.critic_weights, s.critic) {
                (Some(p), _) => mlp_critic(p)?,
                (None, NavCritic::Surrogate) => surrogate,
                (None, NavCritic::Grid) => Arc::new(GridDistanceCritic::new(Arc::new(GridHeuristic::new(
                    env,
                    s.grid_cell,
                )?))),
            };
            Ok(ModelPair::new(actor, critic, 2, 2))
        }
        World::PushT { env, .. } => {
            let s = &cfg.pusht;
            let surrogate = Arc::new(PushTSurrogate::new(env, s.critic, s.sigma)?);
            let actor: Arc<dyn ActionSampler> = match &s.actor_weights {
                Some(p) => mlp_actor(p, env.max_action_norm)?,
                None => surrogate.clone(),
            };
            let critic: Arc<dyn CostToGo> = match &s.critic_weights {
                Some(p) => mlp_critic(p)?,
                None => surrogate,
            };
            Ok(ModelPair::new(actor, critic, 5, 2))
        }
    }
}

fn lattice(inst: &Instance, cfg: &BenchConfig) -> Vec<f64> {
    match inst.world {
        World::Nav { .. } => cfg.nav.lattice.clone(),
        World::PushT { .. } => cfg.pusht.lattice.clone(),
    }
}

pub fn pachs_config(inst: &Instance, cfg: &BenchConfig, seed: u64, budget: QueryBudget) -> PlannerConfig {
    let params = match inst.world {
        World::Nav { .. } => &cfg.pachs.nav,
        World::PushT { .. } => &cfg.pachs.pusht,
    };
    PlannerConfig {
        weight: params.weight,
        num_workers: cfg.workers,
        batch_size: params.batch_size,
        resolution: lattice(inst, cfg),
        evaluation_budget: Some(budget.evaluations),
        time_budget: budget.seconds,
        expansion_budget: None,
        rng_seed: seed,
        record_trace: false,
    }
}

pub fn rollout_config(cfg: &BenchConfig, seed: u64, budget: QueryBudget) -> RolloutConfig {
    RolloutConfig {
        max_steps: cfg.rollout.max_steps,
        batch_size: cfg.rollout.batch_size,
        evaluation_budget: budget.evaluations,
        rng_seed: seed,
        num_workers: cfg.workers,
    }
}

pub fn beam_config(inst: &Instance, cfg: &BenchConfig, seed: u64, budget: QueryBudget) -> BeamConfig {
    BeamConfig {
        width: cfg.beam.width,
        samples: cfg.beam.samples,
        max_layers: cfg.beam.max_layers,
        evaluation_budget: Some(budget.evaluations),
        resolution: lattice(inst, cfg),
        rng_seed: seed,
        num_workers: cfg.workers,
    }
}

/// Runs one planner on `problem`, which must be built from `inst`'s environment.
pub fn run_planner_on(
    kind: PlannerKind,
    inst: &Instance,
    problem: &Problem,
    models: &ModelPair,
    cfg: &BenchConfig,
    seed: u64,
    budget: QueryBudget,
) -> Result<PlanResult> {
    Ok(match kind {
        PlannerKind::Pachs => plan(problem, models, &pachs_config(inst, cfg, seed, budget))?,
        PlannerKind::SingleRollout => single_rollout(problem, models, &rollout_config(cfg, seed, budget))?,
        PlannerKind::ParallelRollout => parallel_rollout(problem, models, &rollout_config(cfg, seed, budget))?,
        PlannerKind::Beam => beam_search(problem, models, &beam_config(inst, cfg, seed, budget))?,
        PlannerKind::Epase => {
            let world = inst
                .nav()
                .ok_or_else(|| BenchError::Config("epase needs a grid heuristic and runs on Nav tasks only".into()))?;
            let grid = Arc::new(GridHeuristic::new(world, cfg.nav.grid_cell)?);
            let pc = PlannerConfig {
                weight: cfg.epase.weight,
                ..pachs_config(inst, cfg, seed, budget)
            };
            epase_style(problem, grid_heuristic(grid), FixedActions::new(king_moves(cfg.epase.step))?, &pc)?
        }
    })
}

pub fn run_planner(
    kind: PlannerKind,
    inst: &Instance,
    cfg: &BenchConfig,
    seed: u64,
    budget: QueryBudget,
) -> Result<PlanResult> {
    let problem = inst.problem()?;
    let models = build_models(inst, cfg)?;
    run_planner_on(kind, inst, &problem, &models, cfg, seed, budget)
}

/// Replays `path` through a fresh environment of `inst` and returns the recomputed cost.
/// Every transition must be valid and land on the recorded state.
pub fn replay(inst: &Instance, path: &Path) -> Result<f64> {
    let env = inst.environment();
    let Some(first) = path.states.first() else {
        return Ok(0.0);
    };
    if *first != inst.start_state() {
        return Err(BenchError::Replay("path does not begin at the start state".into()));
    }
    if path.states.len() != path.actions.len() + 1 || path.costs.len() != path.actions.len() {
        return Err(BenchError::Replay("path arrays have inconsistent lengths".into()));
    }
    let mut total = 0.0;
    for (i, a) in path.actions.iter().enumerate() {
        let t = env.evaluate(&path.states[i], a)?;
        if !t.valid {
            return Err(BenchError::Replay(format!("transition {i} is invalid")));
        }
        if t.next != path.states[i + 1] || t.cost != path.costs[i] {
            return Err(BenchError::Replay(format!("transition {i} does not reproduce the recorded step")));
        }
        total += t.cost;
    }
    if path.complete && !env.goal_satisfied(path.states.last().expect("nonempty")) {
        return Err(BenchError::Replay("complete path does not end in the goal".into()));
    }
    if (total - path.total_cost).abs() > 1e-9 {
        return Err(BenchError::Replay(format!(
            "recorded cost {} differs from replayed cost {total}",
            path.total_cost
        )));
    }
    Ok(total)
}

/// On-disk form of a solution path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathFile {
    pub instance: String,
    pub planner: String,
    pub path: Path,
}

impl PathFile {
    pub fn save(&self, path: &FsPath) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("path serializes");
        std::fs::write(path, text).map_err(|e| BenchError::io(path, e))
    }

    pub fn load(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| BenchError::Line {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }
}

/// Outcome of one benchmark run: metrics always, the path only if the run succeeded
/// and the path replayed cleanly.
pub struct RunOutcome {
    pub metrics: RunMetrics,
    pub path: Option<Path>,
}

/// Runs one query and folds errors into the metrics record. Successful paths are
/// replayed before being returned; a replay mismatch is reported as an error.
pub fn run_record(
    kind: PlannerKind,
    inst: &Instance,
    cfg: &BenchConfig,
    seed: u64,
    repetition: u32,
    budget: QueryBudget,
) -> RunOutcome {
    let started = Instant::now();
    let result = run_planner(kind, inst, cfg, seed, budget).and_then(|r| {
        if r.metrics.success {
            replay(inst, &r.path)?;
        }
        Ok(r)
    });
    let (mut metrics, path) = match result {
        Ok(r) => {
            let path = r.metrics.success.then_some(r.path);
            (r.metrics, path)
        }
        Err(e) => {
            let mut m = RunMetrics::failed(kind.name(), e.to_string());
            m.wall_time = started.elapsed().as_secs_f64();
            (m, None)
        }
    };
    metrics.instance = inst.id();
    metrics.seed = seed;
    metrics.repetition = repetition;
    RunOutcome { metrics, path }
}

/// Seed of repetition `rep` of a run with base seed `seed`.
pub fn repetition_seed(seed: u64, rep: u32) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(rep as u64)
}
