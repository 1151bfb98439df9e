use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{parallel_map, RolloutConfig};
use crate::envs::Problem;
use crate::error::{check_dim, Error, Result};
use crate::graph::Path;
use crate::metrics::{PlanStatus, RunMetrics};
use crate::models::ModelPair;
use crate::search::PlanResult;
use crate::vector::{ActionVec, StateVec};

pub const SINGLE_ROLLOUT_ID: &str = "single-rollout";
pub const PARALLEL_ROLLOUT_ID: &str = "parallel-rollout";

fn one_action(models: &ModelPair, s: &StateVec, rng: &mut ChaCha8Rng) -> Result<ActionVec> {
    let mut actions = models.actor.sample_actions(s, 1, rng)?;
    if actions.len() != 1 {
        return Err(Error::ModelFault(format!(
            "actor returned {} actions, expected 1",
            actions.len()
        )));
    }
    let a = actions.remove(0);
    check_dim("actor output", models.action_dim, a.dim())?;
    Ok(a)
}

fn finish(
    planner: &str,
    cfg: &RolloutConfig,
    started: Instant,
    path: Path,
    status: PlanStatus,
    evaluations: u64,
    expansions: u64,
) -> PlanResult {
    let mut metrics = RunMetrics::new(planner);
    metrics.seed = cfg.rng_seed;
    metrics.success = status == PlanStatus::GoalReached;
    metrics.status = Some(status);
    metrics.solution_cost = metrics.success.then_some(path.total_cost);
    metrics.evaluations = evaluations;
    metrics.expansions = expansions;
    metrics.wall_time = started.elapsed().as_secs_f64();
    PlanResult {
        path,
        status,
        metrics,
        trace: Vec::new(),
        open_remaining: 0,
    }
}

/// Runs the actor greedily from the start: one sampled action per step, no restarts.
pub fn single_rollout(
    problem: &Problem,
    models: &ModelPair,
    cfg: &RolloutConfig,
) -> Result<PlanResult> {
    let started = Instant::now();
    cfg.validate()?;
    let env = problem.env.as_ref();
    models.check_env(env)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut path = Path::from_start(problem.start.clone());
    let mut s = problem.start.clone();
    let mut evaluations = 0;
    if env.goal_satisfied(&s) {
        path.complete = true;
        return Ok(finish(SINGLE_ROLLOUT_ID, cfg, started, path, PlanStatus::GoalReached, 0, 0));
    }
    for _ in 0..cfg.max_steps {
        if evaluations >= cfg.evaluation_budget {
            break;
        }
        let a = one_action(models, &s, &mut rng)?;
        let t = env.evaluate(&s, &a)?;
        evaluations += 1;
        if !t.valid {
            break;
        }
        path.push(a, t.cost, t.next.clone());
        s = t.next;
        if env.goal_satisfied(&s) {
            path.complete = true;
            return Ok(finish(
                SINGLE_ROLLOUT_ID,
                cfg,
                started,
                path,
                PlanStatus::GoalReached,
                evaluations,
                evaluations,
            ));
        }
    }
    Ok(finish(
        SINGLE_ROLLOUT_ID,
        cfg,
        started,
        path,
        PlanStatus::BudgetExhaustedPartial,
        evaluations,
        evaluations,
    ))
}

struct Episode {
    rng: ChaCha8Rng,
    path: Path,
}

impl Episode {
    fn state(&self) -> &StateVec {
        self.path.last_state().expect("episodes start from a state")
    }
}

enum StepOutcome {
    Advanced(ActionVec, f64, StateVec, bool),
    Invalid,
}

/// `B` lockstep episodes with independent random streams. Episodes restart from the
/// start after an invalid transition or `max_steps` steps. If the evaluation budget
/// runs out first, the prefix whose end state has the lowest critic cost-to-go is
/// returned.
pub fn parallel_rollout(
    problem: &Problem,
    models: &ModelPair,
    cfg: &RolloutConfig,
) -> Result<PlanResult> {
    let started = Instant::now();
    cfg.validate()?;
    let env = problem.env.as_ref();
    models.check_env(env)?;
    let start = &problem.start;
    if env.goal_satisfied(start) {
        let mut path = Path::from_start(start.clone());
        path.complete = true;
        return Ok(finish(PARALLEL_ROLLOUT_ID, cfg, started, path, PlanStatus::GoalReached, 0, 0));
    }
    let mut episodes: Vec<Episode> = (0..cfg.batch_size)
        .map(|i| Episode {
            rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed ^ i as u64),
            path: Path::from_start(start.clone()),
        })
        .collect();
    let mut evaluations: u64 = 0;
    let mut best: Option<(f64, Path)> = None;
    let score = |path: &Path| -> Result<f64> {
        let s = path.last_state().expect("nonempty");
        models.critic.state_cost_to_go(s, models.action_dim)
    };
    let consider = |best: &mut Option<(f64, Path)>, path: &Path| -> Result<()> {
        if path.is_empty() {
            return Ok(());
        }
        let q = score(path)?;
        if best.as_ref().is_none_or(|(b, _)| q < *b) {
            *best = Some((q, path.clone()));
        }
        Ok(())
    };

    while evaluations < cfg.evaluation_budget {
        let remaining = (cfg.evaluation_budget - evaluations) as usize;
        let active = remaining.min(episodes.len());
        let batch: Vec<&mut Episode> = episodes.iter_mut().take(active).collect();
        let results = parallel_map(cfg.num_workers, batch, |ep| -> Result<StepOutcome> {
            let s = ep.state().clone();
            let a = one_action(models, &s, &mut ep.rng)?;
            let t = env.evaluate(&s, &a)?;
            if !t.valid {
                return Ok(StepOutcome::Invalid);
            }
            let goal = env.goal_satisfied(&t.next);
            Ok(StepOutcome::Advanced(a, t.cost, t.next, goal))
        });
        evaluations += active as u64;
        let mut winner = None;
        for (i, r) in results.into_iter().enumerate() {
            let ep = &mut episodes[i];
            match r? {
                StepOutcome::Invalid => {
                    consider(&mut best, &ep.path)?;
                    ep.path = Path::from_start(start.clone());
                }
                StepOutcome::Advanced(a, c, next, goal) => {
                    ep.path.push(a, c, next);
                    if goal && winner.is_none() {
                        winner = Some(i);
                    } else if ep.path.len() >= cfg.max_steps {
                        consider(&mut best, &ep.path)?;
                        ep.path = Path::from_start(start.clone());
                    }
                }
            }
        }
        if let Some(i) = winner {
            let mut path = episodes[i].path.clone();
            path.complete = true;
            return Ok(finish(
                PARALLEL_ROLLOUT_ID,
                cfg,
                started,
                path,
                PlanStatus::GoalReached,
                evaluations,
                evaluations,
            ));
        }
    }
    for ep in &episodes {
        consider(&mut best, &ep.path)?;
    }
    let path = best
        .map(|(_, p)| p)
        .unwrap_or_else(|| Path::from_start(start.clone()));
    Ok(finish(
        PARALLEL_ROLLOUT_ID,
        cfg,
        started,
        path,
        PlanStatus::BudgetExhaustedPartial,
        evaluations,
        evaluations,
    ))
}
