//! Plan, execute a prefix in a separate world environment, observe, replan.

use std::time::Instant;

use pachs_core::envs::{Instance, Problem};
use pachs_core::metrics::{PlanStatus, RunMetrics};
use pachs_core::{Error as CoreError, StateVec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::BenchConfig;
use crate::error::{BenchError, Result};
use crate::harness::{build_models, run_planner_on, PlannerKind, QueryBudget};

/// Outcome of a closed-loop episode, including the executed world trajectory.
#[derive(Clone, Debug)]
pub struct ClosedLoopRun {
    pub metrics: RunMetrics,
    pub states: Vec<StateVec>,
}

pub fn closed_loop(kind: PlannerKind, inst: &Instance, cfg: &BenchConfig, seed: u64) -> Result<ClosedLoopRun> {
    let cl = &cfg.closed_loop;
    cl.validate()?;
    if kind == PlannerKind::Beam || kind == PlannerKind::Epase {
        return Err(BenchError::Config(format!(
            "{kind} does not return partial paths and cannot run closed loop"
        )));
    }
    let started = Instant::now();
    let world = inst.environment();
    let models = build_models(inst, cfg)?;
    let budget = QueryBudget {
        evaluations: cl.query_budget,
        seconds: cl.query_time,
    };
    let mut metrics = RunMetrics::new(kind.name());
    metrics.instance = inst.id();
    metrics.seed = seed;
    let mut s = inst.start_state();
    let mut states = vec![s.clone()];
    let mut replans = 0u32;
    let mut executed = 0u32;
    let mut cost = 0.0;
    let mut success = world.goal_satisfied(&s);
    let mut failure: Option<PlanStatus> = None;
    // The direct-execution baseline draws from one stream across the whole episode.
    let mut direct_rng = ChaCha8Rng::seed_from_u64(seed);

    'episode: while !success && replans < cl.max_replans {
        replans += 1;
        if kind == PlannerKind::SingleRollout {
            for _ in 0..cl.horizon {
                let a = models
                    .actor
                    .sample_actions(&s, 1, &mut direct_rng)?
                    .pop()
                    .ok_or_else(|| CoreError::ModelFault("actor returned no action".into()))?;
                let t = world.evaluate(&s, &a)?;
                metrics.evaluations += 1;
                if !t.valid {
                    failure = Some(PlanStatus::BudgetExhaustedPartial);
                    break 'episode;
                }
                executed += 1;
                cost += t.cost;
                s = t.next;
                states.push(s.clone());
                if world.goal_satisfied(&s) {
                    success = true;
                    break 'episode;
                }
            }
            continue;
        }
        let problem = Problem::new(world.clone(), s.clone())?;
        let query_seed = seed.wrapping_add(replans as u64 - 1);
        let r = run_planner_on(kind, inst, &problem, &models, cfg, query_seed, budget)?;
        metrics.evaluations += r.metrics.evaluations;
        metrics.expansions += r.metrics.expansions;
        metrics.lock_violations += r.metrics.lock_violations;
        if r.path.actions.is_empty() && r.status == PlanStatus::OpenExhaustedNoSolution {
            failure = Some(PlanStatus::OpenExhaustedNoSolution);
            break;
        }
        for a in r.path.actions.iter().take(cl.horizon) {
            let t = world.evaluate(&s, a)?;
            if !t.valid {
                return Err(BenchError::Replay(
                    "planned action is invalid in the world environment".into(),
                ));
            }
            executed += 1;
            cost += t.cost;
            s = t.next;
            states.push(s.clone());
            if world.goal_satisfied(&s) {
                success = true;
                break 'episode;
            }
        }
    }

    metrics.success = success;
    metrics.status = Some(if success {
        PlanStatus::GoalReached
    } else {
        failure.unwrap_or(PlanStatus::BudgetExhaustedPartial)
    });
    metrics.solution_cost = success.then_some(cost);
    metrics.replans = Some(replans);
    metrics.executed_actions = Some(executed);
    metrics.executed_cost = Some(cost);
    metrics.wall_time = started.elapsed().as_secs_f64();
    Ok(ClosedLoopRun { metrics, states })
}

/// Like [`closed_loop`], but folds errors into a failed record.
pub fn closed_loop_record(kind: PlannerKind, inst: &Instance, cfg: &BenchConfig, seed: u64) -> RunMetrics {
    match closed_loop(kind, inst, cfg, seed) {
        Ok(run) => run.metrics,
        Err(e) => {
            let mut m = RunMetrics::failed(kind.name(), e.to_string());
            m.instance = inst.id();
            m.seed = seed;
            m
        }
    }
}
