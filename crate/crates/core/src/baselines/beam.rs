use std::collections::HashSet;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{parallel_map, BeamConfig};
use crate::envs::{Problem, Transition};
use crate::error::{check_dim, Error, Result};
use crate::graph::{Cell, Lattice, Path};
use crate::metrics::{PlanStatus, RunMetrics};
use crate::models::ModelPair;
use crate::search::PlanResult;
use crate::vector::{ActionVec, StateVec};

pub const BEAM_ID: &str = "beam";

struct BeamNode {
    state: StateVec,
    parent: Option<usize>,
    action: Option<ActionVec>,
    cost: f64,
    g: f64,
}

struct Candidate {
    parent: usize,
    action: ActionVec,
    transition: Transition,
    score: f64,
}

fn path_to(nodes: &[BeamNode], mut id: usize) -> Path {
    let mut chain = vec![id];
    while let Some(p) = nodes[id].parent {
        chain.push(p);
        id = p;
    }
    chain.reverse();
    let mut path = Path::from_start(nodes[chain[0]].state.clone());
    for &n in &chain[1..] {
        let node = &nodes[n];
        path.push(
            node.action.clone().expect("non-root nodes carry an action"),
            node.cost,
            node.state.clone(),
        );
    }
    path
}

/// Layered beam search. Each layer samples `K` actions per frontier state, scores them
/// with `g + q`, evaluates them all and keeps the best `W` successors, at most one per
/// lattice cell and none in a cell already visited.
pub fn beam_search(problem: &Problem, models: &ModelPair, cfg: &BeamConfig) -> Result<PlanResult> {
    let started = Instant::now();
    cfg.validate()?;
    let env = problem.env.as_ref();
    models.check_env(env)?;
    let lattice: Option<Lattice> = if cfg.resolution.is_empty() {
        None
    } else {
        Some(env.lattice(cfg.resolution.clone())?)
    };
    let cell_of = |s: &StateVec| -> Result<Option<Cell>> {
        lattice.as_ref().map(|l| l.cell(s)).transpose()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut nodes = vec![BeamNode {
        state: problem.start.clone(),
        parent: None,
        action: None,
        cost: 0.0,
        g: 0.0,
    }];
    let mut visited: HashSet<Cell> = HashSet::new();
    if let Some(c) = cell_of(&problem.start)? {
        visited.insert(c);
    }
    let mut frontier: Vec<usize> = vec![0];
    let mut frontier_scores: Vec<f64> = vec![0.0];
    let mut evaluations: u64 = 0;
    let mut expansions: u64 = 0;

    let done = |nodes: &[BeamNode], id: Option<usize>, status, evaluations, expansions| {
        let path = match id {
            Some(id) => {
                let mut p = path_to(nodes, id);
                p.complete = status == PlanStatus::GoalReached;
                p
            }
            None => Path::empty(),
        };
        let mut metrics = RunMetrics::new(BEAM_ID);
        metrics.seed = cfg.rng_seed;
        metrics.success = status == PlanStatus::GoalReached;
        metrics.status = Some(status);
        metrics.solution_cost = metrics.success.then_some(path.total_cost);
        metrics.evaluations = evaluations;
        metrics.expansions = expansions;
        metrics.max_expansions_per_state = u32::from(expansions > 0);
        metrics.wall_time = started.elapsed().as_secs_f64();
        PlanResult {
            path,
            status,
            metrics,
            trace: Vec::new(),
            open_remaining: 0,
        }
    };

    if env.goal_satisfied(&problem.start) {
        return Ok(done(&nodes, Some(0), PlanStatus::GoalReached, 0, 0));
    }

    for _layer in 0..cfg.max_layers {
        let layer_cost = (frontier.len() * cfg.samples) as u64;
        if cfg.evaluation_budget.is_some_and(|b| evaluations + layer_cost > b) {
            break;
        }
        let mut proposals: Vec<(usize, ActionVec, f64)> = Vec::with_capacity(layer_cost as usize);
        for &id in &frontier {
            let s = &nodes[id].state;
            let actions = models.actor.sample_actions(s, cfg.samples, &mut rng)?;
            if actions.len() != cfg.samples {
                return Err(Error::ModelFault(format!(
                    "actor returned {} actions, expected {}",
                    actions.len(),
                    cfg.samples
                )));
            }
            for a in &actions {
                check_dim("actor output", models.action_dim, a.dim())?;
            }
            let q = models.critic.cost_to_go(s, &actions)?;
            if q.len() != actions.len() || q.iter().any(|v| !v.is_finite()) {
                return Err(Error::ModelFault(format!(
                    "critic returned {} values for {} actions or a non-finite value",
                    q.len(),
                    actions.len()
                )));
            }
            expansions += 1;
            let g = nodes[id].g;
            proposals.extend(actions.into_iter().zip(q).map(|(a, q)| (id, a, g + q)));
        }
        let evaluated = parallel_map(cfg.num_workers, proposals, |(parent, action, score)| {
            let t = env.evaluate(&nodes[parent].state, &action)?;
            Ok(Candidate {
                parent,
                action,
                transition: t,
                score,
            })
        });
        evaluations += layer_cost;
        let mut candidates: Vec<Candidate> = Vec::new();
        for c in evaluated {
            let c: Candidate = c?;
            if c.transition.valid {
                candidates.push(c);
            }
        }
        candidates.sort_by(|a, b| a.score.total_cmp(&b.score));

        let mut next = Vec::with_capacity(cfg.width);
        let mut next_scores = Vec::with_capacity(cfg.width);
        let mut goal = None;
        for c in candidates {
            if next.len() == cfg.width {
                break;
            }
            if let Some(cell) = cell_of(&c.transition.next)? {
                if !visited.insert(cell) {
                    continue;
                }
            }
            let id = nodes.len();
            nodes.push(BeamNode {
                g: nodes[c.parent].g + c.transition.cost,
                state: c.transition.next,
                parent: Some(c.parent),
                action: Some(c.action),
                cost: c.transition.cost,
            });
            if goal.is_none() && env.goal_satisfied(&nodes[id].state) {
                goal = Some(id);
            }
            next.push(id);
            next_scores.push(c.score);
        }
        if let Some(id) = goal {
            return Ok(done(&nodes, Some(id), PlanStatus::GoalReached, evaluations, expansions));
        }
        if next.is_empty() {
            return Ok(done(&nodes, None, PlanStatus::OpenExhaustedNoSolution, evaluations, expansions));
        }
        frontier = next;
        frontier_scores = next_scores;
    }
    let best = frontier
        .iter()
        .zip(&frontier_scores)
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(id, _)| *id);
    Ok(done(&nodes, best, PlanStatus::BudgetExhaustedPartial, evaluations, expansions))
}
