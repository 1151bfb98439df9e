use std::time::Instant;

use crossbeam_channel::{unbounded, Receiver, Sender};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::lock::SearchLock;
use super::{edge_priority, successor_priority, EdgeScoring, PlanResult, PlannerConfig, PopRecord};
use crate::envs::{Problem, Transition};
use crate::error::{check_dim, Error, Result};
use crate::graph::{backtrack, Cell, Edge, EdgeAction, OpenList, ParentLink, Path, StateId, StateRegistry};
use crate::metrics::{PlanStatus, RunMetrics};
use crate::models::ModelPair;
use crate::vector::{ActionVec, StateVec};

/// Seed salt for the start-state critic probe, kept apart from worker streams.
const PROBE_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Copy, Default)]
struct NodeMeta {
    goal: bool,
    /// Dummy popped, expansion in flight. Treated as closed by edge commits.
    expanding: bool,
}

struct SearchState {
    registry: StateRegistry,
    meta: Vec<NodeMeta>,
    open: OpenList,
    in_flight: usize,
    dispatched_evaluations: u64,
    dispatched_expansions: u64,
    expansions: u64,
    evaluations: u64,
    fault: Option<Error>,
    trace: Option<Vec<PopRecord>>,
}

enum Job {
    Expand {
        id: StateId,
        state: StateVec,
    },
    Evaluate {
        source: StateId,
        state: StateVec,
        action: ActionVec,
        q: f64,
    },
}

/// Work finished outside the lock, waiting to be applied under it.
enum Commit {
    Expansion {
        id: StateId,
        edges: Vec<(ActionVec, f64)>,
        /// State heuristic of the expanded state (heuristic scoring only).
        h: f64,
    },
    Evaluation {
        source: StateId,
        action: ActionVec,
        q: f64,
        transition: Transition,
        successor: Option<Successor>,
    },
}

struct Successor {
    cell: Cell,
    goal: bool,
    h: f64,
}

struct Ctx<'a> {
    problem: &'a Problem,
    models: &'a ModelPair,
    cfg: &'a PlannerConfig,
    scoring: &'a EdgeScoring,
    lattice: crate::graph::Lattice,
}

enum Outcome {
    Goal(StateId),
    Exhausted,
    NoSolution,
}

/// Runs the parallel edge search. `planner` labels the returned metrics.
pub fn run_search(
    problem: &Problem,
    models: &ModelPair,
    cfg: &PlannerConfig,
    scoring: &EdgeScoring,
    planner: &str,
) -> Result<PlanResult> {
    let started = Instant::now();
    cfg.validate()?;
    let env = problem.env.as_ref();
    models.check_env(env)?;
    check_dim("problem start", env.state_dim(), problem.start.dim())?;
    let lattice = env.lattice(cfg.resolution.clone())?;
    let ctx = Ctx {
        problem,
        models,
        cfg,
        scoring,
        lattice: lattice.clone(),
    };

    let mut registry = StateRegistry::new(lattice);
    let start = registry.register(&problem.start)?;
    registry.set_start(start)?;
    let start_goal = env.goal_satisfied(&problem.start);
    let lock_probe = SearchLock::new(());
    let start_f = match scoring {
        EdgeScoring::Critic => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed ^ PROBE_SALT);
            lock_probe.check_unlocked();
            let probe = models.actor.sample_actions(&problem.start, cfg.batch_size, &mut rng)?;
            let qs = critic_batch(&ctx, &problem.start, &probe)?;
            cfg.weight * qs.iter().copied().fold(f64::INFINITY, f64::min)
        }
        EdgeScoring::StateHeuristic(h) => {
            let h0 = h(&problem.start);
            if h0.is_finite() {
                cfg.weight * h0
            } else {
                f64::INFINITY
            }
        }
    };
    let mut open = OpenList::new();
    if start_f.is_finite() {
        open.insert(Edge::dummy(start, start_f, 0.0))?;
    }

    let shared = SearchLock::new(SearchState {
        registry,
        meta: vec![NodeMeta {
            goal: start_goal,
            expanding: false,
        }],
        open,
        in_flight: 0,
        dispatched_evaluations: 0,
        dispatched_expansions: 0,
        expansions: 0,
        evaluations: 0,
        fault: None,
        trace: cfg.record_trace.then(Vec::new),
    });

    let outcome = std::thread::scope(|scope| {
        let (tx, rx) = unbounded::<Job>();
        for i in 0..cfg.num_workers {
            let rx = rx.clone();
            let shared = &shared;
            let ctx = &ctx;
            let rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed ^ i as u64);
            scope.spawn(move || worker(shared, ctx, rx, rng));
        }
        drop(rx);
        let outcome = coordinate(&shared, &ctx, &tx, started);
        drop(tx);
        outcome
    });
    let violations = shared.violations() + lock_probe.violations();
    let mut st = shared.into_inner();
    if let Some(e) = st.fault.take() {
        return Err(e);
    }
    let outcome = outcome?;
    let open_remaining = st.open.len();

    let (status, path) = match outcome {
        Outcome::Goal(id) => {
            let mut path = backtrack(&st.registry, id)?;
            path.complete = true;
            (PlanStatus::GoalReached, path)
        }
        Outcome::NoSolution => (PlanStatus::OpenExhaustedNoSolution, Path::empty()),
        Outcome::Exhausted => match st.open.pop_min() {
            None => (PlanStatus::OpenExhaustedNoSolution, Path::empty()),
            Some(edge) if st.meta[edge.source.0].goal => {
                let mut path = backtrack(&st.registry, edge.source)?;
                path.complete = true;
                (PlanStatus::GoalReached, path)
            }
            Some(edge) => (
                PlanStatus::BudgetExhaustedPartial,
                backtrack(&st.registry, edge.source)?,
            ),
        },
    };

    let mut metrics = RunMetrics::new(planner);
    metrics.seed = cfg.rng_seed;
    metrics.success = status == PlanStatus::GoalReached;
    metrics.status = Some(status);
    metrics.solution_cost = metrics.success.then_some(path.total_cost);
    metrics.expansions = st.expansions;
    metrics.evaluations = st.evaluations;
    metrics.max_expansions_per_state = st
        .registry
        .nodes()
        .iter()
        .map(|n| n.expansions)
        .max()
        .unwrap_or(0);
    metrics.lock_violations = violations;
    metrics.wall_time = started.elapsed().as_secs_f64();
    Ok(PlanResult {
        path,
        status,
        metrics,
        trace: st.trace.take().unwrap_or_default(),
        open_remaining,
    })
}

fn coordinate(
    shared: &SearchLock<SearchState>,
    ctx: &Ctx,
    tx: &Sender<Job>,
    started: Instant,
) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let deadline = cfg.time_budget_duration().map(|d| started + d);
    let mut st = shared.lock();
    let outcome = loop {
        if st.fault.is_some() {
            break Outcome::Exhausted;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            break Outcome::Exhausted;
        }
        let timeout = deadline.map(|d| d.saturating_duration_since(Instant::now()));
        if st.in_flight >= cfg.num_workers {
            st = shared.wait(st, timeout);
            continue;
        }
        let Some(edge) = st.open.pop_min() else {
            if st.in_flight == 0 {
                break Outcome::NoSolution;
            }
            st = shared.wait(st, timeout);
            continue;
        };
        if let Some(trace) = st.trace.as_mut() {
            trace.push(PopRecord {
                source: edge.source.0,
                dummy: edge.is_dummy(),
                f: edge.f,
                g: edge.g,
            });
        }
        let source = edge.source;
        if st.meta[source.0].goal {
            break Outcome::Goal(source);
        }
        match edge.action {
            EdgeAction::Dummy => {
                let node = st.registry.node(source);
                if node.closed || st.meta[source.0].expanding {
                    continue;
                }
                if cfg.expansion_budget.is_some_and(|b| st.dispatched_expansions >= b) {
                    st.open.insert(Edge::dummy(source, edge.f, edge.g))?;
                    break Outcome::Exhausted;
                }
                let state = node.state.clone();
                st.meta[source.0].expanding = true;
                st.dispatched_expansions += 1;
                st.in_flight += 1;
                send(tx, Job::Expand { id: source, state })?;
            }
            EdgeAction::Real(action) => {
                if cfg.evaluation_budget.is_some_and(|b| st.dispatched_evaluations >= b) {
                    st.open
                        .insert(Edge::real(source, action, edge.q, edge.f, edge.g))?;
                    break Outcome::Exhausted;
                }
                let state = st.registry.node(source).state.clone();
                st.dispatched_evaluations += 1;
                st.in_flight += 1;
                send(
                    tx,
                    Job::Evaluate {
                        source,
                        state,
                        action,
                        q: edge.q,
                    },
                )?;
            }
        }
    };
    // Let in-flight work land before the result is read.
    while st.in_flight > 0 {
        st = shared.wait(st, None);
    }
    drop(st);
    Ok(outcome)
}

fn send(tx: &Sender<Job>, job: Job) -> Result<()> {
    tx.send(job)
        .map_err(|_| Error::ContractViolation("worker pool disconnected".into()))
}

fn worker(shared: &SearchLock<SearchState>, ctx: &Ctx, rx: Receiver<Job>, mut rng: ChaCha8Rng) {
    for job in rx.iter() {
        let prepared = match job {
            Job::Expand { id, state } => prepare_expansion(shared, ctx, id, &state, &mut rng),
            Job::Evaluate {
                source,
                state,
                action,
                q,
            } => prepare_evaluation(shared, ctx, source, &state, action, q),
        };
        let mut st = shared.lock();
        if let Err(e) = prepared.and_then(|c| apply(&mut st, ctx, c)) {
            st.fault.get_or_insert(e);
        }
        st.in_flight -= 1;
        drop(st);
        shared.notify();
    }
}

fn critic_batch(ctx: &Ctx, s: &StateVec, actions: &[ActionVec]) -> Result<Vec<f64>> {
    let qs = ctx.models.critic.cost_to_go(s, actions)?;
    if qs.len() != actions.len() {
        return Err(Error::ModelFault(format!(
            "critic returned {} values for {} actions",
            qs.len(),
            actions.len()
        )));
    }
    if let Some(q) = qs.iter().find(|q| !(q.is_finite() && **q >= 0.0)) {
        return Err(Error::ModelFault(format!("critic returned invalid cost-to-go {q}")));
    }
    Ok(qs)
}

fn prepare_expansion(
    shared: &SearchLock<SearchState>,
    ctx: &Ctx,
    id: StateId,
    state: &StateVec,
    rng: &mut ChaCha8Rng,
) -> Result<Commit> {
    let k = ctx.cfg.batch_size;
    shared.check_unlocked();
    let actions = ctx.models.actor.sample_actions(state, k, rng)?;
    if actions.len() != k {
        return Err(Error::ModelFault(format!(
            "actor returned {} actions, expected {k}",
            actions.len()
        )));
    }
    for a in &actions {
        check_dim("actor output", ctx.models.action_dim, a.dim())?;
        if !a.is_finite() {
            return Err(Error::ModelFault("actor returned a non-finite action".into()));
        }
    }
    let (qs, h) = match ctx.scoring {
        EdgeScoring::Critic => {
            shared.check_unlocked();
            (critic_batch(ctx, state, &actions)?, 0.0)
        }
        EdgeScoring::StateHeuristic(heuristic) => {
            let h = heuristic(state);
            (vec![h; k], h)
        }
    };
    Ok(Commit::Expansion {
        id,
        edges: actions.into_iter().zip(qs).collect(),
        h,
    })
}

fn prepare_evaluation(
    shared: &SearchLock<SearchState>,
    ctx: &Ctx,
    source: StateId,
    state: &StateVec,
    action: ActionVec,
    q: f64,
) -> Result<Commit> {
    let env = ctx.problem.env.as_ref();
    shared.check_unlocked();
    let transition = env.evaluate(state, &action)?;
    let successor = if transition.valid {
        if !(transition.cost.is_finite() && transition.cost >= 0.0) {
            return Err(Error::EnvFault(format!(
                "transition cost {} is not a nonnegative number",
                transition.cost
            )));
        }
        shared.check_unlocked();
        let goal = env.goal_satisfied(&transition.next);
        let h = match ctx.scoring {
            EdgeScoring::Critic => 0.0,
            EdgeScoring::StateHeuristic(heuristic) => heuristic(&transition.next),
        };
        Some(Successor {
            cell: ctx.lattice.cell(&transition.next)?,
            goal,
            h,
        })
    } else {
        None
    };
    Ok(Commit::Evaluation {
        source,
        action,
        q,
        transition,
        successor,
    })
}

fn apply(st: &mut SearchState, ctx: &Ctx, commit: Commit) -> Result<()> {
    let w = ctx.cfg.weight;
    match commit {
        Commit::Expansion { id, edges, h } => {
            let g = st.registry.node(id).g;
            for (action, q) in edges {
                let f = match ctx.scoring {
                    EdgeScoring::Critic => edge_priority(g, q, w),
                    EdgeScoring::StateHeuristic(_) => edge_priority(g, h, w),
                };
                st.open.insert(Edge::real(id, action, q, f, g))?;
            }
            st.registry.close(id)?;
            st.meta[id.0].expanding = false;
            st.open.remove_dummy(id);
            st.expansions += 1;
        }
        Commit::Evaluation {
            source,
            action,
            q,
            transition,
            successor,
        } => {
            st.evaluations += 1;
            let Some(succ) = successor else {
                return Ok(());
            };
            let cost = transition.cost;
            let g_new = st.registry.node(source).g + cost;
            let (id, new) = st.registry.register_cell(succ.cell, &transition.next);
            if new {
                st.meta.push(NodeMeta::default());
            }
            let node = st.registry.node(id);
            if node.closed || st.meta[id.0].expanding || !(node.g > g_new) {
                return Ok(());
            }
            st.registry.relax_to(
                id,
                g_new,
                ParentLink {
                    id: source,
                    action,
                    cost,
                },
                transition.next,
            )?;
            st.meta[id.0].goal = succ.goal;
            let f = match ctx.scoring {
                EdgeScoring::Critic => successor_priority(g_new, q, cost, w),
                EdgeScoring::StateHeuristic(_) if succ.h.is_finite() => edge_priority(g_new, succ.h, w),
                EdgeScoring::StateHeuristic(_) => f64::INFINITY,
            };
            if f.is_finite() {
                st.open.upsert_dummy(id, f, g_new)?;
            } else {
                st.open.remove_dummy(id);
            }
        }
    }
    Ok(())
}
