mod common;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use common::*;
use pachs_core::envs::{generate, Environment, Nav2DWorld, Problem, Task};
use pachs_core::geometry::Rect;
use pachs_core::metrics::PlanStatus;
use pachs_core::models::{
    ActionSampler, CostToGo, GridDistanceCritic, ModelPair, NavSurrogate,
};
use pachs_core::search::{
    edge_priority, plan, plan_anytime, successor_priority, PlannerConfig,
};
use pachs_core::envs::GridHeuristic;
use pachs_core::{ActionVec, Error, StateVec};
use rand::RngCore;

fn line_problem() -> (Problem, ModelPair) {
    let env = Arc::new(LineWorld {
        lo: -2.0,
        hi: 3.0,
        goal: 1.0,
        step: 0.125,
    });
    let problem = Problem::new(env, StateVec::new(vec![0.0])).unwrap();
    (problem, pair(ExactLineModels { goal: 1.0, step: 0.125 }, 1, 1))
}

fn line_cfg() -> PlannerConfig {
    PlannerConfig {
        weight: 1.0,
        batch_size: 2,
        resolution: vec![0.125],
        ..Default::default()
    }
}

#[test]
fn start_at_goal_returns_empty_path() {
    let env = Arc::new(LineWorld { lo: -2.0, hi: 3.0, goal: 1.0, step: 0.125 });
    let problem = Problem::new(env, StateVec::new(vec![1.5])).unwrap();
    let models = pair(ExactLineModels { goal: 1.0, step: 0.125 }, 1, 1);
    let r = plan(&problem, &models, &line_cfg()).unwrap();
    assert_eq!(r.status, PlanStatus::GoalReached);
    assert!(r.path.is_empty() && r.path.complete);
    assert_eq!(r.metrics.expansions, 0);
    assert_eq!(r.metrics.solution_cost, Some(0.0));
}

#[test]
fn line_world_matches_lattice_optimum() {
    let (problem, models) = line_problem();
    let r = plan(&problem, &models, &line_cfg()).unwrap();
    assert_eq!(r.status, PlanStatus::GoalReached);
    assert_eq!(r.path.total_cost, 1.0);
    assert_eq!(r.path.len(), 8);
    assert_eq!(r.metrics.max_expansions_per_state, 1);
}

#[test]
fn exact_critic_successor_priority_equals_best_outgoing_edge() {
    let (problem, models) = line_problem();
    let env = problem.env.as_ref();
    let w = 1.5;
    let s = StateVec::new(vec![0.25]);
    let a = ActionVec::new(vec![0.125]);
    let q = models.critic.cost_to_go(&s, std::slice::from_ref(&a)).unwrap()[0];
    let t = env.evaluate(&s, &a).unwrap();
    let g_parent = 0.25;
    let g_new = g_parent + t.cost;
    let f_succ = successor_priority(g_new, q, t.cost, w);
    let mut rng = rand::rng();
    let outgoing = models.actor.sample_actions(&t.next, 2, &mut rng).unwrap();
    let best = models
        .critic
        .cost_to_go(&t.next, &outgoing)
        .unwrap()
        .into_iter()
        .map(|q2| edge_priority(g_new, q2, w))
        .fold(f64::INFINITY, f64::min);
    assert!((f_succ - best).abs() < 1e-12, "{f_succ} vs {best}");
}

fn relax_world() -> (Problem, ModelPair) {
    // S=0 -> A=1 (0.3), S -> B=2 (0.5), A -> T=3 (0.9), B -> T (0.4); T is the goal.
    let env = Arc::new(TableWorld {
        arcs: vec![vec![(1, 0.3), (2, 0.5)], vec![(3, 0.9)], vec![(3, 0.4)], vec![]],
        goals: vec![3],
    });
    let problem = Problem::new(env, StateVec::new(vec![0.0])).unwrap();
    (problem, pair(TableModels, 1, 1))
}

#[test]
fn later_cheaper_edge_rewires_parent() {
    let (problem, models) = relax_world();
    let cfg = PlannerConfig {
        weight: 0.0,
        batch_size: 2,
        resolution: vec![1.0],
        record_trace: true,
        ..Default::default()
    };
    let r = plan(&problem, &models, &cfg).unwrap();
    assert_eq!(r.status, PlanStatus::GoalReached);
    let visited: Vec<f64> = r.path.states.iter().map(|s| s[0]).collect();
    assert_eq!(visited, vec![0.0, 2.0, 3.0]);
    assert!((r.path.total_cost - 0.9).abs() < 1e-12);
    // The A -> T edge was evaluated before B was expanded.
    let a_edge = r.trace.iter().position(|p| p.source == 1 && !p.dummy).unwrap();
    let b_dummy = r.trace.iter().position(|p| p.source == 2 && p.dummy).unwrap();
    assert!(a_edge < b_dummy);
}

#[test]
fn cheaper_goal_route_wins_at_pop() {
    // Two goal states: 1 reachable for 2.0 directly, 3 reachable for 1.0 via 2.
    let env = Arc::new(TableWorld {
        arcs: vec![vec![(1, 2.0), (2, 0.5)], vec![], vec![(3, 0.5)], vec![]],
        goals: vec![1, 3],
    });
    let problem = Problem::new(env, StateVec::new(vec![0.0])).unwrap();
    let cfg = PlannerConfig {
        weight: 0.0,
        batch_size: 2,
        resolution: vec![1.0],
        ..Default::default()
    };
    let r = plan(&problem, &pair(TableModels, 1, 1), &cfg).unwrap();
    assert_eq!(r.path.last_state().unwrap()[0], 3.0);
    assert!((r.path.total_cost - 1.0).abs() < 1e-12);
}

#[test]
fn expansion_adds_k_edges_and_no_evaluations() {
    let (problem, models) = line_problem();
    let cfg = PlannerConfig {
        batch_size: 8,
        evaluation_budget: Some(0),
        ..line_cfg()
    };
    let r = plan(&problem, &models, &cfg).unwrap();
    assert_eq!(r.status, PlanStatus::BudgetExhaustedPartial);
    assert_eq!(r.metrics.expansions, 1);
    assert_eq!(r.metrics.evaluations, 0);
    assert_eq!(r.open_remaining, 8);
    assert!(r.path.is_empty());
}

#[test]
fn batch_of_one_inserts_single_edge() {
    let (problem, models) = line_problem();
    let cfg = PlannerConfig {
        batch_size: 1,
        evaluation_budget: Some(0),
        ..line_cfg()
    };
    let r = plan(&problem, &models, &cfg).unwrap();
    assert_eq!(r.open_remaining, 1);
    assert_eq!(r.metrics.expansions, 1);
}

fn walled_world() -> Problem {
    let world = Nav2DWorld {
        bounds: Rect::new(0.0, 0.0, 1.0, 1.0),
        obstacles: vec![Rect::new(0.5, 0.0, 0.55, 1.0)],
        goal_center: [0.8, 0.5],
        goal_radius: 0.1,
        max_action_norm: 0.1,
    };
    Problem::new(Arc::new(world), StateVec::new(vec![0.125, 0.125])).unwrap()
}

#[test]
fn walled_off_goal_exhausts_open() {
    let problem = walled_world();
    let world = Nav2DWorld {
        bounds: Rect::new(0.0, 0.0, 1.0, 1.0),
        obstacles: vec![],
        goal_center: [0.8, 0.5],
        goal_radius: 0.1,
        max_action_norm: 0.1,
    };
    let models = nav_king_models(&world, 0.05);
    for workers in [1, 2, 8] {
        let cfg = PlannerConfig {
            weight: 1.0,
            num_workers: workers,
            batch_size: 8,
            resolution: vec![0.05, 0.05],
            ..Default::default()
        };
        let r = plan(&problem, &models, &cfg).unwrap();
        assert_eq!(r.status, PlanStatus::OpenExhaustedNoSolution);
        assert!(r.path.states.is_empty());
        assert_eq!(r.metrics.max_expansions_per_state, 1);
        // 10 x 20 reachable grid points left of the wall.
        assert_eq!(r.metrics.expansions, 200);
    }
}

#[test]
fn dijkstra_equivalence_on_nav_instances() {
    for seed in 0..4 {
        let inst = generate(Task::NavShelf, seed).unwrap();
        let problem = inst.problem().unwrap();
        let world = inst.nav().unwrap();
        let cfg = PlannerConfig {
            weight: 0.0,
            batch_size: 8,
            resolution: vec![0.05, 0.05],
            ..Default::default()
        };
        let r = plan(&problem, &nav_king_models(world, 0.05), &cfg).unwrap();
        let oracle = nav_grid_dijkstra(&problem, 0.05).expect("oracle finds a path");
        assert_eq!(r.status, PlanStatus::GoalReached);
        assert!((r.path.total_cost - oracle).abs() < 1e-9, "seed {seed}: {} vs {oracle}", r.path.total_cost);
    }
}

#[test]
fn returned_path_replays_exactly() {
    let inst = generate(Task::NavShelf, 11).unwrap();
    let problem = inst.problem().unwrap();
    let world = inst.nav().unwrap().clone();
    let models = pair(NavSurrogate::new(world.goal_center, 0.03, 0.1).unwrap(), 2, 2);
    let cfg = PlannerConfig {
        weight: 2.0,
        num_workers: 4,
        batch_size: 8,
        resolution: vec![0.05, 0.05],
        rng_seed: 5,
        ..Default::default()
    };
    let r = plan(&problem, &models, &cfg).unwrap();
    assert_eq!(r.status, PlanStatus::GoalReached);
    let mut s = problem.start.clone();
    let mut total = 0.0;
    for (i, a) in r.path.actions.iter().enumerate() {
        let t = world.evaluate(&s, a).unwrap();
        assert!(t.valid);
        assert_eq!(t.next, r.path.states[i + 1]);
        total += t.cost;
        s = t.next;
    }
    assert!(world.goal_satisfied(&s));
    assert!((total - r.metrics.solution_cost.unwrap()).abs() < 1e-9);
}

#[test]
fn single_worker_runs_are_bit_identical() {
    let inst = generate(Task::NavShelf, 3).unwrap();
    let problem = inst.problem().unwrap();
    let world = inst.nav().unwrap();
    let models = pair(NavSurrogate::new(world.goal_center, 0.05, 0.1).unwrap(), 2, 2);
    let cfg = PlannerConfig {
        weight: 2.0,
        batch_size: 8,
        resolution: vec![0.05, 0.05],
        rng_seed: 42,
        record_trace: true,
        ..Default::default()
    };
    let a = plan(&problem, &models, &cfg).unwrap();
    let b = plan(&problem, &models, &cfg).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.path, b.path);
    assert_eq!(a.metrics.without_wall_time(), b.metrics.without_wall_time());
}

#[test]
fn no_model_or_env_call_under_lock() {
    let inst = generate(Task::NavShelf, 8).unwrap();
    let world = inst.nav().unwrap();
    let violations = Arc::new(AtomicU64::new(0));
    let calls = Arc::new(AtomicU64::new(0));
    let env = Arc::new(LockCheckingEnv {
        inner: inst.environment(),
        violations: violations.clone(),
        calls: calls.clone(),
    });
    let problem = Problem::new(env, inst.start_state()).unwrap();
    let inner = pair(NavSurrogate::new(world.goal_center, 0.05, 0.1).unwrap(), 2, 2);
    let models = pair(
        LockCheckingModels {
            inner,
            violations: violations.clone(),
        },
        2,
        2,
    );
    for workers in [1, 4] {
        let cfg = PlannerConfig {
            weight: 2.0,
            num_workers: workers,
            batch_size: 8,
            resolution: vec![0.05, 0.05],
            ..Default::default()
        };
        let r = plan(&problem, &models, &cfg).unwrap();
        assert_eq!(r.metrics.lock_violations, 0);
        assert!(r.metrics.max_expansions_per_state <= 1);
    }
    assert!(calls.load(Ordering::Relaxed) > 0);
    assert_eq!(violations.load(Ordering::Relaxed), 0);
}

#[test]
fn dimension_mismatch_fails_before_search() {
    let (problem, _) = line_problem();
    let models = pair(NavSurrogate::new([0.0, 0.0], 0.0, 0.1).unwrap(), 2, 2);
    assert!(matches!(
        plan(&problem, &models, &line_cfg()),
        Err(Error::DimensionMismatch { .. })
    ));
}

struct NanCritic;

impl ActionSampler for NanCritic {
    fn sample_actions(&self, _s: &StateVec, k: usize, _rng: &mut dyn RngCore) -> pachs_core::Result<Vec<ActionVec>> {
        Ok(vec![ActionVec::new(vec![0.125]); k])
    }
}

impl CostToGo for NanCritic {
    fn cost_to_go(&self, s: &StateVec, actions: &[ActionVec]) -> pachs_core::Result<Vec<f64>> {
        Ok(actions.iter().map(|_| if s[0] > 0.3 { f64::NAN } else { 1.0 }).collect())
    }
}

#[test]
fn model_fault_aborts_run() {
    let (problem, _) = line_problem();
    for workers in [1, 3] {
        let cfg = PlannerConfig { num_workers: workers, ..line_cfg() };
        let r = plan(&problem, &pair(NanCritic, 1, 1), &cfg);
        assert!(matches!(r, Err(Error::ModelFault(_))), "{r:?}");
    }
}

#[test]
fn anytime_requires_time_budget() {
    let (problem, models) = line_problem();
    assert!(plan_anytime(&problem, &models, &line_cfg()).is_err());
}

#[test]
fn anytime_zero_budget_returns_start_only() {
    let (problem, models) = line_problem();
    let cfg = PlannerConfig { time_budget: Some(0.0), ..line_cfg() };
    let r = plan_anytime(&problem, &models, &cfg).unwrap();
    assert_eq!(r.status, PlanStatus::BudgetExhaustedPartial);
    assert!(r.path.is_empty());
    assert_eq!(r.path.states, vec![problem.start.clone()]);
    assert!(!r.path.complete);
}

#[test]
fn anytime_with_ample_budget_matches_plan() {
    let inst = generate(Task::NavShelf, 4).unwrap();
    let problem = inst.problem().unwrap();
    let world = inst.nav().unwrap();
    let models = pair(NavSurrogate::new(world.goal_center, 0.05, 0.1).unwrap(), 2, 2);
    let cfg = PlannerConfig {
        weight: 2.0,
        batch_size: 8,
        resolution: vec![0.05, 0.05],
        rng_seed: 9,
        ..Default::default()
    };
    let full = plan(&problem, &models, &cfg).unwrap();
    let any = plan_anytime(
        &problem,
        &models,
        &PlannerConfig { time_budget: Some(600.0), ..cfg.clone() },
    )
    .unwrap();
    assert_eq!(full.path, any.path);
    assert_eq!(full.metrics.expansions, any.metrics.expansions);
    assert_eq!(full.metrics.evaluations, any.metrics.evaluations);
}

#[test]
fn partial_paths_make_progress() {
    let mut improved = 0;
    let n = 50;
    for seed in 0..n {
        let inst = generate(Task::NavShelf, 1000 + seed).unwrap();
        let problem = inst.problem().unwrap();
        let world = inst.nav().unwrap();
        let grid = Arc::new(GridHeuristic::new(world, 0.05).unwrap());
        let models = ModelPair::new(
            Arc::new(NavSurrogate::new(world.goal_center, 0.05, 0.1).unwrap()),
            Arc::new(GridDistanceCritic::new(grid.clone())),
            2,
            2,
        );
        let cfg = PlannerConfig {
            weight: 2.0,
            batch_size: 8,
            resolution: vec![0.05, 0.05],
            expansion_budget: Some(50),
            rng_seed: seed,
            ..Default::default()
        };
        let r = plan(&problem, &models, &cfg).unwrap();
        let end = r.path.last_state().unwrap();
        let before = world.distance_to_goal([problem.start[0], problem.start[1]]);
        let after = world.distance_to_goal([end[0], end[1]]);
        if after < before {
            improved += 1;
        }
    }
    assert!(improved * 10 >= n * 9, "{improved}/{n}");
}
