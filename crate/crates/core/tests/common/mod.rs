#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use pachs_core::envs::{Environment, Nav2DWorld, Problem, Transition};
use pachs_core::models::{king_moves, ActionSampler, CostToGo, ModelPair, NavSurrogate};
use pachs_core::search::search_lock_held;
use pachs_core::{ActionVec, Result, StateVec};
use petgraph::algo::dijkstra;
use petgraph::graph::{DiGraph, NodeIndex};
use rand::RngCore;

/// 1-D corridor `[lo, hi]`, goal `x >= goal`, cost `|a|`.
pub struct LineWorld {
    pub lo: f64,
    pub hi: f64,
    pub goal: f64,
    pub step: f64,
}

impl Environment for LineWorld {
    fn state_dim(&self) -> usize {
        1
    }
    fn action_dim(&self) -> usize {
        1
    }
    fn max_action_norm(&self) -> f64 {
        self.step
    }
    fn angular_dims(&self) -> Vec<bool> {
        vec![false]
    }
    fn evaluate(&self, s: &StateVec, a: &ActionVec) -> Result<Transition> {
        let x = s[0] + a[0];
        Ok(Transition {
            next: StateVec::new(vec![x]),
            cost: a[0].abs(),
            valid: x >= self.lo && x <= self.hi,
        })
    }
    fn goal_satisfied(&self, s: &StateVec) -> bool {
        s[0] >= self.goal
    }
    fn valid_state(&self, s: &StateVec) -> bool {
        s[0] >= self.lo && s[0] <= self.hi
    }
}

/// Actor returning `±step`, critic equal to the true remaining cost.
pub struct ExactLineModels {
    pub goal: f64,
    pub step: f64,
}

impl ActionSampler for ExactLineModels {
    fn sample_actions(&self, _s: &StateVec, k: usize, _rng: &mut dyn RngCore) -> Result<Vec<ActionVec>> {
        Ok((0..k)
            .map(|j| ActionVec::new(vec![if j % 2 == 0 { self.step } else { -self.step }]))
            .collect())
    }
}

impl CostToGo for ExactLineModels {
    fn cost_to_go(&self, s: &StateVec, actions: &[ActionVec]) -> Result<Vec<f64>> {
        Ok(actions
            .iter()
            .map(|a| a[0].abs() + (self.goal - (s[0] + a[0])).max(0.0))
            .collect())
    }
}

/// Explicit directed graph. States are node numbers; action `[j]` follows the j-th
/// outgoing arc. Invalid if `j` is out of range.
pub struct TableWorld {
    pub arcs: Vec<Vec<(usize, f64)>>,
    pub goals: Vec<usize>,
}

impl Environment for TableWorld {
    fn state_dim(&self) -> usize {
        1
    }
    fn action_dim(&self) -> usize {
        1
    }
    fn max_action_norm(&self) -> f64 {
        100.0
    }
    fn angular_dims(&self) -> Vec<bool> {
        vec![false]
    }
    fn evaluate(&self, s: &StateVec, a: &ActionVec) -> Result<Transition> {
        let node = s[0] as usize;
        match self.arcs[node].get(a[0] as usize) {
            Some(&(to, cost)) => Ok(Transition {
                next: StateVec::new(vec![to as f64]),
                cost,
                valid: true,
            }),
            None => Ok(Transition {
                next: s.clone(),
                cost: 0.0,
                valid: false,
            }),
        }
    }
    fn goal_satisfied(&self, s: &StateVec) -> bool {
        self.goals.contains(&(s[0] as usize))
    }
    fn valid_state(&self, s: &StateVec) -> bool {
        (s[0] as usize) < self.arcs.len()
    }
}

/// Proposes arcs `0..k` in order; critic is zero.
pub struct TableModels;

impl ActionSampler for TableModels {
    fn sample_actions(&self, _s: &StateVec, k: usize, _rng: &mut dyn RngCore) -> Result<Vec<ActionVec>> {
        Ok((0..k).map(|j| ActionVec::new(vec![j as f64])).collect())
    }
}

impl CostToGo for TableModels {
    fn cost_to_go(&self, _s: &StateVec, actions: &[ActionVec]) -> Result<Vec<f64>> {
        Ok(vec![0.0; actions.len()])
    }
}

pub fn pair<M: ActionSampler + CostToGo + 'static>(m: M, state_dim: usize, action_dim: usize) -> ModelPair {
    let m = Arc::new(m);
    ModelPair::new(m.clone(), m, state_dim, action_dim)
}

/// Wraps an environment and counts calls made while the search lock is held.
pub struct LockCheckingEnv {
    pub inner: Arc<dyn Environment>,
    pub violations: Arc<AtomicU64>,
    pub calls: Arc<AtomicU64>,
}

impl LockCheckingEnv {
    fn check(&self) {
        self.calls.fetch_add(1, Ordering::Relaxed);
        if search_lock_held() {
            self.violations.fetch_add(1, Ordering::Relaxed);
        }
    }
}

impl Environment for LockCheckingEnv {
    fn state_dim(&self) -> usize {
        self.inner.state_dim()
    }
    fn action_dim(&self) -> usize {
        self.inner.action_dim()
    }
    fn max_action_norm(&self) -> f64 {
        self.inner.max_action_norm()
    }
    fn angular_dims(&self) -> Vec<bool> {
        self.inner.angular_dims()
    }
    fn evaluate(&self, s: &StateVec, a: &ActionVec) -> Result<Transition> {
        self.check();
        self.inner.evaluate(s, a)
    }
    fn goal_satisfied(&self, s: &StateVec) -> bool {
        self.check();
        self.inner.goal_satisfied(s)
    }
    fn valid_state(&self, s: &StateVec) -> bool {
        self.inner.valid_state(s)
    }
}

/// Models wrapper with the same lock check.
pub struct LockCheckingModels {
    pub inner: ModelPair,
    pub violations: Arc<AtomicU64>,
}

impl ActionSampler for LockCheckingModels {
    fn sample_actions(&self, s: &StateVec, k: usize, rng: &mut dyn RngCore) -> Result<Vec<ActionVec>> {
        if search_lock_held() {
            self.violations.fetch_add(1, Ordering::Relaxed);
        }
        self.inner.actor.sample_actions(s, k, rng)
    }
}

impl CostToGo for LockCheckingModels {
    fn cost_to_go(&self, s: &StateVec, actions: &[ActionVec]) -> Result<Vec<f64>> {
        if search_lock_held() {
            self.violations.fetch_add(1, Ordering::Relaxed);
        }
        self.inner.critic.cost_to_go(s, actions)
    }
}

/// Nav surrogate pair with the fixed eight-move probe set.
pub fn nav_king_models(world: &Nav2DWorld, step: f64) -> ModelPair {
    let m = NavSurrogate::new(world.goal_center, 0.0, world.max_action_norm)
        .unwrap()
        .deterministic(king_moves(step))
        .unwrap();
    pair(m, 2, 2)
}

/// Optimal cost over the grid `start + step * (i, j)` with king moves, edges checked by
/// the environment. Independent of the planner's lattice and OPEN machinery.
pub fn nav_grid_dijkstra(problem: &Problem, step: f64) -> Option<f64> {
    let env = problem.env.as_ref();
    let start = [problem.start[0], problem.start[1]];
    let at = |i: i64, j: i64| StateVec::new(vec![start[0] + i as f64 * step, start[1] + j as f64 * step]);
    let moves: Vec<(i64, i64)> = vec![(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (-1, -1), (1, -1)];
    let mut graph = DiGraph::<(i64, i64), f64>::new();
    let mut index: HashMap<(i64, i64), NodeIndex> = HashMap::new();
    let root = graph.add_node((0, 0));
    index.insert((0, 0), root);
    let mut queue = VecDeque::from([(0i64, 0i64)]);
    while let Some((i, j)) = queue.pop_front() {
        let s = at(i, j);
        if env.goal_satisfied(&s) {
            continue;
        }
        for &(di, dj) in &moves {
            let a = ActionVec::new(vec![di as f64 * step, dj as f64 * step]);
            let t = env.evaluate(&s, &a).unwrap();
            if !t.valid {
                continue;
            }
            let key = (i + di, j + dj);
            let to = *index.entry(key).or_insert_with(|| {
                queue.push_back(key);
                graph.add_node(key)
            });
            graph.add_edge(index[&(i, j)], to, a.norm());
        }
    }
    let dist = dijkstra(&graph, root, None, |e| *e.weight());
    dist.iter()
        .filter(|(n, _)| {
            let (i, j) = graph[**n];
            env.goal_satisfied(&at(i, j))
        })
        .map(|(_, d)| *d)
        .min_by(f64::total_cmp)
}
