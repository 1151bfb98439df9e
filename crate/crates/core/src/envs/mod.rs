//! Deterministic planar environments behind a common evaluation contract.

mod grid_bfs;
mod instance;
mod nav;
mod pusht;

use std::sync::Arc;

pub use grid_bfs::GridHeuristic;
pub use instance::{generate, generate_with, Instance, NavShelfParams, PushTParams, Task, World};
pub use nav::Nav2DWorld;
pub use pusht::{coverage, object_pose, pack_state, pusher_position, PushT2DWorld, TPose, TShape};

use crate::error::{check_dim, Error, Result};
use crate::graph::Lattice;
use crate::vector::{ActionVec, StateVec};

/// Outcome of applying one action. Callers ignore `next` and `cost` when `!valid`.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub next: StateVec,
    pub cost: f64,
    pub valid: bool,
}

/// Transition function, validity and goal test of a planning domain.
///
/// Implementations are immutable and reentrant: workers call `evaluate` concurrently.
pub trait Environment: Send + Sync {
    fn state_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn max_action_norm(&self) -> f64;
    /// Which state components are angles (wrapped before discretization).
    fn angular_dims(&self) -> Vec<bool>;
    fn evaluate(&self, s: &StateVec, a: &ActionVec) -> Result<Transition>;
    fn goal_satisfied(&self, s: &StateVec) -> bool;
    fn valid_state(&self, s: &StateVec) -> bool;

    fn lattice(&self, resolution: Vec<f64>) -> Result<Lattice> {
        check_dim("lattice resolution", self.state_dim(), resolution.len())?;
        Lattice::new(resolution, self.angular_dims())
    }
}

/// Start state plus the environment that defines transitions and the goal.
#[derive(Clone)]
pub struct Problem {
    pub env: Arc<dyn Environment>,
    pub start: StateVec,
}

impl Problem {
    pub fn new(env: Arc<dyn Environment>, start: StateVec) -> Result<Self> {
        check_dim("problem start", env.state_dim(), start.dim())?;
        if !env.valid_state(&start) {
            return Err(Error::ContractViolation(format!(
                "start state {:?} is not valid",
                start.as_slice()
            )));
        }
        Ok(Problem { env, start })
    }
}

pub(crate) fn check_action(env: &dyn Environment, s: &StateVec, a: &ActionVec) -> Result<()> {
    check_dim("evaluate state", env.state_dim(), s.dim())?;
    check_dim("evaluate action", env.action_dim(), a.dim())?;
    let n = a.norm();
    if !(n <= env.max_action_norm() * (1.0 + 1e-9)) {
        return Err(Error::ContractViolation(format!(
            "action norm {n} exceeds max {}",
            env.max_action_norm()
        )));
    }
    Ok(())
}
