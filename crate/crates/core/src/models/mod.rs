//! Actor (edge proposal) and critic (cost-to-go) backends.
//!
//! Critics here always speak in cost units: larger is worse, never negative. Networks
//! trained on rewards are adapted by [`MlpCritic`], which negates and clamps the raw
//! Q-value.

mod heuristic;
mod mlp;
mod surrogate;
mod weights_file;

use std::sync::Arc;

use rand::RngCore;

pub use heuristic::GridDistanceCritic;
pub use mlp::{Activation, ActorHead, Layer, Mlp, MlpActor, MlpCritic, MlpWeights, LOG_STD_MAX, LOG_STD_MIN};
pub use surrogate::{king_moves, NavSurrogate, PushTCriticWeights, PushTSurrogate};
pub use weights_file::{load_weights, parse_weights, save_weights, write_weights};

use crate::envs::Environment;
use crate::error::{check_dim, Result};
use crate::vector::{ActionVec, StateVec};

/// How an actor turns its distribution into K candidate actions.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum SamplingMode {
    #[default]
    Stochastic,
    /// A fixed probe set, identical on every call. Lets tests enumerate the graph.
    Deterministic,
}

/// Proposes candidate actions at a state. One call samples a whole batch.
pub trait ActionSampler: Send + Sync {
    fn sample_actions(
        &self,
        s: &StateVec,
        k: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<ActionVec>>;
}

/// Scores (state, action) pairs by estimated remaining cost. One call scores a batch.
pub trait CostToGo: Send + Sync {
    fn cost_to_go(&self, s: &StateVec, actions: &[ActionVec]) -> Result<Vec<f64>>;

    /// Estimate for the state itself, scored as "do nothing".
    fn state_cost_to_go(&self, s: &StateVec, action_dim: usize) -> Result<f64> {
        Ok(self.cost_to_go(s, &[ActionVec::zeros(action_dim)])?[0])
    }
}

/// Actor and critic bundled with the dimensions they were built for.
#[derive(Clone)]
pub struct ModelPair {
    pub actor: Arc<dyn ActionSampler>,
    pub critic: Arc<dyn CostToGo>,
    pub state_dim: usize,
    pub action_dim: usize,
}

impl ModelPair {
    pub fn new(
        actor: Arc<dyn ActionSampler>,
        critic: Arc<dyn CostToGo>,
        state_dim: usize,
        action_dim: usize,
    ) -> Self {
        ModelPair {
            actor,
            critic,
            state_dim,
            action_dim,
        }
    }

    pub fn check_env(&self, env: &dyn Environment) -> Result<()> {
        check_dim("model state dim", env.state_dim(), self.state_dim)?;
        check_dim("model action dim", env.action_dim(), self.action_dim)
    }
}
