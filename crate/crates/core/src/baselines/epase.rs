use std::sync::Arc;

use rand::RngCore;

use crate::envs::{GridHeuristic, Problem};
use crate::error::{Error, Result};
use crate::models::{ActionSampler, CostToGo, ModelPair};
use crate::search::{run_search, EdgeScoring, PlanResult, PlannerConfig, StateHeuristic};
use crate::vector::{ActionVec, StateVec};

pub const EPASE_ID: &str = "epase";

/// A fixed action set returned in order, cycled if more actions are requested. Also
/// acts as an all-zero critic, which the heuristic-scored search never queries.
#[derive(Clone, Debug)]
pub struct FixedActions {
    actions: Vec<ActionVec>,
}

impl FixedActions {
    pub fn new(actions: Vec<ActionVec>) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::Config("fixed action set is empty".into()));
        }
        Ok(FixedActions { actions })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

impl ActionSampler for FixedActions {
    fn sample_actions(&self, _s: &StateVec, k: usize, _rng: &mut dyn RngCore) -> Result<Vec<ActionVec>> {
        Ok(self.actions.iter().cycle().take(k).cloned().collect())
    }
}

impl CostToGo for FixedActions {
    fn cost_to_go(&self, _s: &StateVec, actions: &[ActionVec]) -> Result<Vec<f64>> {
        Ok(vec![0.0; actions.len()])
    }
}

/// Grid distance of a planar position state.
pub fn grid_heuristic(grid: Arc<GridHeuristic>) -> StateHeuristic {
    Arc::new(move |s: &StateVec| grid.query([s[0], s[1]]))
}

/// Parallel edge-based search over a fixed action set with every outgoing edge of a
/// state ranked by `g + w * h(s)`. Uses `cfg` except that `batch_size` becomes the
/// size of the action set.
pub fn epase_style(
    problem: &Problem,
    heuristic: StateHeuristic,
    actions: FixedActions,
    cfg: &PlannerConfig,
) -> Result<PlanResult> {
    let env = problem.env.as_ref();
    let cfg = PlannerConfig {
        batch_size: actions.len(),
        ..cfg.clone()
    };
    let models = {
        let m = Arc::new(actions);
        ModelPair::new(m.clone(), m, env.state_dim(), env.action_dim())
    };
    run_search(problem, &models, &cfg, &EdgeScoring::StateHeuristic(heuristic), EPASE_ID)
}
