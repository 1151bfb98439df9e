use std::sync::Arc;

use super::CostToGo;
use crate::envs::GridHeuristic;
use crate::error::{check_dim, Result};
use crate::vector::{ActionVec, StateVec};

/// Stand-in for unreachable cells so that priorities stay finite.
pub const UNREACHABLE_COST: f64 = 1e6;

/// Nav2D critic built from the grid distance field: step length plus the grid
/// distance of the cell reached.
#[derive(Clone, Debug)]
pub struct GridDistanceCritic {
    grid: Arc<GridHeuristic>,
}

impl GridDistanceCritic {
    pub fn new(grid: Arc<GridHeuristic>) -> Self {
        GridDistanceCritic { grid }
    }

    pub fn grid(&self) -> &GridHeuristic {
        &self.grid
    }
}

impl CostToGo for GridDistanceCritic {
    fn cost_to_go(&self, s: &StateVec, actions: &[ActionVec]) -> Result<Vec<f64>> {
        check_dim("nav state", 2, s.dim())?;
        actions
            .iter()
            .map(|a| {
                check_dim("nav action", 2, a.dim())?;
                let h = self.grid.query([s[0] + a[0], s[1] + a[1]]);
                Ok(a.norm() + if h.is_finite() { h } else { UNREACHABLE_COST })
            })
            .collect()
    }
}
