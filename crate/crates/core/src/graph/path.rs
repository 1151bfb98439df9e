use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{StateId, StateRegistry};
use crate::vector::{ActionVec, StateVec};

/// A state/action sequence. `states` always holds one more element than `actions`,
/// except for the empty path of a failed query which holds none.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub states: Vec<StateVec>,
    pub actions: Vec<ActionVec>,
    pub costs: Vec<f64>,
    pub total_cost: f64,
    pub complete: bool,
}

impl Path {
    pub fn empty() -> Self {
        Path {
            states: Vec::new(),
            actions: Vec::new(),
            costs: Vec::new(),
            total_cost: 0.0,
            complete: false,
        }
    }

    pub fn from_start(start: StateVec) -> Self {
        Path {
            states: vec![start],
            ..Path::empty()
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn push(&mut self, action: ActionVec, cost: f64, next: StateVec) {
        self.actions.push(action);
        self.costs.push(cost);
        self.states.push(next);
        self.total_cost += cost;
    }

    pub fn last_state(&self) -> Option<&StateVec> {
        self.states.last()
    }

    /// First `n` actions of the path (or all of them).
    pub fn truncated(&self, n: usize) -> Path {
        let n = n.min(self.len());
        let costs = self.costs[..n].to_vec();
        Path {
            states: self.states[..(n + 1).min(self.states.len())].to_vec(),
            actions: self.actions[..n].to_vec(),
            total_cost: costs.iter().sum(),
            costs,
            complete: self.complete && n == self.len(),
        }
    }
}

/// Follows parent pointers from `id` back to the root and returns the forward path.
pub fn backtrack(registry: &StateRegistry, id: StateId) -> Result<Path> {
    let mut chain = Vec::new();
    let mut cur = id;
    loop {
        let node = registry.node(cur);
        match &node.parent {
            None => break,
            Some(link) => {
                if chain.len() > registry.len() {
                    return Err(Error::BrokenParentChain(id));
                }
                chain.push((link.action.clone(), link.cost, node.state.clone()));
                cur = link.id;
            }
        }
    }
    if registry.node(cur).g != 0.0 {
        // The root of every chain must be the start node.
        return Err(Error::BrokenParentChain(cur));
    }
    let mut path = Path::from_start(registry.node(cur).state.clone());
    for (action, cost, state) in chain.into_iter().rev() {
        path.push(action, cost, state);
    }
    Ok(path)
}
