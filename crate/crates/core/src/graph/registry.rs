use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::vector::{wrap_angle, ActionVec, StateVec};

/// Dense index of a registered lattice cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateId(pub usize);

/// g-value of a node that has not been reached yet.
pub const G_UNREACHED: f64 = f64::MAX;

/// Per-dimension discretization of a continuous state space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    resolution: Vec<f64>,
    angular: Vec<bool>,
}

pub type Cell = Vec<i64>;

impl Lattice {
    pub fn new(resolution: Vec<f64>, angular: Vec<bool>) -> Result<Self> {
        check_dim("lattice angular mask", resolution.len(), angular.len())?;
        if resolution.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Config(format!(
                "lattice resolution must be positive and finite, got {resolution:?}"
            )));
        }
        Ok(Lattice {
            resolution,
            angular,
        })
    }

    /// Lattice without angular dimensions.
    pub fn euclidean(resolution: Vec<f64>) -> Result<Self> {
        let n = resolution.len();
        Self::new(resolution, vec![false; n])
    }

    pub fn dim(&self) -> usize {
        self.resolution.len()
    }

    pub fn resolution(&self) -> &[f64] {
        &self.resolution
    }

    pub fn angular(&self) -> &[bool] {
        &self.angular
    }

    /// Maps a continuous state to its cell. Angular components are wrapped to (-pi, pi]
    /// before flooring.
    pub fn cell(&self, s: &StateVec) -> Result<Cell> {
        check_dim("lattice cell", self.dim(), s.dim())?;
        if !s.is_finite() {
            return Err(Error::ContractViolation(format!(
                "non-finite state {:?}",
                s.as_slice()
            )));
        }
        Ok(s.0
            .iter()
            .zip(&self.resolution)
            .zip(&self.angular)
            .map(|((&v, &r), &ang)| {
                let v = if ang { wrap_angle(v) } else { v };
                (v / r).floor() as i64
            })
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParentLink {
    pub id: StateId,
    pub action: ActionVec,
    pub cost: f64,
}

#[derive(Clone, Debug)]
pub struct SearchNode {
    pub id: StateId,
    /// Representative continuous state: the first one registered for this cell.
    pub state: StateVec,
    pub g: f64,
    pub parent: Option<ParentLink>,
    pub closed: bool,
    /// Number of times this node was expanded. Never exceeds one in a correct run.
    pub expansions: u32,
}

/// Registry of discovered states with lattice deduplication.
///
/// Not internally synchronized; the owning planner serializes access.
#[derive(Clone, Debug)]
pub struct StateRegistry {
    lattice: Lattice,
    cells: HashMap<Cell, StateId>,
    nodes: Vec<SearchNode>,
}

impl StateRegistry {
    pub fn new(lattice: Lattice) -> Self {
        StateRegistry {
            lattice,
            cells: HashMap::new(),
            nodes: Vec::new(),
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn register(&mut self, s: &StateVec) -> Result<StateId> {
        let cell = self.lattice.cell(s)?;
        Ok(self.register_cell(cell, s).0)
    }

    /// Registers `s` under a precomputed cell. Returns the id and whether it is new.
    pub fn register_cell(&mut self, cell: Cell, s: &StateVec) -> (StateId, bool) {
        if let Some(&id) = self.cells.get(&cell) {
            return (id, false);
        }
        let id = StateId(self.nodes.len());
        self.nodes.push(SearchNode {
            id,
            state: s.clone(),
            g: G_UNREACHED,
            parent: None,
            closed: false,
            expansions: 0,
        });
        self.cells.insert(cell, id);
        (id, true)
    }

    pub fn lookup(&self, s: &StateVec) -> Result<Option<StateId>> {
        let cell = self.lattice.cell(s)?;
        Ok(self.cells.get(&cell).copied())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: StateId) -> &SearchNode {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> &[SearchNode] {
        &self.nodes
    }

    pub fn set_start(&mut self, id: StateId) -> Result<()> {
        let node = self.writable(id)?;
        node.g = 0.0;
        node.parent = None;
        Ok(())
    }

    /// Lowers the g-value of an open node and rewires its parent.
    pub fn relax(&mut self, id: StateId, g: f64, parent: ParentLink) -> Result<()> {
        let node = self.writable(id)?;
        if !(g < node.g) {
            return Err(Error::ContractViolation(format!(
                "g of {id:?} must strictly decrease ({} -> {g})",
                node.g
            )));
        }
        node.g = g;
        node.parent = Some(parent);
        Ok(())
    }

    /// As [`relax`](Self::relax), and also moves the cell's stored state to the one
    /// reached through the new parent, so that the parent chain replays exactly.
    pub fn relax_to(&mut self, id: StateId, g: f64, parent: ParentLink, state: StateVec) -> Result<()> {
        self.relax(id, g, parent)?;
        self.nodes[id.0].state = state;
        Ok(())
    }

    pub fn close(&mut self, id: StateId) -> Result<()> {
        let node = self.writable(id)?;
        node.closed = true;
        node.expansions += 1;
        Ok(())
    }

    fn writable(&mut self, id: StateId) -> Result<&mut SearchNode> {
        let node = self
            .nodes
            .get_mut(id.0)
            .ok_or_else(|| Error::ContractViolation(format!("unknown state {id:?}")))?;
        debug_assert!(!node.closed, "write to closed node {id:?}");
        if node.closed {
            return Err(Error::ContractViolation(format!(
                "write to closed node {id:?}"
            )));
        }
        Ok(node)
    }
}
