//! Edge priority queue.
//!
//! Real edges are plain heap entries. Each state has at most one live dummy edge;
//! updating it pushes a fresh entry and bumps a version so the old one is skipped
//! lazily on pop.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::graph::StateId;
use crate::vector::ActionVec;

#[derive(Clone, Debug, PartialEq)]
pub enum EdgeAction {
    /// Placeholder meaning "expand the source state".
    Dummy,
    Real(ActionVec),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub source: StateId,
    pub action: EdgeAction,
    /// Cost-to-go estimate attached at creation. Unused for dummy edges.
    pub q: f64,
    /// Priority.
    pub f: f64,
    /// g of the state the entry ranks by (tie-break key).
    pub g: f64,
}

impl Edge {
    pub fn dummy(source: StateId, f: f64, g: f64) -> Self {
        Edge {
            source,
            action: EdgeAction::Dummy,
            q: 0.0,
            f,
            g,
        }
    }

    pub fn real(source: StateId, action: ActionVec, q: f64, f: f64, g: f64) -> Self {
        Edge {
            source,
            action: EdgeAction::Real(action),
            q,
            f,
            g,
        }
    }

    pub fn is_dummy(&self) -> bool {
        matches!(self.action, EdgeAction::Dummy)
    }
}

#[derive(Debug)]
struct Entry {
    edge: Edge,
    seq: u64,
    /// Dummy version; 0 for real edges.
    version: u64,
}

impl Entry {
    // Smaller f, then larger g, then earlier insertion.
    fn rank(&self, other: &Self) -> Ordering {
        self.edge
            .f
            .total_cmp(&other.edge.f)
            .then_with(|| other.edge.g.total_cmp(&self.edge.g))
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.rank(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap.
        other.rank(self)
    }
}

#[derive(Debug, Default)]
pub struct OpenList {
    heap: BinaryHeap<Entry>,
    live_dummies: HashMap<StateId, u64>,
    next_seq: u64,
    next_version: u64,
    live: usize,
}

impl OpenList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    pub fn contains_dummy(&self, id: StateId) -> bool {
        self.live_dummies.contains_key(&id)
    }

    /// Inserts an edge. A dummy edge replaces any live dummy of the same state.
    pub fn insert(&mut self, edge: Edge) -> Result<()> {
        if !edge.f.is_finite() {
            return Err(Error::ContractViolation(format!(
                "edge priority must be finite, got {}",
                edge.f
            )));
        }
        let version = if edge.is_dummy() {
            self.next_version += 1;
            if self
                .live_dummies
                .insert(edge.source, self.next_version)
                .is_none()
            {
                self.live += 1;
            }
            self.next_version
        } else {
            self.live += 1;
            0
        };
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry { edge, seq, version });
        Ok(())
    }

    /// Changes the priority of the live dummy edge of `id`.
    pub fn update_dummy(&mut self, id: StateId, f: f64, g: f64) -> Result<()> {
        if !self.contains_dummy(id) {
            return Err(Error::ContractViolation(format!(
                "no dummy edge for {id:?} in OPEN"
            )));
        }
        self.insert(Edge::dummy(id, f, g))
    }

    /// Inserts or re-prioritizes the dummy edge of `id`.
    pub fn upsert_dummy(&mut self, id: StateId, f: f64, g: f64) -> Result<()> {
        self.insert(Edge::dummy(id, f, g))
    }

    pub fn remove_dummy(&mut self, id: StateId) -> bool {
        if self.live_dummies.remove(&id).is_some() {
            self.live -= 1;
            true
        } else {
            false
        }
    }

    pub fn pop_min(&mut self) -> Option<Edge> {
        while let Some(entry) = self.heap.pop() {
            if entry.edge.is_dummy() {
                match self.live_dummies.get(&entry.edge.source) {
                    Some(&v) if v == entry.version => {
                        self.live_dummies.remove(&entry.edge.source);
                    }
                    _ => continue,
                }
            }
            self.live -= 1;
            return Some(entry.edge);
        }
        None
    }

    pub fn peek_min(&mut self) -> Option<&Edge> {
        // Drop stale dummies sitting on top so the peeked entry is live.
        while let Some(top) = self.heap.peek() {
            if top.edge.is_dummy()
                && self.live_dummies.get(&top.edge.source) != Some(&top.version)
            {
                self.heap.pop();
            } else {
                break;
            }
        }
        self.heap.peek().map(|e| &e.edge)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(f: f64) -> Edge {
        Edge::real(StateId(0), ActionVec::new(vec![f]), 0.0, f, 0.0)
    }

    #[test]
    fn pops_in_priority_order() {
        let mut open = OpenList::new();
        for f in [5.0, 3.0, 4.0] {
            open.insert(real(f)).unwrap();
        }
        let order: Vec<f64> = std::iter::from_fn(|| open.pop_min()).map(|e| e.f).collect();
        assert_eq!(order, vec![3.0, 4.0, 5.0]);
        assert!(open.pop_min().is_none());
    }

    #[test]
    fn decrease_key_on_dummy() {
        let mut open = OpenList::new();
        open.insert(Edge::dummy(StateId(7), 6.0, 0.0)).unwrap();
        open.update_dummy(StateId(7), 2.0, 0.0).unwrap();
        open.insert(real(3.0)).unwrap();
        assert_eq!(open.len(), 2);
        let first = open.pop_min().unwrap();
        assert!(first.is_dummy());
        assert_eq!(first.f, 2.0);
        assert_eq!(open.pop_min().unwrap().f, 3.0);
        assert!(open.is_empty());
        assert!(open.pop_min().is_none());
    }

    #[test]
    fn update_requires_live_dummy() {
        let mut open = OpenList::new();
        assert!(open.update_dummy(StateId(1), 1.0, 0.0).is_err());
    }

    #[test]
    fn ties_prefer_larger_g_then_insertion_order() {
        let mut open = OpenList::new();
        open.insert(Edge::real(StateId(1), ActionVec::new(vec![]), 0.0, 1.0, 0.2))
            .unwrap();
        open.insert(Edge::real(StateId(2), ActionVec::new(vec![]), 0.0, 1.0, 0.5))
            .unwrap();
        open.insert(Edge::real(StateId(3), ActionVec::new(vec![]), 0.0, 1.0, 0.2))
            .unwrap();
        let ids: Vec<usize> = std::iter::from_fn(|| open.pop_min())
            .map(|e| e.source.0)
            .collect();
        assert_eq!(ids, vec![2, 1, 3]);
    }

    #[test]
    fn removed_dummy_is_never_popped() {
        let mut open = OpenList::new();
        open.insert(Edge::dummy(StateId(1), 1.0, 0.0)).unwrap();
        open.insert(real(2.0)).unwrap();
        assert!(open.remove_dummy(StateId(1)));
        assert_eq!(open.len(), 1);
        assert_eq!(open.peek_min().unwrap().f, 2.0);
        assert!(!open.pop_min().unwrap().is_dummy());
    }

    #[test]
    fn rejects_non_finite_priority() {
        let mut open = OpenList::new();
        assert!(open.insert(real(f64::INFINITY)).is_err());
    }
}
