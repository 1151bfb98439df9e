//! Comparison planners sharing the environment and model contracts.

mod beam;
mod epase;
mod rollout;

use serde::{Deserialize, Serialize};

pub use beam::{beam_search, BEAM_ID};
pub use epase::{epase_style, grid_heuristic, FixedActions, EPASE_ID};
pub use rollout::{parallel_rollout, single_rollout, PARALLEL_ROLLOUT_ID, SINGLE_ROLLOUT_ID};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RolloutConfig {
    /// Steps per episode before it restarts.
    pub max_steps: usize,
    /// Concurrent episodes (`B`).
    pub batch_size: usize,
    pub evaluation_budget: u64,
    pub rng_seed: u64,
    pub num_workers: usize,
}

impl Default for RolloutConfig {
    fn default() -> Self {
        RolloutConfig {
            max_steps: 200,
            batch_size: 16,
            evaluation_budget: 50_000,
            rng_seed: 0,
            num_workers: 1,
        }
    }
}

impl RolloutConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 || self.batch_size == 0 || self.num_workers == 0 {
            return Err(Error::Config(
                "rollout max_steps, batch_size and num_workers must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeamConfig {
    /// Beam width `W`.
    pub width: usize,
    /// Actions sampled per frontier state (`K`).
    pub samples: usize,
    /// Maximum number of layers `L`.
    pub max_layers: usize,
    pub evaluation_budget: Option<u64>,
    /// Lattice cell size used to keep successors distinct.
    pub resolution: Vec<f64>,
    pub rng_seed: u64,
    pub num_workers: usize,
}

impl Default for BeamConfig {
    fn default() -> Self {
        BeamConfig {
            width: 16,
            samples: 8,
            max_layers: 400,
            evaluation_budget: None,
            resolution: Vec::new(),
            rng_seed: 0,
            num_workers: 1,
        }
    }
}

impl BeamConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.samples == 0 || self.num_workers == 0 {
            return Err(Error::Config(
                "beam width, samples and num_workers must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Applies `f` to every item, spreading the calls over up to `workers` threads.
/// Output order follows input order.
pub(crate) fn parallel_map<T, R, F>(workers: usize, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync,
{
    if workers <= 1 || items.len() <= 1 {
        return items.into_iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(workers);
    let mut chunks: Vec<Vec<T>> = Vec::new();
    let mut iter = items.into_iter().peekable();
    while iter.peek().is_some() {
        chunks.push(iter.by_ref().take(chunk).collect());
    }
    let f = &f;
    std::thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|c| scope.spawn(move || c.into_iter().map(f).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("baseline worker panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_keeps_order() {
        let items: Vec<u32> = (0..37).collect();
        let out = parallel_map(4, items.clone(), |x| x * 2);
        assert_eq!(out, items.iter().map(|x| x * 2).collect::<Vec<_>>());
    }
}
