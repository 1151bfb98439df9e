//! Parallel best-first search over actor-proposed edges with critic-derived priorities.

pub mod baselines;
pub mod envs;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod metrics;
pub mod models;
pub mod search;
pub mod vector;

pub use error::{Error, Result};
pub use vector::{ActionVec, StateVec};
