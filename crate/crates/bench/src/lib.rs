//! Benchmark harness: instance files, planner sweeps, closed-loop runs and reports.

pub mod closed_loop;
pub mod config;
pub mod distill;
pub mod error;
pub mod harness;
pub mod report;
pub mod sweep;

pub use error::{BenchError, Result};
