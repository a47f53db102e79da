//! Differential evolution with an event-triggered impulsive control layer.
//!
//! The crate bundles four things that together make up a small, reproducible
//! experimentation stack for population-based optimization:
//!
//! * [`benchfn`] — a seedable shifted/rotated benchmark suite over
//!   `[-100, 100]^D`, organized in the usual four groups (unimodal, simple
//!   multimodal, hybrid, composition).
//! * [`de`] — the core differential-evolution engine: six mutation
//!   strategies, binomial crossover, boundary repair, one-to-one selection
//!   with stagnation accounting, and a strict function-evaluation budget.
//! * [`eti`] — the impulsive control layer. When the population's update
//!   rate decays, selected individuals are instantly moved toward better
//!   references (stabilizing impulses) or relocated inside the population's
//!   bounding box (destabilizing impulses).
//! * [`stats`] / [`harness`] — Wilcoxon rank-sum marks, Holm step-down
//!   correction, average ranks, and a CLI experiment runner that writes
//!   JSON-lines run records and CSV comparison tables.

pub mod benchfn;
pub mod de;
pub mod eti;
pub mod harness;
pub mod stats;
pub mod variants;

use thiserror::Error as ThisError;

/// Crate-wide error type.
#[derive(Debug, ThisError)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown algorithm name `{0}`")]
    UnknownAlgorithm(String),
    #[error("insufficient evaluation budget: need {needed}, remaining {remaining}")]
    InsufficientBudget { needed: u64, remaining: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV output failed: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
