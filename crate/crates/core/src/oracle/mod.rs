//! Finite-difference oracle: the pencil on a staggered (Yee) grid and its
//! minimal singular value as a function of `ω`.
//!
//! Unbounded directions are truncated to a periodic cell. Near a point of the
//! essential spectrum `σ_min` decreases as the grid and the cell grow; away from
//! it the value stays bounded below.

mod sweep;
mod yee;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use sweep::{sigma_min, sigma_min_dense, sigma_min_sparse, sigma_min_sweep, sweep_to_csv, SigmaMin, SweepOptions, SweepRow, DENSE_LIMIT};
pub use yee::{assemble, discrete_wavevector, variation_length, AxisKind, DiscretePencil, Family, YeeAxis, YeeGrid};

/// Default cap on the estimated factorization memory.
pub const DEFAULT_MEMORY_BUDGET: usize = 4_000_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid with {unknowns} unknowns needs about {estimate_bytes} bytes, budget is {budget_bytes}")]
    GridTooLarge { unknowns: usize, estimate_bytes: usize, budget_bytes: usize },
    #[error("sparse solver failed: {0}")]
    Solver(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    /// Cells per axis.
    pub cells: [usize; 3],
    /// Truncation period along unbounded axes; walled axes use the domain width.
    pub periods: [f64; 3],
    #[serde(default = "default_budget")]
    pub memory_budget: usize,
}

fn default_budget() -> usize {
    DEFAULT_MEMORY_BUDGET
}

impl GridParams {
    pub fn new(cells: [usize; 3], periods: [f64; 3]) -> Self {
        GridParams { cells, periods, memory_budget: DEFAULT_MEMORY_BUDGET }
    }

    /// Rough bytes for matrix plus LU fill: `16·(13n + 10n^{4/3})`.
    pub fn memory_estimate(&self, unknowns: usize) -> usize {
        let n = unknowns as f64;
        (16.0 * (13.0 * n + 10.0 * n.powf(4.0 / 3.0))) as usize
    }
}
