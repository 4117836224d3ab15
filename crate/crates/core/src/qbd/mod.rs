//! Level-infinite QBD obtained by capping the second coordinate at `n`.
//!
//! Levels are the first coordinate, phases the (capped) second coordinate.

mod blocks;
mod rate;
mod stationary;
mod tail;

pub use blocks::{build_blocks, QbdBlocks};
pub use rate::{solve_r, RateAlgorithm, RateMatrix, DEFAULT_R_TOL, ITERATION_CAP};
pub use stationary::{
    solve_stationary, tv_distance, Levels, QbdSolution, SolutionSummary, BALANCE_CHECK_LEVELS, CLOSED_FORM_MARGIN,
};
pub use tail::{tail_remainder, top_layer_weighted_sum, TailMethod, TailSum, DEFAULT_TAIL_TOL, MAX_TAIL_TERMS};

use crate::error::Result;
use crate::model::RandomWalkSpec;

/// Blocks, rate matrix and boundary solve in one call.
pub fn solve_qbd(spec: &RandomWalkSpec, n: usize) -> Result<QbdSolution> {
    let blocks = build_blocks(spec, n)?;
    let rate = solve_r(&blocks, DEFAULT_R_TOL)?;
    solve_stationary(blocks, rate)
}
