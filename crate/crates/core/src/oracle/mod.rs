//! Brute-force references: stationary distributions of clamped finite
//! chains, deviation matrices of finite chains, and simulation.

mod compare;
mod dense;
mod deviation;
mod simulate;

pub use compare::{reference_vs_qbd, ObservedError};
pub use dense::{
    clamped_chain, dense_stationary, solve_window, DenseChain, DenseOptions, ReferenceDistribution,
    DEFAULT_GAP_DELTA, DEFAULT_MEMORY_LIMIT,
};
pub use deviation::{
    check_deviation_bound, default_probes, deviation_matrix, DeviationBoundReport, DeviationMatrixFinite,
    DeviationMethod, ProbeRow,
};
pub use simulate::{simulate, simulate_many, SimulationResult, BATCHES, RNG_ALGORITHM};
