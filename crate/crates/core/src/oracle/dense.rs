use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gth_banded, BandMatrix};
use crate::model::{step_distribution, RandomWalkSpec};

/// Default memory ceiling for one banded reference solve.
pub const DEFAULT_MEMORY_LIMIT: usize = 1 << 30;
/// Window growth used to estimate the truncation gap.
pub const DEFAULT_GAP_DELTA: usize = 50;

/// The walk on `{0..m1} x {0..m2}` with both coordinates clamped by `min(., m_i)`.
///
/// States are ordered lexicographically, `(x, y) -> x (m2 + 1) + y`, which
/// keeps every transition within `m2 + 2` of the diagonal.
#[derive(Debug, Clone)]
pub struct DenseChain {
    pub m1: usize,
    pub m2: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

pub fn clamped_chain(spec: &RandomWalkSpec, m1: usize, m2: usize) -> Result<DenseChain> {
    if m1 < 1 || m2 < 1 {
        return Err(Error::InvalidParams(format!("window ({m1}, {m2}) must be at least 1 on each side")));
    }
    let side = m2 + 1;
    let mut rows = Vec::with_capacity((m1 + 1) * side);
    for x in 0..=m1 {
        for y in 0..=m2 {
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(9);
            for ((tx, ty), p) in step_distribution(spec, (x as u64, y as u64)) {
                let j = (tx as usize).min(m1) * side + (ty as usize).min(m2);
                match row.iter_mut().find(|(k, _)| *k == j) {
                    Some(e) => e.1 += p,
                    None => row.push((j, p)),
                }
            }
            row.sort_by_key(|e| e.0);
            rows.push(row);
        }
    }
    Ok(DenseChain { m1, m2, rows })
}

impl DenseChain {
    pub fn n_states(&self) -> usize {
        self.rows.len()
    }

    pub fn bandwidth(&self) -> usize {
        self.m2 + 2
    }

    pub fn index(&self, x: usize, y: usize) -> usize {
        x * (self.m2 + 1) + y
    }

    pub fn state(&self, idx: usize) -> (usize, usize) {
        (idx / (self.m2 + 1), idx % (self.m2 + 1))
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn row_sum_defect(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().map(|e| e.1).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n_states();
        let mut p = DMatrix::zeros(n, n);
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, v) in r {
                p[(i, j)] = v;
            }
        }
        p
    }

    pub fn to_band(&self) -> BandMatrix {
        let mut b = BandMatrix::zeros(self.n_states(), self.bandwidth());
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, v) in r {
                b.set(i, j, v);
            }
        }
        b
    }

    /// `|| pi P - pi ||_1`.
    pub fn balance_residual(&self, pi: &[f64]) -> f64 {
        let mut out = vec![0.0; pi.len()];
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, v) in r {
                out[j] += pi[i] * v;
            }
        }
        out.iter().zip(pi).map(|(a, b)| (a - b).abs()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenseOptions {
    pub gap_delta: usize,
    pub memory_limit: usize,
}

impl Default for DenseOptions {
    fn default() -> Self {
        DenseOptions { gap_delta: DEFAULT_GAP_DELTA, memory_limit: DEFAULT_MEMORY_LIMIT }
    }
}

/// Stationary distribution of a clamped chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDistribution {
    pub m1: usize,
    pub m2: usize,
    /// Indexed by `x (m2 + 1) + y`.
    pub pi_star: Vec<f64>,
    pub residual: f64,
    /// Total-variation distance to the solve on the window grown by `gap_window`.
    pub truncation_gap: Option<f64>,
    pub gap_window: Option<(usize, usize)>,
}

impl ReferenceDistribution {
    pub fn at(&self, x: usize, y: usize) -> f64 {
        if x > self.m1 || y > self.m2 {
            0.0
        } else {
            self.pi_star[x * (self.m2 + 1) + y]
        }
    }

    /// Error budget for assertions against this reference.
    pub fn epsilon(&self) -> f64 {
        self.truncation_gap.unwrap_or(f64::INFINITY)
    }

    /// Total-variation distance to another reference, padding the smaller window by zeros.
    pub fn tv_distance(&self, other: &ReferenceDistribution) -> f64 {
        let m1 = self.m1.max(other.m1);
        let m2 = self.m2.max(other.m2);
        let mut d = 0.0;
        for x in 0..=m1 {
            for y in 0..=m2 {
                d += (self.at(x, y) - other.at(x, y)).abs();
            }
        }
        0.5 * d
    }
}

fn guard(chain_m1: usize, chain_m2: usize, limit: usize) -> Result<()> {
    let n = (chain_m1 + 1) * (chain_m2 + 1);
    let bytes = BandMatrix::storage_bytes(n, chain_m2 + 2);
    if bytes > limit {
        return Err(Error::WindowTooLarge { m1: chain_m1, m2: chain_m2, bytes, limit });
    }
    Ok(())
}

/// GTH solve of one clamped window, without a gap estimate.
pub fn solve_window(spec: &RandomWalkSpec, m1: usize, m2: usize, memory_limit: usize) -> Result<ReferenceDistribution> {
    guard(m1, m2, memory_limit)?;
    let chain = clamped_chain(spec, m1, m2)?;
    let pi_star = gth_banded(chain.to_band())?;
    let residual = chain.balance_residual(&pi_star);
    Ok(ReferenceDistribution { m1, m2, pi_star, residual, truncation_gap: None, gap_window: None })
}

/// Reference distribution on `(m1, m2)` with its truncation gap measured
/// against the window `(m1 + delta, m2 + delta)`.
pub fn dense_stationary(spec: &RandomWalkSpec, m1: usize, m2: usize, opts: &DenseOptions) -> Result<ReferenceDistribution> {
    let (g1, g2) = (m1 + opts.gap_delta, m2 + opts.gap_delta);
    guard(g1, g2, opts.memory_limit)?;
    let mut base = solve_window(spec, m1, m2, opts.memory_limit)?;
    let grown = solve_window(spec, g1, g2, opts.memory_limit)?;
    base.truncation_gap = Some(base.tv_distance(&grown));
    base.gap_window = Some((g1, g2));
    Ok(base)
}
