use nalgebra::{DMatrix, RowDVector};
use serde::{Deserialize, Serialize};

use super::{QbdBlocks, RateAlgorithm, RateMatrix};
use crate::error::{Error, Result};
use crate::linalg::{gth_dense, spectral_radius};

/// Levels on which the balance equations are re-checked after a solve.
pub const BALANCE_CHECK_LEVELS: usize = 50;
/// Closed forms in `z R` are used only when `sp(z R) < 1 - CLOSED_FORM_MARGIN`.
pub const CLOSED_FORM_MARGIN: f64 = 1e-6;

/// Stationary distribution of the level-infinite, phase-capped chain in
/// matrix-geometric form: level 0 is `pi0`, level `k >= 1` is `pi1 R^(k-1)`.
#[derive(Debug, Clone)]
pub struct QbdSolution {
    pub n: usize,
    pub blocks: QbdBlocks,
    pub rate: RateMatrix,
    pub pi0: Vec<f64>,
    pub pi1: Vec<f64>,
    pub normalization_residual: f64,
    /// `|| pi P - pi ||_1` over levels `0..=balance_levels`.
    pub balance_residual: f64,
    pub balance_levels: usize,
}

fn row(v: &[f64]) -> RowDVector<f64> {
    RowDVector::from_row_slice(v)
}

/// Solves the boundary equations. The chain censored on levels {0, 1} has
/// generator `[[B0, B+], [A-, A0 + R A-]]`, which is stochastic because
/// `R A- = A+ G`; its GTH stationary vector is proportional to `(pi0, pi1)`.
pub fn solve_stationary(blocks: QbdBlocks, rate: RateMatrix) -> Result<QbdSolution> {
    let m = blocks.phases();
    let mut censored = DMatrix::zeros(2 * m, 2 * m);
    censored.view_mut((0, 0), (m, m)).copy_from(&blocks.b_zero);
    censored.view_mut((0, m), (m, m)).copy_from(&blocks.b_plus);
    censored.view_mut((m, 0), (m, m)).copy_from(&blocks.a_minus);
    let lower = &blocks.a_zero + &rate.r * &blocks.a_minus;
    censored.view_mut((m, m), (m, m)).copy_from(&lower);
    let x = gth_dense(&censored).map_err(|e| Error::Singular(format!("boundary system: {e}")))?;

    let id = DMatrix::<f64>::identity(m, m);
    let geo = (&id - &rate.r)
        .try_inverse()
        .ok_or_else(|| Error::Singular("I - R".into()))?;
    let tail_weights = geo.column_sum();
    let pi0 = &x[..m];
    let pi1 = &x[m..];
    let total = |p0: &[f64], p1: &[f64]| -> f64 {
        p0.iter().sum::<f64>() + p1.iter().zip(tail_weights.iter()).map(|(a, w)| a * w).sum::<f64>()
    };
    let scale = total(pi0, pi1);
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Singular(format!("normalization constant {scale}")));
    }
    let pi0: Vec<f64> = pi0.iter().map(|v| v / scale).collect();
    let pi1: Vec<f64> = pi1.iter().map(|v| v / scale).collect();
    let normalization_residual = (total(&pi0, &pi1) - 1.0).abs();

    let mut sol = QbdSolution {
        n: blocks.n,
        blocks,
        rate,
        pi0,
        pi1,
        normalization_residual,
        balance_residual: 0.0,
        balance_levels: BALANCE_CHECK_LEVELS,
    };
    sol.balance_residual = sol.balance_residual(BALANCE_CHECK_LEVELS);
    Ok(sol)
}

/// Successive level vectors `pi(0), pi(1), ...`.
pub struct Levels<'a> {
    sol: &'a QbdSolution,
    k: usize,
    cur: RowDVector<f64>,
}

impl Iterator for Levels<'_> {
    type Item = RowDVector<f64>;

    fn next(&mut self) -> Option<Self::Item> {
        let out = match self.k {
            0 => row(&self.sol.pi0),
            1 => self.cur.clone(),
            _ => {
                self.cur = &self.cur * &self.sol.rate.r;
                self.cur.clone()
            }
        };
        self.k += 1;
        Some(out)
    }
}

impl QbdSolution {
    pub fn phases(&self) -> usize {
        self.n + 1
    }

    pub fn levels(&self) -> Levels<'_> {
        Levels { sol: self, k: 0, cur: row(&self.pi1) }
    }

    /// Stationary vector of level `k`.
    pub fn level(&self, k: usize) -> Vec<f64> {
        self.levels().nth(k).unwrap().iter().copied().collect()
    }

    /// `[n]pi(k, i)`, zero above the phase cap.
    pub fn pi_at(&self, k: usize, i: usize) -> f64 {
        if i > self.n {
            return 0.0;
        }
        if k == 0 {
            return self.pi0[i];
        }
        let mut v = row(&self.pi1);
        for _ in 1..k {
            v = &v * &self.rate.r;
        }
        v[i].max(0.0)
    }

    /// `sum_k z^k pi(k)` in closed form, or `None` when `sp(z R)` is too
    /// close to (or above) one.
    pub fn weighted_level_sum(&self, z: f64) -> Option<Vec<f64>> {
        let zr = &self.rate.r * z;
        if !(spectral_radius(&zr) < 1.0 - CLOSED_FORM_MARGIN) {
            return None;
        }
        let m = self.phases();
        let inv = (DMatrix::<f64>::identity(m, m) - zr).try_inverse()?;
        let tail = row(&self.pi1) * inv * z;
        Some(self.pi0.iter().zip(tail.iter()).map(|(a, b)| a + b).collect())
    }

    /// Stationary distribution of the phase (second coordinate).
    pub fn phase_marginal(&self) -> Vec<f64> {
        self.weighted_level_sum(1.0).expect("sp(R) < 1 for a solved QBD")
    }

    /// Total mass of each level `0..=max_level`.
    pub fn level_marginal(&self, max_level: usize) -> Vec<f64> {
        self.levels().take(max_level + 1).map(|v| v.sum()).collect()
    }

    pub fn balance_residual(&self, max_level: usize) -> f64 {
        let b = &self.blocks;
        let lv: Vec<RowDVector<f64>> = self.levels().take(max_level + 2).collect();
        let mut total = 0.0;
        for k in 0..=max_level {
            let r = if k == 0 {
                &lv[0] * &b.b_zero + &lv[1] * &b.a_minus - &lv[0]
            } else {
                let up = if k == 1 { &b.b_plus } else { &b.a_plus };
                &lv[k - 1] * up + &lv[k] * &b.a_zero + &lv[k + 1] * &b.a_minus - &lv[k]
            };
            total += r.iter().map(|x| x.abs()).sum::<f64>();
        }
        total
    }

    pub fn summary(&self) -> SolutionSummary {
        SolutionSummary {
            n: self.n,
            spectral_radius: self.rate.spectral_radius,
            rate_residual: self.rate.residual,
            rate_algorithm: self.rate.algorithm,
            rate_iterations: self.rate.iterations,
            normalization_residual: self.normalization_residual,
            balance_residual: self.balance_residual,
            balance_levels: self.balance_levels,
            pi0: self.pi0.clone(),
            pi1: self.pi1.clone(),
        }
    }
}

/// Serializable digest of a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub n: usize,
    pub spectral_radius: f64,
    pub rate_residual: f64,
    pub rate_algorithm: RateAlgorithm,
    pub rate_iterations: usize,
    pub normalization_residual: f64,
    pub balance_residual: f64,
    pub balance_levels: usize,
    pub pi0: Vec<f64>,
    pub pi1: Vec<f64>,
}

/// Upper bound on the total-variation distance between two solutions: exact
/// on levels `0..=max_level`, plus the full mass of both beyond.
pub fn tv_distance(a: &QbdSolution, b: &QbdSolution, max_level: usize) -> f64 {
    let m = a.phases().max(b.phases());
    let mut diff = 0.0;
    let (mut mass_a, mut mass_b) = (0.0, 0.0);
    for (la, lb) in a.levels().zip(b.levels()).take(max_level + 1) {
        for i in 0..m {
            let x = la.get(i).copied().unwrap_or(0.0);
            let y = lb.get(i).copied().unwrap_or(0.0);
            diff += (x - y).abs();
        }
        mass_a += la.sum();
        mass_b += lb.sum();
    }
    0.5 * (diff + (1.0 - mass_a).max(0.0) + (1.0 - mass_b).max(0.0))
}
