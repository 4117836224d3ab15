use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::QbdBlocks;
use crate::error::{Error, Result};
use crate::linalg::{max_abs, spectral_radius};

pub const DEFAULT_R_TOL: f64 = 1e-13;
pub const ITERATION_CAP: usize = 100_000;
/// Logarithmic reduction doubles the number of levels covered per step, so
/// more than this many steps means it is not converging.
const REDUCTION_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateAlgorithm {
    LogarithmicReduction,
    NaturalIteration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    pub r: DMatrix<f64>,
    /// Sup-norm of `A+ + R A0 + R^2 A- - R`.
    pub residual: f64,
    pub spectral_radius: f64,
    pub algorithm: RateAlgorithm,
    pub iterations: usize,
}

fn rate_residual(b: &QbdBlocks, r: &DMatrix<f64>) -> f64 {
    let res = &b.a_plus + r * &b.a_zero + r * r * &b.a_minus - r;
    max_abs(&res)
}

fn inverse(m: DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    m.try_inverse().ok_or_else(|| Error::Singular(what.to_string()))
}

/// `G`: minimal solution of `G = A- + A0 G + A+ G^2`, by logarithmic reduction.
fn logarithmic_reduction(b: &QbdBlocks, tol: f64) -> Result<Option<(DMatrix<f64>, usize)>> {
    let m = b.phases();
    let id = DMatrix::<f64>::identity(m, m);
    let inv = inverse(&id - &b.a_zero, "I - A0")?;
    let mut h = &inv * &b.a_plus;
    let mut l = &inv * &b.a_minus;
    let mut g = l.clone();
    let mut t = h.clone();
    for it in 1..=REDUCTION_CAP {
        let u = &h * &l + &l * &h;
        let Some(inv) = (&id - u).try_inverse() else {
            return Ok(None);
        };
        h = &inv * (&h * &h);
        l = &inv * (&l * &l);
        g += &t * &l;
        t = &t * &h;
        let defect = g.row_iter().map(|r| (1.0 - r.sum()).abs()).fold(0.0, f64::max);
        if defect < tol || max_abs(&t) < tol {
            return Ok(Some((g, it)));
        }
    }
    Ok(None)
}

fn natural_iteration(b: &QbdBlocks, tol: f64) -> Result<(DMatrix<f64>, usize, f64)> {
    let m = b.phases();
    let id = DMatrix::<f64>::identity(m, m);
    let inv = inverse(&id - &b.a_zero, "I - A0")?;
    let mut r = DMatrix::zeros(m, m);
    let mut step = f64::INFINITY;
    for it in 1..=ITERATION_CAP {
        let next = (&b.a_plus + &r * &r * &b.a_minus) * &inv;
        step = max_abs(&(&next - &r));
        r = next;
        if step < tol {
            return Ok((r, it, step));
        }
    }
    Err(Error::RateMatrixNotConverged { iterations: ITERATION_CAP, residual: step })
}

/// Minimal nonnegative solution of `R = A+ + R A0 + R^2 A-`.
///
/// Logarithmic reduction is tried first; the natural fixed-point iteration
/// `R <- (A+ + R^2 A-)(I - A0)^-1` is the fallback.
pub fn solve_r(blocks: &QbdBlocks, tol: f64) -> Result<RateMatrix> {
    let m = blocks.phases();
    let id = DMatrix::<f64>::identity(m, m);
    let mut candidate = None;
    if let Some((g, iterations)) = logarithmic_reduction(blocks, tol)? {
        let u = &blocks.a_zero + &blocks.a_plus * &g;
        if let Some(inv) = (&id - u).try_inverse() {
            let mut r = &blocks.a_plus * inv;
            r.apply(|x| *x = x.max(0.0));
            let residual = rate_residual(blocks, &r);
            if residual < tol.max(1e-12) {
                candidate = Some((r, RateAlgorithm::LogarithmicReduction, iterations, residual));
            }
        }
    }
    let (r, algorithm, iterations, residual) = match candidate {
        Some(c) => c,
        None => {
            let (r, iterations, _) = natural_iteration(blocks, tol)?;
            let residual = rate_residual(blocks, &r);
            (r, RateAlgorithm::NaturalIteration, iterations, residual)
        }
    };
    if residual >= tol.max(1e-12) {
        return Err(Error::RateMatrixNotConverged { iterations, residual });
    }
    let spectral_radius = spectral_radius(&r);
    Ok(RateMatrix { r, residual, spectral_radius, algorithm, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{jackson_spec, JacksonParams};
    use crate::qbd::build_blocks;

    #[test]
    fn reference_residual_and_radius() {
        let spec = jackson_spec(&JacksonParams::symmetric_reference());
        let b = build_blocks(&spec, 10).unwrap();
        let r = solve_r(&b, DEFAULT_R_TOL).unwrap();
        assert!(r.residual < 1e-12, "{}", r.residual);
        assert!(r.spectral_radius < 1.0);
        assert!(r.r.iter().all(|&x| x >= 0.0));
        assert_eq!(r.algorithm, RateAlgorithm::LogarithmicReduction);
    }

    #[test]
    fn no_upward_moves_gives_zero_rate() {
        let spec = jackson_spec(&JacksonParams::symmetric_reference());
        let mut b = build_blocks(&spec, 4).unwrap();
        let up = b.a_plus.clone();
        b.a_zero += up;
        b.a_plus.fill(0.0);
        let r = solve_r(&b, DEFAULT_R_TOL).unwrap();
        assert_eq!(max_abs(&r.r), 0.0);
    }

    #[test]
    fn fallback_agrees_with_reduction() {
        let spec = jackson_spec(&JacksonParams::new(0.12, 0.06, 0.45, 0.37, 0.3, 0.6).unwrap());
        let b = build_blocks(&spec, 8).unwrap();
        let fast = solve_r(&b, DEFAULT_R_TOL).unwrap();
        let (slow, _, _) = natural_iteration(&b, 1e-15).unwrap();
        assert!(max_abs(&(&fast.r - &slow)) < 1e-11);
    }
}
