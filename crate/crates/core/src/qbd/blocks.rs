use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{RandomWalkSpec, Region, TransitionLaw};

/// Level-transition blocks of the walk with the second coordinate (the
/// phase) capped at `n`. Phases run over `0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct QbdBlocks {
    pub n: usize,
    /// Level `k -> k-1`, `k >= 1`.
    pub a_minus: DMatrix<f64>,
    /// Level `k -> k`, `k >= 1`.
    pub a_zero: DMatrix<f64>,
    /// Level `k -> k+1`, `k >= 1`.
    pub a_plus: DMatrix<f64>,
    /// Level `0 -> 0`.
    pub b_zero: DMatrix<f64>,
    /// Level `0 -> 1`.
    pub b_plus: DMatrix<f64>,
}

/// One block for level increment `k`: phase 0 follows `bottom`, phases
/// `1..n` follow `upper`, and phase `n` folds the upward phase move into
/// the diagonal.
fn block(bottom: &TransitionLaw, upper: &TransitionLaw, k: i64, n: usize) -> DMatrix<f64> {
    let m = n + 1;
    let mut a = DMatrix::zeros(m, m);
    a[(0, 0)] = bottom.p(k, 0);
    a[(0, 1)] = bottom.p(k, 1);
    for i in 1..n {
        a[(i, i - 1)] = upper.p(k, -1);
        a[(i, i)] = upper.p(k, 0);
        a[(i, i + 1)] = upper.p(k, 1);
    }
    a[(n, n - 1)] = upper.p(k, -1);
    a[(n, n)] = upper.p(k, 0) + upper.p(k, 1);
    a
}

pub fn build_blocks(spec: &RandomWalkSpec, n: usize) -> Result<QbdBlocks> {
    if n < 1 {
        return Err(Error::TruncationLevel(n));
    }
    let face1 = spec.law(Region::Face1);
    let interior = spec.law(Region::Interior);
    let origin = spec.law(Region::Origin);
    let face2 = spec.law(Region::Face2);
    Ok(QbdBlocks {
        n,
        a_minus: block(face1, interior, -1, n),
        a_zero: block(face1, interior, 0, n),
        a_plus: block(face1, interior, 1, n),
        b_zero: block(origin, face2, 0, n),
        b_plus: block(origin, face2, 1, n),
    })
}

impl QbdBlocks {
    pub fn phases(&self) -> usize {
        self.n + 1
    }

    /// Largest deviation from one of the row sums of `A(-1)+A(0)+A(1)` and `B(0)+B(1)`.
    pub fn stochasticity_defect(&self) -> f64 {
        let a = &self.a_minus + &self.a_zero + &self.a_plus;
        let b = &self.b_zero + &self.b_plus;
        a.row_iter()
            .chain(b.row_iter())
            .map(|r| (r.sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{jackson_spec, JacksonParams};

    #[test]
    fn reference_blocks_n2() {
        let spec = jackson_spec(&JacksonParams::symmetric_reference());
        let b = build_blocks(&spec, 2).unwrap();
        let row1: Vec<f64> = b.a_plus.row(1).iter().copied().collect();
        assert_eq!(row1.len(), 3);
        assert!((row1[0] - 0.2).abs() < 1e-15 && (row1[1] - 0.1).abs() < 1e-15 && row1[2] == 0.0);
        assert!((b.a_plus[(2, 1)] - 0.2).abs() < 1e-15);
        assert!((b.a_plus[(2, 2)] - 0.1).abs() < 1e-15);
        assert!(b.stochasticity_defect() < 1e-12);
    }

    #[test]
    fn rows_are_stochastic_and_entries_in_unit_interval() {
        let spec = jackson_spec(&JacksonParams::new(0.12, 0.06, 0.45, 0.37, 0.3, 0.6).unwrap());
        for n in [1, 2, 7, 30] {
            let b = build_blocks(&spec, n).unwrap();
            assert!(b.stochasticity_defect() < 1e-12);
            for m in [&b.a_minus, &b.a_zero, &b.a_plus, &b.b_zero, &b.b_plus] {
                assert!(m.iter().all(|&v| (0.0..=1.0).contains(&v)));
            }
        }
    }

    #[test]
    fn level_zero_truncation_rejected() {
        let spec = jackson_spec(&JacksonParams::symmetric_reference());
        assert!(matches!(build_blocks(&spec, 0), Err(Error::TruncationLevel(0))));
    }

    #[test]
    fn truncation_consistency() {
        let spec = jackson_spec(&JacksonParams::new(0.05, 0.15, 0.35, 0.45, 0.7, 0.2).unwrap());
        let small = build_blocks(&spec, 6).unwrap();
        let large = build_blocks(&spec, 11).unwrap();
        let pairs = [
            (&small.a_minus, &large.a_minus),
            (&small.a_zero, &large.a_zero),
            (&small.a_plus, &large.a_plus),
            (&small.b_zero, &large.b_zero),
            (&small.b_plus, &large.b_plus),
        ];
        for (s, l) in pairs {
            for i in 0..6 {
                for j in 0..=6 {
                    assert_eq!(s[(i, j)], l[(i, j)], "entry ({i},{j})");
                }
            }
        }
    }
}
