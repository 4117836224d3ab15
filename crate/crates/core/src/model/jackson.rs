//! Two-node Jackson network with cooperative servers, uniformised so that
//! `lambda1 + lambda2 + sigma1 + sigma2 = 1`.
//!
//! While one node is empty its server joins the other node, so the boundary
//! faces see the pooled service rate `sigma1 + sigma2`.

use serde::{Deserialize, Serialize};

use super::{Region, RandomWalkSpec, TransitionLaw};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacksonParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub q1: f64,
    pub q2: f64,
}

impl JacksonParams {
    /// Validates and rescales the four rates to sum to one.
    pub fn new(lambda1: f64, lambda2: f64, sigma1: f64, sigma2: f64, q1: f64, q2: f64) -> Result<Self> {
        let rates = [lambda1, lambda2, sigma1, sigma2];
        if rates.iter().any(|r| !r.is_finite() || *r <= 0.0) {
            return Err(Error::InvalidParams(format!(
                "rates must be positive and finite, got {rates:?}"
            )));
        }
        for q in [q1, q2] {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::InvalidParams(format!("routing probability {q} not in (0,1)")));
            }
        }
        let total: f64 = rates.iter().sum();
        Ok(JacksonParams {
            lambda1: lambda1 / total,
            lambda2: lambda2 / total,
            sigma1: sigma1 / total,
            sigma2: sigma2 / total,
            q1,
            q2,
        })
    }

    /// `lambda = (0.1, 0.1)`, `sigma = (0.4, 0.4)`, `q = (0.5, 0.5)`.
    pub fn symmetric_reference() -> Self {
        JacksonParams::new(0.1, 0.1, 0.4, 0.4, 0.5, 0.5).expect("valid reference parameters")
    }

    /// Traffic intensities `(rho1, rho2)`; the network is stable iff both are below one.
    pub fn rho(&self) -> (f64, f64) {
        let d = 1.0 - self.q1 * self.q2;
        (
            (self.lambda1 + self.lambda2 * self.q2) / (self.sigma1 * d),
            (self.lambda2 + self.lambda1 * self.q1) / (self.sigma2 * d),
        )
    }

    pub fn is_stable(&self) -> bool {
        let (r1, r2) = self.rho();
        r1 < 1.0 && r2 < 1.0
    }
}

pub fn jackson_spec(p: &JacksonParams) -> RandomWalkSpec {
    let JacksonParams {
        lambda1: l1,
        lambda2: l2,
        sigma1: s1,
        sigma2: s2,
        q1,
        q2,
    } = *p;
    let pooled = s1 + s2;
    let law = |region, t: &[(i8, i8, f64)]| {
        TransitionLaw::from_triples(region, t).expect("Jackson laws are built from valid offsets")
    };
    let origin = law(Region::Origin, &[(1, 0, l1), (0, 1, l2), (0, 0, pooled)]);
    let face1 = law(
        Region::Face1,
        &[(1, 0, l1), (0, 1, l2), (-1, 1, pooled * q1), (-1, 0, pooled * (1.0 - q1))],
    );
    let face2 = law(
        Region::Face2,
        &[(1, 0, l1), (0, 1, l2), (1, -1, pooled * q2), (0, -1, pooled * (1.0 - q2))],
    );
    let interior = law(
        Region::Interior,
        &[
            (1, 0, l1),
            (0, 1, l2),
            (-1, 1, s1 * q1),
            (1, -1, s2 * q2),
            (-1, 0, s1 * (1.0 - q1)),
            (0, -1, s2 * (1.0 - q2)),
        ],
    );
    RandomWalkSpec::new(origin, face1, face2, interior).expect("regions are tagged correctly")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{mean_drift, Offset};

    fn off(dx: i8, dy: i8) -> Offset {
        Offset::new(dx, dy).unwrap()
    }

    #[test]
    fn reference_laws() {
        let spec = jackson_spec(&JacksonParams::symmetric_reference());
        let e = spec.law(Region::Interior);
        let expect_e = [((1, 0), 0.1), ((0, 1), 0.1), ((-1, 1), 0.2), ((1, -1), 0.2), ((-1, 0), 0.2), ((0, -1), 0.2)];
        for ((dx, dy), p) in expect_e {
            assert!((e.prob(off(dx, dy)) - p).abs() < 1e-15, "interior ({dx},{dy})");
        }
        assert_eq!(e.support().count(), 6);

        let f1 = spec.law(Region::Face1);
        for ((dx, dy), p) in [((1, 0), 0.1), ((0, 1), 0.1), ((-1, 1), 0.4), ((-1, 0), 0.4)] {
            assert!((f1.prob(off(dx, dy)) - p).abs() < 1e-15, "face1 ({dx},{dy})");
        }
        assert_eq!(f1.support().count(), 4);

        let o = spec.law(Region::Origin);
        for ((dx, dy), p) in [((0, 0), 0.8), ((1, 0), 0.1), ((0, 1), 0.1)] {
            assert!((o.prob(off(dx, dy)) - p).abs() < 1e-15);
        }
        assert_eq!(o.support().count(), 3);
    }

    #[test]
    fn laws_sum_to_one_and_skip_diagonals() {
        let p = JacksonParams::new(0.3, 0.2, 0.9, 0.6, 0.25, 0.8).unwrap();
        let spec = jackson_spec(&p);
        for law in spec.laws() {
            assert!((law.total() - 1.0).abs() < 1e-12);
            assert_eq!(law.prob(off(1, 1)), 0.0);
            assert_eq!(law.prob(off(-1, -1)), 0.0);
        }
    }

    #[test]
    fn drifts_match_closed_forms() {
        let p = JacksonParams::symmetric_reference();
        let spec = jackson_spec(&p);
        let e = mean_drift(spec.law(Region::Interior));
        assert!((e.mu1 - (p.lambda1 + p.sigma2 * p.q2 - p.sigma1)).abs() < 1e-15);
        assert!((e.mu1 + 0.1).abs() < 1e-15 && (e.mu2 + 0.1).abs() < 1e-15);
        let f1 = mean_drift(spec.law(Region::Face1));
        assert!((f1.mu1 + 0.7).abs() < 1e-15 && (f1.mu2 - 0.5).abs() < 1e-15);
        let f2 = mean_drift(spec.law(Region::Face2));
        assert!((f2.mu1 - 0.5).abs() < 1e-15 && (f2.mu2 + 0.7).abs() < 1e-15);
    }

    #[test]
    fn normalisation_on_construction() {
        let p = JacksonParams::new(1.0, 1.0, 4.0, 4.0, 0.5, 0.5).unwrap();
        assert_eq!(p, JacksonParams::symmetric_reference());
        assert!(JacksonParams::new(0.1, 0.1, 0.4, 0.4, 1.0, 0.5).is_err());
        assert!(JacksonParams::new(0.0, 0.1, 0.4, 0.4, 0.5, 0.5).is_err());
    }

    #[test]
    fn unstable_example_rho() {
        let p = JacksonParams::new(0.45, 0.05, 0.25, 0.25, 0.5, 0.5).unwrap();
        let (r1, _) = p.rho();
        assert!((r1 - 0.475 / 0.1875).abs() < 1e-12);
        assert!(!p.is_stable());
    }
}
