//! Two-dimensional reflecting random walks on the quarter plane.
//!
//! The state space `Z+^2` is split into four regions: the origin, the two
//! boundary faces `N x {0}` and `{0} x N`, and the interior `N^2`. Each region
//! carries its own increment law on `{-1,0,1}^2`, restricted so that the walk
//! never leaves the quarter plane.

mod file;
mod jackson;
mod stability;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use file::{parse_model, ModelFile};
pub use jackson::{jackson_spec, JacksonParams};
pub use stability::{
    check_negative_face_drift, check_stability, check_stability_with_margin, wedge, Inequality,
    NegativeDriftVerdict, StabilityCase, StabilityVerdict,
};
pub use validate::{validate_spec, ValidationReport, Violation, VERIFICATION_WINDOW};

/// Absolute tolerance on `sum p = 1`.
pub const PROB_TOL: f64 = 1e-12;

/// One-step increment with components in `{-1, 0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Offset {
    pub dx: i8,
    pub dy: i8,
}

impl Offset {
    pub fn new(dx: i8, dy: i8) -> Result<Self> {
        if !(-1..=1).contains(&dx) || !(-1..=1).contains(&dy) {
            return Err(Error::InvalidSpec(format!(
                "offset ({dx},{dy}) has a component outside {{-1,0,1}}"
            )));
        }
        Ok(Offset { dx, dy })
    }

    /// All nine offsets in lexicographic `(dx, dy)` order.
    pub fn all() -> impl Iterator<Item = Offset> {
        (-1..=1).flat_map(|dx| (-1..=1).map(move |dy| Offset { dx, dy }))
    }

    #[inline]
    fn index(self) -> usize {
        ((self.dx + 1) * 3 + (self.dy + 1)) as usize
    }
}

impl fmt::Display for Offset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.dx, self.dy)
    }
}

/// The four regions of the quarter plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// `{(0,0)}`
    Origin,
    /// `N x {0}`
    Face1,
    /// `{0} x N`
    Face2,
    /// `N x N`
    Interior,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::Origin, Region::Face1, Region::Face2, Region::Interior];
    /// Regions whose mean drift enters the stability conditions.
    pub const NON_ORIGIN: [Region; 3] = [Region::Face1, Region::Face2, Region::Interior];

    pub fn of(state: (u64, u64)) -> Region {
        match (state.0 > 0, state.1 > 0) {
            (false, false) => Region::Origin,
            (true, false) => Region::Face1,
            (false, true) => Region::Face2,
            (true, true) => Region::Interior,
        }
    }

    /// Whether the region's support admits the offset.
    pub fn admits(self, o: Offset) -> bool {
        match self {
            Region::Origin => o.dx >= 0 && o.dy >= 0,
            Region::Face1 => o.dy >= 0,
            Region::Face2 => o.dx >= 0,
            Region::Interior => true,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::Origin => "origin",
            Region::Face1 => "face1",
            Region::Face2 => "face2",
            Region::Interior => "interior",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Increment distribution of one region, stored densely over `{-1,0,1}^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionLaw {
    region: Region,
    probs: [f64; 9],
}

impl TransitionLaw {
    /// Builds a law from `(offset, probability)` pairs. Repeated offsets are
    /// summed. Support and normalisation are *not* enforced here; see
    /// [`validate_spec`].
    pub fn new(region: Region, pairs: impl IntoIterator<Item = (Offset, f64)>) -> Result<Self> {
        let mut probs = [0.0; 9];
        for (o, p) in pairs {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidSpec(format!(
                    "{region}: probability {p} at {o} is not in [0,1]"
                )));
            }
            probs[o.index()] += p;
        }
        Ok(TransitionLaw { region, probs })
    }

    /// Convenience constructor from `(dx, dy, p)` triples.
    pub fn from_triples(region: Region, triples: &[(i8, i8, f64)]) -> Result<Self> {
        let pairs = triples
            .iter()
            .map(|&(dx, dy, p)| Offset::new(dx, dy).map(|o| (o, p)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(region, pairs)
    }

    pub fn region(&self) -> Region {
        self.region
    }

    #[inline]
    pub fn prob(&self, o: Offset) -> f64 {
        self.probs[o.index()]
    }

    /// `p(dx, dy)`, zero for offsets outside `{-1,0,1}^2`.
    #[inline]
    pub fn p(&self, dx: i64, dy: i64) -> f64 {
        if !(-1..=1).contains(&dx) || !(-1..=1).contains(&dy) {
            return 0.0;
        }
        self.probs[((dx + 1) * 3 + (dy + 1)) as usize]
    }

    /// Offsets with positive probability.
    pub fn support(&self) -> impl Iterator<Item = (Offset, f64)> + '_ {
        Offset::all().map(|o| (o, self.prob(o))).filter(|&(_, p)| p > 0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Divides every probability by the total mass. Only done on request.
    pub fn renormalized(&self) -> Self {
        let t = self.total();
        let mut probs = self.probs;
        if t > 0.0 {
            probs.iter_mut().for_each(|p| *p /= t);
        }
        TransitionLaw { region: self.region, probs }
    }
}

/// Expected one-step increment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanDrift {
    pub mu1: f64,
    pub mu2: f64,
}

impl MeanDrift {
    pub fn as_array(self) -> [f64; 2] {
        [self.mu1, self.mu2]
    }
}

pub fn mean_drift(law: &TransitionLaw) -> MeanDrift {
    let (mut mu1, mut mu2) = (0.0, 0.0);
    for (o, p) in law.support() {
        mu1 += p * o.dx as f64;
        mu2 += p * o.dy as f64;
    }
    MeanDrift { mu1, mu2 }
}

/// The four regional laws that define a reflecting random walk.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomWalkSpec {
    origin: TransitionLaw,
    face1: TransitionLaw,
    face2: TransitionLaw,
    interior: TransitionLaw,
}

impl RandomWalkSpec {
    pub fn new(
        origin: TransitionLaw,
        face1: TransitionLaw,
        face2: TransitionLaw,
        interior: TransitionLaw,
    ) -> Result<Self> {
        let expect = [
            (&origin, Region::Origin),
            (&face1, Region::Face1),
            (&face2, Region::Face2),
            (&interior, Region::Interior),
        ];
        for (law, region) in expect {
            if law.region != region {
                return Err(Error::InvalidSpec(format!(
                    "law for {region} is tagged {}",
                    law.region
                )));
            }
        }
        Ok(RandomWalkSpec {
            origin,
            face1,
            face2,
            interior,
        })
    }

    pub fn law(&self, region: Region) -> &TransitionLaw {
        match region {
            Region::Origin => &self.origin,
            Region::Face1 => &self.face1,
            Region::Face2 => &self.face2,
            Region::Interior => &self.interior,
        }
    }

    pub fn laws(&self) -> impl Iterator<Item = &TransitionLaw> {
        Region::ALL.into_iter().map(move |r| self.law(r))
    }

    pub fn drift(&self, region: Region) -> MeanDrift {
        mean_drift(self.law(region))
    }

    /// Copy with every law renormalised to unit mass.
    pub fn renormalized(&self) -> Self {
        RandomWalkSpec {
            origin: self.origin.renormalized(),
            face1: self.face1.renormalized(),
            face2: self.face2.renormalized(),
            interior: self.interior.renormalized(),
        }
    }

    /// Swaps the two coordinates.
    pub fn transposed(&self) -> Self {
        let flip = |law: &TransitionLaw, region| TransitionLaw {
            region,
            probs: {
                let mut p = [0.0; 9];
                for o in Offset::all() {
                    p[Offset { dx: o.dy, dy: o.dx }.index()] = law.prob(o);
                }
                p
            },
        };
        RandomWalkSpec {
            origin: flip(&self.origin, Region::Origin),
            face1: flip(&self.face2, Region::Face1),
            face2: flip(&self.face1, Region::Face2),
            interior: flip(&self.interior, Region::Interior),
        }
    }
}

/// Next-state distribution from `state`. Entries with zero probability are
/// omitted; offsets outside the region's support are dropped as well so the
/// walk stays in the quarter plane (they only occur in invalid specs).
pub fn step_distribution(spec: &RandomWalkSpec, state: (u64, u64)) -> Vec<((u64, u64), f64)> {
    let region = Region::of(state);
    spec.law(region)
        .support()
        .filter(|&(o, _)| region.admits(o))
        .map(|(o, p)| {
            let x = (state.0 as i64 + o.dx as i64) as u64;
            let y = (state.1 as i64 + o.dy as i64) as u64;
            ((x, y), p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_has_zero_drift() {
        let law = TransitionLaw::from_triples(Region::Interior, &[(0, 0, 1.0)]).unwrap();
        assert_eq!(mean_drift(&law), MeanDrift { mu1: 0.0, mu2: 0.0 });
    }

    #[test]
    fn offset_rejects_large_steps() {
        assert!(Offset::new(2, 0).is_err());
        assert!(Offset::new(0, -2).is_err());
    }

    #[test]
    fn region_classification() {
        assert_eq!(Region::of((0, 0)), Region::Origin);
        assert_eq!(Region::of((5, 0)), Region::Face1);
        assert_eq!(Region::of((0, 2)), Region::Face2);
        assert_eq!(Region::of((3, 7)), Region::Interior);
    }

    #[test]
    fn step_distribution_cases() {
        let spec = jackson_spec(&JacksonParams::symmetric_reference());
        let at_origin = step_distribution(&spec, (0, 0));
        let mut expect: Vec<_> = spec
            .law(Region::Origin)
            .support()
            .map(|(o, p)| ((o.dx as u64, o.dy as u64), p))
            .collect();
        expect.sort_by_key(|a| a.0);
        let mut got = at_origin.clone();
        got.sort_by_key(|a| a.0);
        assert_eq!(got, expect);

        let face = step_distribution(&spec, (5, 0));
        assert!(face.iter().all(|((_, y), _)| *y <= 1));

        let mut interior = step_distribution(&spec, (3, 7));
        interior.sort_by_key(|a| a.0);
        let want = vec![
            ((2, 7), 0.2),
            ((2, 8), 0.2),
            ((3, 6), 0.2),
            ((3, 8), 0.1),
            ((4, 6), 0.2),
            ((4, 7), 0.1),
        ];
        assert_eq!(interior.len(), 6);
        for (a, b) in interior.iter().zip(&want) {
            assert_eq!(a.0, b.0);
            assert!((a.1 - b.1).abs() < 1e-15);
        }
    }

    #[test]
    fn transpose_swaps_faces() {
        let p = JacksonParams::new(0.12, 0.06, 0.45, 0.37, 0.3, 0.6).unwrap();
        let q = JacksonParams::new(0.06, 0.12, 0.37, 0.45, 0.6, 0.3).unwrap();
        let a = jackson_spec(&p).transposed();
        let b = jackson_spec(&q);
        for r in Region::ALL {
            for o in Offset::all() {
                assert!((a.law(r).prob(o) - b.law(r).prob(o)).abs() < 1e-15);
            }
        }
    }
}
