use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Offset, RandomWalkSpec, Region, PROB_TOL};

/// Side of the square window `{0..W}^2` on which irreducibility and
/// aperiodicity are checked. This is a necessary-condition check only.
pub const VERIFICATION_WINDOW: u64 = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    OutsideSupport { region: Region, offset: Offset, prob: f64 },
    Normalization { region: Region, sum: f64 },
    NotIrreducible { window: u64, unreachable: usize, cannot_return: usize },
    Periodic { window: u64, period: u64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OutsideSupport { region, offset, prob } => {
                write!(f, "offset {offset} outside the support of {region} (probability {prob})")
            }
            Violation::Normalization { region, sum } => {
                write!(f, "{region} law sums to {sum:.17} instead of 1")
            }
            Violation::NotIrreducible { window, unreachable, cannot_return } => write!(
                f,
                "not irreducible on window {{0..{window}}}^2: {unreachable} states unreachable from the origin, {cannot_return} cannot reach it"
            ),
            Violation::Periodic { window, period } => {
                write!(f, "periodic with period {period} on window {{0..{window}}}^2")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_spec(spec: &RandomWalkSpec) -> ValidationReport {
    let mut violations = Vec::new();
    for region in Region::ALL {
        let law = spec.law(region);
        for (o, p) in law.support() {
            if !region.admits(o) {
                violations.push(Violation::OutsideSupport { region, offset: o, prob: p });
            }
        }
        let sum = law.total();
        if (sum - 1.0).abs() > PROB_TOL {
            violations.push(Violation::Normalization { region, sum });
        }
    }
    // graph checks are meaningless if the support is wrong
    if violations.is_empty() {
        violations.extend(window_checks(spec, VERIFICATION_WINDOW));
    }
    ValidationReport { violations }
}

/// Strong connectivity and aperiodicity of the transition graph restricted
/// to `{0..w}^2`, keeping only transitions whose target stays in the window.
fn window_checks(spec: &RandomWalkSpec, w: u64) -> Vec<Violation> {
    let side = (w + 1) as usize;
    let n = side * side;
    let idx = |x: u64, y: u64| x as usize * side + y as usize;
    let mut fwd: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut bwd: Vec<Vec<usize>> = vec![Vec::new(); n];
    for x in 0..=w {
        for y in 0..=w {
            for ((tx, ty), _) in super::step_distribution(spec, (x, y)) {
                if tx <= w && ty <= w {
                    fwd[idx(x, y)].push(idx(tx, ty));
                    bwd[idx(tx, ty)].push(idx(x, y));
                }
            }
        }
    }
    let dist = bfs(&fwd, 0);
    let back = bfs(&bwd, 0);
    let unreachable = dist.iter().filter(|d| d.is_none()).count();
    let cannot_return = back.iter().filter(|d| d.is_none()).count();
    if unreachable > 0 || cannot_return > 0 {
        return vec![Violation::NotIrreducible { window: w, unreachable, cannot_return }];
    }
    // period = gcd over edges u->v of d(u) + 1 - d(v)
    let mut period: u64 = 0;
    for (u, targets) in fwd.iter().enumerate() {
        let du = dist[u].unwrap() as i64;
        for &v in targets {
            let dv = dist[v].unwrap() as i64;
            period = gcd(period, (du + 1 - dv).unsigned_abs());
        }
    }
    if period != 1 {
        return vec![Violation::Periodic { window: w, period }];
    }
    Vec::new()
}

fn bfs(adj: &[Vec<usize>], start: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap();
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{jackson_spec, JacksonParams, TransitionLaw};

    fn reference() -> RandomWalkSpec {
        jackson_spec(&JacksonParams::symmetric_reference())
    }

    fn replace(spec: &RandomWalkSpec, law: TransitionLaw) -> RandomWalkSpec {
        let pick = |r: Region| {
            if r == law.region() {
                law.clone()
            } else {
                spec.law(r).clone()
            }
        };
        RandomWalkSpec::new(
            pick(Region::Origin),
            pick(Region::Face1),
            pick(Region::Face2),
            pick(Region::Interior),
        )
        .unwrap()
    }

    #[test]
    fn jackson_is_valid() {
        assert!(validate_spec(&reference()).is_valid());
    }

    #[test]
    fn face1_downward_step_is_flagged() {
        let law = TransitionLaw::from_triples(
            Region::Face1,
            &[(1, 0, 0.1), (0, 1, 0.1), (-1, 1, 0.3), (-1, 0, 0.4), (0, -1, 0.1)],
        )
        .unwrap();
        let report = validate_spec(&replace(&reference(), law));
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::OutsideSupport { region: Region::Face1, offset: Offset { dx: 0, dy: -1 }, .. }
        )));
    }

    #[test]
    fn short_interior_law_is_flagged() {
        let law = TransitionLaw::from_triples(
            Region::Interior,
            &[(1, 0, 0.1), (0, 1, 0.1), (-1, 1, 0.2), (1, -1, 0.2), (-1, 0, 0.2), (0, -1, 0.19)],
        )
        .unwrap();
        let report = validate_spec(&replace(&reference(), law));
        assert!(matches!(
            report.violations.as_slice(),
            [Violation::Normalization { region: Region::Interior, .. }]
        ));
    }

    #[test]
    fn one_dimensional_walk_is_reducible() {
        // never moves in the second coordinate
        let spec = RandomWalkSpec::new(
            TransitionLaw::from_triples(Region::Origin, &[(0, 0, 0.5), (1, 0, 0.5)]).unwrap(),
            TransitionLaw::from_triples(Region::Face1, &[(-1, 0, 0.5), (1, 0, 0.5)]).unwrap(),
            TransitionLaw::from_triples(Region::Face2, &[(0, -1, 0.5), (1, 0, 0.5)]).unwrap(),
            TransitionLaw::from_triples(Region::Interior, &[(-1, 0, 0.5), (1, 0, 0.5)]).unwrap(),
        )
        .unwrap();
        let report = validate_spec(&spec);
        assert!(matches!(report.violations.as_slice(), [Violation::NotIrreducible { .. }]));
    }

    #[test]
    fn pure_nearest_neighbour_walk_is_periodic() {
        let spec = RandomWalkSpec::new(
            TransitionLaw::from_triples(Region::Origin, &[(1, 0, 0.5), (0, 1, 0.5)]).unwrap(),
            TransitionLaw::from_triples(Region::Face1, &[(-1, 0, 0.5), (1, 0, 0.25), (0, 1, 0.25)]).unwrap(),
            TransitionLaw::from_triples(Region::Face2, &[(0, -1, 0.5), (1, 0, 0.25), (0, 1, 0.25)]).unwrap(),
            TransitionLaw::from_triples(Region::Interior, &[(-1, 0, 0.3), (0, -1, 0.3), (1, 0, 0.2), (0, 1, 0.2)]).unwrap(),
        )
        .unwrap();
        let report = validate_spec(&spec);
        assert!(matches!(report.violations.as_slice(), [Violation::Periodic { period: 2, .. }]));
    }
}
