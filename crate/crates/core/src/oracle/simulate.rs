use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::bounds::FunctionalSpec;
use crate::certificate::DriftCertificate;
use crate::error::{Error, Result};
use crate::model::{RandomWalkSpec, Region};

pub const RNG_ALGORITHM: &str = "chacha8";
pub const BATCHES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub functional: String,
    pub estimate: f64,
    /// Half width of the 95% batch-means interval.
    pub half_width: f64,
    pub steps: u64,
    pub seed: u64,
    pub batches: usize,
    pub rng: String,
}

impl SimulationResult {
    /// Whether `x` lies in the interval, up to a relative rounding slack of 1e-12
    /// (degenerate intervals of constant functionals have zero width).
    pub fn contains(&self, x: f64) -> bool {
        (x - self.estimate).abs() <= self.half_width + 1e-12 * x.abs().max(self.estimate.abs())
    }
}

struct Sampler {
    // cumulative probabilities per region, in Region::ALL order
    tables: [Vec<(i64, i64, f64)>; 4],
}

impl Sampler {
    fn new(spec: &RandomWalkSpec) -> Self {
        let table = |r: Region| {
            let mut acc = 0.0;
            spec.law(r)
                .support()
                .map(|(o, p)| {
                    acc += p;
                    (o.dx as i64, o.dy as i64, acc)
                })
                .collect::<Vec<_>>()
        };
        Sampler { tables: Region::ALL.map(table) }
    }

    fn step(&self, s: (u64, u64), u: f64) -> (u64, u64) {
        let t = &self.tables[Region::of(s) as usize];
        let &(dx, dy, _) = t.iter().find(|e| u < e.2).unwrap_or_else(|| t.last().unwrap());
        ((s.0 as i64 + dx) as u64, (s.1 as i64 + dy) as u64)
    }
}

/// Time averages of several functionals along one trajectory started at
/// the origin, with 95% Student-t intervals from `BATCHES` batch means.
pub fn simulate_many(
    spec: &RandomWalkSpec,
    cert: &DriftCertificate,
    fs: &[FunctionalSpec],
    steps: u64,
    seed: u64,
) -> Result<Vec<SimulationResult>> {
    let batch = steps / BATCHES as u64;
    if batch == 0 {
        return Err(Error::InvalidParams(format!("need at least {BATCHES} steps, got {steps}")));
    }
    let sampler = Sampler::new(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = (0u64, 0u64);
    let mut means = vec![vec![0.0; BATCHES]; fs.len()];
    let mut sums = vec![0.0; fs.len()];
    for b in 0..BATCHES {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for _ in 0..batch {
            state = sampler.step(state, rng.random::<f64>());
            for (s, f) in sums.iter_mut().zip(fs) {
                *s += f.eval(state, cert);
            }
        }
        for (m, s) in means.iter_mut().zip(&sums) {
            m[b] = s / batch as f64;
        }
    }
    let t = StudentsT::new(0.0, 1.0, (BATCHES - 1) as f64)
        .expect("valid Student-t parameters")
        .inverse_cdf(0.975);
    Ok(fs
        .iter()
        .zip(&means)
        .map(|(f, m)| {
            let k = m.len() as f64;
            let mean = m.iter().sum::<f64>() / k;
            let var = m.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
            SimulationResult {
                functional: f.description.clone(),
                estimate: mean,
                half_width: t * (var / k).sqrt(),
                steps: batch * BATCHES as u64,
                seed,
                batches: BATCHES,
                rng: RNG_ALGORITHM.to_string(),
            }
        })
        .collect())
}

pub fn simulate(
    spec: &RandomWalkSpec,
    cert: &DriftCertificate,
    f: &FunctionalSpec,
    steps: u64,
    seed: u64,
) -> Result<SimulationResult> {
    Ok(simulate_many(spec, cert, std::slice::from_ref(f), steps, seed)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{FunctionalKind, FunctionalSpec};
    use crate::certificate::{certify, SearchOptions};
    use crate::model::{jackson_spec, JacksonParams, TransitionLaw};

    fn setup() -> (RandomWalkSpec, DriftCertificate) {
        let spec = jackson_spec(&JacksonParams::symmetric_reference());
        let (cert, _, _) = certify(&spec, &SearchOptions::default()).unwrap();
        (spec, cert)
    }

    #[test]
    fn ones_is_exact() {
        let (spec, cert) = setup();
        let r = simulate(&spec, &cert, &FunctionalSpec::new(FunctionalKind::Ones), 10_000, 1).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert_eq!(r.half_width, 0.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let (spec, cert) = setup();
        let f = FunctionalSpec::normalized(
            FunctionalKind::TruncatedCoordinate { axis: crate::bounds::Axis::First, cap: 20 },
            &cert,
        );
        let a = simulate(&spec, &cert, &f, 100_000, 42).unwrap();
        let b = simulate(&spec, &cert, &f, 100_000, 42).unwrap();
        let c = simulate(&spec, &cert, &f, 100_000, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.estimate, c.estimate);
    }

    #[test]
    fn origin_absorbing_walk() {
        let (_, cert) = setup();
        let stay = |r| TransitionLaw::from_triples(r, &[(0, 0, 1.0)]).unwrap();
        let spec = RandomWalkSpec::new(
            stay(Region::Origin),
            stay(Region::Face1),
            stay(Region::Face2),
            stay(Region::Interior),
        )
        .unwrap();
        let f = FunctionalSpec::scaled(FunctionalKind::ScaledLyapunov { alpha: 0.5 }, 1.0);
        let r = simulate(&spec, &cert, &f, 1000, 3).unwrap();
        assert_eq!(r.estimate, f.eval((0, 0), &cert));
        assert_eq!(r.half_width, 0.0);
    }

    #[test]
    fn too_few_steps() {
        let (spec, cert) = setup();
        assert!(simulate(&spec, &cert, &FunctionalSpec::new(FunctionalKind::Ones), 5, 0).is_err());
    }
}
