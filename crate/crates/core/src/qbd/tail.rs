use serde::{Deserialize, Serialize};

use super::QbdSolution;
use crate::certificate::DriftCertificate;

pub const DEFAULT_TAIL_TOL: f64 = 1e-12;
/// Hard cap on explicit level terms.
pub const MAX_TAIL_TERMS: usize = 200_000;
/// Remainders below this are treated as converged even if the partial sum underflowed.
const REMAINDER_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    SeriesClosedForm,
    TruncatedWithCertifiedTail,
}

/// A certified upper bound on an infinite level sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSum {
    /// `partial + remainder_bound`.
    pub value: f64,
    pub partial: f64,
    pub remainder_bound: f64,
    /// Levels `0..terms_used` were summed explicitly.
    pub terms_used: usize,
    pub method: TailMethod,
    /// Closed-form value of the same series when available, for cross-checking.
    pub closed_form: Option<f64>,
}

/// Bound on `sum_{k > K} [n]pi(k, n) e^{k theta1}` from
/// `[n]pi(k, n) <= b~ e^{-k theta1~ - n theta2~}`.
pub fn tail_remainder(cert: &DriftCertificate, n: usize, theta1: f64, last_k: usize) -> f64 {
    let gap = cert.theta_tilde.theta1 - theta1;
    let log = cert.b_tilde.ln() - n as f64 * cert.theta_tilde.theta2 - (last_k + 1) as f64 * gap
        - (-(-gap).exp_m1()).ln();
    log.exp()
}

/// Certified upper bound on `sum_k [n]pi(k, n) e^{k theta1}`.
///
/// Level terms are summed until the certified remainder drops below
/// `tol` times the partial sum. The closed form
/// `pi0[n] + (pi1 e^{theta1} (I - e^{theta1} R)^-1)[n]` is attached when it exists.
pub fn top_layer_weighted_sum(sol: &QbdSolution, theta1: f64, cert: &DriftCertificate, tol: f64) -> TailSum {
    assert!(cert.theta_tilde.theta1 > theta1, "second tilt must exceed theta1");
    let n = sol.n;
    let z = theta1.exp();
    let mut partial = 0.0;
    let mut weight = 1.0;
    let mut terms = 0;
    let mut remainder = f64::INFINITY;
    for (k, level) in sol.levels().enumerate() {
        partial += level[n].max(0.0) * weight;
        weight *= z;
        terms = k + 1;
        remainder = tail_remainder(cert, n, theta1, k);
        if remainder <= tol * partial || remainder < REMAINDER_FLOOR || terms >= MAX_TAIL_TERMS {
            break;
        }
    }
    let closed_form = sol.weighted_level_sum(z).map(|v| v[n]);
    TailSum {
        value: partial + remainder,
        partial,
        remainder_bound: remainder,
        terms_used: terms,
        method: TailMethod::TruncatedWithCertifiedTail,
        closed_form,
    }
}
