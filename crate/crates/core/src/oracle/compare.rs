use serde::{Deserialize, Serialize};

use super::ReferenceDistribution;
use crate::bounds::{qbd_expectation, FunctionalSpec};
use crate::certificate::DriftCertificate;
use crate::qbd::{QbdSolution, DEFAULT_TAIL_TOL};

/// Observed relative error of `[n]pi g` against a reference `pi* g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedError {
    pub n: usize,
    pub functional: String,
    pub pi_star_g: f64,
    pub qbd_g: f64,
    /// `|[n]pi - pi*| g / (pi* g)`.
    pub weighted_abs: f64,
    /// `|([n]pi - pi*) g| / (pi* g)`.
    pub signed: f64,
    /// `[n]pi g` carried by states outside the reference window.
    pub qbd_g_outside_window: f64,
    pub epsilon_ref: f64,
}

/// Compares over the reference window; `[n]pi` is zero above phase `n` and
/// its mass beyond the window counts fully against the reference.
pub fn reference_vs_qbd(
    sol: &QbdSolution,
    cert: &DriftCertificate,
    reference: &ReferenceDistribution,
    f: &FunctionalSpec,
) -> ObservedError {
    let mut abs = 0.0;
    let mut signed = 0.0;
    let mut ref_g = 0.0;
    let mut qbd_inside = 0.0;
    for (k, level) in sol.levels().take(reference.m1 + 1).enumerate() {
        for i in 0..=reference.m2 {
            let a = if i <= sol.n { level[i].max(0.0) } else { 0.0 };
            let b = reference.at(k, i);
            let g = f.eval((k as u64, i as u64), cert);
            abs += (a - b).abs() * g;
            signed += (a - b) * g;
            ref_g += b * g;
            qbd_inside += a * g;
        }
    }
    let qbd_g = qbd_expectation(sol, f, cert, DEFAULT_TAIL_TOL).value;
    let outside = (qbd_g - qbd_inside).max(0.0);
    abs += outside;
    signed += outside;
    ObservedError {
        n: sol.n,
        functional: f.description.clone(),
        pi_star_g: ref_g,
        qbd_g,
        weighted_abs: abs / ref_g,
        signed: signed.abs() / ref_g,
        qbd_g_outside_window: outside,
        epsilon_ref: reference.epsilon(),
    }
}
