//! Relative error bounds for the QBD approximation and certification of
//! individual functionals `g` with `0 < g <= c v`.

use std::fmt;

use nalgebra::RowDVector;
use serde::{Deserialize, Serialize};

use crate::certificate::{DriftCertificate, Variant};
use crate::error::{Error, Result};
use crate::qbd::{top_layer_weighted_sum, QbdSolution, TailSum, MAX_TAIL_TERMS};

/// Relative slack in `g <= c v` absorbing the rounding of normalized scales.
const VALIDITY_SLACK: f64 = 1e-12;

/// `ln(1 - e^{-x})` for `x > 0`.
fn ln_one_minus_exp_neg(x: f64) -> f64 {
    (-(-x).exp_m1()).ln()
}

fn logsumexp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBound {
    pub value: f64,
    /// `sum_k [n]pi(k, n) e^{k theta1}`.
    pub weighted: TailSum,
    /// `sum_k [n]pi(k, n)`.
    pub unweighted: TailSum,
    /// The same bound from the closed-form level sums, when both exist.
    pub closed_form: Option<f64>,
}

fn combine(cert: &DriftCertificate, n: usize, s_w: f64, s_0: f64) -> f64 {
    let t = cert.theta;
    let weighted = if s_w > 0.0 {
        (t.theta1 + t.theta2 + n as f64 * t.theta2 + s_w.ln()).exp()
    } else {
        0.0
    };
    12.0 / cert.c * (weighted + cert.b * s_0)
}

/// `E(n) = (12/c) sum_k [n]pi(k,n) { e^{theta1+theta2} e^{k theta1 + n theta2} + b }`,
/// evaluated with certified level tails so the value is an upper bound.
pub fn error_bound_e(sol: &QbdSolution, cert: &DriftCertificate, tail_tol: f64) -> ErrorBound {
    let weighted = top_layer_weighted_sum(sol, cert.theta.theta1, cert, tail_tol);
    let unweighted = top_layer_weighted_sum(sol, 0.0, cert, tail_tol);
    let value = combine(cert, sol.n, weighted.value, unweighted.value);
    let closed_form = weighted
        .closed_form
        .zip(unweighted.closed_form)
        .map(|(w, u)| combine(cert, sol.n, w, u));
    ErrorBound { value, weighted, unweighted, closed_form }
}

/// `ln E~(n)`, computed entirely in log space.
pub fn log_error_bound_e_tilde(cert: &DriftCertificate, n: usize) -> f64 {
    let (t, tt) = (cert.theta, cert.theta_tilde);
    let n = n as f64;
    let first = t.theta1 + t.theta2 - n * (tt.theta2 - t.theta2) - ln_one_minus_exp_neg(tt.theta1 - t.theta1);
    let second = cert.b.ln() - n * tt.theta2 - ln_one_minus_exp_neg(tt.theta1);
    (12.0 * cert.b_tilde / cert.c).ln() + logsumexp(first, second)
}

/// `E~(n) = (12 b~/c) [ e^{theta1+theta2} e^{-n(theta2~-theta2)} / (1 - e^{-(theta1~-theta1)})
///                     + b e^{-n theta2~} / (1 - e^{-theta1~}) ]`.
pub fn error_bound_e_tilde(cert: &DriftCertificate, n: usize) -> f64 {
    log_error_bound_e_tilde(cert, n).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBoundReport {
    pub n: usize,
    pub e_n: f64,
    pub e_tilde_n: f64,
    pub e_closed_form: Option<f64>,
    pub tail_weighted: TailSum,
    pub tail_unweighted: TailSum,
    pub certificate: DriftCertificate,
}

pub fn error_bound_report(sol: &QbdSolution, cert: &DriftCertificate, tail_tol: f64) -> ErrorBoundReport {
    let e = error_bound_e(sol, cert, tail_tol);
    ErrorBoundReport {
        n: sol.n,
        e_n: e.value,
        e_tilde_n: error_bound_e_tilde(cert, sol.n),
        e_closed_form: e.closed_form,
        tail_weighted: e.weighted,
        tail_unweighted: e.unweighted,
        certificate: *cert,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    First,
    Second,
}

impl Axis {
    fn pick(self, s: (u64, u64)) -> u64 {
        match self {
            Axis::First => s.0,
            Axis::Second => s.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionalKind {
    Ones,
    /// `alpha e^{<theta, s>}`, i.e. `alpha c v`.
    ScaledLyapunov { alpha: f64 },
    /// Indicator of `[x0, x1] x [y0, y1]` (inclusive).
    WindowIndicator { x: [u64; 2], y: [u64; 2] },
    /// `1 + min(s_axis, cap)`.
    TruncatedCoordinate { axis: Axis, cap: u64 },
    /// Finitely many values plus a constant elsewhere. Validity is checked
    /// only conservatively; `asserted_valid` accepts it regardless.
    Tabulated { entries: Vec<([u64; 2], f64)>, outside: f64, asserted_valid: bool },
}

impl fmt::Display for FunctionalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionalKind::Ones => write!(f, "ones"),
            FunctionalKind::ScaledLyapunov { alpha } => write!(f, "scaled_lyapunov(alpha={alpha})"),
            FunctionalKind::WindowIndicator { x, y } => {
                write!(f, "window_indicator([{},{}]x[{},{}])", x[0], x[1], y[0], y[1])
            }
            FunctionalKind::TruncatedCoordinate { axis, cap } => {
                let a = if *axis == Axis::First { 1 } else { 2 };
                write!(f, "truncated_coordinate(axis={a},cap={cap})")
            }
            FunctionalKind::Tabulated { entries, .. } => write!(f, "tabulated({} entries)", entries.len()),
        }
    }
}

/// `g = scale * kind(s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSpec {
    pub kind: FunctionalKind,
    pub scale: f64,
    pub description: String,
}

impl FunctionalSpec {
    pub fn new(kind: FunctionalKind) -> Self {
        Self::scaled(kind, 1.0)
    }

    pub fn scaled(kind: FunctionalKind, scale: f64) -> Self {
        let description = if scale == 1.0 { kind.to_string() } else { format!("{scale:e} * {kind}") };
        FunctionalSpec { kind, scale, description }
    }

    /// Rescaled to the largest multiple that still satisfies `g <= c v`.
    /// Relative errors do not depend on the scale.
    pub fn normalized(kind: FunctionalKind, cert: &DriftCertificate) -> Self {
        let (scale, _) = max_valid_scale(&kind, cert);
        Self::scaled(kind, scale)
    }

    fn raw(&self, s: (u64, u64), cert: &DriftCertificate) -> f64 {
        match &self.kind {
            FunctionalKind::Ones => 1.0,
            FunctionalKind::ScaledLyapunov { alpha } => {
                alpha * (cert.theta.theta1 * s.0 as f64 + cert.theta.theta2 * s.1 as f64).exp()
            }
            FunctionalKind::WindowIndicator { x, y } => {
                if (x[0]..=x[1]).contains(&s.0) && (y[0]..=y[1]).contains(&s.1) {
                    1.0
                } else {
                    0.0
                }
            }
            FunctionalKind::TruncatedCoordinate { axis, cap } => 1.0 + axis.pick(s).min(*cap) as f64,
            FunctionalKind::Tabulated { entries, outside, .. } => entries
                .iter()
                .find(|(p, _)| p[0] == s.0 && p[1] == s.1)
                .map_or(*outside, |(_, v)| *v),
        }
    }

    pub fn eval(&self, s: (u64, u64), cert: &DriftCertificate) -> f64 {
        self.scale * self.raw(s, cert)
    }
}

/// Largest `scale` with `scale * kind(s) <= e^{<theta, s>}` everywhere, and
/// the state where it binds.
fn max_valid_scale(kind: &FunctionalKind, cert: &DriftCertificate) -> (f64, [u64; 2]) {
    let t = cert.theta;
    let cv = |s: [u64; 2]| (t.theta1 * s[0] as f64 + t.theta2 * s[1] as f64).exp();
    match kind {
        FunctionalKind::Ones => (1.0, [0, 0]),
        FunctionalKind::ScaledLyapunov { alpha } => (1.0 / alpha, [0, 0]),
        FunctionalKind::WindowIndicator { x, y } => (cv([x[0], y[0]]), [x[0], y[0]]),
        FunctionalKind::TruncatedCoordinate { axis, cap } => {
            // e^{theta x}/(1+x) is unimodal with its minimum at x = 1/theta - 1,
            // and 1+min(x,cap) is constant beyond the cap
            let th = match axis {
                Axis::First => t.theta1,
                Axis::Second => t.theta2,
            };
            let ratio = |x: u64| (th * x as f64).exp() / (1.0 + x as f64);
            let star = (1.0 / th - 1.0).max(0.0);
            let candidates = [0, star.floor() as u64, star.ceil() as u64, *cap];
            let x = candidates
                .into_iter()
                .map(|x| x.min(*cap))
                .min_by(|a, b| ratio(*a).total_cmp(&ratio(*b)))
                .unwrap();
            let state = match axis {
                Axis::First => [x, 0],
                Axis::Second => [0, x],
            };
            (ratio(x), state)
        }
        FunctionalKind::Tabulated { entries, outside, .. } => {
            let mut best = if *outside > 0.0 { (1.0 / outside, [u64::MAX, u64::MAX]) } else { (f64::INFINITY, [0, 0]) };
            for (s, v) in entries {
                if *v > 0.0 && cv(*s) / v < best.0 {
                    best = (cv(*s) / v, *s);
                }
            }
            best
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValidity {
    pub valid: bool,
    /// False when validity rests on the user's assertion alone.
    pub verified: bool,
    /// A state where `g > c v` or `g <= 0`.
    pub witness: Option<[u64; 2]>,
    pub note: Option<String>,
}

/// Decides `0 < g <= c v` on the whole quarter plane.
///
/// Window indicators vanish outside their window; they are accepted as the
/// limit of `1_W + eps`, for which the relative bound is continuous in `eps`.
pub fn validate_functional(f: &FunctionalSpec, cert: &DriftCertificate) -> FunctionalValidity {
    let fail = |witness: [u64; 2], note: &str| FunctionalValidity {
        valid: false,
        verified: true,
        witness: Some(witness),
        note: Some(note.to_string()),
    };
    if !(f.scale > 0.0 && f.scale.is_finite()) {
        return fail([0, 0], "scale must be positive and finite");
    }
    let mut note = None;
    match &f.kind {
        FunctionalKind::ScaledLyapunov { alpha } if !(*alpha > 0.0) => return fail([0, 0], "alpha must be positive"),
        FunctionalKind::WindowIndicator { x, y } => {
            if x[0] > x[1] || y[0] > y[1] {
                return fail([x[0], y[0]], "empty window");
            }
            note = Some("indicator is zero outside its window; accepted as a limit of positive functionals".into());
        }
        FunctionalKind::Tabulated { entries, outside, asserted_valid } => {
            let nonpositive = entries.iter().find(|(_, v)| !(*v > 0.0)).map(|(s, _)| *s);
            let (limit, at) = max_valid_scale(&f.kind, cert);
            let witness = nonpositive.or((!(*outside > 0.0)).then_some([u64::MAX, u64::MAX])).or(
                (f.scale > limit * (1.0 + VALIDITY_SLACK)).then_some(at),
            );
            return match (witness, asserted_valid) {
                (None, _) => FunctionalValidity { valid: true, verified: true, witness: None, note: None },
                (Some(_), true) => FunctionalValidity {
                    valid: true,
                    verified: false,
                    witness,
                    note: Some("UNVERIFIED: accepted on the user's assertion".into()),
                },
                (Some(w), false) => fail(w, "conservative check failed"),
            };
        }
        _ => {}
    }
    let (limit, at) = max_valid_scale(&f.kind, cert);
    if f.scale > limit * (1.0 + VALIDITY_SLACK) {
        return fail(at, "g exceeds c v");
    }
    FunctionalValidity { valid: true, verified: true, witness: None, note }
}

/// A stationary expectation known to lie in `[value - remainder, value]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub value: f64,
    pub remainder: f64,
}

impl Expectation {
    fn exact(value: f64) -> Self {
        Expectation { value, remainder: 0.0 }
    }
}

/// Sums `per_level(k, pi(k))` over levels, stopping once `tail(K)` bounds the
/// rest by `tol` relative to the partial sum.
fn level_series(
    sol: &QbdSolution,
    tol: f64,
    mut per_level: impl FnMut(usize, &RowDVector<f64>) -> f64,
    tail: impl Fn(usize) -> f64,
) -> Expectation {
    let mut partial = 0.0;
    let mut remainder = f64::INFINITY;
    for (k, level) in sol.levels().enumerate().take(MAX_TAIL_TERMS) {
        partial += per_level(k, &level);
        remainder = tail(k);
        if remainder <= tol * partial || remainder < 1e-300 {
            break;
        }
    }
    Expectation { value: partial + remainder, remainder }
}

/// `[n]pi g`, with level tails certified through `[n]pi(s) <= b~ e^{-<theta~, s>}`
/// where no closed form is used.
pub fn qbd_expectation(sol: &QbdSolution, f: &FunctionalSpec, cert: &DriftCertificate, tail_tol: f64) -> Expectation {
    let n = sol.n;
    let total = |v: &[f64]| v.iter().sum::<f64>();
    match &f.kind {
        FunctionalKind::Ones => Expectation::exact(f.scale * total(&sol.phase_marginal())),
        FunctionalKind::ScaledLyapunov { alpha } => {
            let (t, tt) = (cert.theta, cert.theta_tilde);
            let phase_w: Vec<f64> = (0..=n).map(|i| (t.theta2 * i as f64).exp()).collect();
            let coef = f.scale * alpha;
            if let Some(w) = sol.weighted_level_sum(t.theta1.exp()) {
                return Expectation::exact(coef * w.iter().zip(&phase_w).map(|(a, b)| a * b).sum::<f64>());
            }
            let d1 = tt.theta1 - t.theta1;
            let d2 = tt.theta2 - t.theta2;
            let phase_env = -(-(d2 * (n + 1) as f64)).exp_m1() / -(-d2).exp_m1();
            level_series(
                sol,
                tail_tol,
                |k, l| coef * (t.theta1 * k as f64).exp() * l.iter().zip(&phase_w).map(|(a, b)| a * b).sum::<f64>(),
                |k| coef * cert.b_tilde * phase_env * (-(d1 * (k + 1) as f64) - ln_one_minus_exp_neg(d1)).exp(),
            )
        }
        FunctionalKind::WindowIndicator { x, y } => {
            if y[0] as usize > n {
                return Expectation::exact(0.0);
            }
            let hi = (y[1] as usize).min(n);
            let mut sum = 0.0;
            for (k, l) in sol.levels().enumerate().take(x[1] as usize + 1) {
                if k as u64 >= x[0] {
                    sum += (y[0] as usize..=hi).map(|i| l[i]).sum::<f64>();
                }
            }
            Expectation::exact(f.scale * sum)
        }
        FunctionalKind::TruncatedCoordinate { axis: Axis::Second, cap } => {
            let m = sol.phase_marginal();
            let s = m.iter().enumerate().map(|(i, p)| (1.0 + (i as u64).min(*cap) as f64) * p).sum::<f64>();
            Expectation::exact(f.scale * s)
        }
        FunctionalKind::TruncatedCoordinate { axis: Axis::First, cap } => {
            let all = total(&sol.phase_marginal());
            let mut below = 0.0;
            let mut weighted = 0.0;
            for (k, l) in sol.levels().enumerate() {
                if k as u64 > *cap {
                    break;
                }
                let mass = l.sum();
                below += mass;
                weighted += (1.0 + k as f64) * mass;
                if mass == 0.0 {
                    break;
                }
            }
            let beyond = (all - below).max(0.0);
            Expectation::exact(f.scale * (weighted + (1.0 + *cap as f64) * beyond))
        }
        FunctionalKind::Tabulated { entries, outside, .. } => {
            let all = total(&sol.phase_marginal());
            let mut inside = 0.0;
            let mut sum = 0.0;
            for (s, v) in entries {
                let p = sol.pi_at(s[0] as usize, s[1] as usize);
                inside += p;
                sum += v * p;
            }
            Expectation::exact(f.scale * (sum + outside * (all - inside).max(0.0)))
        }
    }
}

/// `[n]pi v` (or `[n]pi v~`) in closed form, when `sp(e^{theta1} R) < 1`.
pub fn qbd_lyapunov_moment(sol: &QbdSolution, cert: &DriftCertificate, variant: Variant) -> Option<f64> {
    let t = cert.tilt(variant);
    let (c, _) = cert.drift_constants(variant);
    let w = sol.weighted_level_sum(t.theta1.exp())?;
    Some(w.iter().enumerate().map(|(i, p)| p * (t.theta2 * i as f64).exp()).sum::<f64>() / c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifiedInterval {
    pub lower: f64,
    /// Absent when `E(n) >= 1`.
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifiedFunctional {
    pub functional: FunctionalSpec,
    pub validity: FunctionalValidity,
    pub approx_value: f64,
    pub approx_remainder: f64,
    pub relative_error_bound: f64,
    pub interval: CertifiedInterval,
    pub informative: bool,
    pub note: Option<String>,
}

/// Interval for `pi g` from `|[n]pi g - pi g| <= E(n) pi g`.
pub fn certify_functional(
    sol: &QbdSolution,
    cert: &DriftCertificate,
    f: &FunctionalSpec,
    e_n: f64,
    tail_tol: f64,
) -> Result<CertifiedFunctional> {
    let validity = validate_functional(f, cert);
    if !validity.valid {
        let w = validity.witness.unwrap_or([0, 0]);
        return Err(Error::InvalidParams(format!(
            "functional {} violates 0 < g <= c v at state ({}, {})",
            f.description, w[0], w[1]
        )));
    }
    let approx = qbd_expectation(sol, f, cert, tail_tol);
    let lo = approx.value - approx.remainder;
    let informative = e_n < 1.0;
    let interval = CertifiedInterval {
        lower: lo / (1.0 + e_n),
        upper: informative.then(|| approx.value / (1.0 - e_n)),
    };
    Ok(CertifiedFunctional {
        functional: f.clone(),
        validity,
        approx_value: approx.value,
        approx_remainder: approx.remainder,
        relative_error_bound: e_n,
        interval,
        informative,
        note: (!informative).then(|| "bound uninformative at this n".to_string()),
    })
}

/// The default functional catalog, each member rescaled to its largest valid multiple.
pub fn default_catalog(cert: &DriftCertificate) -> Vec<FunctionalSpec> {
    let kinds = [
        FunctionalKind::Ones,
        FunctionalKind::ScaledLyapunov { alpha: 1.0 },
        FunctionalKind::WindowIndicator { x: [0, 4], y: [0, 4] },
        FunctionalKind::TruncatedCoordinate { axis: Axis::First, cap: 20 },
        FunctionalKind::TruncatedCoordinate { axis: Axis::Second, cap: 20 },
    ];
    kinds.into_iter().map(|k| FunctionalSpec::normalized(k, cert)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::{certify, drift_certificate, SearchOptions, Tilt};
    use crate::model::{jackson_spec, JacksonParams, RandomWalkSpec};
    use crate::qbd::{solve_qbd, DEFAULT_TAIL_TOL};

    fn setup() -> (RandomWalkSpec, DriftCertificate) {
        let spec = jackson_spec(&JacksonParams::symmetric_reference());
        let (cert, _, _) = certify(&spec, &SearchOptions::default()).unwrap();
        (spec, cert)
    }

    #[test]
    fn e_below_e_tilde() {
        let (spec, cert) = setup();
        for n in [5, 10, 20, 40] {
            let sol = solve_qbd(&spec, n).unwrap();
            let e = error_bound_e(&sol, &cert, DEFAULT_TAIL_TOL);
            assert!(e.value <= error_bound_e_tilde(&cert, n), "n={n}");
            let closed = e.closed_form.unwrap();
            assert!((e.value - closed).abs() <= 1e-8 * closed);
        }
    }

    #[test]
    fn e_tilde_closed_form_at_zero() {
        let (_, cert) = setup();
        let (t, tt) = (cert.theta, cert.theta_tilde);
        let expected = 12.0 * cert.b_tilde / cert.c
            * ((t.theta1 + t.theta2).exp() / (1.0 - (-(tt.theta1 - t.theta1)).exp())
                + cert.b / (1.0 - (-tt.theta1).exp()));
        assert!((error_bound_e_tilde(&cert, 0) - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn e_tilde_decreases_with_dominant_ratio() {
        let (_, cert) = setup();
        let mut prev = error_bound_e_tilde(&cert, 0);
        for n in 1..=200 {
            let cur = error_bound_e_tilde(&cert, n);
            assert!(cur < prev);
            prev = cur;
        }
        let ratio = error_bound_e_tilde(&cert, 201) / error_bound_e_tilde(&cert, 200);
        let limit = (-(cert.theta_tilde.theta2 - cert.theta.theta2)).exp();
        assert!((ratio - limit).abs() < 1e-6);
    }

    #[test]
    fn catalog_validity() {
        let cert = drift_certificate(
            &jackson_spec(&JacksonParams::symmetric_reference()),
            Tilt::new(0.2, 0.2).unwrap(),
            Tilt::new(0.3, 0.3).unwrap(),
        )
        .unwrap();
        assert!(validate_functional(&FunctionalSpec::new(FunctionalKind::Ones), &cert).valid);
        let lyap = FunctionalSpec::new(FunctionalKind::ScaledLyapunov { alpha: 1.0 });
        assert!(validate_functional(&lyap, &cert).valid);
        let too_big = FunctionalSpec::new(FunctionalKind::ScaledLyapunov { alpha: 1.5 });
        assert!(!validate_functional(&too_big, &cert).valid);

        // 1 + x > e^{0.2 x} already at x = 1
        let coord = FunctionalSpec::new(FunctionalKind::TruncatedCoordinate { axis: Axis::First, cap: 10 });
        let v = validate_functional(&coord, &cert);
        assert!(!v.valid);
        let w = v.witness.unwrap();
        assert!(1.0 + w[0] as f64 > (0.2 * w[0] as f64).exp());

        let fixed = FunctionalSpec::normalized(coord.kind.clone(), &cert);
        assert!(validate_functional(&fixed, &cert).valid);
        for x in 0..200u64 {
            assert!(fixed.eval((x, 0), &cert) <= (0.2 * x as f64).exp() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn normalized_scale_is_tight() {
        let (_, cert) = setup();
        for f in default_catalog(&cert) {
            assert!(validate_functional(&f, &cert).valid, "{}", f.description);
            let bigger = FunctionalSpec::scaled(f.kind.clone(), f.scale * 1.001);
            assert!(!validate_functional(&bigger, &cert).valid, "{}", f.description);
        }
    }

    #[test]
    fn ones_interval_contains_one() {
        let (spec, cert) = setup();
        let sol = solve_qbd(&spec, 20).unwrap();
        let e = error_bound_e(&sol, &cert, DEFAULT_TAIL_TOL).value;
        assert!(e < 1.0);
        let r = certify_functional(&sol, &cert, &FunctionalSpec::new(FunctionalKind::Ones), e, DEFAULT_TAIL_TOL)
            .unwrap();
        assert!((r.approx_value - 1.0).abs() < 1e-12);
        assert!(r.interval.lower <= 1.0 && r.interval.upper.unwrap() >= 1.0);
    }

    #[test]
    fn uninformative_bound_keeps_lower_side_only() {
        let (spec, cert) = setup();
        let sol = solve_qbd(&spec, 2).unwrap();
        let r = certify_functional(&sol, &cert, &FunctionalSpec::new(FunctionalKind::Ones), 3.0, DEFAULT_TAIL_TOL)
            .unwrap();
        assert!(!r.informative);
        assert_eq!(r.interval.upper, None);
        assert!((r.interval.lower - r.approx_value / 4.0).abs() < 1e-15);
    }

    #[test]
    fn expectations_against_level_summation() {
        let (spec, cert) = setup();
        let sol = solve_qbd(&spec, 8).unwrap();
        let brute = |f: &FunctionalSpec| {
            let mut s = 0.0;
            for (k, l) in sol.levels().take(600).enumerate() {
                for i in 0..=8 {
                    s += l[i] * f.eval((k as u64, i as u64), &cert);
                }
            }
            s
        };
        for f in default_catalog(&cert) {
            let e = qbd_expectation(&sol, &f, &cert, DEFAULT_TAIL_TOL);
            let b = brute(&f);
            assert!((e.value - b).abs() <= 1e-10 * b, "{}: {} vs {b}", f.description, e.value);
        }
        let tab = FunctionalSpec::new(FunctionalKind::Tabulated {
            entries: vec![([0, 0], 0.5), ([3, 2], 2.0)],
            outside: 1.0,
            asserted_valid: false,
        });
        let e = qbd_expectation(&sol, &tab, &cert, DEFAULT_TAIL_TOL).value;
        assert!((e - brute(&tab)).abs() < 1e-12);
    }

    #[test]
    fn tabulated_assertion_is_marked_unverified() {
        let (_, cert) = setup();
        let tab = FunctionalSpec::new(FunctionalKind::Tabulated {
            entries: vec![([0, 0], 5.0)],
            outside: 1.0,
            asserted_valid: true,
        });
        let v = validate_functional(&tab, &cert);
        assert!(v.valid && !v.verified);
    }

    #[test]
    fn lyapunov_moments_within_drift_bound() {
        let (spec, cert) = setup();
        for n in [5, 10, 20] {
            let sol = solve_qbd(&spec, n).unwrap();
            let m = qbd_lyapunov_moment(&sol, &cert, Variant::Tilde).unwrap();
            assert!(m <= cert.b_tilde / cert.c_tilde, "n={n}: {m}");
        }
    }
}
