use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use rrw_qbd::bounds::{
    certify_functional, default_catalog, error_bound_e_tilde, error_bound_report, qbd_expectation, CertifiedFunctional,
    CertifiedInterval, ErrorBoundReport, Expectation, FunctionalSpec,
};
use rrw_qbd::certificate::{check_drift_inequality, DriftCertificate, DriftCheck};
use rrw_qbd::model::{
    check_negative_face_drift, check_stability, validate_spec, wedge, MeanDrift, NegativeDriftVerdict, Region,
    StabilityVerdict, Violation,
};
use rrw_qbd::oracle::{dense_stationary, reference_vs_qbd, simulate_many, DenseOptions, SimulationResult};
use rrw_qbd::qbd::{solve_qbd, QbdSolution, SolutionSummary};

use crate::args::{BoundArgs, CommonArgs, SimulateArgs, SolveArgs, ThetaArgs, VerifyArgs};
use crate::pipeline::{
    build_certificate, load_model, load_valid_model, num, opt_num, render, require_stable, to_csv, CertificateSource,
    CliError, Code, Output, Timings, TOOL_VERSION,
};

#[derive(Serialize)]
struct ValidateReport {
    tool_version: &'static str,
    model: String,
    kind: &'static str,
    valid: bool,
    violations: Vec<Violation>,
    messages: Vec<String>,
}

pub fn validate(args: &CommonArgs) -> Result<Output, CliError> {
    let model = load_model(args)?;
    let report = validate_spec(&model.spec);
    let messages: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
    let valid = report.is_valid();
    let out = ValidateReport {
        tool_version: TOOL_VERSION,
        model: args.model.display().to_string(),
        kind: model.kind(),
        valid,
        violations: report.violations,
        messages: messages.clone(),
    };
    let code = if valid { Code::Ok } else { Code::Invalid };
    let mut output = render(
        args,
        &out,
        || to_csv(&["violation"], messages.iter().map(|m| vec![m.clone()])),
        code,
    )?;
    if !valid {
        output.message = Some(format!("model is invalid:\n  - {}", messages.join("\n  - ")));
    }
    Ok(output)
}

#[derive(Serialize)]
struct RegionDrift {
    region: Region,
    drift: MeanDrift,
}

#[derive(Serialize)]
struct DriftsReport {
    tool_version: &'static str,
    drifts: Vec<RegionDrift>,
    /// `mu^A ^ mu^B` for the pairs entering the stability conditions.
    wedges: BTreeMap<&'static str, f64>,
}

pub fn drifts(args: &CommonArgs) -> Result<Output, CliError> {
    let model = load_valid_model(args)?;
    let spec = &model.spec;
    let drifts: Vec<RegionDrift> = Region::ALL
        .into_iter()
        .map(|region| RegionDrift { region, drift: spec.drift(region) })
        .collect();
    let d = |r| spec.drift(r).as_array();
    let wedges = BTreeMap::from([
        ("interior^face1", wedge(d(Region::Interior), d(Region::Face1))),
        ("interior^face2", wedge(d(Region::Interior), d(Region::Face2))),
        ("face1^face2", wedge(d(Region::Face1), d(Region::Face2))),
    ]);
    let report = DriftsReport { tool_version: TOOL_VERSION, drifts, wedges };
    render(
        args,
        &report,
        || {
            to_csv(
                &["region", "mu1", "mu2"],
                report.drifts.iter().map(|r| vec![r.region.to_string(), num(r.drift.mu1), num(r.drift.mu2)]),
            )
        },
        Code::Ok,
    )
}

#[derive(Serialize)]
struct JacksonLoads {
    rho1: f64,
    rho2: f64,
    below_one: bool,
}

#[derive(Serialize)]
struct StabilityReport {
    tool_version: &'static str,
    stability: StabilityVerdict,
    negative_face_drift: NegativeDriftVerdict,
    jackson: Option<JacksonLoads>,
}

pub fn stability(args: &CommonArgs) -> Result<Output, CliError> {
    let model = load_valid_model(args)?;
    let stability = check_stability(&model.spec);
    let a2 = check_negative_face_drift(&model.spec);
    let jackson = model.jackson().map(|p| {
        let (rho1, rho2) = p.rho();
        JacksonLoads { rho1, rho2, below_one: p.is_stable() }
    });
    let gate = require_stable(&model).err();
    let report = StabilityReport { tool_version: TOOL_VERSION, stability, negative_face_drift: a2, jackson };
    let rows = || {
        to_csv(
            &["condition", "case", "quantity", "value", "holds"],
            report
                .stability
                .diagnostics
                .iter()
                .map(|i| ("stability", i))
                .chain(report.negative_face_drift.diagnostics.iter().map(|i| ("negative_face_drift", i)))
                .map(|(cond, i)| {
                    vec![
                        cond.to_string(),
                        i.case.map(|c| format!("{c:?}")).unwrap_or_default(),
                        i.quantity.clone(),
                        num(i.value),
                        i.holds.to_string(),
                    ]
                }),
        )
    };
    let mut out = render(args, &report, rows, gate.as_ref().map_or(Code::Ok, |e| e.code))?;
    out.message = gate.map(|e| format!("error: {}", e.message));
    Ok(out)
}

#[derive(Serialize)]
struct ThetaReport {
    tool_version: &'static str,
    certificate: DriftCertificate,
    source: CertificateSource,
}

fn certificate_rows(c: &DriftCertificate) -> Vec<Vec<String>> {
    let mut rows: Vec<(String, f64)> = [
        ("theta1", c.theta.theta1),
        ("theta2", c.theta.theta2),
        ("c", c.c),
        ("b", c.b),
        ("theta_tilde1", c.theta_tilde.theta1),
        ("theta_tilde2", c.theta_tilde.theta2),
        ("c_tilde", c.c_tilde),
        ("b_tilde", c.b_tilde),
    ]
    .map(|(k, v)| (k.to_string(), v))
    .into();
    for (prefix, g) in [("gamma", &c.gammas), ("gamma_tilde", &c.gammas_tilde)] {
        for (region, v) in [("origin", g.origin), ("face1", g.face1), ("face2", g.face2), ("interior", g.interior)] {
            rows.push((format!("{prefix}_{region}"), v));
        }
    }
    rows.into_iter().map(|(k, v)| vec![k, num(v)]).collect()
}

pub fn theta(args: &ThetaArgs) -> Result<Output, CliError> {
    let model = load_valid_model(&args.common)?;
    require_stable(&model)?;
    let (certificate, source) = build_certificate(&model.spec, &args.tilt)?;
    let report = ThetaReport { tool_version: TOOL_VERSION, certificate, source };
    render(&args.common, &report, || to_csv(&["quantity", "value"], certificate_rows(&certificate)), Code::Ok)
}

#[derive(Serialize)]
struct SolveReport {
    tool_version: &'static str,
    summary: SolutionSummary,
    level_marginal: Vec<f64>,
    phase_marginal: Vec<f64>,
    timings: Option<BTreeMap<String, f64>>,
}

pub fn solve(args: &SolveArgs) -> Result<Output, CliError> {
    let model = load_valid_model(&args.common)?;
    require_stable(&model)?;
    let mut timings = Timings::new(args.common.timings);
    let sol = timings.time("qbd_solve", || solve_qbd(&model.spec, args.n as usize))?;
    let report = SolveReport {
        tool_version: TOOL_VERSION,
        summary: sol.summary(),
        level_marginal: sol.level_marginal(args.levels),
        phase_marginal: sol.phase_marginal(),
        timings: timings.finish(),
    };
    let rows = || {
        let levels = report.level_marginal.iter().enumerate().map(|(k, &p)| ("level", k, p));
        let phases = report.phase_marginal.iter().enumerate().map(|(i, &p)| ("phase", i, p));
        to_csv(
            &["marginal", "index", "probability"],
            levels.chain(phases).map(|(m, i, p)| vec![m.to_string(), i.to_string(), num(p)]),
        )
    };
    render(&args.common, &report, rows, Code::Ok)
}

#[derive(Serialize)]
struct BoundRow {
    n: usize,
    bound: ErrorBoundReport,
    /// Tail terms summed for the weighted top-layer series.
    tail_terms: usize,
    informative: bool,
    functionals: Vec<CertifiedFunctional>,
}

#[derive(Serialize)]
struct BoundReport {
    tool_version: &'static str,
    certificate: DriftCertificate,
    source: CertificateSource,
    tail_tol: f64,
    rows: Vec<BoundRow>,
    timings: Option<BTreeMap<String, f64>>,
}

fn solve_all(spec: &rrw_qbd::model::RandomWalkSpec, levels: &[usize]) -> Result<Vec<QbdSolution>, CliError> {
    // rayon preserves input order, so the rows stay sorted by n
    levels.par_iter().map(|&n| solve_qbd(spec, n).map_err(CliError::from)).collect()
}

pub fn bound(args: &BoundArgs) -> Result<Output, CliError> {
    let model = load_valid_model(&args.common)?;
    require_stable(&model)?;
    let mut timings = Timings::new(args.common.timings);
    let (cert, source) = timings.time("certificate", || build_certificate(&model.spec, &args.tilt))?;
    let levels = args.levels.levels();
    let tol = args.levels.tail_tol;
    let sols = timings.time("qbd_solve", || solve_all(&model.spec, &levels))?;
    let catalog = default_catalog(&cert);
    let rows = timings.time("bounds", || {
        sols.par_iter()
            .map(|sol| {
                let bound = error_bound_report(sol, &cert, tol);
                let functionals = catalog
                    .iter()
                    .map(|f| certify_functional(sol, &cert, f, bound.e_n, tol))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(BoundRow {
                    n: sol.n,
                    tail_terms: bound.tail_weighted.terms_used,
                    informative: bound.e_n < 1.0,
                    bound,
                    functionals,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let report = BoundReport {
        tool_version: TOOL_VERSION,
        certificate: cert,
        source,
        tail_tol: tol,
        rows,
        timings: timings.finish(),
    };
    let csv = || {
        to_csv(
            &["n", "e_n", "e_tilde_n", "e_closed_form", "tail_terms", "tail_remainder", "informative"],
            report.rows.iter().map(|r| {
                vec![
                    r.n.to_string(),
                    num(r.bound.e_n),
                    num(r.bound.e_tilde_n),
                    opt_num(r.bound.e_closed_form),
                    r.tail_terms.to_string(),
                    num(r.bound.tail_weighted.remainder_bound),
                    r.informative.to_string(),
                ]
            }),
        )
    };
    render(&args.common, &report, csv, Code::Ok)
}

#[derive(Serialize)]
struct OracleSummary {
    window: (usize, usize),
    residual: f64,
    truncation_gap: Option<f64>,
    gap_window: Option<(usize, usize)>,
}

#[derive(Serialize)]
struct VerifyRow {
    n: usize,
    functional: String,
    e_n: f64,
    e_tilde_n: f64,
    pi_star_g: f64,
    qbd_g: f64,
    /// `|[n]pi - pi*| g / (pi* g)`.
    observed_error: f64,
    signed_error: f64,
    epsilon_ref: f64,
    interval: CertifiedInterval,
    within_bound: bool,
}

#[derive(Serialize)]
struct Assertion {
    name: &'static str,
    pass: bool,
    detail: String,
}

#[derive(Serialize)]
struct VerifyReport {
    tool_version: &'static str,
    certificate: DriftCertificate,
    source: CertificateSource,
    /// Factor applied to c by the debug flag; bounds below use the altered constant.
    corrupted_c_factor: Option<f64>,
    oracle: OracleSummary,
    drift_check: DriftCheck,
    rows: Vec<VerifyRow>,
    assertions: Vec<Assertion>,
    pass: bool,
    timings: Option<BTreeMap<String, f64>>,
}

pub fn verify(args: &VerifyArgs) -> Result<Output, CliError> {
    let model = load_valid_model(&args.common)?;
    require_stable(&model)?;
    let spec = &model.spec;
    let mut timings = Timings::new(args.common.timings);
    let (cert, source) = timings.time("certificate", || build_certificate(spec, &args.tilt))?;
    // the catalog and the oracle comparison keep the honest certificate;
    // only the bound and the drift check see the altered c
    let used = args.corrupt_c.map_or(cert, |f| cert.with_corrupted_c(f));
    let levels = args.levels.levels();
    let tol = args.levels.tail_tol;
    let m = args.oracle_window as usize;
    let opts = DenseOptions {
        gap_delta: args.gap_delta as usize,
        memory_limit: args.memory_limit_mib.saturating_mul(1 << 20),
    };
    let (reference, sols) = timings.time("oracle_and_qbd", || {
        rayon::join(|| dense_stationary(spec, m, m, &opts), || solve_all(spec, &levels))
    });
    let reference = reference?;
    let sols = sols?;
    let eps = reference.epsilon();
    let drift_check = timings.time("drift_check", || check_drift_inequality(spec, &used, args.drift_window));
    let catalog = default_catalog(&cert);

    let per_n: Vec<(Vec<VerifyRow>, f64, f64, f64, f64)> = timings.time("compare", || {
        sols.par_iter()
            .map(|sol| {
                let bound = error_bound_report(sol, &used, tol);
                let e_tilde = error_bound_e_tilde(&used, sol.n);
                let rows = catalog
                    .iter()
                    .map(|f| {
                        let o = reference_vs_qbd(sol, &cert, &reference, f);
                        let c = certify_functional(sol, &used, f, bound.e_n, tol)?;
                        Ok(VerifyRow {
                            n: sol.n,
                            functional: f.description.clone(),
                            e_n: bound.e_n,
                            e_tilde_n: e_tilde,
                            pi_star_g: o.pi_star_g,
                            qbd_g: o.qbd_g,
                            observed_error: o.weighted_abs,
                            signed_error: o.signed,
                            epsilon_ref: eps,
                            interval: c.interval,
                            within_bound: o.weighted_abs <= bound.e_n + eps,
                        })
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                Ok((rows, bound.e_n, e_tilde, sol.rate.residual, sol.balance_residual))
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;

    let mut rows = Vec::new();
    let mut ordering_ok = true;
    let mut worst_ratio = 0.0_f64;
    let mut worst_residual = (0.0_f64, 0.0_f64);
    for (r, e, et, res_r, res_b) in per_n {
        ordering_ok &= e <= et;
        worst_residual = (worst_residual.0.max(res_r), worst_residual.1.max(res_b));
        for row in &r {
            worst_ratio = worst_ratio.max(row.observed_error / (row.e_n + eps));
        }
        rows.extend(r);
    }
    let assertions = vec![
        Assertion {
            name: "drift_inequality",
            pass: drift_check.holds,
            detail: format!(
                "max relative excess {:.3e} at {:?} ({:?}) on {{0..{}}}^2",
                drift_check.max_relative_excess, drift_check.worst_state, drift_check.worst_variant, drift_check.window
            ),
        },
        Assertion {
            name: "qbd_residuals",
            pass: worst_residual.0 < 1e-12 && worst_residual.1 < 1e-10,
            detail: format!("R residual {:.3e}, balance residual {:.3e}", worst_residual.0, worst_residual.1),
        },
        Assertion {
            name: "reference_gap",
            pass: eps < 1e-6,
            detail: format!("truncation gap of the reference window {eps:.3e}"),
        },
        Assertion {
            name: "observed_error_within_bound",
            pass: rows.iter().all(|r| r.within_bound),
            detail: format!("max observed/(E(n) + eps_ref) = {worst_ratio:.6e}"),
        },
        Assertion {
            name: "e_below_e_tilde",
            pass: ordering_ok,
            detail: format!("E(n) <= E~(n) for n in {levels:?}: {ordering_ok}"),
        },
    ];
    let pass = assertions.iter().all(|a| a.pass);
    let summary: Vec<String> = assertions
        .iter()
        .map(|a| format!("{} {}: {}", if a.pass { "PASS" } else { "FAIL" }, a.name, a.detail))
        .collect();
    let report = VerifyReport {
        tool_version: TOOL_VERSION,
        certificate: cert,
        source,
        corrupted_c_factor: args.corrupt_c,
        oracle: OracleSummary {
            window: (reference.m1, reference.m2),
            residual: reference.residual,
            truncation_gap: reference.truncation_gap,
            gap_window: reference.gap_window,
        },
        drift_check,
        rows,
        assertions,
        pass,
        timings: timings.finish(),
    };
    let csv = || {
        to_csv(
            &[
                "n", "functional", "e_n", "e_tilde_n", "observed_error", "epsilon_ref", "pi_star_g", "qbd_g",
                "lower", "upper", "within_bound",
            ],
            report.rows.iter().map(|r| {
                vec![
                    r.n.to_string(),
                    r.functional.clone(),
                    num(r.e_n),
                    num(r.e_tilde_n),
                    num(r.observed_error),
                    num(r.epsilon_ref),
                    num(r.pi_star_g),
                    num(r.qbd_g),
                    num(r.interval.lower),
                    opt_num(r.interval.upper),
                    r.within_bound.to_string(),
                ]
            }),
        )
    };
    let mut out = render(&args.common, &report, csv, if pass { Code::Ok } else { Code::VerifyFailed })?;
    out.message = Some(summary.join("\n"));
    Ok(out)
}

#[derive(Serialize)]
struct SimulationRow {
    #[serde(flatten)]
    result: SimulationResult,
    /// `[n]pi g` when a cap height was given.
    qbd: Option<Expectation>,
}

#[derive(Serialize)]
struct SimulateReport {
    tool_version: &'static str,
    certificate: DriftCertificate,
    n: Option<usize>,
    results: Vec<SimulationRow>,
    timings: Option<BTreeMap<String, f64>>,
}

pub fn simulate(args: &SimulateArgs) -> Result<Output, CliError> {
    let model = load_valid_model(&args.common)?;
    require_stable(&model)?;
    let spec = &model.spec;
    let mut timings = Timings::new(args.common.timings);
    let (cert, _) = timings.time("certificate", || build_certificate(spec, &args.tilt))?;
    let catalog: Vec<FunctionalSpec> = default_catalog(&cert);
    let results = timings.time("simulate", || simulate_many(spec, &cert, &catalog, args.steps, args.seed))?;
    let n = args.n.map(|n| n as usize);
    let qbd = match n {
        Some(n) => {
            let sol = timings.time("qbd_solve", || solve_qbd(spec, n))?;
            catalog.iter().map(|f| Some(qbd_expectation(&sol, f, &cert, args.tail_tol))).collect()
        }
        None => vec![None; catalog.len()],
    };
    let report = SimulateReport {
        tool_version: TOOL_VERSION,
        certificate: cert,
        n,
        results: results.into_iter().zip(qbd).map(|(result, qbd)| SimulationRow { result, qbd }).collect(),
        timings: timings.finish(),
    };
    let csv = || {
        to_csv(
            &["functional", "estimate", "half_width", "steps", "seed", "qbd_value"],
            report.results.iter().map(|r| {
                vec![
                    r.result.functional.clone(),
                    num(r.result.estimate),
                    num(r.result.half_width),
                    r.result.steps.to_string(),
                    r.result.seed.to_string(),
                    opt_num(r.qbd.map(|q| q.value)),
                ]
            }),
        )
    };
    render(&args.common, &report, csv, Code::Ok)
}
