use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use rrw_qbd::certificate::{
    drift_certificate, find_theta, find_theta_tilde, in_feasible_region, DriftCertificate, GammaValues, SearchOptions,
    ThetaSearch, TildeSearch, Tilt,
};
use rrw_qbd::model::{
    check_negative_face_drift, check_stability, parse_model, validate_spec, JacksonParams, ModelFile, RandomWalkSpec,
};
use rrw_qbd::Error;

use crate::args::{CommonArgs, Format, TiltArgs};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Code {
    Ok = 0,
    Invalid = 1,
    Parse = 2,
    Unstable = 3,
    Infeasible = 4,
    Memory = 5,
    VerifyFailed = 6,
    Numerical = 7,
}

/// Rendered report plus the exit code it carries.
#[derive(Debug)]
pub struct Output {
    pub body: String,
    pub path: Option<PathBuf>,
    pub code: Code,
    /// Printed to stderr after the report.
    pub message: Option<String>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: Code,
    pub message: String,
}

impl CliError {
    pub fn new(code: Code, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(Code::Parse, message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse(_) => Code::Parse,
            Error::InvalidParams(_) | Error::InvalidSpec(_) | Error::TruncationLevel(_) => Code::Invalid,
            Error::NoFeasibleTilt { .. } | Error::InfeasibleTilt(_) => Code::Infeasible,
            Error::WindowTooLarge { .. } => Code::Memory,
            Error::RateMatrixNotConverged { .. } | Error::Singular(_) | Error::Periodic(_) => Code::Numerical,
        };
        CliError::new(code, e.to_string())
    }
}

/// Wall-clock phases, recorded only when requested.
pub struct Timings {
    enabled: bool,
    phases: BTreeMap<String, f64>,
}

impl Timings {
    pub fn new(enabled: bool) -> Self {
        Timings { enabled, phases: BTreeMap::new() }
    }

    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        if self.enabled {
            self.phases.insert(phase.to_string(), start.elapsed().as_secs_f64());
        }
        out
    }

    pub fn finish(self) -> Option<BTreeMap<String, f64>> {
        self.enabled.then_some(self.phases)
    }
}

pub struct Model {
    pub file: ModelFile,
    pub spec: RandomWalkSpec,
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self.file {
            ModelFile::Jackson(_) => "jackson",
            ModelFile::General(_) => "general",
        }
    }

    pub fn jackson(&self) -> Option<&JacksonParams> {
        self.file.jackson()
    }
}

pub fn load_model(args: &CommonArgs) -> Result<Model, CliError> {
    let text = std::fs::read_to_string(&args.model)
        .map_err(|e| CliError::parse(format!("cannot read {}: {e}", args.model.display())))?;
    let file = parse_model(&text).map_err(|e| match e {
        Error::Parse(msg) => CliError::parse(format!("{}: {msg}", args.model.display())),
        other => CliError::from(other),
    })?;
    let spec = file.spec();
    Ok(Model { file, spec })
}

/// Loads the model and stops with exit 1 on validation failures.
pub fn load_valid_model(args: &CommonArgs) -> Result<Model, CliError> {
    let model = load_model(args)?;
    let report = validate_spec(&model.spec);
    if !report.is_valid() {
        let list: Vec<String> = report.violations.iter().map(|v| format!("  - {v}")).collect();
        return Err(CliError::new(Code::Invalid, format!("model is invalid:\n{}", list.join("\n"))));
    }
    Ok(model)
}

fn rho_note(model: &Model) -> String {
    match model.jackson() {
        Some(p) => {
            let (r1, r2) = p.rho();
            format!(" (rho1 = {r1:.17}, rho2 = {r2:.17})")
        }
        None => String::new(),
    }
}

/// Exit 3 when the stability conditions fail, exit 4 when the face drifts do.
pub fn require_stable(model: &Model) -> Result<(), CliError> {
    let v = check_stability(&model.spec);
    if !v.stable {
        let failing: Vec<String> = v
            .diagnostics
            .iter()
            .filter(|i| !i.holds)
            .map(|i| {
                let case = i.case.map(|c| format!("case {c:?}: ")).unwrap_or_default();
                format!("{case}{} = {:.17e}", i.quantity, i.value)
            })
            .collect();
        return Err(CliError::new(
            Code::Unstable,
            format!("walk is not stable{}; failing conditions: {}", rho_note(model), failing.join(", ")),
        ));
    }
    let a2 = check_negative_face_drift(&model.spec);
    if !a2.holds {
        let failing: Vec<String> = a2
            .diagnostics
            .iter()
            .filter(|i| !i.holds)
            .map(|i| format!("{} = {:.17e}", i.quantity, i.value))
            .collect();
        return Err(CliError::new(
            Code::Infeasible,
            format!("negative face-drift condition fails: {}", failing.join(", ")),
        ));
    }
    Ok(())
}

fn gamma_text(g: &GammaValues) -> String {
    format!(
        "gamma origin = {:.17}, face1 = {:.17}, face2 = {:.17}, interior = {:.17}",
        g.origin, g.face1, g.face2, g.interior
    )
}

fn override_tilt(spec: &RandomWalkSpec, (t1, t2): (f64, f64), flag: &str) -> Result<Tilt, CliError> {
    let tilt = Tilt::new(t1, t2).map_err(|e| CliError::new(Code::Infeasible, format!("--{flag}: {e}")))?;
    if !in_feasible_region(spec, tilt) {
        return Err(CliError::new(
            Code::Infeasible,
            format!("--{flag} ({t1}, {t2}) is infeasible: {}", gamma_text(&GammaValues::at(spec, tilt))),
        ));
    }
    Ok(tilt)
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateSource {
    pub theta: &'static str,
    pub theta_tilde: &'static str,
    pub kappa: f64,
    pub theta_search: Option<ThetaSearch>,
    pub tilde_search: Option<TildeSearch>,
}

pub fn build_certificate(spec: &RandomWalkSpec, tilt: &TiltArgs) -> Result<(DriftCertificate, CertificateSource), CliError> {
    let opts = SearchOptions { kappa: tilt.kappa, ..Default::default() };
    let mut source = CertificateSource {
        theta: "override",
        theta_tilde: "override",
        kappa: tilt.kappa,
        theta_search: None,
        tilde_search: None,
    };
    let theta = match tilt.theta {
        Some(p) => override_tilt(spec, p, "theta")?,
        None => {
            let search = find_theta(spec, &opts)?;
            source.theta = "search";
            source.theta_search = Some(search);
            search.theta
        }
    };
    let theta_tilde = match tilt.theta_tilde {
        Some(p) => override_tilt(spec, p, "theta-tilde")?,
        None => {
            let tilde = find_theta_tilde(spec, theta, &opts)?;
            source.theta_tilde = "ray search";
            source.tilde_search = Some(tilde);
            tilde.theta_tilde
        }
    };
    let cert = drift_certificate(spec, theta, theta_tilde)?;
    Ok((cert, source))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::new(Code::Numerical, format!("cannot serialize report: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Fixed 17-significant-digit rendering for CSV cells.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn to_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::new(Code::Numerical, format!("cannot write CSV: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::new(Code::Numerical, format!("cannot write CSV: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::new(Code::Numerical, e.to_string()))
}

/// Renders the report in the requested format.
pub fn render<T: Serialize>(
    args: &CommonArgs,
    report: &T,
    csv: impl FnOnce() -> Result<String, CliError>,
    code: Code,
) -> Result<Output, CliError> {
    let body = match args.format {
        Format::Json => to_json(report)?,
        Format::Csv => csv()?,
    };
    Ok(Output { body, path: args.out.clone(), code, message: None })
}
