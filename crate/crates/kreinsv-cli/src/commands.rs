use rayon::prelude::*;
use serde_json::{json, Map, Value};

use kreinsv::asymptotics::{check_remainder_order, fit_constant, FitReport};
use kreinsv::geometry::transform_to_frame;
use kreinsv::modes::{fourier_galerkin_singular_values, krein_singular_values, SingularSpectrum};
use kreinsv::seeley::{laplacian_closed_form, predict, AsymptoticLaw, RemainderClass};
use kreinsv::symbol::{dtn_ntd_principal, kappa, operator_principal_symbol};
use kreinsv::{fd, Error, Kind};

use crate::checks;
use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Symbols,
    Constants,
    Modes,
    Fit,
    Verify,
    Oracle,
}

impl Command {
    fn default_format(self) -> &'static str {
        match self {
            Command::Symbols | Command::Modes | Command::Oracle => "csv",
            Command::Constants | Command::Fit | Command::Verify => "json",
        }
    }
}

/// Why a run stopped; maps onto the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Config(String),
    Admissibility(String),
    Numerical(String),
    /// The computation finished but a requested check did not pass.
    Check(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Check(_) => 1,
            Failure::Config(_) => 2,
            Failure::Admissibility(_) => 3,
            Failure::Numerical(_) => 4,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Failure::Check(_) => "check_failed",
            Failure::Config(_) => "config",
            Failure::Admissibility(_) => "admissibility",
            Failure::Numerical(_) => "numerical",
        }
    }

    pub fn reason(&self) -> &str {
        match self {
            Failure::Check(s) | Failure::Config(s) | Failure::Admissibility(s) | Failure::Numerical(s) => s,
        }
    }

    /// One JSON line for stderr.
    pub fn line(&self) -> String {
        json!({ "error": self.label(), "exit": self.exit_code(), "reason": self.reason() }).to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invalid(_) | Error::Ellipticity(_) => Failure::Config(e.to_string()),
            Error::Admissibility { mode, ref reason, min_shift } => Failure::Admissibility(match min_shift {
                Some(m) => format!("mode {mode}: {reason}; smallest admissible m0 is {m:.6}"),
                None => format!("mode {mode}: {reason}"),
            }),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Table { columns: Vec<&'static str>, rows: Vec<Vec<Value>> },
    Json(Value),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: Output,
    pub format: String,
    /// Failed check, reported after the output is written.
    pub failed: Option<String>,
}

impl Outcome {
    /// Render as text in the configured format; JSON embeds the resolved config.
    pub fn render(&self, cfg: &ExperimentConfig) -> String {
        let config = serde_json::to_value(cfg).expect("config serializes");
        match (&self.output, self.format.as_str()) {
            (Output::Table { columns, rows }, "csv") => table_csv(columns, rows),
            (Output::Table { columns, rows }, _) => {
                let rows: Vec<Value> = rows
                    .iter()
                    .map(|r| Value::Object(columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect()))
                    .collect();
                let mut out = serde_json::to_string_pretty(&json!({ "config": config, "rows": rows })).unwrap();
                out.push('\n');
                out
            }
            (Output::Json(v), "csv") => {
                let obj = v.as_object().cloned().unwrap_or_default();
                let (cols, vals): (Vec<String>, Vec<Value>) = obj.into_iter().filter(|(_, v)| !v.is_object() && !v.is_array()).unzip();
                let cols: Vec<&str> = cols.iter().map(|s| s.as_str()).collect();
                table_csv(&cols, &[vals])
            }
            (Output::Json(v), _) => {
                let mut obj = v.as_object().cloned().unwrap_or_default();
                obj.insert("config".into(), config);
                let mut out = serde_json::to_string_pretty(&Value::Object(obj)).unwrap();
                out.push('\n');
                out
            }
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn table_csv(columns: &[&str], rows: &[Vec<Value>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns).unwrap();
    for r in rows {
        w.write_record(r.iter().map(cell)).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

pub fn run(cmd: Command, cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let format = cfg.output.format.clone().unwrap_or_else(|| cmd.default_format().to_string());
    let (output, failed) = match cmd {
        Command::Symbols => (symbols(cfg)?, None),
        Command::Constants => (constants(cfg)?, None),
        Command::Modes => (modes(cfg)?, None),
        Command::Fit => fit(cfg)?,
        Command::Verify => verify(cfg)?,
        Command::Oracle => oracle(cfg)?,
    };
    Ok(Outcome { output, format, failed })
}

fn symbols(cfg: &ExperimentConfig) -> Result<Output, Failure> {
    let surface = cfg.surface();
    let coeffs = cfg.coefficient_field()?;
    let kind = cfg.kind();
    let strength = cfg.strength();
    let n = cfg.n();
    let [(a0, a1), (b0, b1)] = surface.domain();
    let (nt, ns, nd) = if n == 2 { (64, 1, 2) } else { (12, 24, 8) };
    let mut rows = Vec::new();
    for i in 0..nt {
        for j in 0..ns {
            let t = if n == 2 {
                [a0 + (a1 - a0) * i as f64 / nt as f64, 0.0]
            } else {
                [a0 + (a1 - a0) * (i as f64 + 0.5) / nt as f64, b0 + (b1 - b0) * j as f64 / ns as f64]
            };
            let frame = surface.frame_at(t);
            let local = transform_to_frame(&coeffs, &frame)?;
            for d in 0..nd {
                let w = 2.0 * std::f64::consts::PI * d as f64 / nd as f64;
                let xi: Vec<f64> = if n == 2 { vec![w.cos().signum()] } else { vec![w.cos(), w.sin()] };
                let s = kappa(&local, &xi)?;
                let (dtn, ntd) = dtn_ntd_principal(&s);
                let p0 = operator_principal_symbol(kind, &s, strength.eval(&frame))?;
                rows.push(vec![
                    json!(t[0]),
                    json!(t[1]),
                    json!(xi[0]),
                    json!(xi.get(1).copied().unwrap_or(0.0)),
                    json!(s.a_nn),
                    json!(s.b),
                    json!(s.c),
                    json!(s.kappa0),
                    json!(s.kappa_plus.re),
                    json!(s.kappa_plus.im),
                    json!(dtn),
                    json!(ntd),
                    json!(p0),
                ]);
            }
        }
    }
    let columns =
        vec!["t1", "t2", "xi1", "xi2", "a_nn", "b", "c", "kappa0", "kappa_plus_re", "kappa_plus_im", "dtn", "ntd", "symbol"];
    Ok(Output::Table { columns, rows })
}

fn law(cfg: &ExperimentConfig) -> Result<AsymptoticLaw, Failure> {
    let surface = cfg.surface();
    let coeffs = cfg.coefficient_field()?;
    Ok(predict(cfg.kind(), &surface, &coeffs, &cfg.strength(), cfg.solver.quadrature_tol)?)
}

fn constants(cfg: &ExperimentConfig) -> Result<Output, Failure> {
    let law = law(cfg)?;
    let coeffs = cfg.coefficient_field()?;
    let closed = match cfg.constant_strength() {
        Some(s) if coeffs.is_laplacian() => laplacian_closed_form(cfg.kind(), &cfg.surface(), &coeffs, s)
            .ok()
            .map(|(cp, c)| json!({ "c_prime": cp, "constant": c })),
        _ => None,
    };
    Ok(Output::Json(json!({
        "kind": law.kind.name(),
        "n": law.n,
        "order": law.order,
        "exponent": law.exponent,
        "c_prime": law.c_prime,
        "constant": law.constant,
        "remainder": law.remainder.name(),
        "closed_form": closed,
    })))
}

/// Singular values from the mode solver, or the Galerkin path for a varying α.
pub fn spectrum(cfg: &ExperimentConfig) -> Result<SingularSpectrum, Failure> {
    let geom = cfg
        .radial()
        .ok_or_else(|| Failure::Config("mode computations need shape circle or sphere".into()))?;
    if !cfg.coefficient_field()?.is_laplacian() {
        return Err(Failure::Config("mode computations need coefficients family identity with a = 0".into()));
    }
    let m0 = cfg.coefficients.m0;
    let cutoff = cfg.solver.mode_cutoff;
    match cfg.constant_strength() {
        Some(s) => Ok(krein_singular_values(cfg.kind(), &geom, m0, s, cutoff)?),
        None => {
            let coeffs = match cfg.strength() {
                kreinsv::seeley::Strength::Fourier(v) => v,
                _ => unreachable!(),
            };
            Ok(fourier_galerkin_singular_values(&coeffs, geom.r(), m0, cutoff, cfg.solver.guard_band)?)
        }
    }
}

fn exponent(kind: Kind, n: usize) -> f64 {
    kind.order() / (n - 1) as f64
}

fn modes(cfg: &ExperimentConfig) -> Result<Output, Failure> {
    let s = spectrum(cfg)?;
    let p = exponent(cfg.kind(), cfg.n());
    let rows = s
        .iter()
        .map(|(j, run)| {
            vec![json!(j), json!(run.value), json!(run.mode), json!(run.mult), json!((j as f64).powf(p) * run.value)]
        })
        .collect();
    Ok(Output::Table { columns: vec!["j", "s", "mode", "mult", "jp_s"], rows })
}

/// Flat-index window: [500, 4000] on the circle, degrees [300, 2000] on the sphere,
/// both clipped to what the cutoff provides.
pub fn default_window(cfg: &ExperimentConfig, len: usize) -> [usize; 2] {
    if let Some(w) = cfg.fit.window {
        return w;
    }
    if cfg.n() == 2 {
        [500.min(len / 8).max(1), 4000.min(len)]
    } else {
        let lmax = cfg.solver.mode_cutoff.min(2000);
        let lmin = 300.min(lmax * 3 / 20);
        [lmin * lmin + 1, ((lmax + 1) * (lmax + 1)).min(len)]
    }
}

pub fn default_tolerance(cfg: &ExperimentConfig, law: &AsymptoticLaw) -> f64 {
    cfg.fit.tolerance.unwrap_or(match (law.remainder, cfg.n()) {
        (RemainderClass::LittleO, _) => 0.05,
        (_, 2) => 0.01,
        _ => 0.02,
    })
}

pub fn fit_report(cfg: &ExperimentConfig) -> Result<(FitReport, AsymptoticLaw), Failure> {
    let law = law(cfg)?;
    let s = spectrum(cfg)?;
    let [lo, hi] = default_window(cfg, s.len());
    let report = fit_constant(&s, law.exponent, cfg.n(), (lo, hi), Some(law.constant))?;
    Ok((report, law))
}

fn fit(cfg: &ExperimentConfig) -> Result<(Output, Option<String>), Failure> {
    let (r, law) = fit_report(cfg)?;
    let tol = default_tolerance(cfg, &law);
    let expected = -1.0 / (cfg.n() - 1) as f64;
    let constant_ok = r.within(tol);
    let remainder_required = law.remainder == RemainderClass::BigOOneBetter;
    let remainder_ok = check_remainder_order(&r, expected);
    let mut verdict = Map::new();
    verdict.insert("constant_ok".into(), json!(constant_ok));
    verdict.insert("tolerance".into(), json!(tol));
    verdict.insert("remainder_required".into(), json!(remainder_required));
    verdict.insert("remainder_ok".into(), json!(remainder_ok));
    verdict.insert("expected_slope".into(), json!(expected));
    let out = json!({
        "kind": cfg.kind().name(),
        "exponent": r.exponent,
        "c_est": r.c_est,
        "c_stderr": r.c_stderr,
        "c_ref": r.c_ref,
        "rel_error": r.rel_error,
        "remainder_slope": r.remainder_slope,
        "remainder_class": law.remainder.name(),
        "j_min": r.j_min,
        "j_max": r.j_max,
        "method": r.method.name(),
        "verdict": Value::Object(verdict),
    });
    let failed = if !constant_ok {
        Some(format!("C_est = {} is not within {tol} of C_ref = {}", r.c_est, law.constant))
    } else if remainder_required && !remainder_ok {
        Some(format!("remainder slope {:?} exceeds {}", r.remainder_slope, expected + 0.15))
    } else {
        None
    };
    Ok((Output::Json(out), failed))
}

fn verify(cfg: &ExperimentConfig) -> Result<(Output, Option<String>), Failure> {
    let groups = checks::suite(cfg)?;
    let rows = groups
        .iter()
        .map(|g| vec![json!(g.name), json!(g.passed), json!(g.worst), json!(g.tolerance), json!(g.detail)])
        .collect::<Vec<_>>();
    let failed: Vec<&str> = groups.iter().filter(|g| !g.passed).map(|g| g.name).collect();
    let groups_json: Vec<Value> = groups
        .iter()
        .map(|g| json!({ "name": g.name, "passed": g.passed, "worst": g.worst, "tolerance": g.tolerance, "detail": g.detail }))
        .collect();
    let out = if cfg.output.format.as_deref() == Some("csv") {
        Output::Table { columns: vec!["group", "passed", "worst", "tolerance", "detail"], rows }
    } else {
        Output::Json(json!({ "passed": failed.is_empty(), "groups": groups_json }))
    };
    let failed = (!failed.is_empty()).then(|| format!("failed groups: {}", failed.join(", ")));
    Ok((out, failed))
}

pub const ORACLE_STEPS: [f64; 3] = [2e-3, 1e-3, 5e-4];
pub const ORACLE_MIN_ORDER: f64 = 1.8;

fn oracle(cfg: &ExperimentConfig) -> Result<(Output, Option<String>), Failure> {
    let geom = cfg
        .radial()
        .ok_or_else(|| Failure::Config("the oracle needs shape circle or sphere".into()))?;
    if !cfg.coefficient_field()?.is_laplacian() {
        return Err(Failure::Config("the oracle needs coefficients family identity with a = 0".into()));
    }
    let strength = cfg
        .constant_strength()
        .ok_or_else(|| Failure::Config("the oracle needs a constant strength".into()))?;
    let kind = cfg.kind();
    let m0 = cfg.coefficients.m0;
    let modes: Vec<usize> = (0..=cfg.solver.mode_cutoff.min(10)).collect();
    let tables = modes
        .par_iter()
        .map(|&k| fd::convergence_study(kind, &geom, m0, k, strength, &ORACLE_STEPS).map(|rows| (k, rows)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    let mut worst = f64::INFINITY;
    for (k, table) in &tables {
        for r in table {
            if let Some(o) = r.order {
                worst = worst.min(o);
            }
            rows.push(vec![
                json!(kind.name()),
                json!(k),
                json!(r.h),
                json!(r.value),
                json!(r.value - r.error),
                json!(r.error),
                json!(r.order),
            ]);
        }
    }
    let failed = (worst < ORACLE_MIN_ORDER).then(|| format!("observed order {worst:.3} below {ORACLE_MIN_ORDER}"));
    Ok((Output::Table { columns: vec!["kind", "mode", "h", "value", "exact", "error", "order"], rows }, failed))
}
