//! `construct-verify`: build the bundle metric for one parameter set and run
//! the verifier suite on it.

use std::fmt::Write as _;

use kahler_qe::builder::{end_to_end, BaseKind, BaseModel, BuildError, BuildOptions, Construction};
use kahler_qe::ode::{solsys_system, OdeError, SkrParams};
use kahler_qe::rational::Number;
use kahler_qe::verifier::{verify_construction, Tolerances, VerificationReport};
use serde::Serialize;

use crate::config::{ParamSection, RunConfig};
use crate::{document_hash, to_json, Artifact, Outcome, Status};

/// Einstein constant of the base in the normalisation of [`BaseModel`],
/// exactly.
pub fn base_kappa(kind: BaseKind, m: u32) -> Number {
    match kind {
        BaseKind::Flat => Number::int(0),
        BaseKind::FubiniStudy => Number::int(2 * m as i64),
    }
}

/// A construction failure with the pipeline stage it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct StageError {
    pub stage: &'static str,
    pub error: BuildError,
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "construction failed at {}: {}", self.stage, self.error)
    }
}

impl StageError {
    pub fn is_refusal(&self) -> bool {
        matches!(self.error, BuildError::Refused(_))
    }
}

fn stage_of(e: &BuildError) -> &'static str {
    match e {
        BuildError::Refused(_) => "branch check",
        BuildError::Config(_) => "options",
        BuildError::IncompatibleCurvature(_) | BuildError::Dimension(_) => "base",
        BuildError::NoPositiveInterval { .. } => "interval search",
        BuildError::NonPositiveQ { .. }
        | BuildError::NonMonotone
        | BuildError::OutsideWarp(_)
        | BuildError::Quadrature(_) => "warp",
        BuildError::Ode(_) => "profile",
        BuildError::Geometry(_) => "chart",
    }
}

/// Parameters on the solution family, with any explicit `k`, `κ` or `λ`
/// from the config taking the place of the derived value. Explicit values
/// off the family are caught by the branch check in [`end_to_end`].
pub fn family_params(p: &ParamSection, base: BaseKind) -> Result<SkrParams, OdeError> {
    let kappa = p.kappa.clone().unwrap_or_else(|| base_kappa(base, p.m));
    let mut out = SkrParams::solution_branch(p.m, p.a.clone(), p.c.clone(), kappa, p.c2.clone(), p.sign_phi)?;
    out = out.with_b(p.b.clone());
    if let Some(k) = &p.k {
        out.k = k.clone();
    }
    if let Some(l) = &p.lambda {
        out.lambda = l.clone();
    }
    Ok(out)
}

/// Parameters, then [`end_to_end`].
pub fn build(p: &ParamSection, base: BaseKind, search: Option<(f64, f64)>) -> Result<Construction, StageError> {
    let params = family_params(p, base).map_err(|e| StageError {
        stage: "parameters",
        error: BuildError::Ode(e),
    })?;
    let base = BaseModel::new(base, (p.m - 1) as usize);
    let options = BuildOptions {
        search_range: search,
        s: None,
    };
    end_to_end(&params, base, &options).map_err(|e| StageError {
        stage: stage_of(&e),
        error: e,
    })
}

#[derive(Debug, Serialize)]
pub struct ConstructionSummary {
    pub intervals: Vec<(f64, f64)>,
    pub interval: (f64, f64),
    pub working_interval: (f64, f64),
    pub log_r_range: (f64, f64),
    pub s: f64,
    pub b: f64,
    pub phi_constant: bool,
}

impl ConstructionSummary {
    pub fn new(con: &Construction) -> Self {
        Self {
            intervals: con.intervals.clone(),
            interval: con.interval,
            working_interval: con.warp().working_interval(),
            log_r_range: con.warp().logr_range(),
            s: con.s(),
            b: con.b(),
            phi_constant: con.params.c2.is_zero(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ReportDocument<'a> {
    pub command: &'static str,
    /// The effective configuration, minus settings that cannot change the
    /// result (output directory, worker count).
    pub config: String,
    pub tolerances: &'a Tolerances,
    pub construction: ConstructionSummary,
    pub report: &'a VerificationReport,
    pub passed: bool,
}

/// `(τ, log r, Q, φ)` on the working interval, with the relative residuals
/// of both profile equations when the parameters are exact.
pub fn warp_csv(con: &Construction, points: usize) -> Result<String, BuildError> {
    let system = solsys_system(&con.params).ok();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["tau", "log_r", "Q", "phi", "residual_first", "residual_second"])
        .expect("write to memory");
    let (lo, hi) = con.warp().working_interval();
    let steps = points.max(2) - 1;
    for i in 0..=steps {
        let tau = lo + (hi - lo) * i as f64 / steps as f64;
        let logr = con.warp().logr_of_tau(tau)?;
        let q = con.warp().q_at(tau)?.v;
        let phi = con.phi.eval(tau)?;
        let (r1, r2) = match &system {
            Some((e1, e2)) => (
                format!("{:e}", e1.residual(phi, tau).map_err(OdeError::from)?.relative()),
                format!("{:e}", e2.residual(phi, tau).map_err(OdeError::from)?.relative()),
            ),
            None => (String::new(), String::new()),
        };
        w.write_record([
            format!("{tau:.17e}"),
            format!("{logr:.17e}"),
            format!("{q:.17e}"),
            format!("{:.17e}", phi.v),
            r1,
            r2,
        ])
        .expect("write to memory");
    }
    Ok(String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8"))
}

/// The config text embedded in reports.
pub fn embedded_config(cfg: &RunConfig) -> String {
    let mut c = cfg.clone();
    c.run.out = None;
    c.run.workers = 0;
    c.to_text()
}

pub fn run(cfg: &RunConfig) -> Outcome {
    let con = match build(&cfg.params, cfg.base, cfg.search) {
        Ok(c) => c,
        Err(e) => {
            return Outcome {
                status: Status::ConstructionError,
                stdout: format!("{e}\n"),
                artifacts: Vec::new(),
            }
        }
    };
    let tol = cfg.effective_tolerances();
    let report = verify_construction(&con, cfg.run.seed, cfg.run.samples, &tol);
    let passed = report.passed();
    let doc = ReportDocument {
        command: "construct-verify",
        config: embedded_config(cfg),
        tolerances: &tol,
        construction: ConstructionSummary::new(&con),
        report: &report,
        passed,
    };
    let json = to_json(&doc);
    let hash = document_hash(&json);
    let mut stdout = report.summary_table();
    let (lo, hi) = con.interval;
    writeln!(stdout, "interval ({lo:e}, {hi:e}), s = {:e}", con.s()).unwrap();
    writeln!(stdout, "report sha256 {hash}").unwrap();
    let mut artifacts = vec![
        Artifact {
            name: "report.json".into(),
            contents: json,
        },
        Artifact {
            name: "report.sha256".into(),
            contents: format!("{hash}  report.json\n"),
        },
        Artifact {
            name: "effective.cfg".into(),
            contents: cfg.to_text(),
        },
    ];
    match warp_csv(&con, cfg.run.warp_points) {
        Ok(csv) => artifacts.push(Artifact {
            name: "warp.csv".into(),
            contents: csv,
        }),
        Err(e) => writeln!(stdout, "warp.csv not written: {e}").unwrap(),
    }
    Outcome {
        status: if passed {
            Status::Pass
        } else {
            Status::VerificationFailure
        },
        stdout,
        artifacts,
    }
}
