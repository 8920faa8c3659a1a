//! Exact certificate for the elimination on the φ system and on the system
//! in the variable `f`.

use std::fmt::Write as _;

use kahler_qe::ode::{
    decide, expected_f_system_x, expected_x, f_system, first_order_reduction, phi_system, Decision, FSystem,
    LinearOde1, LinearOde2, OdeError, SkrParams, Verdict,
};
use kahler_qe::rational::{Number, RationalFunction};
use num_rational::BigRational;
use serde::Serialize;

use crate::config::{ConfigError, Corruption, RunConfig};
use crate::{to_json, Artifact, Outcome, Status};

#[derive(Debug, Serialize)]
pub struct Equation {
    pub second_derivative: String,
    pub first_derivative: String,
    pub value: String,
    pub rhs: String,
}

impl Equation {
    fn new(e: &LinearOde2, var: &str) -> Self {
        let [a, b, c, d] = e.render(var);
        Self {
            second_derivative: a,
            first_derivative: b,
            value: c,
            rhs: d,
        }
    }
}

/// One line of a diff between canonical forms.
#[derive(Debug, Serialize, PartialEq)]
pub struct Mismatch {
    pub quantity: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Serialize)]
pub struct SystemCertificate {
    pub system: String,
    pub variable: String,
    pub parameters: Vec<(String, String)>,
    pub first: Option<Equation>,
    pub second: Option<Equation>,
    /// `p` and `q` of the first-order combination `φ′ + pφ = q`.
    pub reduced: Option<(String, String)>,
    pub x: Option<String>,
    pub y: Option<String>,
    pub expected_x: String,
    pub verdict: Option<Verdict>,
    pub holds: bool,
    pub mismatches: Vec<Mismatch>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Certificate {
    pub command: &'static str,
    pub systems: Vec<SystemCertificate>,
    pub holds: bool,
}

fn exact(name: &str, v: &Number) -> Result<BigRational, ConfigError> {
    v.exact().cloned().ok_or_else(|| {
        ConfigError(format!(
            "{name} = {v} is not an exact rational; certificates need exact input"
        ))
    })
}

fn corrupt(eq: &mut LinearOde2, c: &Corruption) {
    let shift = RationalFunction::constant(c.amount.exact().expect("checked exact").clone());
    let slot = match c.coefficient {
        'A' => &mut eq.a,
        'B' => &mut eq.b,
        'C' => &mut eq.c,
        _ => &mut eq.d,
    };
    *slot = &*slot + &shift;
}

fn corrupt_pair(first: &mut LinearOde2, second: &mut LinearOde2, c: &Option<Corruption>) {
    if let Some(c) = c {
        corrupt(if c.equation == "first" { first } else { second }, c);
    }
}

fn compare(decision: &Decision, expected: &RationalFunction, var: &str) -> Vec<Mismatch> {
    let mut out = Vec::new();
    if &decision.x != expected {
        out.push(Mismatch {
            quantity: "X".into(),
            expected: expected.render(var),
            actual: decision.x.render(var),
        });
    }
    if !decision.y.is_zero() {
        out.push(Mismatch {
            quantity: "Y".into(),
            expected: "0".into(),
            actual: decision.y.render(var),
        });
    }
    out
}

fn reduced_text(r: &LinearOde1, var: &str) -> (String, String) {
    (r.p.render(var), r.q.render(var))
}

/// The system in `τ`, general `k`: `X = a(τ − c)²(2ck + 1)/((τ − 2c)(kτ + 1))`
/// and `Y = 0`.
pub fn main_system(p: &SkrParams, corruption: &Option<Corruption>) -> SystemCertificate {
    let expected = expected_x(&p.exact().expect("checked exact"));
    let mut cert = SystemCertificate {
        system: "main".into(),
        variable: "t".into(),
        parameters: named(p),
        first: None,
        second: None,
        reduced: None,
        x: None,
        y: None,
        expected_x: expected.render("t"),
        verdict: None,
        holds: false,
        mismatches: Vec::new(),
        error: None,
    };
    let result = (|| -> Result<(), OdeError> {
        let mut sys = phi_system(p)?;
        corrupt_pair(&mut sys.0, &mut sys.1, corruption);
        cert.first = Some(Equation::new(&sys.0, "t"));
        cert.second = Some(Equation::new(&sys.1, "t"));
        let red = first_order_reduction(&sys, p)?;
        cert.reduced = Some(reduced_text(&red.normalized, "t"));
        let d = decide(&red.normalized, &sys.0);
        finish(&mut cert, &d, &expected);
        Ok(())
    })();
    if let Err(e) = result {
        cert.error = Some(e.to_string());
    }
    cert
}

/// The system in `f`: `X = −a(f − c)/f`, `Y = 0`, so every solution vanishes.
pub fn f_system_certificate(p: &SkrParams, corruption: &Option<Corruption>) -> SystemCertificate {
    let e = p.exact().expect("checked exact");
    let expected = expected_f_system_x(&e.a, &e.c);
    let mut cert = SystemCertificate {
        system: "f".into(),
        variable: "f".into(),
        parameters: named(p),
        first: None,
        second: None,
        reduced: None,
        x: None,
        y: None,
        expected_x: expected.render("f"),
        verdict: None,
        holds: false,
        mismatches: Vec::new(),
        error: None,
    };
    let result = (|| -> Result<(), OdeError> {
        let base = f_system(&e.m, &e.a, &e.c, &e.kappa, &e.lambda, p.sign_phi)?;
        let (mut first, mut second) = (base.first, base.second);
        corrupt_pair(&mut first, &mut second, corruption);
        cert.first = Some(Equation::new(&first, "f"));
        cert.second = Some(Equation::new(&second, "f"));
        let sys = FSystem::from_equations(first, second, &e.c)?;
        cert.reduced = Some(reduced_text(&sys.reduced, "f"));
        let d = sys.decide();
        finish(&mut cert, &d, &expected);
        if d.verdict != Verdict::ForcedZero {
            cert.holds = false;
        }
        Ok(())
    })();
    if let Err(e) = result {
        cert.error = Some(e.to_string());
    }
    cert
}

fn finish(cert: &mut SystemCertificate, d: &Decision, expected: &RationalFunction) {
    let var = cert.variable.clone();
    cert.x = Some(d.x.render(&var));
    cert.y = Some(d.y.render(&var));
    cert.verdict = Some(d.verdict.clone());
    cert.mismatches = compare(d, expected, &var);
    cert.holds = cert.mismatches.is_empty();
}

fn named(p: &SkrParams) -> Vec<(String, String)> {
    let mut v = vec![("m".to_string(), p.m.to_string())];
    for (k, val) in p.named() {
        if ["a", "c", "k", "kappa", "lambda"].contains(&k) {
            v.push((k.to_string(), val.to_string()));
        }
    }
    v.push(("sign_phi".into(), p.sign_phi.to_string()));
    v
}

/// Parameters for the certificate: `k`, `κ` and `λ` default to zero.
pub fn certificate_params(cfg: &RunConfig) -> Result<SkrParams, ConfigError> {
    let c = &cfg.params;
    let zero = Number::int(0);
    let mut p = SkrParams::general(
        c.m,
        exact("params.a", &c.a)?.into(),
        exact("params.c", &c.c)?.into(),
        exact("params.k", c.k.as_ref().unwrap_or(&zero))?.into(),
    );
    p.kappa = exact("params.kappa", c.kappa.as_ref().unwrap_or(&zero))?.into();
    p.lambda = exact("params.lambda", c.lambda.as_ref().unwrap_or(&zero))?.into();
    p.sign_phi = c.sign_phi;
    if let Some(k) = &cfg.certify.corrupt {
        exact("certify.corrupt", &k.amount)?;
    }
    Ok(p)
}

fn render(cert: &SystemCertificate, out: &mut String) {
    let v = &cert.variable;
    writeln!(out, "system {} (variable {v})", cert.system).unwrap();
    let params: Vec<String> = cert.parameters.iter().map(|(k, v)| format!("{k} = {v}")).collect();
    writeln!(out, "  {}", params.join(", ")).unwrap();
    if let Some(e) = &cert.error {
        writeln!(out, "  error: {e}").unwrap();
    }
    if let (Some(x), Some(y)) = (&cert.x, &cert.y) {
        writeln!(out, "  X = {x}").unwrap();
        writeln!(out, "  Y = {y}").unwrap();
    }
    writeln!(out, "  expected X = {}", cert.expected_x).unwrap();
    if let Some(verdict) = &cert.verdict {
        writeln!(
            out,
            "  verdict: {}",
            serde_json::to_value(verdict).unwrap().as_str().unwrap()
        )
        .unwrap();
    }
    for m in &cert.mismatches {
        writeln!(out, "  - {} expected: {}", m.quantity, m.expected).unwrap();
        writeln!(out, "  + {} actual:   {}", m.quantity, m.actual).unwrap();
    }
    writeln!(out, "  identities: {}", if cert.holds { "hold" } else { "FAIL" }).unwrap();
}

pub fn run(cfg: &RunConfig) -> Outcome {
    let p = match certificate_params(cfg) {
        Ok(p) => p,
        Err(e) => return Outcome::config_error(&e),
    };
    if let Err(e) = p.validate() {
        return Outcome::config_error(&ConfigError(e.to_string()));
    }
    let mut systems = Vec::new();
    if cfg.certify.systems.main() {
        systems.push(main_system(&p, &cfg.certify.corrupt));
    }
    if cfg.certify.systems.f() {
        systems.push(f_system_certificate(&p, &cfg.certify.corrupt));
    }
    let holds = systems.iter().all(|s| s.holds);
    let cert = Certificate {
        command: "certify",
        systems,
        holds,
    };
    let mut stdout = String::new();
    for s in &cert.systems {
        render(s, &mut stdout);
    }
    Outcome {
        status: if holds {
            Status::Pass
        } else {
            Status::VerificationFailure
        },
        stdout,
        artifacts: vec![Artifact {
            name: "certificate.json".into(),
            contents: to_json(&cert),
        }],
    }
}
