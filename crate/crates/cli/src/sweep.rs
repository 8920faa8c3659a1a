//! `sweep`: construct-and-verify over a grid of `(m, a, c, C2, k)`.
//!
//! Cells run in parallel and independently; a failing cell becomes a row, not
//! an error. Rows are ordered by cell index, with `k` varying fastest and `m`
//! slowest.

use std::fmt::Write as _;

use kahler_qe::rational::Number;
use kahler_qe::verifier::{verify_construction, CheckVerdict};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{KChoice, ParamSection, RunConfig};
use crate::construct::build;
use crate::{document_hash, to_json, Artifact, Outcome, Status};

/// Checks reported per cell, in column order.
pub const CHECKS: [&str; 12] = [
    "kahler",
    "killing",
    "skr",
    "ricci-hessian",
    "quasi-einstein",
    "warped-einstein-constant",
    "conformal-formulas",
    "skr-constant",
    "gradient-norm",
    "laplacian",
    "block-structure",
    "horizontal-hessian",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellStatus {
    Pass,
    Fail,
    Refused,
    ConstructionError,
}

impl CellStatus {
    fn name(self) -> &'static str {
        match self {
            CellStatus::Pass => "pass",
            CellStatus::Fail => "fail",
            CellStatus::Refused => "refused",
            CellStatus::ConstructionError => "construction-error",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellCheck {
    pub name: String,
    pub verdict: CheckVerdict,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub index: usize,
    pub m: u32,
    pub a: String,
    pub c: String,
    pub c2: String,
    pub k: String,
    pub status: CellStatus,
    pub intervals: Vec<(f64, f64)>,
    pub interval: Option<(f64, f64)>,
    pub phi_constant: bool,
    pub checks: Vec<CellCheck>,
    pub message: String,
}

/// The grid in row order.
pub fn cells(cfg: &RunConfig) -> Vec<ParamSection> {
    let sw = &cfg.sweep;
    let mut out = Vec::new();
    for &m in &sw.m {
        for a in &sw.a {
            for c in &sw.c {
                for c2 in &sw.c2 {
                    for k in &sw.k {
                        out.push(ParamSection {
                            m,
                            a: a.clone(),
                            c: c.clone(),
                            k: match k {
                                KChoice::Family => None,
                                KChoice::Value(v) => Some(v.clone()),
                            },
                            c2: c2.clone(),
                            ..cfg.params.clone()
                        });
                    }
                }
            }
        }
    }
    out
}

fn k_text(p: &ParamSection) -> String {
    match &p.k {
        Some(k) => k.to_string(),
        None if p.c.is_zero() => "family".to_string(),
        None => Number::int(-1).div(&Number::int(2).mul(&p.c)).to_string(),
    }
}

pub fn run_cell(cfg: &RunConfig, index: usize, p: &ParamSection) -> Cell {
    let mut cell = Cell {
        index,
        m: p.m,
        a: p.a.to_string(),
        c: p.c.to_string(),
        c2: p.c2.to_string(),
        k: k_text(p),
        status: CellStatus::ConstructionError,
        intervals: Vec::new(),
        interval: None,
        phi_constant: p.c2.is_zero(),
        checks: Vec::new(),
        message: String::new(),
    };
    match build(p, cfg.base, cfg.search) {
        Err(e) => {
            cell.status = if e.is_refusal() {
                CellStatus::Refused
            } else {
                CellStatus::ConstructionError
            };
            cell.message = e.to_string();
        }
        Ok(con) => {
            cell.intervals = con.intervals.clone();
            cell.interval = Some(con.interval);
            let seed = cfg.run.seed.wrapping_add(index as u64);
            let report = verify_construction(&con, seed, cfg.run.samples, &cfg.effective_tolerances());
            cell.checks = report
                .checks
                .iter()
                .map(|c| CellCheck {
                    name: c.name.clone(),
                    verdict: c.verdict,
                    max: c.max,
                })
                .collect();
            cell.status = if report.passed() {
                CellStatus::Pass
            } else {
                CellStatus::Fail
            };
            cell.message = report
                .checks
                .iter()
                .filter(|c| c.verdict == CheckVerdict::Fail)
                .map(|c| c.name.as_str())
                .collect::<Vec<_>>()
                .join(" ");
        }
    }
    cell
}

pub fn sweep_csv(cells: &[Cell]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "cell",
        "m",
        "a",
        "c",
        "C2",
        "k",
        "status",
        "phi_constant",
        "intervals",
        "interval_lo",
        "interval_hi",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for c in CHECKS {
        header.push(format!("{c}_verdict"));
        header.push(format!("{c}_max"));
    }
    header.push("message".into());
    w.write_record(&header).expect("write to memory");
    for cell in cells {
        let intervals = cell
            .intervals
            .iter()
            .map(|(lo, hi)| format!("{lo:e}:{hi:e}"))
            .collect::<Vec<_>>()
            .join(";");
        let (lo, hi) = match cell.interval {
            Some((lo, hi)) => (format!("{lo:e}"), format!("{hi:e}")),
            None => (String::new(), String::new()),
        };
        let mut row = vec![
            cell.index.to_string(),
            cell.m.to_string(),
            cell.a.clone(),
            cell.c.clone(),
            cell.c2.clone(),
            cell.k.clone(),
            cell.status.name().to_string(),
            cell.phi_constant.to_string(),
            intervals,
            lo,
            hi,
        ];
        for name in CHECKS {
            match cell.checks.iter().find(|c| c.name == name) {
                Some(c) => {
                    row.push(serde_json::to_value(c.verdict).unwrap().as_str().unwrap().to_string());
                    row.push(format!("{:e}", c.max));
                }
                None => {
                    row.push(String::new());
                    row.push(String::new());
                }
            }
        }
        row.push(cell.message.clone());
        w.write_record(&row).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    command: &'static str,
    config: String,
    cells: &'a [Cell],
}

/// Exit status: verification failure if any constructed cell fails;
/// refusals and construction errors are expected outcomes of a grid and only
/// recorded.
pub fn run(cfg: &RunConfig) -> Outcome {
    let grid = cells(cfg);
    let rows: Vec<Cell> = grid.par_iter().enumerate().map(|(i, p)| run_cell(cfg, i, p)).collect();
    let csv = sweep_csv(&rows);
    let json = to_json(&SweepDocument {
        command: "sweep",
        config: crate::construct::embedded_config(cfg),
        cells: &rows,
    });
    let mut stdout = String::new();
    let count = |s: CellStatus| rows.iter().filter(|c| c.status == s).count();
    writeln!(
        stdout,
        "{} cells: {} pass, {} fail, {} refused, {} construction errors",
        rows.len(),
        count(CellStatus::Pass),
        count(CellStatus::Fail),
        count(CellStatus::Refused),
        count(CellStatus::ConstructionError)
    )
    .unwrap();
    for c in rows.iter().filter(|c| c.status != CellStatus::Pass) {
        writeln!(
            stdout,
            "  cell {} (m={}, a={}, c={}, C2={}, k={}): {} {}",
            c.index,
            c.m,
            c.a,
            c.c,
            c.c2,
            c.k,
            c.status.name(),
            c.message
        )
        .unwrap();
    }
    writeln!(stdout, "sweep sha256 {}", document_hash(&csv)).unwrap();
    Outcome {
        status: if count(CellStatus::Fail) > 0 {
            Status::VerificationFailure
        } else {
            Status::Pass
        },
        stdout,
        artifacts: vec![
            Artifact {
                name: "sweep.csv".into(),
                contents: csv,
            },
            Artifact {
                name: "sweep.json".into(),
                contents: json,
            },
        ],
    }
}
