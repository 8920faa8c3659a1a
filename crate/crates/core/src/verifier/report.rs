use std::fmt::Write as _;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckVerdict {
    Pass,
    Fail,
    Skipped,
}

/// A sample that could not be evaluated after all retries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Exclusion {
    pub index: u64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// Samples that contributed a residual.
    pub samples: usize,
    pub max: f64,
    pub mean: f64,
    pub tolerance: f64,
    pub verdict: CheckVerdict,
    /// Samples replaced by a retry.
    pub resampled: usize,
    pub exclusions: Vec<Exclusion>,
    pub notes: Vec<String>,
}

impl CheckRecord {
    pub fn skipped(name: &str, tolerance: f64, reason: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            samples: 0,
            max: 0.0,
            mean: 0.0,
            tolerance,
            verdict: CheckVerdict::Skipped,
            resampled: 0,
            exclusions: Vec::new(),
            notes: vec![reason.into()],
        }
    }

    pub(crate) fn from_residuals(
        name: &str,
        tolerance: f64,
        residuals: &[f64],
        resampled: usize,
        exclusions: Vec<Exclusion>,
    ) -> Self {
        let max = residuals
            .iter()
            .copied()
            .fold(0.0, |m: f64, r| if r.is_nan() { f64::NAN } else { m.max(r) });
        let mean = if residuals.is_empty() {
            0.0
        } else {
            residuals.iter().sum::<f64>() / residuals.len() as f64
        };
        let verdict = if !residuals.is_empty() && max < tolerance {
            CheckVerdict::Pass
        } else {
            CheckVerdict::Fail
        };
        let mut notes = Vec::new();
        if residuals.is_empty() {
            notes.push("no sample could be evaluated".to_string());
        }
        Self {
            name: name.to_string(),
            samples: residuals.len(),
            max,
            mean,
            tolerance,
            verdict,
            resampled,
            exclusions,
            notes,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict != CheckVerdict::Fail
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub subject: String,
    pub seed: u64,
    pub samples: usize,
    pub parameters: Vec<(String, String)>,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckRecord::passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Fixed-width summary, one line per check.
    pub fn summary_table(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{}", self.subject).unwrap();
        writeln!(
            s,
            "{:<28} {:>7} {:>11} {:>11} {:>9}  verdict",
            "check", "samples", "max", "mean", "tol"
        )
        .unwrap();
        for c in &self.checks {
            let v = match c.verdict {
                CheckVerdict::Pass => "pass",
                CheckVerdict::Fail => "FAIL",
                CheckVerdict::Skipped => "skipped",
            };
            writeln!(
                s,
                "{:<28} {:>7} {:>11.3e} {:>11.3e} {:>9.1e}  {v}",
                c.name, c.samples, c.max, c.mean, c.tolerance
            )
            .unwrap();
        }
        s
    }
}
