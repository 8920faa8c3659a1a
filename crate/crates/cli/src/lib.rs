//! Driver for the `kqe` binary: configuration, the three commands and their
//! output documents.
//!
//! Commands return an [`Outcome`] holding the exit status, the text for
//! standard output and the files to write, so they can be run and inspected
//! in-process.

pub mod certify;
pub mod config;
pub mod construct;
pub mod sweep;

use std::path::Path;

use sha2::{Digest, Sha256};

pub use config::{Command, ConfigError, RunConfig};

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass = 0,
    VerificationFailure = 2,
    ConstructionError = 3,
    ConfigError = 4,
}

impl Status {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// A file produced by a command, relative to the output directory.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub status: Status,
    pub stdout: String,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    pub fn config_error(e: &ConfigError) -> Self {
        Self {
            status: Status::ConfigError,
            stdout: format!("{e}\n"),
            artifacts: Vec::new(),
        }
    }

    pub fn artifact(&self, name: &str) -> Option<&str> {
        self.artifacts
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.contents.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for a in &self.artifacts {
            std::fs::write(dir.join(&a.name), &a.contents)?;
        }
        Ok(())
    }
}

/// Hex SHA-256 of a document.
pub fn document_hash(contents: &str) -> String {
    hex::encode(Sha256::digest(contents.as_bytes()))
}

/// Runs `command` on `cfg` inside a thread pool of `cfg.run.workers` threads.
pub fn execute(command: Command, cfg: &RunConfig) -> Outcome {
    if let Some(c) = cfg.run.command {
        if c != command {
            return Outcome::config_error(&ConfigError(format!(
                "config is for {} but {} was requested",
                c.name(),
                command.name()
            )));
        }
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.run.workers).build() {
        Ok(p) => p,
        Err(e) => return Outcome::config_error(&ConfigError(format!("cannot start workers: {e}"))),
    };
    pool.install(|| match command {
        Command::Certify => certify::run(cfg),
        Command::ConstructVerify => construct::run(cfg),
        Command::Sweep => sweep::run(cfg),
    })
}

/// Serialises a document as pretty JSON with a trailing newline.
pub(crate) fn to_json<T: serde::Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialise");
    s.push('\n');
    s
}
