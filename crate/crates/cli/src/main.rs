use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use kahler_qe_cli::{execute, Command, ConfigError, Outcome, RunConfig, Status};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    Certify,
    ConstructVerify,
    Sweep,
}

/// Certificates, constructions and sweeps for Kähler quasi-Einstein metrics.
///
/// Exit status: 0 all verdicts pass, 2 verification failure, 3 construction
/// error, 4 configuration error.
#[derive(Debug, Parser)]
#[command(name = "kqe", version)]
struct Cli {
    command: Cmd,
    /// Sectioned key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: run.out from the config, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Worker threads; 0 uses all cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Multiplies every verification tolerance.
    #[arg(long)]
    tolerance_scale: Option<f64>,
}

fn load(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let src = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::parse(&src)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.run.seed = s;
    }
    if let Some(n) = cli.samples {
        if n == 0 {
            return Err(ConfigError("--samples must be positive".into()));
        }
        cfg.run.samples = n;
    }
    if let Some(w) = cli.workers {
        cfg.run.workers = w;
    }
    if let Some(t) = cli.tolerance_scale {
        if !(t > 0.0) {
            return Err(ConfigError("--tolerance-scale must be positive".into()));
        }
        cfg.run.tolerance_scale = t;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(Status::ConfigError.code() as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let command = match cli.command {
        Cmd::Certify => Command::Certify,
        Cmd::ConstructVerify => Command::ConstructVerify,
        Cmd::Sweep => Command::Sweep,
    };
    let outcome = match load(&cli) {
        Ok(cfg) => {
            let out = cli
                .out
                .clone()
                .or_else(|| cfg.run.out.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out"));
            let outcome = execute(command, &cfg);
            if let Err(e) = outcome.write_to(&out) {
                eprintln!("cannot write to {}: {e}", out.display());
                return ExitCode::from(1);
            }
            outcome
        }
        Err(e) => Outcome::config_error(&e),
    };
    if matches!(outcome.status, Status::Pass | Status::VerificationFailure) {
        print!("{}", outcome.stdout);
    } else {
        eprint!("{}", outcome.stdout);
    }
    ExitCode::from(outcome.status.code() as u8)
}
