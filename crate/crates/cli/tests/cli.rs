use std::path::Path;
use std::process::Command as Process;

use kahler_qe_cli::config::RunConfig;
use kahler_qe_cli::sweep::{cells, run_cell, CellStatus};
use kahler_qe_cli::{document_hash, execute, Command, Status};

fn cfg(src: &str) -> RunConfig {
    RunConfig::parse(src).unwrap()
}

fn kqe(args: &[&str], dir: &Path) -> (i32, String, String) {
    let out = Process::new(env!("CARGO_BIN_EXE_kqe"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run kqe");
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn scratch(name: &str) -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("kqe-test-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn certify_generic_and_fraction_parameters() {
    let out = execute(
        Command::Certify,
        &cfg("[params]\nm = 4\na = 7/2\nc = -2/3\nk = 5/4\nkappa = 3\nlambda = -1/2\n"),
    );
    assert_eq!(out.status, Status::Pass, "{}", out.stdout);
    let doc: serde_json::Value = serde_json::from_str(out.artifact("certificate.json").unwrap()).unwrap();
    assert_eq!(doc["holds"], true);
    assert_eq!(doc["systems"][0]["verdict"], "forced-zero");
    assert_eq!(doc["systems"][0]["y"], "0");
    assert_eq!(doc["systems"][1]["x"], doc["systems"][1]["expected_x"]);
    assert!(out.stdout.contains("a = 7/2"));
}

#[test]
fn certify_on_the_family_admits_constants() {
    let out = execute(
        Command::Certify,
        &cfg("[params]\nc = 2\nk = -1/4\n[certify]\nsystems = main\n"),
    );
    assert_eq!(out.status, Status::Pass);
    let doc: serde_json::Value = serde_json::from_str(out.artifact("certificate.json").unwrap()).unwrap();
    assert_eq!(doc["systems"][0]["x"], "0");
    assert_eq!(doc["systems"][0]["verdict"], "constants-admitted");
}

#[test]
fn corrupted_coefficient_gives_a_diff() {
    let out = execute(
        Command::Certify,
        &cfg("[certify]\nsystems = main\ncorrupt = first.D + 1\n"),
    );
    assert_eq!(out.status, Status::VerificationFailure);
    assert!(out.stdout.contains("- Y expected: 0"), "{}", out.stdout);
    assert!(out.stdout.contains("+ Y actual:"));
    let out = execute(Command::Certify, &cfg("[certify]\ncorrupt = first.A + 1/3\n"));
    assert_eq!(out.status, Status::VerificationFailure);
    assert!(out.stdout.contains("second-derivative"));
}

#[test]
fn certify_needs_exact_input() {
    let out = execute(Command::Certify, &cfg("[params]\nc = 1e-2\n"));
    assert_eq!(out.status, Status::ConfigError);
    assert!(out.stdout.contains("params.c"));
}

#[test]
fn construct_verify_examples() {
    let out = execute(Command::ConstructVerify, &cfg("[run]\nsamples = 40\n"));
    assert_eq!(out.status, Status::Pass, "{}", out.stdout);
    let csv = out.artifact("warp.csv").unwrap();
    assert!(csv.starts_with("tau,log_r,Q,phi,residual_first,residual_second\n"));
    assert_eq!(csv.lines().count(), 201);
    let report: serde_json::Value = serde_json::from_str(out.artifact("report.json").unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["report"]["checks"].as_array().unwrap().len(), 12);

    let out = execute(
        Command::ConstructVerify,
        &cfg("[run]\nsamples = 40\n[params]\nm = 3\na = 2\n[base]\nkind = fubini-study\n"),
    );
    assert_eq!(out.status, Status::Pass, "{}", out.stdout);
}

#[test]
fn off_family_k_is_refused() {
    let out = execute(Command::ConstructVerify, &cfg("[params]\nk = 1/3\n"));
    assert_eq!(out.status, Status::ConstructionError);
    assert!(out.stdout.contains("branch check"));
    assert!(out.stdout.contains("a(2ck + 1)"));
    let out = execute(Command::ConstructVerify, &cfg("[params]\nkappa = 1\n"));
    assert_eq!(out.status, Status::ConstructionError);
    assert!(out.stdout.contains("at base"), "{}", out.stdout);
}

#[test]
fn tight_tolerance_is_a_verification_failure() {
    let out = execute(
        Command::ConstructVerify,
        &cfg("[run]\nsamples = 20\ntolerance_scale = 1e-12\n"),
    );
    assert_eq!(out.status, Status::VerificationFailure);
    assert!(out.stdout.contains("FAIL"));
}

#[test]
fn config_mismatch_with_command() {
    let out = execute(Command::Sweep, &cfg("[run]\ncommand = certify\n"));
    assert_eq!(out.status, Status::ConfigError);
}

#[test]
fn effective_config_round_trip_gives_the_same_hash() {
    let c = cfg("[run]\nseed = 3\nsamples = 30\n[params]\na = 2\nC2 = -1/2\nsign_phi = 1\n");
    let first = execute(Command::ConstructVerify, &c);
    let reloaded = cfg(first.artifact("effective.cfg").unwrap());
    assert_eq!(reloaded, c);
    let second = execute(Command::ConstructVerify, &reloaded);
    assert_eq!(
        document_hash(first.artifact("report.json").unwrap()),
        document_hash(second.artifact("report.json").unwrap())
    );
    let other_seed = execute(
        Command::ConstructVerify,
        &cfg("[run]\nseed = 4\nsamples = 30\n[params]\na = 2\nC2 = -1/2\n"),
    );
    assert_ne!(first.artifact("report.json"), other_seed.artifact("report.json"));
}

const SMALL_SWEEP: &str = "[run]\nsamples = 10\n[base]\nkind = fubini-study\n\
                           [sweep]\nm = 2, 3\na = 1, 7/2\nc = 1\nC2 = 0, 1\nk = family, 1\n";

#[test]
fn sweep_rows_are_ordered_and_independent_of_workers() {
    let mut c = cfg(SMALL_SWEEP);
    c.run.workers = 1;
    let one = execute(Command::Sweep, &c);
    c.run.workers = 4;
    let four = execute(Command::Sweep, &c);
    assert_eq!(one.status, Status::Pass, "{}", one.stdout);
    assert_eq!(one.artifact("sweep.csv"), four.artifact("sweep.csv"));
    let csv = one.artifact("sweep.csv").unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 16);
    for (i, row) in rows.iter().enumerate() {
        assert!(row.starts_with(&format!("{i},")));
    }
}

#[test]
fn sweep_cells_refused_and_constant() {
    let c = cfg(SMALL_SWEEP);
    for (i, p) in cells(&c).iter().enumerate() {
        let cell = run_cell(&c, i, p);
        if p.k.is_some() {
            assert_eq!(cell.status, CellStatus::Refused, "{cell:?}");
            assert!(cell.checks.is_empty());
        } else {
            assert_eq!(cell.status, CellStatus::Pass, "{cell:?}");
            assert_eq!(cell.phi_constant, p.c2.is_zero());
        }
    }
}

#[test]
fn binary_exit_codes_and_files() {
    let dir = scratch("bin");
    std::fs::write(dir.join("ok.cfg"), "[run]\nsamples = 20\n").unwrap();
    let (code, stdout, _) = kqe(&["construct-verify", "--config", "ok.cfg", "--out", "run"], &dir);
    assert_eq!(code, 0);
    assert!(stdout.contains("report sha256"));
    for f in ["report.json", "report.sha256", "warp.csv", "effective.cfg"] {
        assert!(dir.join("run").join(f).exists(), "{f}");
    }

    let (code, _, _) = kqe(
        &["construct-verify", "--config", "ok.cfg", "--tolerance-scale", "1e-12"],
        &dir,
    );
    assert_eq!(code, 2);

    std::fs::write(dir.join("refused.cfg"), "[params]\nk = 2\n").unwrap();
    let (code, _, stderr) = kqe(&["construct-verify", "--config", "refused.cfg"], &dir);
    assert_eq!(code, 3);
    assert!(stderr.contains("refused"));

    std::fs::write(dir.join("bad.cfg"), "[params]\nmu = 2\n").unwrap();
    let (code, _, stderr) = kqe(&["certify", "--config", "bad.cfg"], &dir);
    assert_eq!(code, 4);
    assert!(stderr.contains("unknown key params.mu"));
    assert_eq!(kqe(&["certify", "--config", "missing.cfg"], &dir).0, 4);
    assert_eq!(kqe(&["frobnicate"], &dir).0, 4);
    assert_eq!(kqe(&["certify", "--samples", "0"], &dir).0, 4);
    assert_eq!(kqe(&["--help"], &dir).0, 0);

    let (code, stdout, _) = kqe(&["certify", "--out", "cert"], &dir);
    assert_eq!(code, 0);
    assert!(stdout.contains("identities: hold"));
    assert!(dir.join("cert/certificate.json").exists());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn binary_runs_are_byte_identical() {
    let dir = scratch("det");
    std::fs::write(
        dir.join("c.cfg"),
        "[run]\nsamples = 25\nseed = 5\n[params]\nm = 3\n[base]\nkind = fubini-study\n",
    )
    .unwrap();
    assert_eq!(
        kqe(
            &["construct-verify", "--config", "c.cfg", "--out", "a", "--workers", "1"],
            &dir
        )
        .0,
        0
    );
    assert_eq!(
        kqe(
            &["construct-verify", "--config", "c.cfg", "--out", "b", "--workers", "3"],
            &dir
        )
        .0,
        0
    );
    let a = std::fs::read(dir.join("a/report.json")).unwrap();
    let b = std::fs::read(dir.join("b/report.json")).unwrap();
    assert_eq!(a, b);
    let _ = std::fs::remove_dir_all(&dir);
}
