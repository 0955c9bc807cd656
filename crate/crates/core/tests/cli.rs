mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::fixture_path;

fn utc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_utc"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn fixture_text(name: &str) -> String {
    fs::read_to_string(fixture_path(name)).unwrap()
}

fn fixture_arg(name: &str) -> String {
    fixture_path(name).to_string_lossy().into_owned()
}

const SCALAR: &str = r#"
[plant]
model = "custom-lti"
a = [[A]]
b = [[1.0]]
c = [[1.0]]

[controller]
n_steps = 1
w0 = 0.5
q_u = [[1.0]]
p_err = [[0.1]]

[scenario]
horizon = 50
x0_half_width = [1.0]
seed = 1

[certify]
gain = [[K]]
"#;

fn scalar(a: &str, k: &str) -> String {
    SCALAR
        .replace("[[A]]", &format!("[[{a}]]"))
        .replace("[[K]]", &format!("[[{k}]]"))
}

#[test]
fn simulate_writes_csv_and_log() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = utc(&[
        "simulate",
        "--config",
        &fixture_arg("admire_regulation.toml"),
        "--steps",
        "200",
        "--output",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 202);
    assert!(stdout(&out).contains("settling_time="));
    let log = fs::read_to_string(out_dir.join("run.log")).unwrap();
    assert!(log.contains("config_sha256"));
    assert!(log.contains("horizon = 200"));
}

#[test]
fn invalid_weight_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = fixture_text("admire_regulation.toml").replace("w0 = 0.5", "w0 = 1.5");
    let cfg = write_config(dir.path(), "bad.toml", &text);
    let out = utc(&["simulate", "--config", &cfg]);
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("W0 must lie in (0,1)"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn unknown_key_and_missing_file_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let text = fixture_text("scalar_certify.toml").replace("seed = 3", "seed = 3\nsed = 4");
    let cfg = write_config(dir.path(), "typo.toml", &text);
    assert_eq!(code(&utc(&["simulate", "--config", &cfg])), 2);
    assert_eq!(
        code(&utc(&["simulate", "--config", "/nonexistent/cfg.toml"])),
        2
    );
    assert_eq!(code(&utc(&["frobnicate"])), 2);
}

#[test]
fn seed_override_changes_trajectory_not_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_arg("scalar_certify.toml");
    let run = |seed: &str, sub: &str| {
        let d = dir.path().join(sub);
        let out = utc(&[
            "simulate",
            "--config",
            &cfg,
            "--seed",
            seed,
            "--output",
            d.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        let hash = stderr(&out)
            .lines()
            .find(|l| l.starts_with("config_sha256="))
            .unwrap()
            .split_whitespace()
            .next()
            .unwrap()
            .to_string();
        (fs::read(d.join("trajectory.csv")).unwrap(), hash)
    };
    let (a, ha) = run("1", "a");
    let (b, hb) = run("2", "b");
    let (c, _) = run("1", "c");
    assert_ne!(a, b);
    assert_eq!(a, c);
    assert_eq!(ha, hb);
}

#[test]
fn sweep_of_one_matches_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_arg("scalar_certify.toml");
    let sim_dir = dir.path().join("sim");
    let sweep_dir = dir.path().join("sweep");
    assert_eq!(
        code(&utc(&[
            "simulate",
            "--config",
            &cfg,
            "--n-steps",
            "1",
            "--output",
            sim_dir.to_str().unwrap()
        ])),
        0
    );
    let out = utc(&[
        "sweep",
        "--config",
        &cfg,
        "--n-list",
        "1",
        "--output",
        sweep_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("N,settling_time,error_limsup,wall_time_s\n1,"));
    assert_eq!(
        fs::read(sim_dir.join("trajectory.csv")).unwrap(),
        fs::read(sweep_dir.join("trajectory_N1.csv")).unwrap()
    );
}

#[test]
fn sweep_rejects_duplicates() {
    let out = utc(&[
        "sweep",
        "--config",
        &fixture_arg("scalar_certify.toml"),
        "--n-list",
        "3,3",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("duplicate"));
}

#[test]
fn certify_scalar_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = utc(&[
        "certify",
        "--config",
        &fixture_arg("scalar_certify.toml"),
        "--falsify",
        "5",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    for key in [
        "Z_norm=",
        "p_max=",
        "p_min=",
        "g_bar=",
        "D_bar=",
        "R=",
        "schur=true",
        "stein_residual=",
        "falsify_passed=true",
    ] {
        assert!(text.contains(key), "missing {key} in {text}");
    }
}

#[test]
fn certify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("o");
    let o = out_dir.to_str().unwrap();

    let unstable = write_config(dir.path(), "unstable.toml", &scalar("1.1", "0.0"));
    let out = utc(&["certify", "--config", &unstable, "--output", o]);
    assert_eq!(code(&out), 3);
    assert!(stdout(&out).contains("R=none"));

    let clean = write_config(dir.path(), "clean.toml", &scalar("0.9", "0.3"));
    let out = utc(&["certify", "--config", &clean, "--output", o]);
    assert_eq!(code(&out), 0);
    assert!(
        stdout(&out).contains("R=0.000000000000e0"),
        "{}",
        stdout(&out)
    );

    let quad = utc(&[
        "certify",
        "--config",
        &fixture_arg("quad_regulation.toml"),
        "--output",
        o,
    ]);
    assert_eq!(code(&quad), 2);
}

#[test]
fn admire_certificate_is_structurally_unavailable() {
    let dir = tempfile::tempdir().unwrap();
    let out = utc(&[
        "certify",
        "--config",
        &fixture_arg("admire_regulation.toml"),
        "--gain",
        "simulation",
        "--steps",
        "300",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
    let text = stdout(&out);
    assert!(text.contains("gain_source=simulation"));
    assert!(text.contains("schur=false"));
    let rho: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("spectral_radius="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((rho - 1.0).abs() <= 1e-9);
}

#[test]
fn runtime_failure_reports_step() {
    let dir = tempfile::tempdir().unwrap();
    let text = fixture_text("quad_regulation.toml").replace(
        "u0 = [400.0, 400.0, 400.0, 400.0]",
        "u0 = [0.0, 0.0, 40000.0, 0.0]",
    );
    assert!(text.contains("40000"), "fixture u0 line changed");
    let cfg = write_config(dir.path(), "spin.toml", &text);
    let out = utc(&[
        "simulate",
        "--config",
        &cfg,
        "--output",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(stderr(&out).contains("step"));
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&utc(&["--help"])), 0);
    assert_eq!(code(&utc(&["--version"])), 0);
}
