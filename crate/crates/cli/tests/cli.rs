use std::path::PathBuf;
use std::process::{Command, Output};

fn uwbjio(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uwbjio")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("uwbjio-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn missing_config_exits_with_usage_code() {
    let out = uwbjio(&["convergence", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn unknown_flag_exits_with_usage_code() {
    let out = uwbjio(&["sweep-snr", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_config_value_exits_with_usage_code() {
    let dir = scratch("bad");
    let path = dir.join("bad.cfg");
    std::fs::write(&path, "[experiment]\ntrials = 0\n").unwrap();
    let out = uwbjio(&["convergence", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn convexity_certificate_flags_non_convex_regime() {
    let out = uwbjio(&["certify-convexity", "--e1", "1", "--v", "0.5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0.25 <= 1, non-convex regime"), "{text}");
}

#[test]
fn convergence_run_writes_csv() {
    let dir = scratch("conv");
    let out = uwbjio(&[
        "convergence",
        "--trials",
        "2",
        "--symbols",
        "60",
        "--algo",
        "rake,jio_nsg",
        "--out",
        dir.to_str().unwrap(),
        "--raw",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("convergence.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "experiment,algorithm,axis,axis_value,metric,value,trials,symbols"
    );
    assert!(csv.lines().any(|l| l.starts_with("convergence,jio_nsg,symbols,59,ber_uncoded,")));
    assert!(dir.join("convergence_raw.csv").exists());
}

#[test]
fn show_config_round_trips_through_a_file() {
    let dir = scratch("show");
    let out = uwbjio(&["show-config"]);
    assert!(out.status.success());
    let path = dir.join("default.cfg");
    std::fs::write(&path, &out.stdout).unwrap();
    let again = uwbjio(&["show-config", "--config", path.to_str().unwrap()]);
    assert!(again.status.success());
    assert_eq!(out.stdout, again.stdout);
}
