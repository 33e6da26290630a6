use std::process::{Command, Output};

fn crib(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crib")).args(args).output().unwrap()
}

const SMALL: [&str; 2] = ["--set", "sweep.alpha_l=0.5, 1, 2"];

#[test]
fn fig1_writes_csv_with_provenance_header() {
    let out = crib(&["fig1", SMALL[0], SMALL[1]]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let meta = lines.next().unwrap();
    assert!(meta.starts_with("# config-hash=") && meta.contains("experiment=fig1"), "{meta}");
    let header = lines.next().unwrap();
    let cols = header.split(',').count();
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.split(',').count() == cols));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = crib(&["fig1", SMALL[0], SMALL[1]]);
    let b = crib(&["fig1", SMALL[0], SMALL[1]]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_file_and_override_agree() {
    let dir = std::env::temp_dir().join(format!("crib-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "# small run\nsweep.alpha_l = 0.5, 1, 2\n").unwrap();
    let csv = dir.join("out.csv");
    let from_file = crib(&["fig1", "--config", cfg.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert_eq!(from_file.status.code(), Some(0));
    let inline = crib(&["fig1", SMALL[0], SMALL[1]]);
    assert_eq!(std::fs::read(&csv).unwrap(), inline.stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn unknown_key_is_a_config_error() {
    let out = crib(&["fig1", "--set", "medium.colour=blue"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
}

#[test]
fn coarse_oracle_step_is_rejected() {
    let out = crib(&["validate", "--set", "oracle.dt=0.01"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let out = crib(&["fig2", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(out.status.code(), Some(2));
}
