use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn dcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcs"))
        .args(args)
        .env_remove("DCS_SEED")
        .output()
        .unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dcs-cli-{name}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["bounds", "--rho", "1.5"],
        vec!["bounds", "--min", "10", "--max", "5"],
        vec!["mc", "--trials", "0"],
        vec!["mc", "--schemes", "magic"],
        vec!["mc", "--axis", "num-sensors", "--grid", "2.5"],
        vec!["ingest", "--data", "x", "--n", "0"],
        vec!["real"],
    ] {
        assert_eq!(dcs(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn default_bounds_are_ordered() {
    let out = dcs(&["bounds"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("mu_over_tau,p_raw,p_cs,p_dcs"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r[3] <= r[2] && r[2] <= r[1]));
}

#[test]
fn input_errors_exit_with_three() {
    let out = dcs(&["real", "--data", "/nonexistent/motes.txt"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/motes.txt"));

    let dir = scratch("missing");
    let log = dir.join("log.txt");
    fs::write(&log, "2004-02-28 00:58:46.002832 3 1 19.9884 37.0933 45.08 2.69964\n").unwrap();
    let out = dcs(&["real", "--data", log.to_str().unwrap(), "--ids", "99"]);
    assert_eq!(out.status.code(), Some(3));
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn ingest_windows_and_warnings() {
    let dir = scratch("ingest");
    let empty = dir.join("empty.txt");
    fs::write(&empty, "").unwrap();
    let out = dcs(&["ingest", "--data", empty.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));

    let log = dir.join("log.txt");
    let mut text = String::new();
    for t in 0..1030 {
        text.push_str(&format!("2004-02-28 00:00:00.0 {t} 4 {:.2} 37.0 45.0 2.7\n", 18.0 + 0.001 * t as f64));
    }
    fs::write(&log, text).unwrap();
    let csv = dir.join("frames.csv");
    let out = dcs(&["ingest", "--data", log.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let frames = fs::read_to_string(&csv).unwrap();
    assert_eq!(frames.lines().count(), 3);
    assert!(frames.lines().nth(2).unwrap().starts_with("4,1,"));
    let manifest = fs::read_to_string(dir.join("frames.csv.manifest")).unwrap();
    assert!(manifest.starts_with("# subcommand: ingest"));
    assert!(manifest.contains("\nn=512\n"));
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn seed_falls_back_to_environment() {
    let args = ["mc", "--trials", "5", "--grid", "20"];
    let run = |seed: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_dcs"));
        c.args(args).env_remove("DCS_SEED");
        if let Some(s) = seed {
            c.env("DCS_SEED", s);
        }
        c.output().unwrap().stdout
    };
    let explicit = dcs(&["mc", "--trials", "5", "--grid", "20", "--seed", "9"]).stdout;
    assert_eq!(run(Some("9")), explicit);
    assert_eq!(run(None), dcs(&["mc", "--trials", "5", "--grid", "20", "--seed", "1"]).stdout);
}
