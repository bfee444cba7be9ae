use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ris_satcom::harness::{read_json_results, CSV_HEADER};

const SMALL: &str = "num_subcarriers = 2\nnum_elements = 3\nmonte_carlo_runs = 4\nmax_evaluations = 500\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ris-satcom"))
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("cfg.toml");
    std::fs::write(&path, body).unwrap();
    path
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

#[test]
fn run_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("r.csv");
    let res = bin()
        .args(["run", "--seed", "3", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("none,"));
}

#[test]
fn sweep_writes_one_json_record_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("s.json");
    let res = bin()
        .args(["sweep", "--axis", "power", "--values", "60,100", "--seed", "5", "--format", "json", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let records = read_json_results(&out).unwrap();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0].axis_name, "budget_w");
    assert_eq!((records[0].axis_value, records[1].axis_value), (60.0, 100.0));
    assert!(records.iter().all(|r| r.runs == 4 && r.seed == 5));
}

#[test]
fn invalid_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "psi_deg = 95.0\n");
    let res = bin()
        .args(["run", "--seed", "1", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(code(&res), 1);
    assert!(String::from_utf8_lossy(&res.stderr).contains("psi"));
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn unknown_key_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "num_element = 4\n");
    let res = bin()
        .args(["run", "--seed", "1", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(code(&res), 1);
}

#[test]
fn decreasing_sweep_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let res = bin()
        .args(["sweep", "--axis", "elements", "--values", "8,4", "--seed", "1", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(code(&res), 1);
}

#[test]
fn bad_arguments_exit_one_and_help_exits_zero() {
    assert_eq!(code(&bin().arg("launch").output().unwrap()), 1);
    assert_eq!(code(&bin().args(["run", "--seed", "x"]).output().unwrap()), 1);
    assert_eq!(code(&bin().arg("--help").output().unwrap()), 0);
}

#[test]
fn infeasible_runs_exit_two_after_writing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}min_snr = 1e12\n"));
    let out = dir.path().join("inf.csv");
    let res = bin()
        .args(["run", "--seed", "1", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(code(&res), 2);
    assert!(std::fs::read_to_string(&out).unwrap().starts_with(CSV_HEADER));
}

#[test]
fn io_failures_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing = bin()
        .args(["run", "--seed", "1", "--config"])
        .arg(dir.path().join("absent.toml"))
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(code(&missing), 3);

    let cfg = write_config(dir.path(), SMALL);
    let unwritable = bin()
        .args(["run", "--seed", "1", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("no/such/dir/x.csv"))
        .output()
        .unwrap();
    assert_eq!(code(&unwritable), 3);
}

#[test]
fn water_filling_oracle_passes() {
    let res = bin().args(["oracle", "--check", "waterfilling"]).output().unwrap();
    assert_eq!(code(&res), 0);
    assert!(String::from_utf8_lossy(&res.stdout).starts_with("waterfilling: PASS"));
}
