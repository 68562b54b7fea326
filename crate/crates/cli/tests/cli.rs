use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ermakov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ermakov")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_column(csv_path: &Path, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(csv_path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).expect("column present");
    r.records().map(|rec| rec.unwrap()[idx].parse().unwrap()).collect()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn efrw_q0_run_writes_constant_half() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("curve");
    let o = ermakov(&["run", "--scenario", "efrw_q0", "--kappa", "1", "--h", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let i = read_column(&out.join("series.csv"), "I");
    assert_eq!(i.len(), 201);
    assert!(i.iter().all(|v| (v - 0.5).abs() < 1e-6));
    let rep = report(&out);
    let drift = rep["checks"].as_array().unwrap().iter().find(|c| c["name"] == "invariant_drift").unwrap();
    assert_eq!(drift["passed"], true);
    assert!(out.join("plot.gp").exists());
}

#[test]
fn csv_round_trip_reproduces_drift() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("q");
    let o = ermakov(&["run", "--scenario", "efrw_q", "--Q", "1", "--kappa", "-1", "--h", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let i = read_column(&out.join("series.csv"), "I");
    assert!((i[0] - 2.0).abs() < 1e-6);
    let rel = i.iter().map(|v| (v - i[0]).abs()).fold(0.0, f64::max) / i[0].abs();
    let rep = report(&out);
    let reported = rep["drift"]["rel"].as_f64().unwrap();
    assert!((rel - reported).abs() < 1e-12, "{rel} vs {reported}");
    // Every column has the same length.
    let series = rep["series"].as_array().unwrap();
    assert!(series.iter().all(|c| c["values"].as_array().unwrap().len() == 201));
}

#[test]
fn identical_config_gives_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        let o = ermakov(&["run", "--scenario", "lewis_n", "--out", d.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(fs::read(a.join("series.csv")).unwrap(), fs::read(b.join("series.csv")).unwrap());
    assert_eq!(fs::read(a.join("report.json")).unwrap(), fs::read(b.join("report.json")).unwrap());
}

#[test]
fn empty_window_is_a_config_error() {
    let o = ermakov(&["check", "--scenario", "efrw_q0", "--t0", "1", "--t1", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("t0"));
}

#[test]
fn bad_fields_are_named() {
    let o = ermakov(&["check", "--scenario", "efrw_q0", "--kappa", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kappa"));
    let o = ermakov(&["check", "--scenario", "helmholtz_power", "--lambda", "-3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lambda"));
    let o = ermakov(&["check", "--scenario", "warp_drive"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("scenario"));
}

#[test]
fn coarse_tolerance_fails_drift() {
    let o = ermakov(&["check", "--scenario", "efrw_q0", "--tol", "1e-3"]);
    assert_eq!(o.status.code(), Some(1));
    let line = stdout(&o).lines().find(|l| l.starts_with("invariant_drift")).unwrap().to_string();
    assert!(line.contains("FAIL"), "{line}");
}

#[test]
fn helmholtz_closed_form_check_passes() {
    let o = ermakov(&["check", "--scenario", "helmholtz_power", "--m", "2"]);
    let line = stdout(&o).lines().find(|l| l.starts_with("o31_closed_form")).unwrap().to_string();
    assert!(line.contains("PASS"), "{line}");
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn overflow_is_a_numerical_failure_with_time() {
    let o = ermakov(&["check", "--scenario", "efrw_q0", "--t0", "-5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("t = -5"), "{}", stderr(&o));
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "# open universe\nscenario = efrw_q\nkappa = -1\nQ = 1\nh = 3\n").unwrap();
    let out = tmp.path().join("o");
    let o = ermakov(&["run", "--config", cfg.to_str().unwrap(), "--h", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep = report(&out);
    assert_eq!(rep["scenario"]["h"], 2.0);
    assert_eq!(rep["scenario"]["kappa"], -1);
    fs::write(&cfg, "scenario = efrw_q\nspin = 1\n").unwrap();
    let o = ermakov(&["check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("spin"));
}

#[test]
fn list_names_scenarios_in_order() {
    let o = ermakov(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("efrw_q0 → fig 1-4"));
    assert!(text.contains("lewis_n"));
    let heads: Vec<&str> = text.lines().filter(|l| !l.starts_with(' ')).collect();
    let mut sorted = heads.clone();
    sorted.sort();
    assert_eq!(heads, sorted);
    assert_eq!(heads.len(), 6);
}

#[test]
fn xyz_table_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let o = ermakov(&["run", "--scenario", "xyz", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let gap = read_column(&out.join("series.csv"), "gap");
    assert_eq!(gap.len(), 4);
    assert!(gap.windows(2).all(|w| w[1] < w[0]));
}
