use std::path::PathBuf;
use std::process::Command;

fn tiltwing() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tiltwing"))
}

fn crate_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

#[test]
fn config_validate_accepts_shipped_files() {
    let out = tiltwing()
        .args(["config", "validate", "--vehicle"])
        .arg(crate_path("config/vehicle.toml"))
        .arg("--controller")
        .arg(crate_path("config/controller.toml"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bad_vehicle_file_exits_with_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.toml");
    std::fs::write(&path, "mass = -1.0\n").unwrap();
    let out = tiltwing().args(["config", "validate", "--vehicle"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn trim_query_reads_the_shipped_map() {
    let out = tiltwing()
        .args(["trim", "query", "--map"])
        .arg(crate_path("data/default_trim_map.csv"))
        .args(["--airspeed", "0", "--gamma", "0"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0].parse::<f64>().unwrap(), 1.0);
    assert!((row[1].parse::<f64>().unwrap() - 0.7698).abs() < 1e-3);
}

#[test]
fn sim_run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("hover.csv");
    let status = tiltwing()
        .args(["sim", "run", "--scenario"])
        .arg(crate_path("scenarios/hover_steps.toml"))
        .arg("--out")
        .arg(&log)
        .status()
        .unwrap();
    assert!(status.success());
    let metrics = dir.path().join("metrics.csv");
    let out = tiltwing()
        .args(["report", "--log"])
        .arg(&log)
        .arg("--out")
        .arg(&metrics)
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&metrics).unwrap();
    assert!(csv.starts_with("metric,value"));
    let rows: f64 = csv
        .lines()
        .find_map(|l| l.strip_prefix("rows,"))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(rows, 16.0 * 250.0);
}

#[test]
fn check_passes_on_the_reference_vehicle() {
    let out = tiltwing().arg("check").output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 6, "{text}");
}
