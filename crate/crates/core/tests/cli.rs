use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gfmsim::scenario::ScenarioFile;

fn gfmsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfmsim")).args(args).output().unwrap()
}

fn bundled(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn short_equilibrium(dir: &Path) -> PathBuf {
    let mut file = ScenarioFile::load(&bundled("equilibrium.json")).unwrap();
    file.solver.t_end_s = 0.3;
    let path = dir.join("short.json");
    file.save(&path).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_identical_outputs_twice() {
    let dir = tempfile::tempdir().unwrap();
    let sc = short_equilibrium(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = gfmsim(&["run", s(&sc), "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for level in ["faw", "saw"] {
        let x = std::fs::read(a.join(level).join("timeseries.csv")).unwrap();
        let y = std::fs::read(b.join(level).join("timeseries.csv")).unwrap();
        assert_eq!(x, y);
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("run_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["levels"].as_array().unwrap().len(), 2);

    let o = gfmsim(&["compare", s(&a.join("faw")), s(&b.join("faw"))]);
    assert!(o.status.success());
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(b.join("faw").join("compare_farm_p_pu.json")).unwrap()).unwrap();
    assert_eq!(metrics["max_abs"], 0.0);
}

#[test]
fn plots_are_written_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let sc = short_equilibrium(dir.path());
    let out = dir.path().join("out");
    let o = gfmsim(&["run", s(&sc), "--level", "faw", "--out", s(&out), "--plots"]);
    assert!(o.status.success());
    let svgs = std::fs::read_dir(out.join("faw"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg"))
        .count();
    assert!(svgs > 0);
}

#[test]
fn scan_at_fundamental_reproduces_reactance() {
    let dir = tempfile::tempdir().unwrap();
    let o = gfmsim(&[
        "scan",
        s(&bundled("equilibrium.json")),
        "--bus",
        "faw_pcc",
        "--fmin",
        "50",
        "--fmax",
        "50",
        "--points",
        "1",
        "--out",
        s(dir.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rd = csv::Reader::from_path(dir.path().join("impedance.csv")).unwrap();
    let row = rd.records().next().unwrap().unwrap();
    let x: f64 = row[2].parse().unwrap();
    assert!((x - 0.63).abs() < 0.1, "x = {x}");
    assert!(dir.path().join("impedance.svg").exists());
}

#[test]
fn unknown_bus_lists_the_alternatives() {
    let dir = tempfile::tempdir().unwrap();
    let o = gfmsim(&["scan", s(&bundled("equilibrium.json")), "--bus", "nowhere", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("nowhere") && err.contains("faw_pcc") && err.contains("string1_pcc"), "{err}");
}

#[test]
fn schema_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"units": {"dispatch_pu": [0.5]}, "solver": {"t_end_s": -1}}"#).unwrap();
    let o = gfmsim(&["run", s(&path), "--out", s(&dir.path().join("out"))]);
    assert_eq!(o.status.code(), Some(2));
    let doc: serde_json::Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(doc["error"]["exit_code"], 2);
}

#[test]
fn missing_file_exits_4() {
    let o = gfmsim(&["run", "/nonexistent/scenario.json"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn bundled_scenarios_validate() {
    let dir = bundled("");
    let mut count = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|x| x == "json") {
            ScenarioFile::load(&path)
                .and_then(|f| f.validate())
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 10);
}
