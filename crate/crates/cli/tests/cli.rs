//! End-to-end checks of the command-line interface: artifact layout,
//! deterministic output, and the exit-code contract.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_germ-solver"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

const BELL_CONNECTION: &str = r#"{
    "fluxes": {"left": {"generator": "bell(1.0)", "samples": 201},
               "right": {"generator": "bell(2.0)", "samples": 201}},
    "germ": {"kind": "connection", "params": {"a": 0.5}},
    "mesh": {"dx": 0.01, "x_extent": 0.5, "t_end": 0.05, "cfl_fraction": 0.9, "num_flux": "godunov"},
    "u0": {"kind": "riemann", "left": 0.5, "right": 0.14645390070921985},
    "resolution": 17
}"#;

#[test]
fn simulate_writes_artifacts_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.json", BELL_CONNECTION);
    for sub in ["a", "b"] {
        let out = tmp.path().join(sub);
        let status = bin()
            .args(["simulate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        assert!(out.join("field.csv").exists());
        assert!(out.join("traces.csv").exists());
        assert!(out.join("report.json").exists());
    }
    let a = fs::read(tmp.path().join("a/field.csv")).unwrap();
    let b = fs::read(tmp.path().join("b/field.csv")).unwrap();
    assert_eq!(a, b, "identical configs must give byte-identical CSV");
    let header = String::from_utf8(a[..40].to_vec()).unwrap();
    assert!(header.starts_with("# germ-solver-v1\nt,x,u\n"));
}

#[test]
fn stationary_simulation_keeps_the_datum() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.json", BELL_CONNECTION);
    let out = tmp.path().join("out");
    assert!(bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let text = fs::read_to_string(out.join("field.csv")).unwrap();
    let mut first: Vec<f64> = Vec::new();
    let mut last: Vec<f64> = Vec::new();
    let mut t_last = f64::NEG_INFINITY;
    for line in text.lines().skip(2) {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        if cols[0] == 0.0 {
            first.push(cols[2]);
        }
        if cols[0] > t_last {
            t_last = cols[0];
            last.clear();
        }
        if cols[0] == t_last {
            last.push(cols[2]);
        }
    }
    assert_eq!(first.len(), last.len());
    for (a, b) in first.iter().zip(&last) {
        assert!((a - b).abs() <= 1e-12, "stationary datum moved: {a} vs {b}");
    }
}

#[test]
fn bad_config_key_exits_with_validation_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad.json",
        r#"{"fluxes": {"left": {"generator": "burgers"}}, "germ": {"kind": "vv"}, "typo": true}"#,
    );
    let status = bin()
        .args(["germ", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn incomplete_germ_exits_with_code_3() {
    let tmp = tempfile::tempdir().unwrap();
    // a single explicit pair cannot resolve a generic datum
    let cfg = write_config(
        tmp.path(),
        "run.json",
        r#"{
            "fluxes": {"left": {"generator": "burgers", "samples": 101}},
            "germ": {"pairs": [[1.0, -1.0]]},
            "resolution": 9
        }"#,
    );
    let status = bin()
        .args(["riemann", "--config"])
        .arg(&cfg)
        .args(["--left", "-0.3", "--right", "0.4"])
        .arg("--out")
        .arg(tmp.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn ambiguous_flux_exits_with_code_4() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "run.json",
        r#"{
            "fluxes": {"left": {"generator": "tent(0.0)", "samples": 13, "domain": [-1.0, 2.0]},
                       "right": {"generator": "tent(1.0)", "samples": 13, "domain": [-1.0, 2.0]}},
            "germ": {"kind": "krt"},
            "resolution": 9
        }"#,
    );
    let status = bin()
        .args(["riemann", "--config"])
        .arg(&cfg)
        .args(["--left", "-0.25", "--right", "1.25"])
        .arg("--out")
        .arg(tmp.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn germ_analyze_flags_bad_crossing_as_not_definite() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "run.json",
        r#"{
            "fluxes": {"left": {"generator": "tent(0.0)", "samples": 13, "domain": [-1.0, 2.0]},
                       "right": {"generator": "tent(1.0)", "samples": 13, "domain": [-1.0, 2.0]}},
            "germ": {"kind": "krt"},
            "resolution": 9
        }"#,
    );
    let out = tmp.path().join("out");
    let status = bin()
        .args(["germ", "--analyze", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("germ_report.json")).unwrap()).unwrap();
    assert_eq!(report["definiteness"], "not-definite");
    assert_eq!(report["l1d"], false);
    assert_eq!(report["format"], "germ-solver-v1");
}

#[test]
fn verify_passes_own_run_and_flags_mismatched_germ() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.json", BELL_CONNECTION);
    let out = tmp.path().join("run_dir");
    assert!(bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let report_dir = tmp.path().join("verify_ok");
    let status = bin()
        .args(["verify", "--config"])
        .arg(&cfg)
        .arg("--run")
        .arg(&out)
        .arg("--out")
        .arg(&report_dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    // verifying against a different connection must fail the trace test
    let wrong = write_config(
        tmp.path(),
        "wrong.json",
        r#"{
            "fluxes": {"left": {"generator": "bell(1.0)", "samples": 201},
                       "right": {"generator": "bell(2.0)", "samples": 201}},
            "germ": {"kind": "connection", "params": {"a": 0.9}},
            "resolution": 17
        }"#,
    );
    let status = bin()
        .args(["verify", "--config"])
        .arg(&wrong)
        .arg("--run")
        .arg(&out)
        .arg("--out")
        .arg(tmp.path().join("verify_bad"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(5));
    // informational mode reports without failing
    let status = bin()
        .args(["verify", "--informational", "--config"])
        .arg(&wrong)
        .arg("--run")
        .arg(&out)
        .arg("--out")
        .arg(tmp.path().join("verify_info"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn sweep_writes_per_eps_directories_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "run.json",
        r#"{
            "fluxes": {"left": {"generator": "burgers", "samples": 101}},
            "germ": {"kind": "vv"},
            "mesh": {"dx": 0.02, "x_extent": 1.0, "t_end": 0.05, "cfl_fraction": 0.45, "num_flux": "godunov"},
            "u0": {"kind": "riemann", "left": 1.0, "right": -1.0},
            "resolution": 11
        }"#,
    );
    let out = tmp.path().join("sweep");
    let status = bin()
        .args(["sweep", "--eps", "0.1,0.05,0.025", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for e in ["0.1", "0.05", "0.025"] {
        assert!(out.join(format!("eps_{e}")).join("field.csv").exists());
    }
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.lines().count() >= 5);
    assert!(summary.contains("eps,dt,steps"));
}

#[test]
fn viscous_profile_mode_reports_verdict() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "run.json",
        r#"{
            "fluxes": {"left": {"generator": "burgers", "samples": 201}},
            "germ": {"kind": "vv"},
            "resolution": 11
        }"#,
    );
    let out = tmp.path().join("prof");
    let status = bin()
        .args(["viscous", "--mode", "profile", "--ul", "1.0", "--ur", "-1.0"])
        .args(["--x-span", "60.0"])
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("profile_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["verdict"], "Connects");
    assert!(out.join("profile.csv").exists());
}

#[test]
fn bundled_fixtures_parse_and_drive_the_solvers() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let mut count = 0;
    for entry in fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        count += 1;
        let tmp = tempfile::tempdir().unwrap();
        let status = bin()
            .args(["germ", "--config"])
            .arg(&path)
            .arg("--out")
            .arg(tmp.path().join("out"))
            .status()
            .unwrap();
        assert!(status.success(), "fixture {} must drive the germ sampler", path.display());
    }
    assert!(count >= 5, "expected the bundled fixtures, found {count}");
}
