//! End-to-end checks of the batch front-end: exit codes, report artifacts,
//! and byte-level determinism.

use std::path::Path;
use std::process::Command;

fn confspace() -> Command {
    Command::new(env!("CARGO_BIN_EXE_confspace"))
}

fn write_spec(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn run_writes_report_and_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(
        tmp.path(),
        "metrics.json",
        r#"{"schema": "confspace-experiment/1", "suite": "metrics", "seed": 7, "samples": 300}"#,
    );
    let out = tmp.path().join("out");
    let status = confspace()
        .arg("run")
        .arg(&spec)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report = std::fs::read_to_string(out.join("report.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(parsed["schema"], "confspace-report/1");
    assert_eq!(parsed["pass"], true);
    assert_eq!(parsed["seed"], 7);
    assert!(parsed["spec_sha256"].as_str().unwrap().len() == 64);
    assert!(parsed["library_version"].as_str().is_some());
}

#[test]
fn identical_runs_reproduce_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(
        tmp.path(),
        "spherical.json",
        r#"{"schema": "confspace-experiment/1", "suite": "spherical", "seed": 11, "samples": 4000, "shards": 2, "ladder_levels": 24}"#,
    );
    for dir in ["a", "b"] {
        let status = confspace()
            .arg("run")
            .arg(&spec)
            .arg("--out")
            .arg(tmp.path().join(dir))
            .status()
            .unwrap();
        assert!(status.success());
    }
    for file in [
        "report.json",
        "spherical_values.csv",
        "singularity_trajectory.csv",
    ] {
        let a = std::fs::read(tmp.path().join("a").join(file)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn seed_override_changes_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(
        tmp.path(),
        "consistency.json",
        r#"{"schema": "confspace-experiment/1", "suite": "consistency", "seed": 3, "samples": 3000}"#,
    );
    let run = |dir: &str, extra: &[&str]| {
        let mut cmd = confspace();
        cmd.arg("run")
            .arg(&spec)
            .arg("--out")
            .arg(tmp.path().join(dir));
        for arg in extra {
            cmd.arg(arg);
        }
        assert!(cmd.status().unwrap().success());
        std::fs::read_to_string(tmp.path().join(dir).join("report.json")).unwrap()
    };
    let base = run("a", &[]);
    let overridden = run("b", &["--seed-override", "4"]);
    assert_ne!(base, overridden);
    let parsed: serde_json::Value = serde_json::from_str(&overridden).unwrap();
    assert_eq!(parsed["seed"], 4);
}

#[test]
fn schema_violations_exit_two_with_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    // unknown suite: exit 2 plus a nearest-match hint
    let spec = write_spec(
        tmp.path(),
        "bad_suite.json",
        r#"{"schema": "confspace-experiment/1", "suite": "speric", "seed": 1}"#,
    );
    let out = confspace()
        .arg("run")
        .arg(&spec)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("spherical"), "hint missing: {stderr}");

    // malformed JSON: exit 2 with line-anchored diagnostics
    let spec = write_spec(tmp.path(), "broken.json", r#"{"schema": }"#);
    let out = confspace()
        .arg("run")
        .arg(&spec)
        .arg("--out")
        .arg(tmp.path().join("out2"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(":1:"), "line anchor missing: {stderr}");

    // wrong schema tag
    let spec = write_spec(
        tmp.path(),
        "old_schema.json",
        r#"{"schema": "confspace-experiment/0", "suite": "metrics", "seed": 1}"#,
    );
    let out = confspace()
        .arg("run")
        .arg(&spec)
        .arg("--out")
        .arg(tmp.path().join("out3"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn list_suites_enumerates_six() {
    let out = confspace().arg("list-suites").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in [
        "metrics",
        "poisson_identity",
        "consistency",
        "kakutani",
        "spherical",
        "representation",
    ] {
        assert!(text.contains(name), "{name} missing from listing");
    }
    // JSON mode emits a schema document
    let out = confspace()
        .arg("list-suites")
        .arg("--json")
        .output()
        .unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["suites"].as_object().unwrap().len(), 6);
}
