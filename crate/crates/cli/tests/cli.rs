use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman-lab")).args(args).output().expect("binary runs")
}

fn outputs(dir: &Path, ext: &str) -> Vec<std::path::PathBuf> {
    let mut v: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).filter(|p| p.to_str().unwrap().ends_with(ext)).collect();
    v.sort();
    v
}

#[test]
fn dimension_study_passes_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["dimension", "--manifold", "p1xp1", "--degree", "1,2", "--p-min", "1", "--p-max", "12", "--out", out, "--serial"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = outputs(dir.path(), ".csv");
    assert_eq!(csv.len(), 1);
    assert!(csv[0].file_name().unwrap().to_str().unwrap().starts_with("dimension-"));
    let text = std::fs::read_to_string(&csv[0]).unwrap();
    assert_eq!(text.lines().count(), 13);
    let json = outputs(dir.path(), ".json").into_iter().find(|p| !p.to_str().unwrap().ends_with(".meta.json")).unwrap();
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(summary["config"]["bundles"][0]["degree"], serde_json::json!([1, 2]));
    assert_eq!(outputs(dir.path(), ".svg").len(), 1);
}

#[test]
fn config_file_with_unreachable_bound_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let config = serde_json::json!({
        "study": "dimension",
        "manifold": "P2",
        "bundles": [{"degree": [1]}],
        "p_grid": [1, 2, 3],
        "tolerances": {"ratio_bound": 1.1},
        "out": dir.path().join("reports"),
    });
    std::fs::write(&cfg, config.to_string()).unwrap();
    let o = run(&["dimension", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["bergman", "--p-min", "9", "--p-max", "3", "--out", out]).status.code(), Some(2));
    assert_eq!(run(&["dimension", "--resolution", "4", "--out", out]).status.code(), Some(2));
    assert_eq!(run(&["dimension", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
    assert_eq!(run(&["dimension", "--manifold", "p7"]).status.code(), Some(2));
}
