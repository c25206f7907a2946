use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stablefield"))
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn write_config(dir: &TempDir, value: &Value) -> PathBuf {
    let path = dir.path().join("config.json");
    std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin().args(args).arg("--config").arg(config).arg("--out").arg(out).output().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn reduced(replicates: u64, n_list: &[u64], g_suite: Value) -> Value {
    json!({
        "groupSpec": {"d": 2, "kernelGens": [[1, 1]]},
        "kernelModel": {
            "alpha": 1.5,
            "marks": [{"id": 0, "weight": 1.0}],
            "support": [[0, 0], [1, 0]],
            "h": [{"w": 0, "u": [0, 0], "value": 1.0}, {"w": 0, "u": [1, 0], "value": 0.5}]
        },
        "nList": n_list,
        "replicates": replicates,
        "masterSeed": 11,
        "gSuite": g_suite
    })
}

#[test]
fn analyze_worked_example() {
    let out = TempDir::new().unwrap();
    let o = run(&["analyze", "--json"], &repo_config("worked-example.json"), out.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["quotient"]["p"], 1);
    assert_eq!(v["quotient"]["q"], 1);
    assert_eq!(v["quotient"]["l"], 1);
    assert!((v["geometry"]["c"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert_eq!(v["body"], json!([[-2.0, 2.0]]));
    assert_eq!(v["provenance"]["configHash"].as_str().unwrap().len(), 64);
    assert!(out.path().join("analysis.json").exists());
    let profile = std::fs::read_to_string(out.path().join("profile.csv")).unwrap();
    assert!(profile.starts_with("y1,fiber_volume,m_ratio\n"));
}

#[test]
fn analyze_trivial_kernel_gives_c_two() {
    let out = TempDir::new().unwrap();
    let o = run(&["analyze", "--json"], &repo_config("plane.json"), out.path());
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["quotient"]["q"], 0);
    assert!((v["geometry"]["c"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ \"groupSpec\": ").unwrap();
    let o = run(&["analyze"], &path, dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());

    let missing_seed = write_config(&dir, &json!({"groupSpec": {"d": 2, "kernelGens": []}}));
    assert_eq!(run(&["analyze"], &missing_seed, dir.path()).status.code(), Some(2));
    let unknown = write_config(&dir, &json!({"groupSpec": {"d": 2}, "masterSeed": 1, "colour": 3}));
    assert_eq!(run(&["analyze"], &unknown, dir.path()).status.code(), Some(2));
    let missing_file = dir.path().join("nope.json");
    assert_eq!(run(&["analyze"], &missing_file, dir.path()).status.code(), Some(2));
}

#[test]
fn full_rank_kernel_is_a_domain_error() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, &json!({"groupSpec": {"d": 2, "kernelGens": [[1, 0], [0, 1]]}, "masterSeed": 1}));
    assert_eq!(run(&["analyze"], &path, dir.path()).status.code(), Some(3));
}

#[test]
fn simulate_is_deterministic_across_worker_counts() {
    let dir = TempDir::new().unwrap();
    let mut cfg = reduced(40, &[4, 8], json!([]));
    cfg["kernelModel"]["alpha"] = json!(1.1);
    let path = write_config(&dir, &cfg);
    let csv = |workers: &str, sub: &str| {
        let out = dir.path().join(sub);
        let o = bin()
            .args(["simulate", "--workers", workers, "--config"])
            .arg(&path)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out.join("maxima.csv")).unwrap()
    };
    let a = csv("1", "a");
    assert_eq!(a, csv("3", "b"));
    assert_eq!(a, csv("1", "c"));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("replicate,n,Mn,seed\n"));
    assert_eq!(text.lines().count(), 1 + 40 * 2);
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, &reduced(10, &[4], json!([])));
    let o = bin()
        .args(["simulate", "--json", "--seed", "99", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["provenance"]["masterSeed"], 99);
    let csv = std::fs::read_to_string(dir.path().join("maxima.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",99")));
}

#[test]
fn simulate_rejects_bad_requests() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, &reduced(0, &[4], json!([])));
    assert_eq!(run(&["simulate"], &path, dir.path()).status.code(), Some(2));
    let mut cfg = reduced(10, &[4], json!([]));
    cfg["kernelModel"]["alpha"] = json!(1.97);
    let path = write_config(&dir, &cfg);
    assert_eq!(run(&["simulate"], &path, dir.path()).status.code(), Some(3));
    let path = write_config(&dir, &reduced(10, &[8, 4], json!([])));
    assert_eq!(run(&["simulate"], &path, dir.path()).status.code(), Some(2));
    let path = write_config(&dir, &reduced(10, &[4], json!([])));
    let o = bin().args(["simulate", "--workers", "0", "--config"]).arg(&path).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn converge_with_empty_suite_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, &reduced(100, &[4], json!([])));
    assert_eq!(run(&["converge"], &path, dir.path()).status.code(), Some(2));
}

#[test]
fn converge_writes_a_passing_report() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, &reduced(200, &[8, 16], json!([{"a": 2.0, "wdt": 1.0, "beta": 1.0}])));
    let o = run(&["converge", "--json"], &path, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let v = stdout_json(&o);
    assert_eq!(v["report"]["pass"], true);
    assert_eq!(v["report"]["rows"].as_array().unwrap().len(), 2);
    let csv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert!(csv.starts_with("n,gId,empirical,SE,theoretical,pass\n"));
    assert!(csv.lines().any(|l| l.starts_with("inf,0,")));
}

#[test]
fn wrong_scaling_mode_reports_its_flags() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, &reduced(100, &[4, 8], json!([])));
    let o = run(&["converge", "--wrong-scaling", "--json"], &path, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    for flag in ["nonTight", "overScaledVanishes", "underScaledDiverges"] {
        assert!(v["diagnostics"][flag].is_boolean(), "{flag}");
    }
    assert!(dir.path().join("scaling.csv").exists());
}

#[test]
fn golden_passes_by_default() {
    let o = bin().arg("golden").env_remove("GOLDEN_TOLERANCE").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS")));
    assert!(text.contains("V(0.5)"));
}

#[test]
fn golden_json_lists_every_assertion() {
    let o = bin().args(["golden", "--json"]).env_remove("GOLDEN_TOLERANCE").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["pass"], true);
    let names: Vec<&str> = v["assertions"].as_array().unwrap().iter().map(|a| a["name"].as_str().unwrap()).collect();
    for n in ["p", "q", "l", "C lower end", "C upper end", "V(0.5)", "c", "l * integral of V"] {
        assert!(names.contains(&n), "{n}");
    }
}

#[test]
fn tampered_golden_tolerance_fails_by_name() {
    let o = bin().arg("golden").env("GOLDEN_TOLERANCE", "-1").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("golden assertions failed") && err.contains("V(0.5)"), "{err}");
    let o = bin().arg("golden").env("GOLDEN_TOLERANCE", "loose").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
