use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spreadcol"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn spreadcol")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn red_thumb_probability_is_one_half() {
    let out = run(&["counterexample", "red_thumb", "--D", "3"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["probability"], "1/2");
    assert_eq!(v["holds"], true);
}

#[test]
fn generated_graph_samples_are_proper() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    let samples = dir.path().join("s.json");
    assert!(run(&["gen", "--n", "50", "--D", "6", "--seed", "3", "--out", graph.to_str().unwrap()]).status.success());
    let out = run(&["sample", "--graph", graph.to_str().unwrap(), "--seeds", "8", "--out", samples.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(summary["proper"], 8);
    let results: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&samples).unwrap()).unwrap();
    assert_eq!(results.as_array().unwrap().len(), 8);
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let base = ["sample", "--n", "40", "--D", "6", "--seeds", "6", "--seed", "11"];
    let one = run(&[&base[..], &["--jobs", "1"]].concat());
    let four = run(&[&base[..], &["--jobs", "4"]].concat());
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, run(&base).stdout);
}

#[test]
fn audit_csv_is_deterministic() {
    let base = ["audit", "--n", "30", "--D", "4", "--trials", "300", "--family", "singletons", "--seed", "2"];
    let a = run(&[&base[..], &["--jobs", "1"]].concat());
    let b = run(&[&base[..], &["--jobs", "3"]].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("set,size,trials,hits,p_hat,ci_lo,ci_hi\n"));
}

#[test]
fn enforced_ceiling_fails_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir, "cfg.json", r#"{"ceilings": {"c_hat": 0.5}}"#);
    let out = run(&[
        "--config", cfg.to_str().unwrap(),
        "audit", "--sampler", "random-greedy", "--n", "20", "--D", "4", "--trials", "200", "--enforce",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["gen", "--n", "10"]).status.code(), Some(2));
    assert_eq!(run(&["--eps", "0.5", "gen", "--n", "10", "--D", "3"]).status.code(), Some(2));
    assert_eq!(run(&["counterexample", "purple", "--D", "3"]).status.code(), Some(2));
    assert_eq!(run(&["decompose", "--graph", "/nonexistent/graph.txt"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir, "cfg.json", r#"{"sed": 1}"#);
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "gen", "--n", "10", "--D", "3"]).status.code(), Some(2));
}

#[test]
fn cost_of_a_hypergraph_file() {
    let dir = tempfile::tempdir().unwrap();
    let h = write(
        &dir,
        "h.json",
        r#"{"ground": ["a", "b", "c"], "edges": [["a", "b"], ["b", "c"]], "q": {"a": 0.5, "b": 0.25, "c": 0.5}}"#,
    );
    let out = run(&["cost", "--hypergraph", h.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["cost_exact"], "1/4");
    assert!(v["expense"].as_f64().unwrap() <= v["cost"].as_f64().unwrap() + 1e-12);
}

#[test]
fn decompose_reports_verification() {
    let out = run(&["decompose", "--n", "60", "--D", "8", "--seed", "4"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["all_pass"], true);
    assert_eq!(v["failures"], 0);
}
