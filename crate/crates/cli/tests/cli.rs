use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weightkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SPEC: &str = r#"{"inputs":[{"family":"gevrey","params":{"s":1},"horizon":64},{"counterexample":{"levels":6}}],
  "conditions":["lc","mg_battery",{"id":"genmg","d_max":3}]}"#;

#[test]
fn gen_writes_a_sequence_that_analyze_accepts() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("seq.json");
    let out = run(&[
        "gen",
        "--family",
        "q_gevrey",
        "--param",
        "q=2",
        "--param",
        "n=2",
        "--horizon",
        "32",
        "--out",
        seq.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&seq).unwrap()).unwrap();
    assert_eq!(doc["log_values"].as_array().unwrap().len(), 33);

    let spec = write(
        dir.path(),
        "spec.json",
        &format!(r#"{{"inputs":[{doc}],"conditions":["lc"]}}"#),
    );
    let out = run(&["analyze", &spec]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let bundle: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(bundle["q_gevrey(2,2)"]["lc"]["verdict"], "HoldsOnHorizon");
}

#[test]
fn gen_counterexample() {
    let out = run(&["gen", "--counterexample", "5", "--variant", "minimal"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["label"].as_str().unwrap().starts_with("counterexample"));
}

#[test]
fn schema_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"inputs":[{"family":"nope"}],"conditions":["x"]}"#,
    );
    let out = run(&["analyze", &bad]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown family 'nope'"), "{err}");
    assert!(err.contains("unknown condition-id 'x'"), "{err}");

    let garbled = write(dir.path(), "garbled.json", "{not json");
    assert_eq!(run(&["analyze", &garbled]).status.code(), Some(1));
    assert_eq!(
        run(&["analyze", "/nonexistent/spec.json"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        run(&["gen", "--family", "gevrey", "--param", "s=abc"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn computation_errors_exit_2() {
    // Well-formed, but grid index 1000 leaves the matrix with horizon floor(4 / 1000) = 0.
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"inputs":[{"family":"gevrey","params":{"s":1},"horizon":4}],"conditions":["rstrange"],"grid":[1,1000]}"#,
    );
    let out = run(&["analyze", &spec]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn analyze_then_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.json", SPEC);
    let bundle = dir.path().join("bundle.json");
    let out = run(&["analyze", &spec, "--out", bundle.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let original = std::fs::read_to_string(&bundle).unwrap();

    let out = run(&["report", bundle.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), original);

    let out = run(&["report", bundle.to_str().unwrap(), "--format", "csv"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("label,condition,prefix,value,verdict\n"));
    assert!(csv.contains("genmg[1]"));

    let pd = dir.path().join("plots");
    let out = run(&[
        "report",
        bundle.to_str().unwrap(),
        "--format",
        "plotdata",
        "--out",
        pd.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let files: Vec<_> = std::fs::read_dir(&pd).unwrap().collect();
    assert!(!files.is_empty());
    assert_eq!(
        run(&["report", bundle.to_str().unwrap(), "--format", "plotdata"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn flags_override_the_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"inputs":[{"family":"gevrey","params":{"s":2}}],"conditions":["lc"]}"#,
    );
    let out = run(&["analyze", &spec, "--horizon", "16", "--format", "csv"]);
    assert!(out.status.success());
    let rows = String::from_utf8(out.stdout).unwrap();
    // one header line and one row per prefix of the LC witness series at most
    assert!(rows.lines().count() <= 18, "{rows}");
    assert_eq!(
        run(&["analyze", &spec, "--horizon", "2"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["analyze", &spec, "--grid", "1,-2"]).status.code(),
        Some(1)
    );
}
