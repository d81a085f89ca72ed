use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nullrepair"))
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn repair_both_writes_two_reports_and_diffs() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("felix.json");
    let diffs = dir.path().join("diffs");
    let file = root().join("corpus/felix_like.mj");
    let o = run(&[
        "repair",
        file.to_str().unwrap(),
        "--test",
        "resolveWire",
        "--mode",
        "both",
        "--report",
        report.to_str().unwrap(),
        "--diff-dir",
        diffs.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for mode in ["template", "meta"] {
        let text = std::fs::read_to_string(dir.path().join(format!("felix.{mode}.json"))).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["mode"], mode);
        assert_eq!(v["bugId"], "felix_like");
    }
    assert!(diffs.join("felix_like/t-001.diff").exists());
    assert!(diffs.join("felix_like/m-001.diff").exists());
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("felix_like template: 13 tentative, 2 valid"), "{stdout}");
}

#[test]
fn missing_test_flag_is_a_usage_error() {
    let file = root().join("corpus/felix_like.mj");
    let o = run(&["repair", file.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert_eq!(code(&run(&["repair", file.to_str().unwrap(), "--test", "x", "--bogus"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
}

#[test]
fn passing_test_is_a_baseline_mismatch() {
    let file = root().join("crates/core/tests/fixtures/clean/c01_counter.mj");
    let o = run(&["repair", file.to_str().unwrap(), "--test", "counts", "--mode", "meta"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("baseline mismatch"));
}

#[test]
fn corpus_run_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    let reports = dir.path().join("reports");
    let o = run(&[
        "corpus",
        "run",
        root().join("corpus").to_str().unwrap(),
        "--report",
        reports.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let jsons = std::fs::read_dir(&reports)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "json"))
        .count();
    assert_eq!(jsons, 32);
    assert!(reports.join("diffs/math305_like").is_dir());

    let table = run(&["corpus", "compare", reports.to_str().unwrap()]);
    assert_eq!(code(&table), 0);
    assert_eq!(table.stdout, o.stdout, "compare reprints the run table");
    let csv = run(&["corpus", "compare", reports.to_str().unwrap(), "--csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 16 + 3);
    assert!(text.lines().any(|l| l.starts_with("Median,")));
}

#[test]
fn show_metaprogram_prints_hooks() {
    let o = run(&["show-metaprogram", root().join("corpus/math305_like.mj").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("checkForNull(") && text.contains("skipLine("));
}
