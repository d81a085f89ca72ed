#![allow(dead_code)]

pub mod gen;
pub mod oracle;

use nullrepair::harness::corpus::load_manifest;
use nullrepair::harness::{load_corpus, CorpusCase};
use nullrepair::lang::{compile, TypedProgram};
use nullrepair::repair::RepairConfig;
use std::path::{Path, PathBuf};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn corpus() -> Vec<CorpusCase> {
    load_corpus(&corpus_dir(), &RepairConfig::default()).expect("corpus loads")
}

pub fn corpus_case(id: &str) -> CorpusCase {
    let m = load_manifest(&corpus_dir()).expect("manifest");
    let e = m.cases.iter().find(|c| c.id == id).expect("case in manifest");
    CorpusCase::load(
        &e.id,
        &corpus_dir().join(&e.file),
        &e.test,
        e.tags.clone(),
        &RepairConfig::default(),
    )
    .expect("case loads")
}

pub fn fixture_case(name: &str, test: &str) -> CorpusCase {
    CorpusCase::load(
        name,
        &fixture_dir().join(format!("{name}.mj")),
        test,
        Vec::new(),
        &RepairConfig::default(),
    )
    .expect("fixture loads")
}

pub fn sequential() -> RepairConfig {
    RepairConfig {
        exec: nullrepair::par::Exec::Sequential,
        ..RepairConfig::default()
    }
}

pub fn compile_ok(src: &str) -> TypedProgram {
    match compile("t.mj", src) {
        Ok(tp) => tp,
        Err(e) => panic!("{}\n{src}", e.render("t.mj")),
    }
}

/// The NPE-free programs, as (file name, source, test names).
pub fn clean_programs() -> Vec<(String, String, Vec<String>)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixture_dir().join("clean"))
        .expect("clean dir")
        .map(|e| e.expect("entry").path())
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let src = std::fs::read_to_string(&p).expect("read");
            let tests = compile_ok(&src).test_names();
            (p.file_name().unwrap().to_string_lossy().into_owned(), src, tests)
        })
        .collect()
}

/// Every corpus program and every clean program with its tests.
pub fn all_programs() -> Vec<(String, String, Vec<String>)> {
    let mut out: Vec<_> = corpus()
        .into_iter()
        .map(|c| (c.bug_id.clone(), c.source.clone(), c.tp.test_names()))
        .collect();
    out.extend(clean_programs());
    out
}

/// Fixtures on which static and runtime repair contexts coincide.
pub const EQ_FIXTURES: [(&str, &str); 5] = [
    ("eq1", "runs"),
    ("eq2", "picks"),
    ("eq3", "steps"),
    ("eq4", "drains"),
    ("eq5", "flushes"),
];
