//! Corpus runs, reports and the mode comparison.

pub mod compare;
pub mod corpus;
pub mod report;

use crate::explorer::explore_meta;
use crate::par;
use crate::patch::unified_diff;
use crate::repair::{Exploration, RepairConfig, RepairError};
use crate::strategy::Mode;
use crate::template_repair::explore_templates;
pub use corpus::{load_corpus, CorpusCase, HarnessError};
use report::{decision_id, write_atomic, ExplorationReport};
use std::path::{Path, PathBuf};

pub fn explore(case: &CorpusCase, mode: Mode, cfg: &RepairConfig) -> Result<Exploration, RepairError> {
    match mode {
        Mode::Template => explore_templates(&case.tp, &case.source, &case.test, cfg),
        Mode::Meta => explore_meta(&case.tp, &case.source, &case.test, cfg),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Explores `case` in `mode`. With a diff directory, every source patch
/// is written to `<diff_dir>/<bugId>/<id>.diff` followed by its verdict.
pub fn run_case(
    case: &CorpusCase,
    mode: Mode,
    cfg: &RepairConfig,
    diff_dir: Option<&Path>,
) -> Result<ExplorationReport, HarnessError> {
    let ex = explore(case, mode, cfg).map_err(|source| HarnessError::BaselineMismatch {
        bug_id: case.bug_id.clone(),
        source,
    })?;
    let file = case.file_name();
    let mut written = Vec::new();
    if let Some(dir) = diff_dir {
        for (i, c) in ex.candidates.iter().enumerate() {
            let Some(text) = &c.patch else { continue };
            let id = decision_id(mode, i);
            let rel = format!("{}/{id}.diff", case.bug_id);
            let body = format!("{}# verdict: {}\n", unified_diff(&case.source, text, &file), c.verdict);
            let path = dir.join(&rel);
            write_atomic(&path, &body).map_err(io_err(&path))?;
            written.push((id, rel));
        }
    }
    Ok(ExplorationReport::new(&case.bug_id, &ex, |id| {
        written.iter().find(|(w, _)| w == id).map(|(_, rel)| rel.clone())
    }))
}

/// Path of the report of `bug_id` in `mode` inside `dir`.
pub fn report_path(dir: &Path, bug_id: &str, mode: Mode) -> PathBuf {
    dir.join(format!("{bug_id}.{mode}.json"))
}

/// Runs both modes on every case and writes one report per case and mode.
pub fn run_corpus(
    cases: &[CorpusCase],
    cfg: &RepairConfig,
    report_dir: &Path,
    diff_dir: &Path,
) -> Result<Vec<ExplorationReport>, HarnessError> {
    let runs: Vec<(usize, Mode)> = (0..cases.len())
        .flat_map(|i| [(i, Mode::Template), (i, Mode::Meta)])
        .collect();
    let results = par::map(cfg.exec, &runs, |(i, mode)| {
        let report = run_case(&cases[*i], *mode, cfg, Some(diff_dir))?;
        let path = report_path(report_dir, &report.bug_id, *mode);
        write_atomic(&path, &report.to_json()).map_err(io_err(&path))?;
        Ok(report)
    });
    results.into_iter().collect()
}

/// Every `*.json` report in `dir`, by file name.
pub fn read_reports(dir: &Path) -> Result<Vec<ExplorationReport>, HarnessError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = corpus::read(p)?;
            serde_json::from_str(&text).map_err(|e| HarnessError::Manifest {
                path: p.clone(),
                message: e.to_string(),
            })
        })
        .collect()
}
