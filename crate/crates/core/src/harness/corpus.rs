//! Seeded bug corpus described by a `manifest.toml`.

use crate::lang::{compile, TypedProgram};
use crate::repair::{baseline, RepairConfig, RepairError};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize)]
pub struct Manifest {
    #[serde(rename = "case")]
    pub cases: Vec<CaseEntry>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CaseEntry {
    pub id: String,
    pub file: String,
    pub test: String,
    #[serde(default)]
    pub tags: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CorpusCase {
    pub bug_id: String,
    pub path: PathBuf,
    pub source: String,
    pub test: String,
    pub tags: Vec<String>,
    pub tp: TypedProgram,
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("{0}")]
    Frontend(String),
    #[error("{bug_id}: {source}")]
    BaselineMismatch { bug_id: String, source: RepairError },
}

pub fn read(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl CorpusCase {
    /// Reads and compiles a case; its test must fail with a null dereference.
    pub fn load(
        bug_id: &str,
        path: &Path,
        test: &str,
        tags: Vec<String>,
        cfg: &RepairConfig,
    ) -> Result<CorpusCase, HarnessError> {
        let source = read(path)?;
        let file = path.display().to_string();
        let tp = compile(&file, &source).map_err(|e| HarnessError::Frontend(e.render(&file)))?;
        baseline(&tp, test, cfg).map_err(|source| HarnessError::BaselineMismatch {
            bug_id: bug_id.to_string(),
            source,
        })?;
        Ok(CorpusCase {
            bug_id: bug_id.to_string(),
            path: path.to_path_buf(),
            source,
            test: test.to_string(),
            tags,
            tp,
        })
    }

    /// File name used in diff headers.
    pub fn file_name(&self) -> String {
        self.path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.bug_id.clone())
    }
}

pub fn load_manifest(dir: &Path) -> Result<Manifest, HarnessError> {
    let path = dir.join("manifest.toml");
    let text = read(&path)?;
    toml::from_str(&text).map_err(|e| HarnessError::Manifest {
        path,
        message: e.to_string(),
    })
}

/// Loads every case listed in `<dir>/manifest.toml`, in manifest order.
pub fn load_corpus(dir: &Path, cfg: &RepairConfig) -> Result<Vec<CorpusCase>, HarnessError> {
    load_manifest(dir)?
        .cases
        .into_iter()
        .map(|c| CorpusCase::load(&c.id, &dir.join(&c.file), &c.test, c.tags, cfg))
        .collect()
}
