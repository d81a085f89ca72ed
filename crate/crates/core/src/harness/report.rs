//! Serialized exploration reports.

use crate::repair::{Exploration, FilterReason};
use crate::strategy::{Decision, Mode};
use serde::{Deserialize, Serialize};
use std::io;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExplorationReport {
    pub bug_id: String,
    pub mode: Mode,
    pub site: u32,
    pub tentative: usize,
    pub valid: usize,
    pub unsynthesizable: usize,
    /// Valid decisions whose source patch fails, or the reverse.
    pub divergent: usize,
    pub elapsed_ms: u64,
    pub steps: u64,
    pub decisions: Vec<DecisionRecord>,
    pub filtered_out: Vec<FilteredRecord>,
    pub rejected: Vec<FilteredRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DecisionRecord {
    pub id: String,
    pub strategy: String,
    pub description: String,
    pub param: String,
    pub verdict: String,
    pub outcome: Outcome,
    pub steps: u64,
    /// Diff file, relative to the diff directory.
    pub diff: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unsynthesizable: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Valid,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilteredRecord {
    pub strategy: String,
    pub param: String,
    pub reason: String,
}

fn filtered(d: &Decision, reason: String) -> FilteredRecord {
    FilteredRecord {
        strategy: d.strategy.to_string(),
        param: d.param.describe(),
        reason,
    }
}

/// Decision id as used in reports and diff file names: `m-001`, `t-014`.
pub fn decision_id(mode: Mode, index: usize) -> String {
    let prefix = match mode {
        Mode::Meta => 'm',
        Mode::Template => 't',
    };
    format!("{prefix}-{:03}", index + 1)
}

impl ExplorationReport {
    /// Report of `ex`; `diff_of` gives the relative diff path of decision
    /// `id` when a diff was written.
    pub fn new(bug_id: &str, ex: &Exploration, diff_of: impl Fn(&str) -> Option<String>) -> Self {
        let decisions: Vec<DecisionRecord> = ex
            .candidates
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let id = decision_id(ex.mode, i);
                DecisionRecord {
                    diff: c.patch.as_ref().and_then(|_| diff_of(&id)),
                    id,
                    strategy: c.decision.strategy.to_string(),
                    description: c.decision.strategy.description().to_string(),
                    param: c.decision.param.describe(),
                    verdict: c.verdict.to_string(),
                    outcome: if c.is_valid() {
                        Outcome::Valid
                    } else {
                        Outcome::Invalid
                    },
                    steps: c.steps,
                    unsynthesizable: c.unsynthesizable.clone(),
                }
            })
            .collect();
        ExplorationReport {
            bug_id: bug_id.to_string(),
            mode: ex.mode,
            site: ex.site,
            tentative: ex.tentative(),
            valid: ex.valid(),
            unsynthesizable: ex.unsynthesizable(),
            divergent: ex.divergences(),
            elapsed_ms: ex.elapsed.as_millis() as u64,
            steps: ex.steps,
            decisions,
            filtered_out: ex
                .filtered_out
                .iter()
                .map(|f| {
                    let reason = match f.reason {
                        FilterReason::NullValued => "NullValued",
                        FilterReason::Equivalent => "Equivalent",
                    };
                    filtered(&f.decision, reason.to_string())
                })
                .collect(),
            rejected: ex.rejected.iter().map(|r| filtered(&r.decision, r.reason.clone())).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// The report with its wall-clock field zeroed.
    pub fn without_time(&self) -> Self {
        ExplorationReport {
            elapsed_ms: 0,
            ..self.clone()
        }
    }
}

/// Writes `contents` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}
