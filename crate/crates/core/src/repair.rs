//! Types shared by the two repair modes.

use crate::interp::{run_test, Hooks, RunConfig, TraceEvent, Verdict, DEFAULT_BUDGET};
use crate::lang::{SiteId, TypedProgram};
use crate::par::Exec;
use crate::strategy::{Decision, Mode};
use serde::Serialize;
use std::time::Duration;

#[derive(Debug, Clone)]
pub struct RepairConfig {
    /// Statement budget of every run.
    pub budget: u64,
    /// Maximum nesting of construction plans.
    pub ctor_depth: u32,
    pub exec: Exec,
    /// Keep the event trace of the baseline or detection run.
    pub trace: bool,
}

impl Default for RepairConfig {
    fn default() -> Self {
        RepairConfig {
            budget: DEFAULT_BUDGET,
            ctor_depth: 3,
            exec: Exec::default(),
            trace: false,
        }
    }
}

impl RepairConfig {
    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            budget: self.budget,
            ..RunConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RepairError {
    #[error("no test named `{0}`")]
    UnknownTest(String),
    /// The failing run does not end in an uncaught null dereference.
    #[error("baseline run is not a null dereference failure: {0}")]
    NotAnNpeBug(Verdict),
    #[error("metaprogram does not typecheck: {0}")]
    Instrumentation(String),
}

/// A tentative patch and what happened when the test ran against it.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub decision: Decision,
    pub verdict: Verdict,
    pub steps: u64,
    /// The patched source file.
    pub patch: Option<String>,
    /// Why no source patch could be produced.
    pub unsynthesizable: Option<String>,
    /// Verdict of the patched source on the plain interpreter.
    pub patched_verdict: Option<Verdict>,
}

impl Candidate {
    pub fn is_valid(&self) -> bool {
        self.verdict.is_pass()
    }

    /// Hook run and source patch disagree on whether the test passes.
    pub fn diverges(&self) -> bool {
        self.patched_verdict
            .as_ref()
            .is_some_and(|v| v.is_pass() != self.verdict.is_pass())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FilterReason {
    /// The reused variable held null when the dereference happened.
    NullValued,
    /// Another decision of the same strategy reuses the same value.
    Equivalent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Filtered {
    pub decision: Decision,
    pub reason: FilterReason,
}

/// A statically enumerated decision with no tentative patch.
#[derive(Debug, Clone, PartialEq)]
pub struct Rejected {
    pub decision: Decision,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Exploration {
    pub mode: Mode,
    pub site: SiteId,
    pub candidates: Vec<Candidate>,
    pub filtered_out: Vec<Filtered>,
    pub rejected: Vec<Rejected>,
    /// Interpreter steps over every run of the exploration.
    pub steps: u64,
    pub elapsed: Duration,
    pub trace: Vec<TraceEvent>,
}

impl Exploration {
    pub fn tentative(&self) -> usize {
        self.candidates.len()
    }

    pub fn valid(&self) -> usize {
        self.candidates.iter().filter(|c| c.is_valid()).count()
    }

    pub fn unsynthesizable(&self) -> usize {
        self.candidates.iter().filter(|c| c.unsynthesizable.is_some()).count()
    }

    pub fn divergences(&self) -> usize {
        self.candidates.iter().filter(|c| c.diverges()).count()
    }
}

/// Result of the plain failing run.
#[derive(Debug, Clone)]
pub struct Baseline {
    pub site: SiteId,
    pub steps: u64,
    pub trace: Vec<TraceEvent>,
}

/// Runs `test` on the unmodified program and returns its null dereference site.
pub fn baseline(tp: &TypedProgram, test: &str, cfg: &RepairConfig) -> Result<Baseline, RepairError> {
    let rc = RunConfig {
        trace: cfg.trace,
        ..cfg.run_config()
    };
    let out = run_test(tp, test, &Hooks::Off, &rc)
        .map_err(|_| RepairError::UnknownTest(test.to_string()))?;
    match out.verdict.npe_site() {
        Some(site) => Ok(Baseline {
            site,
            steps: out.steps,
            trace: out.trace,
        }),
        None => Err(RepairError::NotAnNpeBug(out.verdict)),
    }
}
