//! Meta mode: one detection run on the metaprogram collects the decisions
//! available at the failing dereference, then each decision is replayed.

use crate::interp::{run_test, Detection, Hooks, Value, Verdict};
use crate::lang::{compile, DerefSite, StaticType, TypedProgram};
use crate::meta::transform::{transform, Metaprogram};
use crate::par;
use crate::patch::synthesize;
use crate::repair::{
    baseline, Candidate, Exploration, FilterReason, Filtered, RepairConfig, RepairError,
};
use crate::strategy::{
    applicable_strategies, plan_constructions, Decision, Mode, Param, Provenance, Strategy,
};
use std::time::Instant;

/// A decision found by the detection run, with the value it would reuse.
#[derive(Debug, Clone, PartialEq)]
pub struct Collected {
    pub decision: Decision,
    pub value: Option<Value>,
}

/// Runs the metaprogram in detection mode up to the first harmful null
/// dereference.
pub fn detect(mp: &Metaprogram, test: &str, cfg: &RepairConfig) -> Result<(Detection, u64), RepairError> {
    let rc = cfg.run_config();
    let out = run_test(&mp.tp, test, &Hooks::Detect, &rc)
        .map_err(|_| RepairError::UnknownTest(test.to_string()))?;
    match (out.verdict, out.detection) {
        (Verdict::DetectionHalt, Some(d)) => Ok((d, out.steps)),
        (v, _) => Err(RepairError::NotAnNpeBug(v)),
    }
}

/// Every runtime decision at the detected site, including those the
/// filter will drop. Reused values must be non-null objects whose runtime
/// class fits the required type; null values of a related type are kept
/// here so the filter can account for them.
pub fn collect(tp: &TypedProgram, site: &DerefSite, det: &Detection, ctor_depth: u32) -> Vec<Collected> {
    let mut out = Vec::new();
    let reuse = |required: &StaticType, s: Strategy, out: &mut Vec<Collected>| {
        for v in &det.vars {
            if site.receiver_var.as_ref() == Some(&v.var) {
                continue;
            }
            let fits = match (&v.value, &v.runtime_class) {
                (Value::Null, _) => tp.classes.related(&v.ty, required),
                (_, Some(class)) => tp.subtype_of(&StaticType::class(class.clone()), required),
                (_, None) => tp.subtype_of(&v.ty, required),
            };
            if fits {
                let param = Param::Var {
                    var: v.var.clone(),
                    ty: v.ty.clone(),
                    runtime_class: v.runtime_class.clone(),
                };
                out.push(Collected {
                    decision: Decision::new(site.id, s, param, Provenance::Runtime),
                    value: Some(v.value.clone()),
                });
            }
        }
    };
    let plans = |t: &StaticType, s: Strategy, out: &mut Vec<Collected>| {
        for plan in plan_constructions(tp, t, ctor_depth) {
            out.push(Collected {
                decision: Decision::new(site.id, s, Param::Ctor(plan), Provenance::Runtime),
                value: None,
            });
        }
    };
    let ret = &site.method.ret;
    for s in applicable_strategies(site, Mode::Meta) {
        match s {
            Strategy::S1a | Strategy::S1b => reuse(&site.receiver_type, s, &mut out),
            Strategy::S4c => reuse(ret, s, &mut out),
            Strategy::S2a | Strategy::S2b => plans(&site.receiver_type, s, &mut out),
            Strategy::S4b => plans(ret, s, &mut out),
            Strategy::S3 | Strategy::S4a | Strategy::S4d => out.push(Collected {
                decision: Decision::new(site.id, s, Param::None, Provenance::Runtime),
                value: None,
            }),
        }
    }
    out
}

/// Drops reuse decisions of null values and reuse decisions whose value
/// an earlier decision of the same strategy already reuses.
pub fn filter_equivalent(collected: Vec<Collected>) -> (Vec<Decision>, Vec<Filtered>) {
    let mut kept = Vec::new();
    let mut seen: Vec<(Strategy, Value)> = Vec::new();
    let mut dropped = Vec::new();
    for c in collected {
        let Some(value) = c.value else {
            kept.push(c.decision);
            continue;
        };
        let reason = if value.is_null() {
            Some(FilterReason::NullValued)
        } else if seen.contains(&(c.decision.strategy, value.clone())) {
            Some(FilterReason::Equivalent)
        } else {
            seen.push((c.decision.strategy, value));
            None
        };
        match reason {
            Some(reason) => dropped.push(Filtered {
                decision: c.decision,
                reason,
            }),
            None => kept.push(c.decision),
        }
    }
    (kept, dropped)
}

/// Replays one decision on the metaprogram.
pub fn replay(mp: &Metaprogram, test: &str, d: &Decision, cfg: &RepairConfig) -> (Verdict, u64) {
    let out = run_test(&mp.tp, test, &Hooks::Replay(d.clone()), &cfg.run_config())
        .expect("test exists in metaprogram");
    (out.verdict, out.steps)
}

/// Full meta-mode exploration of the failure of `test`. `source` is the
/// text `tp` was compiled from, used to render source patches.
pub fn explore_meta(
    tp: &TypedProgram,
    source: &str,
    test: &str,
    cfg: &RepairConfig,
) -> Result<Exploration, RepairError> {
    let start = Instant::now();
    let base = baseline(tp, test, cfg)?;
    let mp = transform(tp).map_err(|e| RepairError::Instrumentation(e.to_string()))?;
    let (det, detect_steps) = detect(&mp, test, cfg)?;
    let site = tp.site(det.site).expect("detected site exists");
    let (decisions, filtered_out) = filter_equivalent(collect(tp, site, &det, cfg.ctor_depth));
    let rc = cfg.run_config();
    let candidates = par::map(cfg.exec, &decisions, |d| {
        let (verdict, steps) = replay(&mp, test, d, cfg);
        let patched = synthesize(tp, source, d, Mode::Meta)
            .map_err(|e| e.to_string())
            .and_then(|p| match compile("patched.mj", &p.text) {
                Ok(ptp) => Ok((p.text, ptp)),
                Err(e) => Err(format!("patch does not compile: {}", e.render("patched.mj").trim_end())),
            });
        let (patch, unsynthesizable, patched_verdict) = match patched {
            Ok((text, ptp)) => {
                let v = run_test(&ptp, test, &Hooks::Off, &rc).expect("test survives patching");
                (Some(text), None, Some(v.verdict))
            }
            Err(reason) => (None, Some(reason), None),
        };
        Candidate {
            decision: d.clone(),
            verdict,
            steps,
            patch,
            unsynthesizable,
            patched_verdict,
        }
    });
    let steps = base.steps + detect_steps + candidates.iter().map(|c| c.steps).sum::<u64>();
    Ok(Exploration {
        mode: Mode::Meta,
        site: det.site,
        candidates,
        filtered_out,
        rejected: Vec::new(),
        steps,
        elapsed: start.elapsed(),
        trace: base.trace,
    })
}
