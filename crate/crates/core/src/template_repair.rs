//! Template mode: static enumeration of decisions, one patched and
//! recompiled program per decision, one test run per compiled patch.

use crate::interp::{run_test, Hooks};
use crate::lang::{compile, DerefSite, StaticType, TypedProgram};
use crate::par;
use crate::patch::synthesize;
use crate::repair::{baseline, Candidate, Exploration, RepairConfig, RepairError, Rejected};
use crate::strategy::{
    applicable_strategies, plan_constructions, Const, Decision, Mode, Param, Provenance, Strategy,
};
use std::time::Instant;

/// Decisions available at `site` from its static context, strategies in
/// table order.
pub fn enumerate_static_candidates(tp: &TypedProgram, site: &DerefSite, ctor_depth: u32) -> Vec<Decision> {
    let mut out = Vec::new();
    let mut push = |s: Strategy, p: Param| out.push(Decision::new(site.id, s, p, Provenance::Static));
    let vars_of = |t: &StaticType| {
        tp.accessible_vars(site)
            .into_iter()
            .filter(|v| tp.subtype_of(&v.ty, t))
            .map(|v| Param::var(v.var, v.ty))
            .collect::<Vec<_>>()
    };
    let ret = &site.method.ret;
    for s in applicable_strategies(site, Mode::Template) {
        match s {
            Strategy::S1a | Strategy::S1b => {
                for p in vars_of(&site.receiver_type) {
                    push(s, p);
                }
                push(s, Param::Const(Const::Null));
            }
            Strategy::S2a | Strategy::S2b => {
                for plan in plan_constructions(tp, &site.receiver_type, ctor_depth) {
                    push(s, Param::Ctor(plan));
                }
            }
            Strategy::S4b => {
                for plan in plan_constructions(tp, ret, ctor_depth) {
                    push(s, Param::Ctor(plan));
                }
            }
            Strategy::S4c => {
                for p in vars_of(ret) {
                    push(s, p);
                }
                // null would duplicate S4a
                for c in Const::all() {
                    if c != Const::Null && tp.subtype_of(&c.ty(), ret) {
                        push(s, Param::Const(c));
                    }
                }
            }
            Strategy::S3 | Strategy::S4a | Strategy::S4d => push(s, Param::None),
        }
    }
    out
}

enum Evaluated {
    Tentative(Candidate),
    Rejected(Rejected),
}

/// Explores every static decision at the site where `test` fails.
/// `source` is the text `tp` was compiled from.
pub fn explore_templates(
    tp: &TypedProgram,
    source: &str,
    test: &str,
    cfg: &RepairConfig,
) -> Result<Exploration, RepairError> {
    let start = Instant::now();
    let base = baseline(tp, test, cfg)?;
    let site = tp.site(base.site).expect("baseline site exists");
    let decisions = enumerate_static_candidates(tp, site, cfg.ctor_depth);
    let rc = cfg.run_config();
    let results = par::map(cfg.exec, &decisions, |d| {
        let reject = |reason: String| {
            Evaluated::Rejected(Rejected {
                decision: d.clone(),
                reason,
            })
        };
        let patch = match synthesize(tp, source, d, Mode::Template) {
            Ok(p) => p,
            Err(e) => return reject(e.to_string()),
        };
        let patched = match compile("patched.mj", &patch.text) {
            Ok(p) => p,
            Err(e) => return reject(format!("does not compile: {}", e.render("patched.mj").trim_end())),
        };
        let out = run_test(&patched, test, &Hooks::Off, &rc).expect("test survives patching");
        Evaluated::Tentative(Candidate {
            decision: d.clone(),
            patched_verdict: Some(out.verdict.clone()),
            verdict: out.verdict,
            steps: out.steps,
            patch: Some(patch.text),
            unsynthesizable: None,
        })
    });
    let mut candidates = Vec::new();
    let mut rejected = Vec::new();
    for r in results {
        match r {
            Evaluated::Tentative(c) => candidates.push(c),
            Evaluated::Rejected(r) => rejected.push(r),
        }
    }
    let steps = base.steps + candidates.iter().map(|c| c.steps).sum::<u64>();
    Ok(Exploration {
        mode: Mode::Template,
        site: base.site,
        candidates,
        filtered_out: Vec::new(),
        rejected,
        steps,
        elapsed: start.elapsed(),
        trace: base.trace,
    })
}
