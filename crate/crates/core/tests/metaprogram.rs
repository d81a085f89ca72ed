mod common;

use common::gen;
use nullrepair::interp::{run_test, ExcKind, ExecOutcome, Hooks, RunConfig, Verdict};
use nullrepair::lang::{compile, SiteId, StaticType, TypedProgram, VarRef};
use nullrepair::meta::transform::{transform, Metaprogram};
use nullrepair::strategy::{ConstructionPlan, Decision, Param, Provenance, Strategy};
use proptest::prelude::*;

fn meta(tp: &TypedProgram) -> Metaprogram {
    transform(tp).expect("metaprogram typechecks")
}

fn run(tp: &TypedProgram, test: &str, hooks: &Hooks) -> ExecOutcome {
    let cfg = RunConfig {
        audit_pool: true,
        ..RunConfig::default()
    };
    run_test(tp, test, hooks, &cfg).expect("test exists")
}

fn replay(site: SiteId, s: Strategy, param: Param) -> Hooks {
    Hooks::Replay(Decision::new(site, s, param, Provenance::Runtime))
}

fn site_in(tp: &TypedProgram, method: &str) -> SiteId {
    tp.sites.iter().find(|s| s.method.name == method).expect("site").id
}

#[test]
fn hooks_off_equivalence_on_shipped_programs() {
    let programs = common::all_programs();
    assert!(programs.len() >= 36);
    for (name, src, tests) in programs {
        let tp = common::compile_ok(&src);
        let mp = meta(&tp);
        assert_eq!(mp.tp.sites.len(), tp.sites.len());
        for t in tests {
            let plain = run(&tp, &t, &Hooks::Off);
            let hooked = run(&mp.tp, &t, &Hooks::Off);
            assert_eq!(plain.verdict, hooked.verdict, "{name}::{t}");
            assert_eq!(plain.steps, hooked.steps, "{name}::{t}");
        }
    }
}

#[test]
fn zero_dereferences_is_identity_modulo_pool() {
    let src = "class T { int n; test void t() { int i = 0; while (i < 3) { i = i + 1; } n = i; assert(n == 3); } }";
    let tp = common::compile_ok(src);
    let mp = meta(&tp);
    let text = mp.render();
    assert!(!text.contains("checkForNull") && !text.contains("skipLine"), "{text}");
    assert_eq!(run(&tp, "t", &Hooks::Off), run(&mp.tp, "t", &Hooks::Off));
}

#[test]
fn pool_matches_live_frames_across_corpus() {
    for case in common::corpus() {
        let mp = meta(&case.tp);
        let det = run(&mp.tp, &case.test, &Hooks::Detect);
        assert_eq!(det.verdict, Verdict::DetectionHalt, "{}", case.bug_id);
        assert_eq!(det.pool_mismatches, 0, "{} detection", case.bug_id);
        let ex = nullrepair::explorer::explore_meta(&case.tp, &case.source, &case.test, &common::sequential())
            .unwrap();
        for c in &ex.candidates {
            let out = run(&mp.tp, &case.test, &Hooks::Replay(c.decision.clone()));
            assert_eq!(out.pool_mismatches, 0, "{} {}", case.bug_id, c.decision.describe());
        }
    }
}

const EFFECTS: &str = "class A { int v; void m() { v = v + 1; } }
class T {
    int calls;
    A held;
    A next() { calls = calls + 1; return held; }
    test void t() {
        next().m();
        assert(calls == 1);
    }
}";

#[test]
fn receivers_evaluated_once() {
    let tp = common::compile_ok(EFFECTS);
    let mp = meta(&tp);
    let site = site_in(&tp, "t");
    // hooks off: NPE after exactly one call
    let off = run(&mp.tp, "t", &Hooks::Off);
    assert_eq!(off.verdict, Verdict::Uncaught { kind: ExcKind::Npe, site: Some(site) });
    // skipping and local creation both leave the call count at one
    assert_eq!(run(&mp.tp, "t", &replay(site, Strategy::S3, Param::None)).verdict, Verdict::Pass);
    let plan = Param::Ctor(ConstructionPlan {
        class: "A".into(),
        args: Vec::new(),
        depth: 1,
    });
    assert_eq!(run(&mp.tp, "t", &replay(site, Strategy::S2a, plan)).verdict, Verdict::Pass);
}

const GLOBAL: &str = "class A { int v; int get() { return v; } }
class T {
    test void t() {
        A q = new A();
        q.v = 9;
        A r = null;
        int x = r.get();
        assert(x == 9);
        assert(r == q);
    }
}";

#[test]
fn global_reuse_writes_back_to_receiver() {
    let tp = common::compile_ok(GLOBAL);
    let mp = meta(&tp);
    let site = tp.sites.iter().find(|s| s.receiver_var == Some(VarRef::local("r"))).unwrap().id;
    let q = Param::var(VarRef::local("q"), StaticType::class("A"));
    let global = run(&mp.tp, "t", &replay(site, Strategy::S1b, q.clone()));
    assert_eq!(global.verdict, Verdict::Pass);
    assert_eq!(global.hook_fired, 1);
    // the local form substitutes the value but leaves r null
    let local = run(&mp.tp, "t", &replay(site, Strategy::S1a, q.clone()));
    assert!(matches!(local.verdict, Verdict::AssertFail { .. }), "{:?}", local.verdict);
    // a decision for another site changes nothing
    let elsewhere = run(&mp.tp, "t", &replay(site + 1, Strategy::S1b, q));
    assert_eq!(elsewhere.verdict, Verdict::Uncaught { kind: ExcKind::Npe, site: Some(site) });
}

#[test]
fn skipped_declaration_binds_default() {
    let tp = common::compile_ok(GLOBAL);
    let mp = meta(&tp);
    let site = tp.sites.iter().find(|s| s.receiver_var == Some(VarRef::local("r"))).unwrap().id;
    let out = run(&mp.tp, "t", &replay(site, Strategy::S3, Param::None));
    // x = 0, so the first assertion fails rather than an NPE
    assert!(matches!(out.verdict, Verdict::AssertFail { line: 8, .. }), "{:?}", out.verdict);
}

#[test]
fn forced_return_resumes_caller() {
    let src = "class A { void m() { } }
class T {
    int after;
    void work(A a) { a.m(); after = 1; }
    test void t() { work(null); after = after + 10; assert(after == 10); }
}";
    let tp = common::compile_ok(src);
    let mp = meta(&tp);
    let site = site_in(&tp, "work");
    let out = run(&mp.tp, "t", &replay(site, Strategy::S4d, Param::None));
    assert_eq!(out.verdict, Verdict::Pass);
}

#[test]
fn harmless_dereferences_are_not_repaired() {
    let src = "class A { void m() { } }
class T {
    int caught;
    void inner(A a) { a.m(); }
    void outer() { try { inner(null); } catch (Any e) { caught = caught + 1; } }
    test void t() {
        try { A a = null; a.m(); } catch (NPE e) { caught = caught + 1; }
        outer();
        assert(caught == 2);
    }
}";
    let tp = common::compile_ok(src);
    let mp = meta(&tp);
    // neither null dereference is harmful, so detection never halts
    assert_eq!(run(&mp.tp, "t", &Hooks::Detect).verdict, Verdict::Pass);
    let d = replay(site_in(&tp, "inner"), Strategy::S4d, Param::None);
    let out = run(&mp.tp, "t", &d);
    assert_eq!((out.verdict, out.hook_fired), (Verdict::Pass, 0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn hooks_off_equivalence_on_generated_programs(src in gen::program()) {
        let tp = compile("g.mj", &src).unwrap();
        let mp = meta(&tp);
        let plain = run(&tp, "t", &Hooks::Off);
        let hooked = run(&mp.tp, "t", &Hooks::Off);
        prop_assert_eq!(&plain.verdict, &hooked.verdict);
        prop_assert_eq!(plain.steps, hooked.steps);
        // detection halts exactly where the plain run dies of a harmful NPE
        let det = run(&mp.tp, "t", &Hooks::Detect);
        prop_assert_eq!(det.pool_mismatches, 0);
        match plain.verdict.npe_site() {
            Some(s) => {
                prop_assert_eq!(&det.verdict, &Verdict::DetectionHalt);
                prop_assert_eq!(det.detection.unwrap().site, s);
            }
            None => prop_assert_eq!(&det.verdict, &plain.verdict),
        }
    }
}
