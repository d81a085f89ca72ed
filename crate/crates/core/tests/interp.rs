mod common;

use common::gen;
use nullrepair::interp::{run_test, Hooks, RunConfig, TraceKind, Verdict};
use nullrepair::lang::compile;
use proptest::prelude::*;

fn cfg(budget: u64) -> RunConfig {
    RunConfig {
        budget,
        trace: true,
        ..RunConfig::default()
    }
}

#[test]
fn npe_verdicts_point_at_null_receivers() {
    for case in common::corpus() {
        let out = run_test(&case.tp, &case.test, &Hooks::Off, &cfg(1_000_000)).unwrap();
        let site = out.verdict.npe_site().expect("corpus cases fail with an NPE");
        let last = out.trace.last().expect("trace");
        assert_eq!((last.site, last.event), (site, TraceKind::NullDeref), "{}", case.bug_id);
    }
}

#[test]
fn nested_handler_two_frames_up() {
    let src = "class A { void m() { } }
class T {
    int seen;
    void deep(A a) { a.m(); }
    void mid(A a) { deep(a); seen = 100; }
    test void t() {
        try { mid(null); } catch (Any e) { seen = seen + 1; }
        assert(seen == 1);
    }
}";
    let tp = common::compile_ok(src);
    let out = run_test(&tp, "t", &Hooks::Detect, &RunConfig::default()).unwrap();
    assert_eq!(out.verdict, Verdict::Pass);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn runs_are_deterministic(src in gen::program()) {
        let tp = compile("g.mj", &src).unwrap();
        let a = run_test(&tp, "t", &Hooks::Off, &cfg(10_000)).unwrap();
        let b = run_test(&tp, "t", &Hooks::Off, &cfg(10_000)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn budget_is_monotone(src in gen::program(), extra in 0u64..50) {
        let tp = compile("g.mj", &src).unwrap();
        let full = run_test(&tp, "t", &Hooks::Off, &cfg(10_000)).unwrap();
        prop_assume!(full.verdict != Verdict::BudgetExhausted);
        let tight = run_test(&tp, "t", &Hooks::Off, &cfg(full.steps + extra)).unwrap();
        prop_assert_eq!(&tight.verdict, &full.verdict);
        prop_assert_eq!(tight.steps, full.steps);
        if full.steps > 0 {
            let short = run_test(&tp, "t", &Hooks::Off, &cfg(full.steps - 1)).unwrap();
            prop_assert_eq!(short.verdict, Verdict::BudgetExhausted);
        }
    }

    #[test]
    fn uncaught_npe_matches_trace(src in gen::program()) {
        let tp = compile("g.mj", &src).unwrap();
        let out = run_test(&tp, "t", &Hooks::Off, &cfg(10_000)).unwrap();
        if let Some(site) = out.verdict.npe_site() {
            prop_assert!(tp.site(site).is_some());
            let last = out.trace.last().unwrap();
            prop_assert_eq!((last.site, last.event), (site, TraceKind::NullDeref));
        }
    }
}
