mod common;

use nullrepair::explorer::{collect, detect, explore_meta, filter_equivalent, replay};
use nullrepair::harness::report::ExplorationReport;
use nullrepair::interp::{ExcKind, Value, Verdict};
use nullrepair::lang::StaticType;
use nullrepair::meta::transform::transform;
use nullrepair::repair::{Exploration, FilterReason, RepairConfig, RepairError};
use nullrepair::strategy::{Mode, Param, Strategy};
use nullrepair::template_repair::enumerate_static_candidates;
use std::collections::BTreeMap;
use std::time::Duration;

fn meta(case: &nullrepair::harness::CorpusCase) -> Exploration {
    explore_meta(&case.tp, &case.source, &case.test, &RepairConfig::default()).unwrap()
}

fn has(ex: &Exploration, s: Strategy, param: &str) -> bool {
    ex.candidates
        .iter()
        .any(|c| c.decision.strategy == s && c.decision.param.describe() == param)
}

#[test]
fn runtime_class_admits_object_typed_parameters() {
    let case = common::corpus_case("runtime_narrowing");
    let ex = meta(&case);
    assert!(has(&ex, Strategy::S1a, "hint") && has(&ex, Strategy::S1b, "hint"));
    let site = case.tp.site(ex.site).unwrap();
    let statics = enumerate_static_candidates(&case.tp, site, 3);
    assert!(!statics.iter().any(|d| d.param.describe() == "hint"));
    for c in &ex.candidates {
        if let Param::Var { ty, runtime_class: Some(rc), .. } = &c.decision.param {
            if !statics.iter().any(|d| d.strategy == c.decision.strategy && d.param.describe() == c.decision.param.describe()) {
                let rt = StaticType::class(rc.clone());
                assert!(case.tp.subtype_of(&rt, ty) && rt != *ty, "{}", c.decision.describe());
            }
        }
    }
}

#[test]
fn null_valued_candidates_are_filtered() {
    let case = common::corpus_case("felix_like");
    let ex = meta(&case);
    let nulls: Vec<String> = ex
        .filtered_out
        .iter()
        .filter(|f| f.reason == FilterReason::NullValued)
        .map(|f| f.decision.param.describe())
        .collect();
    assert!(nulls.contains(&"candidate".to_string()));
    assert!(ex.candidates.iter().all(|c| c.decision.param.var_ref().is_none()));
}

#[test]
fn passing_test_yields_no_detection() {
    let (_, src, tests) = common::clean_programs().remove(1);
    let tp = common::compile_ok(&src);
    let err = explore_meta(&tp, &src, &tests[0], &RepairConfig::default()).unwrap_err();
    assert!(matches!(err, RepairError::NotAnNpeBug(Verdict::Pass)));
}

#[test]
fn null_return_variable_collapses_into_return_null() {
    let case = common::corpus_case("pdfbox_like");
    let ex = meta(&case);
    assert!(has(&ex, Strategy::S4a, "-"));
    assert!(!has(&ex, Strategy::S4c, "retval"));
    assert!(ex
        .filtered_out
        .iter()
        .any(|f| f.decision.strategy == Strategy::S4c
            && f.decision.param.describe() == "retval"
            && f.reason == FilterReason::NullValued));
}

const ALIAS: &str = "class A { int v; int get() { return v; } }
class T {
    A kept;
    int use(A p) {
        A first = new A();
        A second = first;
        A third = new A();
        A broken = null;
        return broken.get();
    }
    test void t() { kept = new A(); assert(use(kept) == 0); }
}";

#[test]
fn aliased_values_keep_one_reuse_decision() {
    let tp = common::compile_ok(ALIAS);
    let mp = transform(&tp).unwrap();
    let cfg = RepairConfig::default();
    let (det, _) = detect(&mp, "t", &cfg).unwrap();
    let site = tp.site(det.site).unwrap();
    let collected = collect(&tp, site, &det, 3);
    let (kept, dropped) = filter_equivalent(collected.clone());
    assert_eq!(collected.len(), kept.len() + dropped.len());

    // alias oracle: distinct non-null object identities among A-typed
    // variables other than the receiver
    let mut groups: BTreeMap<u32, Vec<String>> = BTreeMap::new();
    for v in &det.vars {
        if let (Value::Obj(id), true) = (&v.value, v.var.name != "broken") {
            groups.entry(*id).or_default().push(v.var.to_string());
        }
    }
    let s1a: Vec<String> = kept
        .iter()
        .filter(|d| d.strategy == Strategy::S1a)
        .map(|d| d.param.describe())
        .collect();
    let expected: Vec<String> = groups.values().map(|names| names[0].clone()).collect();
    let mut sorted = s1a.clone();
    sorted.sort();
    let mut exp_sorted = expected.clone();
    exp_sorted.sort();
    assert_eq!(sorted, exp_sorted);
    assert_eq!(groups.len(), 3, "{groups:?}");
    // first and second alias, first wins; p and this.kept alias, p wins
    assert!(s1a.contains(&"first".to_string()) && !s1a.contains(&"second".to_string()));
    assert!(s1a.contains(&"p".to_string()) && !s1a.contains(&"this.kept".to_string()));
    assert!(dropped.iter().any(|f| f.reason == FilterReason::Equivalent && f.decision.param.describe() == "second"));
}

#[test]
fn distinct_values_pass_the_filter_untouched() {
    for (name, test) in common::EQ_FIXTURES {
        let ex = meta(&common::fixture_case(name, test));
        assert!(ex.filtered_out.is_empty(), "{name}");
    }
}

#[test]
fn skip_reaches_a_division_by_zero() {
    let ex = meta(&common::corpus_case("math305_like"));
    assert!(ex.valid() >= 3);
    let skip = ex.candidates.iter().find(|c| c.decision.strategy == Strategy::S4d).unwrap();
    assert!(matches!(skip.verdict, Verdict::Uncaught { kind: ExcKind::ArithmeticError, .. }));
}

#[test]
fn every_decision_passes_on_lang587() {
    let ex = meta(&common::corpus_case("lang587_like"));
    assert!(ex.tentative() > 0);
    assert_eq!(ex.valid(), ex.tentative());
}

#[test]
fn empty_decision_set_reports_zero() {
    assert_eq!(filter_equivalent(Vec::new()), (Vec::new(), Vec::new()));
    let ex = Exploration {
        mode: Mode::Meta,
        site: 0,
        candidates: Vec::new(),
        filtered_out: Vec::new(),
        rejected: Vec::new(),
        steps: 0,
        elapsed: Duration::ZERO,
        trace: Vec::new(),
    };
    let r = ExplorationReport::new("empty", &ex, |_| None);
    assert_eq!((r.tentative, r.valid), (0, 0));
}

#[test]
fn replays_repeat_and_audit_is_complete() {
    let cfg = RepairConfig::default();
    for case in common::corpus() {
        let mp = transform(&case.tp).unwrap();
        let (det, _) = detect(&mp, &case.test, &cfg).unwrap();
        let site = case.tp.site(det.site).unwrap();
        let collected = collect(&case.tp, site, &det, cfg.ctor_depth);
        let (kept, dropped) = filter_equivalent(collected.clone());
        assert_eq!(collected.len(), kept.len() + dropped.len(), "{}", case.bug_id);
        for d in &kept {
            assert_eq!(replay(&mp, &case.test, d, &cfg), replay(&mp, &case.test, d, &cfg));
        }
        let ex = meta(&case);
        assert_eq!(ex.tentative(), kept.len());
        assert_eq!(ex.filtered_out.len(), dropped.len());
    }
}

#[test]
fn runtime_reuse_equals_static_reuse_when_contexts_coincide() {
    for (name, test) in common::EQ_FIXTURES {
        let case = common::fixture_case(name, test);
        let ex = meta(&case);
        let t = nullrepair::template_repair::explore_templates(&case.tp, &case.source, &case.test, &RepairConfig::default())
            .unwrap();
        let reuse = |ex: &Exploration| -> Vec<(Strategy, String)> {
            let mut v: Vec<_> = ex
                .candidates
                .iter()
                .filter(|c| c.decision.param.var_ref().is_some())
                .map(|c| (c.decision.strategy, c.decision.param.describe()))
                .collect();
            v.sort();
            v
        };
        assert_eq!(reuse(&ex), reuse(&t), "{name}");
    }
}
