mod common;

use nullrepair::explorer::explore_meta;
use nullrepair::lang::StaticType;
use nullrepair::strategy::{applicable_strategies, plan_constructions, Mode, MAX_PLANS};
use nullrepair::template_repair::explore_templates;
use proptest::prelude::*;
use std::collections::BTreeSet;

#[test]
fn void_local_receiver_gets_six_strategies() {
    let tp = common::compile_ok(
        "class R { void foo(int p) { } }
         class T { void run(int p) { R r = null; r.foo(p); } }",
    );
    let names: Vec<&str> = applicable_strategies(&tp.sites[0], Mode::Template)
        .iter()
        .map(|s| s.name())
        .collect();
    assert_eq!(names, ["S1a", "S1b", "S2a", "S2b", "S3", "S4d"]);
}

#[test]
fn every_reported_decision_is_applicable() {
    let cfg = common::sequential();
    for case in common::corpus() {
        let t = explore_templates(&case.tp, &case.source, &case.test, &cfg).unwrap();
        let m = explore_meta(&case.tp, &case.source, &case.test, &cfg).unwrap();
        for (ex, mode) in [(t, Mode::Template), (m, Mode::Meta)] {
            let site = case.tp.site(ex.site).unwrap();
            let ok = applicable_strategies(site, mode);
            let all = ex
                .candidates
                .iter()
                .map(|c| &c.decision)
                .chain(ex.filtered_out.iter().map(|f| &f.decision))
                .chain(ex.rejected.iter().map(|r| &r.decision));
            for d in all {
                assert!(ok.contains(&d.strategy), "{} {mode}: {}", case.bug_id, d.describe());
                assert!(d.is_well_formed());
            }
        }
    }
}

/// Compiles `source` extended with a test that builds `expr` into a
/// variable of type `ty` and checks it is not null.
fn builds(source: &str, ty: &str, expr: &str) -> bool {
    let text = format!("{source}\nclass PlanProbe {{ test void probe() {{ {ty} x = {expr}; assert(x != null); }} }}\n");
    let Ok(tp) = nullrepair::lang::compile("p.mj", &text) else {
        return false;
    };
    let cfg = nullrepair::interp::RunConfig::default();
    nullrepair::interp::run_test(&tp, "probe", &nullrepair::interp::Hooks::Off, &cfg)
        .map(|o| o.verdict.is_pass())
        .unwrap_or(false)
}

#[test]
fn corpus_plans_build_non_null_subtypes() {
    for case in common::corpus() {
        let mut types: BTreeSet<String> = BTreeSet::new();
        for site in &case.tp.sites {
            for t in [&site.receiver_type, &site.method.ret] {
                if let Some(n) = t.class_name() {
                    types.insert(n.to_string());
                }
            }
        }
        for ty in types {
            let plans = plan_constructions(&case.tp, &StaticType::class(ty.clone()), 3);
            let texts: Vec<String> = plans.iter().map(|p| p.to_string()).collect();
            let unique: BTreeSet<&String> = texts.iter().collect();
            assert_eq!(unique.len(), texts.len(), "{} {ty}: duplicate plans", case.bug_id);
            assert!(texts.len() <= MAX_PLANS);
            for p in &plans {
                assert!(p.depth <= 3);
                assert!(builds(&case.source, &ty, &p.to_string()), "{} {ty}: {p}", case.bug_id);
            }
        }
    }
}

/// Constructor signatures per class: `None` for int, `Some(k)` for class Kk.
type Sigs = Vec<Vec<Vec<Option<usize>>>>;

fn hierarchy_source(parents: &[usize], sigs: &Sigs) -> String {
    let mut out = String::new();
    for (i, ctors) in sigs.iter().enumerate() {
        let ext = if parents[i] < i { format!(" extends K{}", parents[i]) } else { String::new() };
        out.push_str(&format!("class K{i}{ext} {{\n"));
        for args in ctors {
            let ps: Vec<String> = args
                .iter()
                .enumerate()
                .map(|(j, a)| match a {
                    None => format!("int a{j}"),
                    Some(k) => format!("K{k} a{j}"),
                })
                .collect();
            out.push_str(&format!("    K{i}({}) {{ }}\n", ps.join(", ")));
        }
        out.push_str("}\n");
    }
    out
}

fn descends(parents: &[usize], mut a: usize, b: usize) -> bool {
    loop {
        if a == b {
            return true;
        }
        if parents[a] >= a {
            return false;
        }
        a = parents[a];
    }
}

/// Independent enumeration: every constructor of every subclass, each
/// class argument either null or a nested plan while depth remains.
fn oracle(parents: &[usize], sigs: &Sigs, t: usize, depth: u32) -> Vec<String> {
    if depth == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (c, ctors) in sigs.iter().enumerate() {
        if !descends(parents, c, t) {
            continue;
        }
        let ctors: Vec<&Vec<Option<usize>>> = if ctors.is_empty() { vec![&EMPTY] } else { ctors.iter().collect() };
        for args in ctors {
            let mut partial = vec![Vec::<String>::new()];
            for a in args {
                let choices = match a {
                    None => vec!["0".to_string()],
                    Some(k) => {
                        let mut v = vec!["null".to_string()];
                        v.extend(oracle(parents, sigs, *k, depth - 1));
                        v
                    }
                };
                partial = partial
                    .into_iter()
                    .flat_map(|p| {
                        choices.iter().map(move |ch| {
                            let mut q = p.clone();
                            q.push(ch.clone());
                            q
                        })
                    })
                    .collect();
            }
            out.extend(partial.into_iter().map(|p| format!("new K{c}({})", p.join(", "))));
        }
    }
    out
}

static EMPTY: Vec<Option<usize>> = Vec::new();

fn sigs_strategy() -> impl Strategy<Value = Sigs> {
    let arg = prop_oneof![Just(None), (0usize..3).prop_map(Some)];
    let ctor = prop::collection::vec(arg, 0..3);
    // distinct arities per class, since MJ has no overloading by type
    let class = prop::collection::vec(ctor, 0..3).prop_map(|mut cs| {
        let mut seen = BTreeSet::new();
        cs.retain(|c| seen.insert(c.len()));
        cs
    });
    prop::collection::vec(class, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn plans_match_exhaustive_enumeration(
        parents in prop::collection::vec(0usize..3, 3),
        sigs in sigs_strategy(),
        t in 0usize..3,
        depth in 1u32..4,
    ) {
        let expected = oracle(&parents, &sigs, t, depth);
        prop_assume!(expected.len() <= MAX_PLANS);
        let tp = common::compile_ok(&hierarchy_source(&parents, &sigs));
        let got: Vec<String> = plan_constructions(&tp, &StaticType::class(format!("K{t}")), depth)
            .iter()
            .map(|p| p.to_string())
            .collect();
        let a: BTreeSet<&String> = got.iter().collect();
        let b: BTreeSet<&String> = expected.iter().collect();
        prop_assert_eq!(got.len(), a.len());
        prop_assert_eq!(a, b);
    }
}
