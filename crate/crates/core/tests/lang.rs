mod common;

use common::gen;
use nullrepair::lang::ast::same_shape;
use nullrepair::lang::{compile, parse, pretty_print, DerefSite, StaticType, TypedProgram};
use proptest::prelude::*;

fn class(n: &str) -> StaticType {
    StaticType::class(n)
}

/// Compiles `source` with `probe` inserted as a statement right before the
/// statement holding `site`.
fn probe_compiles(source: &str, site: &DerefSite, probe: &str) -> bool {
    let at = site.stmt_span.start as usize;
    let text = format!("{}{probe} {}", &source[..at], &source[at..]);
    compile("probe.mj", &text).is_ok()
}

fn resolves(source: &str, site: &DerefSite, name: &str) -> bool {
    probe_compiles(source, site, &format!("if ({name} == {name}) {{ }}"))
}

#[test]
fn scope3_candidates_in_documented_order() {
    let src = std::fs::read_to_string(common::fixture_dir().join("scope3.mj")).unwrap();
    let tp = common::compile_ok(&src);
    let site = tp.sites.iter().find(|s| s.method.name == "measure").unwrap();
    let names: Vec<String> = tp.accessible_vars(site).iter().map(|v| v.var.to_string()).collect();
    assert_eq!(names, ["spare", "label", "n", "this.count", "Config.level"]);

    // scope walk: every name the method could mention, kept iff it resolves
    let universe = ["spare", "label", "a", "n", "this.count", "Config.level", "later"];
    let walked: Vec<&str> = universe
        .iter()
        .copied()
        .filter(|n| *n != "a" && resolves(&src, site, n))
        .collect();
    assert_eq!(walked, names);
    assert!(resolves(&src, site, "a"), "receiver is in scope but excluded");
}

#[test]
fn static_method_has_no_instance_fields() {
    let src = "class A { int v; void m() { } }\n\
               class K { int f; static int s;\n\
               static void go(A p) { A q = null; q.m(); }\n\
               test void t() { go(null); } }";
    let tp = common::compile_ok(src);
    let names: Vec<String> = tp.accessible_vars(&tp.sites[0]).iter().map(|v| v.var.to_string()).collect();
    assert_eq!(names, ["p", "K.s"]);
}

#[test]
fn candidates_resolve_at_every_corpus_site() {
    for case in common::corpus() {
        for site in &case.tp.sites {
            let vars = case.tp.accessible_vars(site);
            for v in &vars {
                assert_ne!(Some(&v.var), site.receiver_var.as_ref(), "{} site {}", case.bug_id, site.id);
                let name = v.var.to_string();
                assert!(
                    resolves(&case.source, site, &name),
                    "{}: `{name}` does not resolve at site {}",
                    case.bug_id,
                    site.id
                );
            }
        }
    }
}

#[test]
fn constructors_of_subclasses_in_order() {
    let src = "class A { }\nclass B extends A { B(int n) { } }\nclass C extends A { C(A inner) { } }\n\
               class U { U(int a, int b) { } U() { } }";
    let tp = common::compile_ok(src);
    let sig = |tp: &TypedProgram, t: &str| -> Vec<String> {
        tp.constructors_of(&class(t))
            .iter()
            .map(|c| {
                let ps: Vec<String> = c.params.iter().map(|p| p.to_string()).collect();
                format!("{}({})", c.class, ps.join(","))
            })
            .collect()
    };
    assert_eq!(sig(&tp, "A"), ["A()", "B(int)", "C(A)"]);
    assert_eq!(sig(&tp, "U"), ["U()", "U(int,int)"]);
    assert_eq!(sig(&tp, "Object"), ["Object()", "A()", "B(int)", "C(A)", "U()", "U(int,int)"]);
}

#[test]
fn corpus_files_roundtrip_through_printer() {
    for (name, src, _) in common::all_programs() {
        let p = parse(&name, &src).unwrap();
        let printed = pretty_print(&p);
        let q = parse(&name, &printed).unwrap();
        assert!(same_shape(&p, &q), "{name}");
        assert_eq!(pretty_print(&q), printed, "{name}: printing is not a fixpoint");
    }
}

#[test]
fn site_ids_dense_and_stable() {
    for (name, src, _) in common::all_programs() {
        let a = common::compile_ok(&src);
        let b = common::compile_ok(&src);
        let ids: Vec<u32> = a.sites.iter().map(|s| s.id).collect();
        assert_eq!(ids, (0..a.sites.len() as u32).collect::<Vec<_>>(), "{name}");
        let spans_a: Vec<_> = a.sites.iter().map(|s| s.span).collect();
        let spans_b: Vec<_> = b.sites.iter().map(|s| s.span).collect();
        assert_eq!(spans_a, spans_b);
    }
}

/// A random single-inheritance hierarchy: class `Ki` extends `K(parent[i])`
/// when parent[i] < i, otherwise Object.
fn hierarchy(parents: &[usize]) -> String {
    parents
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if p < i {
                format!("class K{i} extends K{p} {{ }}\n")
            } else {
                format!("class K{i} {{ }}\n")
            }
        })
        .collect()
}

/// Ancestor chain computed from the parent vector alone.
fn is_ancestor(parents: &[usize], a: usize, b: usize) -> bool {
    let mut cur = a;
    loop {
        if cur == b {
            return true;
        }
        let p = parents[cur];
        if p >= cur {
            return false;
        }
        cur = p;
    }
}

proptest! {
    #[test]
    fn generated_programs_roundtrip(src in gen::program()) {
        let p = parse("g.mj", &src).unwrap();
        let printed = pretty_print(&p);
        let q = parse("g.mj", &printed).unwrap();
        prop_assert!(same_shape(&p, &q));
        prop_assert_eq!(pretty_print(&q), printed);
    }

    #[test]
    fn subtyping_is_a_partial_order(
        parents in prop::collection::vec(0usize..8, 8),
        (a, b, c) in (0usize..8, 0usize..8, 0usize..8),
    ) {
        let tp = common::compile_ok(&hierarchy(&parents));
        let k = |i: usize| class(&format!("K{i}"));
        let sub = |x: usize, y: usize| tp.subtype_of(&k(x), &k(y));
        prop_assert_eq!(sub(a, b), is_ancestor(&parents, a, b));
        prop_assert!(sub(a, a));
        if a != b {
            prop_assert!(!(sub(a, b) && sub(b, a)));
        }
        if sub(a, b) && sub(b, c) {
            prop_assert!(sub(a, c));
        }
        prop_assert!(tp.subtype_of(&k(a), &class("Object")));
        prop_assert!(!tp.subtype_of(&StaticType::Int, &class("Object")));
    }
}
