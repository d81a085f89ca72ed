//! Brute-force template enumerator. Every strategy is tried with every
//! variable in scope, every constant and every all-default constructor
//! call; the patched text is built by string splicing and kept when it
//! compiles. The only rules encoded here are the applicability rules of
//! the strategy table, not any typing.

use nullrepair::lang::{compile, DerefSite, StaticType, StmtTag, TypedProgram, VarKind};
use std::collections::BTreeSet;

fn default_text(t: &StaticType) -> &'static str {
    match t {
        StaticType::Int => "0",
        StaticType::Bool => "false",
        StaticType::Str => "\"\"",
        _ => "null",
    }
}

/// `(strategy, parameter)` pairs whose patched program compiles.
pub fn template_candidates(source: &str, tp: &TypedProgram, site: &DerefSite) -> BTreeSet<(String, String)> {
    assert_ne!(site.stmt_kind, StmtTag::VarDecl, "oracle does not split declarations");
    let (s0, s1) = (site.stmt_span.start as usize, site.stmt_span.end as usize);
    let stmt = &source[s0..s1];
    let (r0, r1) = (site.receiver.span.start as usize, site.receiver.span.end as usize);
    let recv = &source[r0..r1];
    let with = |p: &str| format!("{}{p}{}", &source[s0..r0], &source[r1..s1]);
    let global = site
        .receiver_var
        .as_ref()
        .is_some_and(|v| matches!(v.kind, VarKind::Local | VarKind::Param));

    let mut vars: Vec<String> = tp
        .accessible_vars(site)
        .iter()
        .filter(|v| Some(&v.var) != site.receiver_var.as_ref())
        .map(|v| v.var.to_string())
        .collect();
    let consts = ["null", "0", "1", "\"\""];
    let plans: Vec<String> = tp
        .constructors_of(&StaticType::class("Object"))
        .iter()
        .map(|c| {
            let args: Vec<&str> = c.params.iter().map(default_text).collect();
            format!("new {}({})", c.class, args.join(", "))
        })
        .collect();
    vars.extend(consts.iter().map(|c| c.to_string()));

    let mut tries: Vec<(&str, String, String)> = Vec::new();
    for v in &vars {
        tries.push(("S1a", v.clone(), format!("if ({recv} == null) {{ {} }} else {{ {stmt} }}", with(v))));
        if global {
            tries.push(("S1b", v.clone(), format!("if ({recv} == null) {{ {recv} = {v}; }} {stmt}")));
        }
        if v != "null" {
            tries.push(("S4c", v.clone(), format!("if ({recv} == null) {{ return {v}; }} {stmt}")));
        }
    }
    for p in &plans {
        tries.push(("S2a", p.clone(), format!("if ({recv} == null) {{ {} }} else {{ {stmt} }}", with(p))));
        if global {
            tries.push(("S2b", p.clone(), format!("if ({recv} == null) {{ {recv} = {p}; }} {stmt}")));
        }
        tries.push(("S4b", p.clone(), format!("if ({recv} == null) {{ return {p}; }} {stmt}")));
    }
    tries.push(("S3", "-".into(), format!("if ({recv} != null) {{ {stmt} }}")));
    tries.push(("S4a", "-".into(), format!("if ({recv} == null) {{ return null; }} {stmt}")));
    tries.push(("S4d", "-".into(), format!("if ({recv} == null) {{ return; }} {stmt}")));

    tries
        .into_iter()
        .filter(|(_, _, patched)| {
            let text = format!("{}{patched}{}", &source[..s0], &source[s1..]);
            compile("oracle.mj", &text).is_ok()
        })
        .map(|(s, p, _)| (s.to_string(), p))
        .collect()
}
