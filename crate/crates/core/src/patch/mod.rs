//! Source patches: a decision rendered as its template in the original
//! text, plus unified diffs over the result.

pub mod diff;

use crate::lang::ast::*;
use crate::lang::printer::print_stmt;
use crate::lang::TypedProgram;
use crate::meta::transform::is_access_path;
use crate::strategy::{Decision, Mode};
use crate::templates::{else_slot, rewrite, Rewrite, TemplateError};

pub use diff::{apply_patch, unified_diff, PatchError};

const ORIGINAL: &str = "__original_statement__";

/// A decision rendered as source.
#[derive(Debug, Clone, PartialEq)]
pub struct SourcePatch {
    pub rewrite: Rewrite,
    /// The whole patched file.
    pub text: String,
}

/// Renders `d` as its template inside `source`, the text `tp` was
/// compiled from.
///
/// In meta mode a receiver that is not a side-effect-free access path is
/// refused: the template re-evaluates the receiver in its null test, so the
/// patch would not behave like the hook.
pub fn synthesize(
    tp: &TypedProgram,
    source: &str,
    d: &Decision,
    mode: Mode,
) -> Result<SourcePatch, TemplateError> {
    if mode == Mode::Meta {
        let site = tp.site(d.site).ok_or(TemplateError::UnknownSite(d.site))?;
        if !is_access_path(&site.receiver) {
            return Err(TemplateError::Unsynthesizable(
                crate::lang::printer::print_expr(&site.receiver),
            ));
        }
    }
    let rw = rewrite(tp, d, mode)?;
    let text = splice(source, &rw);
    Ok(SourcePatch { rewrite: rw, text })
}

/// Replaces the statement of `rw` in `source`. The untouched copy of the
/// statement keeps its original text; new code is printed in canonical
/// layout at the statement's indentation.
pub fn splice(source: &str, rw: &Rewrite) -> String {
    let start = rw.span.start as usize;
    let end = rw.span.end as usize;
    let line_start = source[..start].rfind('\n').map_or(0, |i| i + 1);
    let indent: String = source[line_start..]
        .chars()
        .take_while(|c| *c == ' ' || *c == '\t')
        .collect();
    let original = &source[start..end];

    let marked: Vec<Stmt> = rw.replacement.iter().map(|s| mark(s, rw.stmt)).collect();
    let mut printed = String::new();
    if rw.in_else {
        printed.push_str(&print_stmt(&else_slot(&marked), &indent));
    } else {
        for s in &marked {
            printed.push_str(&print_stmt(s, &indent));
        }
    }

    let mut out = String::new();
    for line in printed.lines() {
        let trimmed = line.trim_start();
        if trimmed == format!("{ORIGINAL};") {
            let at = &line[..line.len() - trimmed.len()];
            out.push_str(at);
            out.push_str(&reindent(original, &indent, at));
        } else {
            out.push_str(line);
        }
        out.push('\n');
    }
    let body = out.trim_end_matches('\n');
    let body = body.strip_prefix(indent.as_str()).unwrap_or(body);
    format!("{}{}{}", &source[..start], body, &source[end..])
}

/// Swaps the untouched copy of statement `id` for a marker line.
fn mark(s: &Stmt, id: StmtId) -> Stmt {
    if s.id == id {
        return Stmt::synthetic(StmtKind::Expr(Expr::name(ORIGINAL)));
    }
    let block = |b: &Block| Block::new(b.stmts.iter().map(|s| mark(s, id)).collect());
    let kind = match &s.kind {
        StmtKind::Block(b) => StmtKind::Block(block(b)),
        StmtKind::If {
            cond,
            then_block,
            else_branch,
        } => StmtKind::If {
            cond: cond.clone(),
            then_block: block(then_block),
            else_branch: else_branch.as_ref().map(|e| Box::new(mark(e, id))),
        },
        other => other.clone(),
    };
    Stmt { kind, ..s.clone() }
}

/// Moves continuation lines of `text` from indentation `from` to `to`.
fn reindent(text: &str, from: &str, to: &str) -> String {
    let mut lines = text.split('\n');
    let mut out = lines.next().unwrap_or_default().to_string();
    for l in lines {
        out.push('\n');
        match l.strip_prefix(from) {
            Some(rest) => {
                out.push_str(to);
                out.push_str(rest);
            }
            None => out.push_str(l),
        }
    }
    out
}

/// Patched file and its diff against `source`.
pub fn render_diff(source: &str, patch: &SourcePatch, path: &str) -> String {
    unified_diff(source, &patch.text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{compile, StaticType, VarRef};
    use crate::strategy::{Param, Provenance, Strategy};

    const SRC: &str = "class R {
    R foo(int p) { return this; }
}
class T {
    void v(R r, R s, int p) {
        int q = 0;
        r.foo(p);
        q = 1;
    }
    int w(R r, int n) {
        if (n == 0) {
            n = 2;
        } else if (r.foo(1) == r) {
            n = 3;
        }
        return n;
    }
}
";

    fn dec(site: SiteId, s: Strategy, p: Param) -> Decision {
        Decision::new(site, s, p, Provenance::Runtime)
    }

    #[test]
    fn skip_wraps_in_place() {
        let tp = compile("t.mj", SRC).unwrap();
        let p = synthesize(&tp, SRC, &dec(0, Strategy::S3, Param::None), Mode::Meta).unwrap();
        assert!(
            p.text.contains("        int q = 0;\n        if (r != null) {\n            r.foo(p);\n        }\n        q = 1;\n"),
            "{}",
            p.text
        );
        compile("t.mj", &p.text).unwrap();
        let d = render_diff(SRC, &p, "t.mj");
        assert_eq!(diff::hunk_count(&d), 1);
        assert_eq!(apply_patch(SRC, &d).unwrap(), p.text);
    }

    #[test]
    fn reuse_inserts_before() {
        let tp = compile("t.mj", SRC).unwrap();
        let param = Param::var(VarRef::param("s"), StaticType::class("R"));
        let p = synthesize(&tp, SRC, &dec(0, Strategy::S1b, param), Mode::Meta).unwrap();
        let d = render_diff(SRC, &p, "t.mj");
        let added: Vec<&str> = d.lines().filter(|l| l.starts_with('+') && !l.starts_with("+++")).collect();
        assert_eq!(added, ["+        if (r == null) {", "+            r = s;", "+        }"]);
    }

    #[test]
    fn else_if_original_text_kept() {
        let src = SRC;
        let tp = compile("t.mj", src).unwrap();
        let site = tp.sites.iter().find(|s| s.method.name == "w").unwrap().id;
        let p = synthesize(&tp, src, &dec(site, Strategy::S4c, Param::Const(crate::strategy::Const::Int(1))), Mode::Meta)
            .unwrap();
        assert!(
            p.text.contains("} else {\n            if (r == null) {\n                return 1;\n            }\n            if (r.foo(1) == r) {\n                n = 3;\n            }\n        }\n"),
            "{}",
            p.text
        );
        compile("t.mj", &p.text).unwrap();
    }
}
