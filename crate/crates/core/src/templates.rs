//! Statement-level repair templates. Both the template enumerator and the
//! patch synthesizer go through [`rewrite`], so a decision always maps to
//! the same source shape whichever mode produced it.

use crate::lang::ast::*;
use crate::lang::{DerefSite, Span, StaticType, StmtTag, TypedProgram, VarKind};
use crate::strategy::{default_literal, Decision, Mode, Param, Strategy};

/// Replacement of one statement by a list of statements.
#[derive(Debug, Clone, PartialEq)]
pub struct Rewrite {
    pub site: SiteId,
    pub stmt: StmtId,
    /// Source range of the replaced statement.
    pub span: Span,
    /// The statement sits in an `else` slot rather than in a block.
    pub in_else: bool,
    pub replacement: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("{strategy} has no source template for {reason}")]
    Inapplicable { strategy: Strategy, reason: String },
    #[error("unknown dereference site {0}")]
    UnknownSite(SiteId),
    #[error("`{0}` cannot be named at the patch location")]
    Unsynthesizable(String),
    #[error("parameter does not fit {0}")]
    BadParam(Strategy),
}

/// Locates statement `id` in the program; the flag tells whether it is an
/// `else` branch.
pub fn find_stmt(program: &Program, id: StmtId) -> Option<(&Stmt, bool)> {
    fn in_stmt(s: &Stmt, id: StmtId, is_else: bool) -> Option<(&Stmt, bool)> {
        if s.id == id {
            return Some((s, is_else));
        }
        match &s.kind {
            StmtKind::Block(b) => in_block(b, id),
            StmtKind::If {
                then_block,
                else_branch,
                ..
            } => in_block(then_block, id)
                .or_else(|| else_branch.as_deref().and_then(|e| in_stmt(e, id, true))),
            StmtKind::While { body, .. } => in_block(body, id),
            StmtKind::Try { body, handler, .. } => in_block(body, id).or_else(|| in_block(handler, id)),
            StmtKind::SkipGuard { body, .. } => in_stmt(body, id, is_else),
            StmtKind::ForceReturnScope { body, .. } => in_block(body, id),
            _ => None,
        }
    }
    fn in_block(b: &Block, id: StmtId) -> Option<(&Stmt, bool)> {
        b.stmts.iter().find_map(|s| in_stmt(s, id, false))
    }
    program
        .classes
        .iter()
        .flat_map(|c| &c.members)
        .find_map(|m| match m {
            Member::Ctor(k) => in_block(&k.body, id),
            Member::Method(m) => in_block(&m.body, id),
            Member::Field(_) => None,
        })
}

/// Applies a rewrite to the tree, yielding the patched program.
pub fn apply_rewrite(program: &Program, rw: &Rewrite) -> Program {
    fn block(b: &mut Block, rw: &Rewrite) -> bool {
        if let Some(i) = b.stmts.iter().position(|s| s.id == rw.stmt) {
            b.stmts.splice(i..=i, rw.replacement.iter().cloned());
            return true;
        }
        b.stmts.iter_mut().any(|s| stmt(s, rw))
    }
    fn stmt(s: &mut Stmt, rw: &Rewrite) -> bool {
        match &mut s.kind {
            StmtKind::Block(b) => block(b, rw),
            StmtKind::If {
                then_block,
                else_branch,
                ..
            } => {
                if block(then_block, rw) {
                    return true;
                }
                match else_branch {
                    Some(e) if e.id == rw.stmt => {
                        **e = else_slot(&rw.replacement);
                        true
                    }
                    Some(e) => stmt(e, rw),
                    None => false,
                }
            }
            StmtKind::While { body, .. } => block(body, rw),
            StmtKind::Try { body, handler, .. } => block(body, rw) || block(handler, rw),
            _ => false,
        }
    }
    let mut out = program.clone();
    for m in out.classes.iter_mut().flat_map(|c| c.members.iter_mut()) {
        let done = match m {
            Member::Ctor(k) => block(&mut k.body, rw),
            Member::Method(m) => block(&mut m.body, rw),
            Member::Field(_) => false,
        };
        if done {
            break;
        }
    }
    out
}

/// What replaces a statement in an `else` slot: the statement itself if
/// single, else a block.
pub fn else_slot(replacement: &[Stmt]) -> Stmt {
    match replacement {
        [single] => single.clone(),
        many => Stmt::synthetic(StmtKind::Block(Block::new(many.to_vec()))),
    }
}

/// Builds the source template of `d` at its site.
pub fn rewrite(tp: &TypedProgram, d: &Decision, mode: Mode) -> Result<Rewrite, TemplateError> {
    let site = tp.site(d.site).ok_or(TemplateError::UnknownSite(d.site))?;
    let (stmt, in_else) =
        find_stmt(&tp.program, site.stmt).ok_or(TemplateError::UnknownSite(d.site))?;
    let r = plain(&site.receiver);
    let is_null = Expr::binary(BinaryOp::Eq, r.clone(), Expr::null());
    let ret = &site.method.ret;
    let guarded_return = |value: Option<Expr>| {
        vec![
            if_then(is_null.clone(), vec![Stmt::synthetic(StmtKind::Return(value))], None),
            stmt.clone(),
        ]
    };
    let replacement = match d.strategy {
        Strategy::S1a | Strategy::S2a => {
            let p = param_expr(tp, site, d, &site.receiver_type)?;
            let patched = substitute(stmt, d.site, &p);
            match (&stmt.kind, &patched.kind) {
                (
                    StmtKind::VarDecl {
                        ty,
                        name,
                        init: Some(orig),
                    },
                    StmtKind::VarDecl {
                        init: Some(new), ..
                    },
                ) => split_decl(ty, name, &is_null, new.clone(), orig.clone()),
                _ => vec![if_then(
                    is_null,
                    vec![patched],
                    Some(vec![stmt.clone()]),
                )],
            }
        }
        Strategy::S1b | Strategy::S2b => {
            let assignable = site.receiver_var.as_ref().is_some_and(|v| v.is_assignable_local());
            if !assignable {
                return Err(TemplateError::Inapplicable {
                    strategy: d.strategy,
                    reason: "a receiver that is not a local variable".into(),
                });
            }
            let p = param_expr(tp, site, d, &site.receiver_type)?;
            let assign = Stmt::synthetic(StmtKind::Assign {
                target: r.clone(),
                value: p,
            });
            vec![if_then(is_null, vec![assign], None), stmt.clone()]
        }
        Strategy::S3 => match &stmt.kind {
            StmtKind::VarDecl {
                ty,
                name,
                init: Some(orig),
            } => {
                if mode == Mode::Template {
                    return Err(TemplateError::Inapplicable {
                        strategy: d.strategy,
                        reason: "a variable declaration".into(),
                    });
                }
                split_decl(ty, name, &is_null, default_literal(ty), orig.clone())
            }
            _ => {
                let not_null = Expr::binary(BinaryOp::Ne, r.clone(), Expr::null());
                vec![if_then(not_null, vec![stmt.clone()], None)]
            }
        },
        Strategy::S4a => {
            if !ret.is_class() {
                return Err(TemplateError::BadParam(d.strategy));
            }
            guarded_return(Some(Expr::null()))
        }
        Strategy::S4b => {
            if !ret.is_class() {
                return Err(TemplateError::BadParam(d.strategy));
            }
            guarded_return(Some(param_expr(tp, site, d, ret)?))
        }
        Strategy::S4c => {
            if *ret == StaticType::Void {
                return Err(TemplateError::BadParam(d.strategy));
            }
            guarded_return(Some(param_expr(tp, site, d, ret)?))
        }
        Strategy::S4d => {
            if *ret != StaticType::Void {
                return Err(TemplateError::BadParam(d.strategy));
            }
            guarded_return(None)
        }
    };
    debug_assert!(site.stmt_kind != StmtTag::VarDecl || matches!(stmt.kind, StmtKind::VarDecl { .. }));
    Ok(Rewrite {
        site: d.site,
        stmt: site.stmt,
        span: stmt.span,
        in_else,
        replacement,
    })
}

/// `T x; if (cond) { x = a; } else { x = b; }`
fn split_decl(ty: &StaticType, name: &str, cond: &Expr, a: Expr, b: Expr) -> Vec<Stmt> {
    let assign = |v: Expr| {
        Stmt::synthetic(StmtKind::Assign {
            target: Expr::name(name),
            value: v,
        })
    };
    vec![
        Stmt::synthetic(StmtKind::VarDecl {
            ty: ty.clone(),
            name: name.to_string(),
            init: None,
        }),
        if_then(cond.clone(), vec![assign(a)], Some(vec![assign(b)])),
    ]
}

fn if_then(cond: Expr, then: Vec<Stmt>, otherwise: Option<Vec<Stmt>>) -> Stmt {
    Stmt::synthetic(StmtKind::If {
        cond,
        then_block: Block::new(then),
        else_branch: otherwise
            .map(|s| Box::new(Stmt::synthetic(StmtKind::Block(Block::new(s))))),
    })
}

/// Receiver expression as it appears in source, without annotations.
fn plain(e: &Expr) -> Expr {
    let mut e = e.clone();
    norm_expr(&mut e);
    e
}

/// Source expression of the decision parameter, cast to `required` when
/// the variable's declared type is wider.
fn param_expr(
    tp: &TypedProgram,
    site: &DerefSite,
    d: &Decision,
    required: &StaticType,
) -> Result<Expr, TemplateError> {
    match &d.param {
        Param::Var { var, ty, .. } => {
            if matches!(var.kind, VarKind::Local | VarKind::Param) {
                let visible = site.scope.iter().any(|c| c.var == *var)
                    || site.receiver_var.as_ref() == Some(var);
                if !visible {
                    return Err(TemplateError::Unsynthesizable(var.to_string()));
                }
            }
            let mut e = var.to_expr();
            norm_expr(&mut e);
            if !tp.subtype_of(ty, required) {
                let class = required
                    .class_name()
                    .ok_or(TemplateError::BadParam(d.strategy))?;
                e = Expr::synthetic(ExprKind::Cast {
                    class: class.to_string(),
                    expr: Box::new(e),
                });
            }
            Ok(e)
        }
        Param::Const(c) => Ok(c.to_expr()),
        Param::Ctor(plan) => Ok(plan.to_expr()),
        Param::None => Err(TemplateError::BadParam(d.strategy)),
    }
}

/// Copy of `stmt` whose dereference `site` uses `receiver` instead.
fn substitute(stmt: &Stmt, site: SiteId, receiver: &Expr) -> Stmt {
    fn expr(e: &mut Expr, site: SiteId, receiver: &Expr) -> bool {
        match &mut e.kind {
            ExprKind::Field { target, site: s, .. } => {
                if *s == Some(site) {
                    **target = receiver.clone();
                    return true;
                }
                expr(target, site, receiver)
            }
            ExprKind::Call {
                target,
                args,
                site: s,
                ..
            } => {
                if *s == Some(site) {
                    **target.as_mut().expect("dereference has a receiver") = receiver.clone();
                    return true;
                }
                target.as_deref_mut().is_some_and(|t| expr(t, site, receiver))
                    || args.iter_mut().any(|a| expr(a, site, receiver))
            }
            ExprKind::New { args, .. } => args.iter_mut().any(|a| expr(a, site, receiver)),
            ExprKind::Unary { expr: inner, .. } | ExprKind::Cast { expr: inner, .. } => {
                expr(inner, site, receiver)
            }
            ExprKind::Binary { lhs, rhs, .. } => {
                expr(lhs, site, receiver) || expr(rhs, site, receiver)
            }
            _ => false,
        }
    }
    let mut out = stmt.clone();
    out.id = StmtId::SYNTHETIC;
    let found = match &mut out.kind {
        StmtKind::VarDecl { init: Some(e), .. } => expr(e, site, receiver),
        StmtKind::Assign { target, value } => {
            expr(target, site, receiver) || expr(value, site, receiver)
        }
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => expr(cond, site, receiver),
        StmtKind::Return(Some(e)) | StmtKind::Assert(e) | StmtKind::Expr(e) => {
            expr(e, site, receiver)
        }
        _ => false,
    };
    debug_assert!(found, "site {site} not in statement");
    out
}
