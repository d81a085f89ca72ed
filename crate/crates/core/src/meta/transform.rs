//! Source-to-source instrumentation producing the metaprogram.

use crate::lang::ast::*;
use crate::lang::typeck::{typecheck, DerefSite, TypedProgram};
use crate::lang::{StaticType, TypeErrors};
use crate::strategy::default_literal;

/// An instrumented program. `tp` is the typechecked transformed program;
/// `sites` is the site table of the original program, whose ids the
/// hooks refer to.
#[derive(Debug, Clone)]
pub struct Metaprogram {
    pub tp: TypedProgram,
    pub sites: Vec<DerefSite>,
}

impl Metaprogram {
    pub fn site(&self, id: SiteId) -> Option<&DerefSite> {
        self.sites.get(id as usize)
    }

    pub fn render(&self) -> String {
        crate::lang::pretty_print(&self.tp.program)
    }
}

/// Instruments every method and constructor body of `tp`.
///
/// # Errors
/// Only if the instrumented program fails to typecheck, which indicates a
/// bug in the transformation.
pub fn transform(tp: &TypedProgram) -> Result<Metaprogram, TypeErrors> {
    let mut program = tp.program.clone();
    for (ci, class) in program.classes.iter_mut().enumerate() {
        let cid = ci + 1;
        let prologue_fields = collect_fields(tp, cid);
        for member in class.members.iter_mut() {
            match member {
                Member::Field(_) => {}
                Member::Ctor(k) => {
                    let pro = prologue(tp, &k.params, Some(&prologue_fields));
                    k.body = wrap_body(pro, &k.body, StaticType::Void);
                }
                Member::Method(m) => {
                    let fields = (m.kind != MethodKind::Static).then_some(&prologue_fields);
                    let pro = prologue(tp, &m.params, fields);
                    m.body = wrap_body(pro, &m.body, m.ret.clone());
                }
            }
        }
    }
    let out = typecheck(&program)?;
    debug_assert_eq!(out.sites.len(), tp.sites.len());
    Ok(Metaprogram {
        tp: out,
        sites: tp.sites.clone(),
    })
}

/// Instance fields of `cid` and its superclasses, own class first.
fn collect_fields(tp: &TypedProgram, cid: usize) -> Vec<Stmt> {
    let mut out = Vec::new();
    let mut cur = Some(cid);
    while let Some(c) = cur {
        let info = tp.classes.get(c);
        for f in info.own_fields.iter().filter(|f| !f.is_static) {
            out.push(Stmt::synthetic(StmtKind::Collect {
                kind: CollectKind::Field,
                name: f.name.clone(),
                ty: f.ty.clone(),
            }));
        }
        cur = info.superclass;
    }
    out
}

fn prologue(tp: &TypedProgram, params: &[Param], fields: Option<&Vec<Stmt>>) -> Vec<Stmt> {
    let mut out: Vec<Stmt> = params
        .iter()
        .map(|p| {
            Stmt::synthetic(StmtKind::Collect {
                kind: CollectKind::Param,
                name: p.name.clone(),
                ty: p.ty.clone(),
            })
        })
        .collect();
    if let Some(f) = fields {
        out.extend(f.iter().cloned());
    }
    for (_, info) in tp.classes.iter() {
        for f in info.own_fields.iter().filter(|f| f.is_static) {
            out.push(Stmt::synthetic(StmtKind::Collect {
                kind: CollectKind::Static,
                name: format!("{}.{}", info.name, f.name),
                ty: f.ty.clone(),
            }));
        }
    }
    out
}

fn wrap_body(mut prologue: Vec<Stmt>, body: &Block, ret: StaticType) -> Block {
    prologue.extend(body.stmts.iter().map(stmt));
    let inner = Block {
        stmts: prologue,
        span: body.span,
    };
    Block {
        stmts: vec![Stmt::synthetic(StmtKind::ForceReturnScope { body: inner, ret })],
        span: body.span,
    }
}

fn block(b: &Block) -> Block {
    Block {
        stmts: b.stmts.iter().map(stmt).collect(),
        span: b.span,
    }
}

/// Receivers of the dereferences a statement evaluates itself.
fn own_receivers(s: &Stmt) -> Vec<GuardReceiver> {
    let mut out = Vec::new();
    for e in own_exprs(s) {
        walk_expr(e, &mut |x| {
            let (target, site) = match &x.kind {
                ExprKind::Field { target, site, .. } => (Some(&**target), *site),
                ExprKind::Call { target, site, .. } => (target.as_deref(), *site),
                _ => (None, None),
            };
            if let (Some(t), Some(site)) = (target, site) {
                out.push(GuardReceiver {
                    site,
                    path: is_access_path(t).then(|| strip(t)),
                });
            }
        });
    }
    out
}

/// A receiver the guard may re-read without side effects.
pub fn is_access_path(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::This => true,
        ExprKind::Name { res, .. } => !matches!(res, Some(NameRes::Class)),
        ExprKind::Field { target, .. } => {
            matches!(
                target.kind,
                ExprKind::Name {
                    res: Some(NameRes::Class),
                    ..
                }
            ) || is_access_path(target)
        }
        _ => false,
    }
}

/// Copy of a path without site ids or types, so the checker re-resolves it.
fn strip(e: &Expr) -> Expr {
    let mut e = e.clone();
    norm_expr(&mut e);
    e
}

fn stmt(s: &Stmt) -> Stmt {
    let kind = match &s.kind {
        StmtKind::Block(b) => StmtKind::Block(block(b)),
        StmtKind::VarDecl { ty, name, init } => {
            let init = init.as_ref().map(expr).unwrap_or_else(|| default_literal(ty));
            StmtKind::VarDecl {
                ty: ty.clone(),
                name: name.clone(),
                init: Some(Expr::new(
                    ExprKind::PoolEvent {
                        kind: PoolEventKind::InitVar,
                        name: name.clone(),
                        expr: Box::new(init),
                    },
                    s.span,
                )),
            }
        }
        StmtKind::Assign { target, value } => {
            let value = match &target.kind {
                ExprKind::Name {
                    name,
                    res: Some(NameRes::Local | NameRes::Param),
                } => Expr::new(
                    ExprKind::PoolEvent {
                        kind: PoolEventKind::ModifyVar,
                        name: name.clone(),
                        expr: Box::new(expr(value)),
                    },
                    value.span,
                ),
                _ => expr(value),
            };
            StmtKind::Assign {
                target: expr(target),
                value,
            }
        }
        StmtKind::If {
            cond,
            then_block,
            else_branch,
        } => StmtKind::If {
            cond: expr(cond),
            then_block: block(then_block),
            else_branch: else_branch.as_ref().map(|e| Box::new(stmt(e))),
        },
        StmtKind::While { cond, body } => StmtKind::While {
            cond: expr(cond),
            body: block(body),
        },
        StmtKind::Return(e) => StmtKind::Return(e.as_ref().map(expr)),
        StmtKind::Try {
            body,
            catch,
            binder,
            handler,
        } => StmtKind::Try {
            body: block(body),
            catch: *catch,
            binder: binder.clone(),
            handler: block(handler),
        },
        StmtKind::Assert(e) => StmtKind::Assert(expr(e)),
        StmtKind::Expr(e) => StmtKind::Expr(expr(e)),
        other => other.clone(),
    };
    let out = Stmt {
        id: s.id,
        kind,
        span: s.span,
    };
    let receivers = own_receivers(s);
    if receivers.is_empty() {
        out
    } else {
        Stmt {
            id: s.id,
            span: s.span,
            kind: StmtKind::SkipGuard {
                receivers,
                body: Box::new(out),
            },
        }
    }
}

fn check(target: &Expr, site: SiteId) -> Expr {
    let class = target
        .ty
        .as_ref()
        .and_then(|t| t.class_name())
        .expect("typed class receiver")
        .to_string();
    let writeback = match &target.kind {
        ExprKind::Name {
            name,
            res: Some(NameRes::Local | NameRes::Param),
        } => Some(name.clone()),
        _ => None,
    };
    Expr::new(
        ExprKind::CheckForNull {
            expr: Box::new(expr(target)),
            class,
            site,
            writeback,
        },
        target.span,
    )
}

fn expr(e: &Expr) -> Expr {
    let kind = match &e.kind {
        ExprKind::Field {
            target,
            field,
            site,
        } => ExprKind::Field {
            target: Box::new(match site {
                Some(k) => check(target, *k),
                None => expr(target),
            }),
            field: field.clone(),
            site: *site,
        },
        ExprKind::Call {
            target,
            method,
            args,
            site,
        } => ExprKind::Call {
            target: target.as_ref().map(|t| {
                Box::new(match site {
                    Some(k) => check(t, *k),
                    None => expr(t),
                })
            }),
            method: method.clone(),
            args: args.iter().map(expr).collect(),
            site: *site,
        },
        ExprKind::New { class, args } => ExprKind::New {
            class: class.clone(),
            args: args.iter().map(expr).collect(),
        },
        ExprKind::Unary { op, expr: inner } => ExprKind::Unary {
            op: *op,
            expr: Box::new(expr(inner)),
        },
        ExprKind::Binary { op, lhs, rhs } => ExprKind::Binary {
            op: *op,
            lhs: Box::new(expr(lhs)),
            rhs: Box::new(expr(rhs)),
        },
        ExprKind::Cast { class, expr: inner } => ExprKind::Cast {
            class: class.clone(),
            expr: Box::new(expr(inner)),
        },
        other => other.clone(),
    };
    Expr {
        kind,
        span: e.span,
        ty: e.ty.clone(),
    }
}
