//! Abstract syntax for MJ.
//!
//! The same tree shape carries three stages: freshly parsed programs,
//! type-annotated programs (resolution slots, expression types and
//! dereference-site ids filled in by the checker), and metaprograms (which
//! additionally contain the intrinsic hook nodes at the end of [`ExprKind`]
//! and [`StmtKind`]).

use super::span::Span;
use super::types::StaticType;
use serde::Serialize;

/// Dense identifier of a dereference site, assigned in pre-order.
pub type SiteId = u32;

/// Parser-assigned statement identifier, pre-order over the whole file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
pub struct StmtId(pub u32);

impl StmtId {
    pub const SYNTHETIC: StmtId = StmtId(u32::MAX);
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub file: String,
    pub classes: Vec<ClassDecl>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDecl {
    pub name: String,
    pub superclass: Option<String>,
    pub members: Vec<Member>,
    pub span: Span,
}

impl ClassDecl {
    pub fn fields(&self) -> impl Iterator<Item = &FieldDecl> {
        self.members.iter().filter_map(|m| match m {
            Member::Field(f) => Some(f),
            _ => None,
        })
    }

    pub fn methods(&self) -> impl Iterator<Item = &MethodDecl> {
        self.members.iter().filter_map(|m| match m {
            Member::Method(m) => Some(m),
            _ => None,
        })
    }

    pub fn ctors(&self) -> impl Iterator<Item = &CtorDecl> {
        self.members.iter().filter_map(|m| match m {
            Member::Ctor(c) => Some(c),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Member {
    Field(FieldDecl),
    Ctor(CtorDecl),
    Method(MethodDecl),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDecl {
    pub is_static: bool,
    pub ty: StaticType,
    pub name: String,
    pub init: Option<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CtorDecl {
    pub params: Vec<Param>,
    pub body: Block,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MethodKind {
    Instance,
    Static,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodDecl {
    pub kind: MethodKind,
    pub ret: StaticType,
    pub name: String,
    pub params: Vec<Param>,
    pub body: Block,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub ty: StaticType,
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub span: Span,
}

impl Block {
    pub fn new(stmts: Vec<Stmt>) -> Self {
        Block {
            stmts,
            span: Span::SYNTHETIC,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub id: StmtId,
    pub kind: StmtKind,
    pub span: Span,
}

impl Stmt {
    pub fn synthetic(kind: StmtKind) -> Self {
        Stmt {
            id: StmtId::SYNTHETIC,
            kind,
            span: Span::SYNTHETIC,
        }
    }
}

/// Which exceptions a `catch` clause handles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CatchKind {
    Npe,
    Any,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Block(Block),
    VarDecl {
        ty: StaticType,
        name: String,
        init: Option<Expr>,
    },
    /// `target = value;` where target is a name or a field access.
    Assign {
        target: Expr,
        value: Expr,
    },
    If {
        cond: Expr,
        then_block: Block,
        /// Either a `Block` or an `If` statement (`else if`).
        else_branch: Option<Box<Stmt>>,
    },
    While {
        cond: Expr,
        body: Block,
    },
    Return(Option<Expr>),
    Try {
        body: Block,
        catch: CatchKind,
        binder: Option<String>,
        handler: Block,
    },
    Assert(Expr),
    Expr(Expr),

    // ---- metaprogram intrinsics ----
    /// `if (skipLine(...)) stmt`: line/method skipping hook around a
    /// statement that dereferences at least one receiver.
    SkipGuard {
        receivers: Vec<GuardReceiver>,
        body: Box<Stmt>,
    },
    /// Pool registration emitted at method entry.
    Collect {
        kind: CollectKind,
        name: String,
        ty: StaticType,
    },
    /// Method-body wrapper that turns a forced return into a normal one.
    ForceReturnScope {
        body: Block,
        ret: StaticType,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuardReceiver {
    pub site: SiteId,
    /// Side-effect-free access path the guard may re-read before the
    /// statement runs; `None` for receivers that must only be evaluated
    /// once, in place.
    pub path: Option<Expr>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CollectKind {
    Param,
    Field,
    Static,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PoolEventKind {
    InitVar,
    ModifyVar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Or => "||",
            BinaryOp::And => "&&",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Rem => "%",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq | BinaryOp::Ne => 3,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 4,
            BinaryOp::Add | BinaryOp::Sub => 5,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem => 6,
        }
    }
}

/// What a bare identifier refers to; filled in by the type checker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NameRes {
    Local,
    Param,
    /// Instance field of `this`.
    Field,
    /// Static field declared in the named class.
    Static(String),
    /// A class name used as the target of a static access.
    Class,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
    /// Static type, filled in by the type checker.
    pub ty: Option<StaticType>,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr {
            kind,
            span,
            ty: None,
        }
    }

    pub fn synthetic(kind: ExprKind) -> Self {
        Expr::new(kind, Span::SYNTHETIC)
    }

    pub fn typed(kind: ExprKind, ty: StaticType) -> Self {
        Expr {
            kind,
            span: Span::SYNTHETIC,
            ty: Some(ty),
        }
    }

    pub fn name(name: impl Into<String>) -> Self {
        Expr::synthetic(ExprKind::Name {
            name: name.into(),
            res: None,
        })
    }

    pub fn null() -> Self {
        Expr::synthetic(ExprKind::Null)
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::synthetic(ExprKind::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        })
    }

    /// The dereference-site id of this node, if it is a dereference.
    pub fn site(&self) -> Option<SiteId> {
        match &self.kind {
            ExprKind::Field { site, .. } | ExprKind::Call { site, .. } => *site,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Bool(bool),
    Str(String),
    Null,
    This,
    Name {
        name: String,
        res: Option<NameRes>,
    },
    Field {
        target: Box<Expr>,
        field: String,
        site: Option<SiteId>,
    },
    /// Method call; `target == None` is an unqualified call in the
    /// enclosing class.
    Call {
        target: Option<Box<Expr>>,
        method: String,
        args: Vec<Expr>,
        site: Option<SiteId>,
    },
    New {
        class: String,
        args: Vec<Expr>,
    },
    Unary {
        op: UnaryOp,
        expr: Box<Expr>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Cast {
        class: String,
        expr: Box<Expr>,
    },

    // ---- metaprogram intrinsics ----
    /// `checkForNull(expr, Class, site)`: null-replacement hook wrapped
    /// around a dereferenced receiver.
    CheckForNull {
        expr: Box<Expr>,
        class: String,
        site: SiteId,
        /// Local or parameter to write back to for global strategies.
        writeback: Option<String>,
    },
    /// `initVar(expr, "name")` / `modifyVar(expr, "name")`.
    PoolEvent {
        kind: PoolEventKind,
        name: String,
        expr: Box<Expr>,
    },
}

// ---------------------------------------------------------------------------
// structural comparison

/// Copy of `program` with spans, statement ids and checker annotations
/// cleared, so that two trees compare equal iff they have the same shape.
pub fn normalized(program: &Program) -> Program {
    let mut p = program.clone();
    p.file.clear();
    for c in &mut p.classes {
        c.span = Span::SYNTHETIC;
        for m in &mut c.members {
            match m {
                Member::Field(f) => {
                    f.span = Span::SYNTHETIC;
                    if let Some(e) = &mut f.init {
                        norm_expr(e);
                    }
                }
                Member::Ctor(k) => {
                    k.span = Span::SYNTHETIC;
                    k.params.iter_mut().for_each(|p| p.span = Span::SYNTHETIC);
                    norm_block(&mut k.body);
                }
                Member::Method(m) => {
                    m.span = Span::SYNTHETIC;
                    m.params.iter_mut().for_each(|p| p.span = Span::SYNTHETIC);
                    norm_block(&mut m.body);
                }
            }
        }
    }
    p
}

/// Structural equality modulo spans and annotations.
pub fn same_shape(a: &Program, b: &Program) -> bool {
    normalized(a).classes == normalized(b).classes
}

pub(crate) fn norm_block(b: &mut Block) {
    b.span = Span::SYNTHETIC;
    b.stmts.iter_mut().for_each(norm_stmt);
}

pub(crate) fn norm_stmt(s: &mut Stmt) {
    s.id = StmtId::SYNTHETIC;
    s.span = Span::SYNTHETIC;
    match &mut s.kind {
        StmtKind::Block(b) => norm_block(b),
        StmtKind::VarDecl { init, .. } => {
            if let Some(e) = init {
                norm_expr(e)
            }
        }
        StmtKind::Assign { target, value } => {
            norm_expr(target);
            norm_expr(value);
        }
        StmtKind::If {
            cond,
            then_block,
            else_branch,
        } => {
            norm_expr(cond);
            norm_block(then_block);
            if let Some(e) = else_branch {
                norm_stmt(e);
            }
        }
        StmtKind::While { cond, body } => {
            norm_expr(cond);
            norm_block(body);
        }
        StmtKind::Return(e) => {
            if let Some(e) = e {
                norm_expr(e)
            }
        }
        StmtKind::Try { body, handler, .. } => {
            norm_block(body);
            norm_block(handler);
        }
        StmtKind::Assert(e) | StmtKind::Expr(e) => norm_expr(e),
        StmtKind::SkipGuard { receivers, body } => {
            for r in receivers {
                if let Some(p) = &mut r.path {
                    norm_expr(p);
                }
            }
            norm_stmt(body);
        }
        StmtKind::Collect { .. } => {}
        StmtKind::ForceReturnScope { body, .. } => norm_block(body),
    }
}

pub(crate) fn norm_expr(e: &mut Expr) {
    e.span = Span::SYNTHETIC;
    e.ty = None;
    match &mut e.kind {
        ExprKind::Name { res, .. } => *res = None,
        ExprKind::Field { target, site, .. } => {
            *site = None;
            norm_expr(target);
        }
        ExprKind::Call {
            target, args, site, ..
        } => {
            *site = None;
            if let Some(t) = target {
                norm_expr(t);
            }
            args.iter_mut().for_each(norm_expr);
        }
        ExprKind::New { args, .. } => args.iter_mut().for_each(norm_expr),
        ExprKind::Unary { expr, .. } | ExprKind::Cast { expr, .. } => norm_expr(expr),
        ExprKind::Binary { lhs, rhs, .. } => {
            norm_expr(lhs);
            norm_expr(rhs);
        }
        ExprKind::CheckForNull { expr, .. } | ExprKind::PoolEvent { expr, .. } => norm_expr(expr),
        ExprKind::Int(_)
        | ExprKind::Bool(_)
        | ExprKind::Str(_)
        | ExprKind::Null
        | ExprKind::This => {}
    }
}

// ---------------------------------------------------------------------------
// traversal helpers

/// Calls `f` on every expression reachable from `e`, pre-order.
pub fn walk_expr<'a>(e: &'a Expr, f: &mut impl FnMut(&'a Expr)) {
    f(e);
    match &e.kind {
        ExprKind::Field { target, .. } => walk_expr(target, f),
        ExprKind::Call { target, args, .. } => {
            if let Some(t) = target {
                walk_expr(t, f);
            }
            args.iter().for_each(|a| walk_expr(a, f));
        }
        ExprKind::New { args, .. } => args.iter().for_each(|a| walk_expr(a, f)),
        ExprKind::Unary { expr, .. }
        | ExprKind::Cast { expr, .. }
        | ExprKind::CheckForNull { expr, .. }
        | ExprKind::PoolEvent { expr, .. } => walk_expr(expr, f),
        ExprKind::Binary { lhs, rhs, .. } => {
            walk_expr(lhs, f);
            walk_expr(rhs, f);
        }
        _ => {}
    }
}

/// Expressions evaluated by the statement itself, excluding nested
/// statements (the header of compound statements).
pub fn own_exprs(s: &Stmt) -> Vec<&Expr> {
    match &s.kind {
        StmtKind::VarDecl { init, .. } => init.iter().collect(),
        StmtKind::Assign { target, value } => vec![target, value],
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![cond],
        StmtKind::Return(e) => e.iter().collect(),
        StmtKind::Assert(e) | StmtKind::Expr(e) => vec![e],
        _ => Vec::new(),
    }
}

/// Calls `f` on every statement reachable from `b`, pre-order.
pub fn walk_stmts<'a>(b: &'a Block, f: &mut impl FnMut(&'a Stmt)) {
    for s in &b.stmts {
        walk_stmt(s, f);
    }
}

pub fn walk_stmt<'a>(s: &'a Stmt, f: &mut impl FnMut(&'a Stmt)) {
    f(s);
    match &s.kind {
        StmtKind::Block(b) => walk_stmts(b, f),
        StmtKind::If {
            then_block,
            else_branch,
            ..
        } => {
            walk_stmts(then_block, f);
            if let Some(e) = else_branch {
                walk_stmt(e, f);
            }
        }
        StmtKind::While { body, .. } => walk_stmts(body, f),
        StmtKind::Try { body, handler, .. } => {
            walk_stmts(body, f);
            walk_stmts(handler, f);
        }
        StmtKind::SkipGuard { body, .. } => walk_stmt(body, f),
        StmtKind::ForceReturnScope { body, .. } => walk_stmts(body, f),
        _ => {}
    }
}
