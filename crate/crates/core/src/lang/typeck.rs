//! Type checking, name resolution and dereference-site numbering.
//!
//! The checker is the compile gate of template repair: a rewritten program
//! that fails here is not a tentative patch. On success it returns the
//! annotated program together with the class table and the site table.

use super::ast::*;
use super::scope::{VarCandidate, VarKind, VarRef};
use super::span::Span;
use super::types::StaticType;
use super::{TypeError, TypeErrors};
use serde::Serialize;
use std::collections::HashMap;

pub type ClassId = usize;

/// The implicit root class.
pub const OBJECT: ClassId = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldInfo {
    pub name: String,
    pub ty: StaticType,
    pub is_static: bool,
    pub owner: ClassId,
    /// Member index of the declaration in the owner's `ClassDecl`.
    pub member: usize,
}

/// Location of a method or constructor declaration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MemberRef {
    pub class: ClassId,
    pub member: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodInfo {
    pub name: String,
    pub kind: MethodKind,
    pub ret: StaticType,
    pub params: Vec<StaticType>,
    pub at: MemberRef,
}

/// Constructor signature. `member` is `None` for the implicit zero-argument
/// constructor of a class that declares none.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CtorSig {
    pub class: String,
    pub params: Vec<StaticType>,
    #[serde(skip)]
    pub member: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ClassInfo {
    pub name: String,
    /// Index into `Program::classes`; `None` for `Object`.
    pub decl: Option<usize>,
    pub superclass: Option<ClassId>,
    /// Fields declared by this class (static and instance), in order.
    pub own_fields: Vec<FieldInfo>,
    /// Instance fields including inherited ones, root class first.
    pub layout: Vec<FieldInfo>,
    /// Methods visible on this class; overrides replace inherited entries.
    pub methods: HashMap<String, MethodInfo>,
    pub ctors: Vec<CtorSig>,
}

#[derive(Debug, Clone)]
pub struct ClassTable {
    classes: Vec<ClassInfo>,
    by_name: HashMap<String, ClassId>,
}

impl ClassTable {
    pub fn id(&self, name: &str) -> Option<ClassId> {
        self.by_name.get(name).copied()
    }

    pub fn get(&self, id: ClassId) -> &ClassInfo {
        &self.classes[id]
    }

    pub fn by_name(&self, name: &str) -> Option<&ClassInfo> {
        self.id(name).map(|id| &self.classes[id])
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClassId, &ClassInfo)> {
        self.classes.iter().enumerate()
    }

    /// Reflexive, transitive closure of `extends`.
    pub fn is_subclass(&self, a: ClassId, b: ClassId) -> bool {
        let mut cur = Some(a);
        while let Some(c) = cur {
            if c == b {
                return true;
            }
            cur = self.classes[c].superclass;
        }
        false
    }

    /// Subtyping on static types. Primitives are only subtypes of
    /// themselves; the null literal's type is below every class type.
    pub fn subtype_of(&self, a: &StaticType, b: &StaticType) -> bool {
        match (a, b) {
            (StaticType::Class(x), StaticType::Class(y)) => match (self.id(x), self.id(y)) {
                (Some(x), Some(y)) => self.is_subclass(x, y),
                _ => false,
            },
            (StaticType::Null, StaticType::Class(_)) => true,
            (x, y) => x == y,
        }
    }

    /// Either type is a subtype of the other.
    pub fn related(&self, a: &StaticType, b: &StaticType) -> bool {
        self.subtype_of(a, b) || self.subtype_of(b, a)
    }

    pub fn field_slot(&self, class: ClassId, name: &str) -> Option<usize> {
        self.classes[class].layout.iter().position(|f| f.name == name)
    }

    /// Static field visible from `class` (declared there or inherited).
    pub fn static_field(&self, class: ClassId, name: &str) -> Option<&FieldInfo> {
        let mut cur = Some(class);
        while let Some(c) = cur {
            if let Some(f) = self.classes[c]
                .own_fields
                .iter()
                .find(|f| f.is_static && f.name == name)
            {
                return Some(f);
            }
            cur = self.classes[c].superclass;
        }
        None
    }

    pub fn instance_field(&self, class: ClassId, name: &str) -> Option<&FieldInfo> {
        self.classes[class].layout.iter().find(|f| f.name == name)
    }

    /// Static fields declared by `class`, in declaration order.
    pub fn statics(&self, class: ClassId) -> impl Iterator<Item = &FieldInfo> {
        self.classes[class].own_fields.iter().filter(|f| f.is_static)
    }

    pub fn method(&self, class: ClassId, name: &str) -> Option<&MethodInfo> {
        self.classes[class].methods.get(name)
    }

    pub fn ctor(&self, class: ClassId, arity: usize) -> Option<&CtorSig> {
        self.classes[class]
            .ctors
            .iter()
            .find(|c| c.params.len() == arity)
    }

    pub fn has_zero_arg_ctor(&self, class: ClassId) -> bool {
        self.ctor(class, 0).is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SiteKind {
    MethodCallReceiver,
    FieldRead,
    FieldWrite,
}

/// Kind of the innermost statement that evaluates a dereference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum StmtTag {
    ExprStmt,
    Assign,
    VarDecl,
    Return,
    Condition,
}

/// The method or constructor whose body contains a site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Enclosing {
    pub at: MemberRef,
    pub class: String,
    /// Method name, or `<init>` for constructors.
    pub name: String,
    pub ret: StaticType,
    pub is_static: bool,
}

/// A dereference site: a field read, field write or method call whose
/// receiver may be null.
#[derive(Debug, Clone, PartialEq)]
pub struct DerefSite {
    pub id: SiteId,
    pub span: Span,
    pub receiver: Expr,
    pub receiver_type: StaticType,
    pub kind: SiteKind,
    pub method: Enclosing,
    pub stmt: StmtId,
    pub stmt_span: Span,
    pub stmt_kind: StmtTag,
    /// The variable the receiver reads, when the receiver is a plain
    /// variable reference.
    pub receiver_var: Option<VarRef>,
    /// Accessible variables at the site (see `TypedProgram::accessible_vars`).
    pub scope: Vec<VarCandidate>,
}

#[derive(Debug, Clone)]
pub struct TypedProgram {
    pub program: Program,
    pub classes: ClassTable,
    /// Indexed by site id.
    pub sites: Vec<DerefSite>,
}

impl TypedProgram {
    pub fn site(&self, id: SiteId) -> Option<&DerefSite> {
        self.sites.get(id as usize)
    }

    pub fn class_decl(&self, id: ClassId) -> Option<&ClassDecl> {
        self.classes.get(id).decl.map(|d| &self.program.classes[d])
    }

    pub fn member(&self, at: MemberRef) -> &Member {
        let decl = self.classes.get(at.class).decl.expect("Object has no members");
        &self.program.classes[decl].members[at.member]
    }

    /// Finds a test method by name.
    pub fn find_test(&self, name: &str) -> Option<(ClassId, &MethodDecl)> {
        for (id, info) in self.classes.iter() {
            let Some(d) = info.decl else { continue };
            for m in self.program.classes[d].methods() {
                if m.kind == MethodKind::Test && m.name == name {
                    return Some((id, m));
                }
            }
        }
        None
    }

    pub fn test_names(&self) -> Vec<String> {
        self.program
            .classes
            .iter()
            .flat_map(|c| c.methods())
            .filter(|m| m.kind == MethodKind::Test)
            .map(|m| m.name.clone())
            .collect()
    }
}

/// Type checks `program`, returning the annotated program or every error
/// found.
pub fn typecheck(program: &Program) -> Result<TypedProgram, TypeErrors> {
    let mut errors = Vec::new();
    let table = build_table(program, &mut errors);
    if !errors.is_empty() {
        return Err(TypeErrors(errors));
    }
    let mut annotated = program.clone();
    let mut checker = Checker {
        table: &table,
        errors,
        sites: Vec::new(),
        next_site: 0,
        ctx: Ctx::default(),
    };
    for (ci, class) in annotated.classes.iter_mut().enumerate() {
        let cid = ci + 1;
        for (mi, member) in class.members.iter_mut().enumerate() {
            checker.member(cid, mi, member);
        }
    }
    let Checker {
        errors, mut sites, ..
    } = checker;
    if !errors.is_empty() {
        return Err(TypeErrors(errors));
    }
    sites.sort_by_key(|s| s.id);
    debug_assert!(sites.iter().enumerate().all(|(i, s)| s.id as usize == i));
    Ok(TypedProgram {
        program: annotated,
        classes: table,
        sites,
    })
}

fn err(errors: &mut Vec<TypeError>, span: Span, message: impl Into<String>) {
    errors.push(TypeError {
        line: span.line,
        col: span.col,
        message: message.into(),
    });
}

fn build_table(program: &Program, errors: &mut Vec<TypeError>) -> ClassTable {
    let mut classes = vec![ClassInfo {
        name: "Object".into(),
        decl: None,
        superclass: None,
        own_fields: Vec::new(),
        layout: Vec::new(),
        methods: HashMap::new(),
        ctors: vec![CtorSig {
            class: "Object".into(),
            params: Vec::new(),
            member: None,
        }],
    }];
    let mut by_name = HashMap::from([("Object".to_string(), OBJECT)]);
    for (i, c) in program.classes.iter().enumerate() {
        if by_name.contains_key(&c.name) {
            err(errors, c.span, format!("duplicate class `{}`", c.name));
        }
        by_name.insert(c.name.clone(), i + 1);
        classes.push(ClassInfo {
            name: c.name.clone(),
            decl: Some(i),
            superclass: Some(OBJECT),
            own_fields: Vec::new(),
            layout: Vec::new(),
            methods: HashMap::new(),
            ctors: Vec::new(),
        });
    }
    if !errors.is_empty() {
        return ClassTable { classes, by_name };
    }

    let resolves = |t: &StaticType| match t {
        StaticType::Class(n) => by_name.contains_key(n),
        _ => true,
    };

    // superclasses, then cycle check
    for (i, c) in program.classes.iter().enumerate() {
        if let Some(s) = &c.superclass {
            match by_name.get(s) {
                Some(&sid) => classes[i + 1].superclass = Some(sid),
                None => err(errors, c.span, format!("unknown superclass `{s}`")),
            }
        }
    }
    for id in 1..classes.len() {
        let mut seen = vec![false; classes.len()];
        let mut cur = Some(id);
        while let Some(c) = cur {
            if seen[c] {
                let span = program.classes[id - 1].span;
                err(
                    errors,
                    span,
                    format!("inheritance cycle through `{}`", classes[id].name),
                );
                return ClassTable { classes, by_name };
            }
            seen[c] = true;
            cur = classes[c].superclass;
        }
    }
    if !errors.is_empty() {
        return ClassTable { classes, by_name };
    }

    // own members
    for (i, c) in program.classes.iter().enumerate() {
        let id = i + 1;
        let mut method_names: Vec<&str> = Vec::new();
        for (mi, m) in c.members.iter().enumerate() {
            match m {
                Member::Field(f) => {
                    if matches!(f.ty, StaticType::Void) || !resolves(&f.ty) {
                        err(errors, f.span, format!("unknown field type `{}`", f.ty));
                    }
                    if classes[id].own_fields.iter().any(|o| o.name == f.name) {
                        err(errors, f.span, format!("duplicate field `{}`", f.name));
                    }
                    classes[id].own_fields.push(FieldInfo {
                        name: f.name.clone(),
                        ty: f.ty.clone(),
                        is_static: f.is_static,
                        owner: id,
                        member: mi,
                    });
                }
                Member::Ctor(k) => {
                    for p in &k.params {
                        if !resolves(&p.ty) {
                            err(errors, p.span, format!("unknown type `{}`", p.ty));
                        }
                    }
                    if classes[id]
                        .ctors
                        .iter()
                        .any(|o| o.params.len() == k.params.len())
                    {
                        err(
                            errors,
                            k.span,
                            format!(
                                "`{}` already has a constructor with {} parameters",
                                c.name,
                                k.params.len()
                            ),
                        );
                    }
                    classes[id].ctors.push(CtorSig {
                        class: c.name.clone(),
                        params: k.params.iter().map(|p| p.ty.clone()).collect(),
                        member: Some(mi),
                    });
                }
                Member::Method(m) => {
                    if !resolves(&m.ret) {
                        err(errors, m.span, format!("unknown return type `{}`", m.ret));
                    }
                    for p in &m.params {
                        if !resolves(&p.ty) {
                            err(errors, p.span, format!("unknown type `{}`", p.ty));
                        }
                    }
                    if method_names.contains(&m.name.as_str()) {
                        err(
                            errors,
                            m.span,
                            format!("duplicate method `{}` (overloading is not supported)", m.name),
                        );
                    }
                    method_names.push(&m.name);
                    if m.kind == MethodKind::Test
                        && (!m.params.is_empty() || m.ret != StaticType::Void)
                    {
                        err(
                            errors,
                            m.span,
                            format!("test method `{}` must be `test void {}()`", m.name, m.name),
                        );
                    }
                }
            }
        }
        if classes[id].ctors.is_empty() {
            classes[id].ctors.push(CtorSig {
                class: c.name.clone(),
                params: Vec::new(),
                member: None,
            });
        }
    }

    // layouts and method tables, superclass first
    let mut done = vec![false; classes.len()];
    done[OBJECT] = true;
    fn finish(
        id: ClassId,
        program: &Program,
        classes: &mut Vec<ClassInfo>,
        done: &mut Vec<bool>,
        errors: &mut Vec<TypeError>,
    ) {
        if done[id] {
            return;
        }
        let sup = classes[id].superclass.unwrap_or(OBJECT);
        finish(sup, program, classes, done, errors);
        let decl = &program.classes[id - 1];
        let mut layout = classes[sup].layout.clone();
        let mut methods = classes[sup].methods.clone();
        for f in classes[id].own_fields.clone() {
            let clash = layout.iter().any(|l| l.name == f.name)
                || {
                    let mut cur = Some(sup);
                    let mut found = false;
                    while let Some(c) = cur {
                        found |= classes[c].own_fields.iter().any(|o| o.name == f.name);
                        cur = classes[c].superclass;
                    }
                    found
                };
            if clash {
                let span = match &decl.members[f.member] {
                    Member::Field(fd) => fd.span,
                    _ => decl.span,
                };
                err(
                    errors,
                    span,
                    format!("field `{}` hides an inherited field", f.name),
                );
            }
            if !f.is_static {
                layout.push(f);
            }
        }
        for (mi, m) in decl.members.iter().enumerate() {
            let Member::Method(m) = m else { continue };
            let info = MethodInfo {
                name: m.name.clone(),
                kind: m.kind,
                ret: m.ret.clone(),
                params: m.params.iter().map(|p| p.ty.clone()).collect(),
                at: MemberRef { class: id, member: mi },
            };
            if let Some(prev) = methods.get(&m.name) {
                let prev_static = prev.kind == MethodKind::Static;
                let now_static = m.kind == MethodKind::Static;
                if prev.params != info.params || prev.ret != info.ret || prev_static != now_static {
                    err(
                        errors,
                        m.span,
                        format!(
                            "`{}` overrides an inherited method with a different signature",
                            m.name
                        ),
                    );
                }
            }
            methods.insert(m.name.clone(), info);
        }
        classes[id].layout = layout;
        classes[id].methods = methods;
        done[id] = true;
    }
    for id in 1..classes.len() {
        finish(id, program, &mut classes, &mut done, errors);
    }

    ClassTable { classes, by_name }
}

#[derive(Debug, Clone, Default)]
struct Ctx {
    class: ClassId,
    enclosing: Option<Enclosing>,
    is_static: bool,
    params: Vec<(String, StaticType)>,
    scopes: Vec<Vec<(String, StaticType)>>,
    stmt: Option<(StmtId, Span, StmtTag)>,
    /// Nonzero while checking guard paths, which must not create sites.
    suppress_sites: u32,
    in_field_init: bool,
}

struct Checker<'t> {
    table: &'t ClassTable,
    errors: Vec<TypeError>,
    sites: Vec<DerefSite>,
    next_site: u32,
    ctx: Ctx,
}

impl<'t> Checker<'t> {
    fn error(&mut self, span: Span, message: impl Into<String>) {
        err(&mut self.errors, span, message);
    }

    fn assignable(&self, from: &StaticType, to: &StaticType) -> bool {
        self.table.subtype_of(from, to)
    }

    fn member(&mut self, class: ClassId, mi: usize, member: &mut Member) {
        let class_name = self.table.get(class).name.clone();
        match member {
            Member::Field(f) => {
                self.ctx = Ctx {
                    class,
                    is_static: true,
                    in_field_init: true,
                    ..Ctx::default()
                };
                if let Some(init) = &mut f.init {
                    if let Some(t) = self.expr(init) {
                        if !self.assignable(&t, &f.ty) {
                            self.error(
                                init.span,
                                format!("cannot initialize `{}` of type {} with {}", f.name, f.ty, t),
                            );
                        }
                    }
                }
            }
            Member::Ctor(k) => {
                self.ctx = Ctx {
                    class,
                    enclosing: Some(Enclosing {
                        at: MemberRef { class, member: mi },
                        class: class_name,
                        name: "<init>".into(),
                        ret: StaticType::Void,
                        is_static: false,
                    }),
                    is_static: false,
                    params: Vec::new(),
                    ..Ctx::default()
                };
                self.params(&k.params);
                self.block(&mut k.body);
            }
            Member::Method(m) => {
                let is_static = m.kind == MethodKind::Static;
                if m.kind == MethodKind::Test && !self.table.has_zero_arg_ctor(class) {
                    self.error(
                        m.span,
                        format!(
                            "class `{class_name}` declares test `{}` but has no zero-argument constructor",
                            m.name
                        ),
                    );
                }
                self.ctx = Ctx {
                    class,
                    enclosing: Some(Enclosing {
                        at: MemberRef { class, member: mi },
                        class: class_name,
                        name: m.name.clone(),
                        ret: m.ret.clone(),
                        is_static,
                    }),
                    is_static,
                    ..Ctx::default()
                };
                self.params(&m.params);
                self.block(&mut m.body);
            }
        }
    }

    fn params(&mut self, params: &[Param]) {
        for p in params {
            if matches!(p.ty, StaticType::Void) {
                self.error(p.span, "parameters cannot be void");
            }
            if self.ctx.params.iter().any(|(n, _)| *n == p.name) {
                self.error(p.span, format!("duplicate parameter `{}`", p.name));
            }
            self.ctx.params.push((p.name.clone(), p.ty.clone()));
        }
    }

    // ---- scopes ----

    fn local(&self, name: &str) -> Option<(NameRes, StaticType)> {
        for scope in self.ctx.scopes.iter().rev() {
            if let Some((_, t)) = scope.iter().rev().find(|(n, _)| n == name) {
                return Some((NameRes::Local, t.clone()));
            }
        }
        self.ctx
            .params
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| (NameRes::Param, t.clone()))
    }

    /// Resolves a bare identifier in value position.
    fn lookup(&mut self, name: &str, span: Span) -> Option<(NameRes, StaticType)> {
        if let Some(r) = self.local(name) {
            return Some(r);
        }
        if let Some(f) = self.table.instance_field(self.ctx.class, name) {
            if self.ctx.is_static {
                self.error(
                    span,
                    format!("instance field `{name}` cannot be used in a static context"),
                );
                return None;
            }
            return Some((NameRes::Field, f.ty.clone()));
        }
        if let Some(f) = self.table.static_field(self.ctx.class, name) {
            let owner = self.table.get(f.owner).name.clone();
            return Some((NameRes::Static(owner), f.ty.clone()));
        }
        None
    }

    fn is_class_ref(&self, e: &Expr) -> Option<ClassId> {
        if let ExprKind::Name { name, .. } = &e.kind {
            if self.local(name).is_none()
                && self.table.instance_field(self.ctx.class, name).is_none()
                && self.table.static_field(self.ctx.class, name).is_none()
            {
                return self.table.id(name);
            }
        }
        None
    }

    fn declare(&mut self, name: &str, ty: StaticType, span: Span) {
        if self.local(name).is_some() {
            self.error(span, format!("`{name}` is already declared in this scope"));
        }
        self.ctx
            .scopes
            .last_mut()
            .expect("declaration outside a block")
            .push((name.to_string(), ty));
    }

    fn scope_snapshot(&self, exclude: Option<&VarRef>) -> Vec<VarCandidate> {
        let mut out = Vec::new();
        let mut bound: Vec<&str> = Vec::new();
        for scope in self.ctx.scopes.iter().rev() {
            for (n, t) in scope {
                out.push(VarCandidate {
                    var: VarRef::local(n.clone()),
                    ty: t.clone(),
                });
                bound.push(n);
            }
        }
        for (n, t) in &self.ctx.params {
            out.push(VarCandidate {
                var: VarRef::param(n.clone()),
                ty: t.clone(),
            });
            bound.push(n);
        }
        if !self.ctx.is_static {
            let mut cur = Some(self.ctx.class);
            while let Some(c) = cur {
                for f in self.table.get(c).own_fields.iter().filter(|f| !f.is_static) {
                    if !bound.contains(&f.name.as_str()) {
                        out.push(VarCandidate {
                            var: VarRef::field(f.name.clone()),
                            ty: f.ty.clone(),
                        });
                    }
                }
                cur = self.table.get(c).superclass;
            }
        }
        for (_, info) in self.table.iter() {
            for f in info.own_fields.iter().filter(|f| f.is_static) {
                out.push(VarCandidate {
                    var: VarRef::static_field(info.name.clone(), f.name.clone()),
                    ty: f.ty.clone(),
                });
            }
        }
        if let Some(x) = exclude {
            out.retain(|c| &c.var != x);
        }
        out
    }

    // ---- statements ----

    fn block(&mut self, b: &mut Block) {
        self.ctx.scopes.push(Vec::new());
        for s in &mut b.stmts {
            self.stmt(s);
        }
        self.ctx.scopes.pop();
    }

    fn with_stmt<R>(&mut self, s: &Stmt, tag: StmtTag, f: impl FnOnce(&mut Self) -> R) -> R {
        let saved = self.ctx.stmt.replace((s.id, s.span, tag));
        let r = f(self);
        self.ctx.stmt = saved;
        r
    }

    fn cond(&mut self, s: &Stmt, cond: &mut Expr) {
        if let Some(t) = self.with_stmt(s, StmtTag::Condition, |c| c.expr(cond)) {
            if t != StaticType::Bool {
                self.error(cond.span, format!("condition must be bool, found {t}"));
            }
        }
    }

    fn stmt(&mut self, s: &mut Stmt) {
        let header = Stmt {
            id: s.id,
            kind: StmtKind::Return(None),
            span: s.span,
        };
        match &mut s.kind {
            StmtKind::Block(b) => self.block(b),
            StmtKind::VarDecl { ty, name, init } => {
                if matches!(ty, StaticType::Void | StaticType::Null)
                    || ty.class_name().is_some_and(|n| self.table.id(n).is_none())
                {
                    self.error(s.span, format!("unknown type `{ty}`"));
                }
                if let Some(init) = init {
                    if let Some(t) = self.with_stmt(&header, StmtTag::VarDecl, |c| c.expr(init)) {
                        if !self.assignable(&t, ty) {
                            self.error(
                                init.span,
                                format!("cannot assign {t} to `{name}` of type {ty}"),
                            );
                        }
                    }
                }
                let (name, ty) = (name.clone(), ty.clone());
                self.declare(&name, ty, s.span);
            }
            StmtKind::Assign { target, value } => {
                self.with_stmt(&header, StmtTag::Assign, |c| c.assign(target, value));
            }
            StmtKind::If {
                cond,
                then_block,
                else_branch,
            } => {
                self.cond(&header, cond);
                self.block(then_block);
                if let Some(e) = else_branch {
                    self.stmt(e);
                }
            }
            StmtKind::While { cond, body } => {
                self.cond(&header, cond);
                self.block(body);
            }
            StmtKind::Return(value) => {
                let ret = self
                    .ctx
                    .enclosing
                    .as_ref()
                    .map(|e| e.ret.clone())
                    .unwrap_or(StaticType::Void);
                match value {
                    None if ret != StaticType::Void => {
                        self.error(s.span, format!("missing return value of type {ret}"))
                    }
                    None => {}
                    Some(v) => {
                        if let Some(t) = self.with_stmt(&header, StmtTag::Return, |c| c.expr(v)) {
                            if ret == StaticType::Void {
                                self.error(v.span, "void method cannot return a value");
                            } else if !self.assignable(&t, &ret) {
                                self.error(v.span, format!("cannot return {t} from a method returning {ret}"));
                            }
                        }
                    }
                }
            }
            StmtKind::Try { body, handler, .. } => {
                self.block(body);
                self.block(handler);
            }
            StmtKind::Assert(e) => {
                if let Some(t) = self.with_stmt(&header, StmtTag::ExprStmt, |c| c.expr(e)) {
                    if t != StaticType::Bool {
                        self.error(e.span, format!("assert expects bool, found {t}"));
                    }
                }
            }
            StmtKind::Expr(e) => {
                self.with_stmt(&header, StmtTag::ExprStmt, |c| c.expr(e));
            }
            StmtKind::SkipGuard { receivers, body } => {
                self.ctx.suppress_sites += 1;
                for r in receivers.iter_mut() {
                    if let Some(p) = &mut r.path {
                        self.expr(p);
                    }
                }
                self.ctx.suppress_sites -= 1;
                self.stmt(body);
            }
            StmtKind::Collect { kind, name, ty } => {
                let found = match kind {
                    CollectKind::Param => self.ctx.params.iter().find(|(n, _)| n == name).map(|(_, t)| t.clone()),
                    CollectKind::Field => self
                        .table
                        .instance_field(self.ctx.class, name)
                        .map(|f| f.ty.clone()),
                    CollectKind::Static => name.split_once('.').and_then(|(c, f)| {
                        let cid = self.table.id(c)?;
                        self.table.static_field(cid, f).map(|f| f.ty.clone())
                    }),
                };
                if found.as_ref() != Some(ty) {
                    self.error(s.span, format!("cannot collect `{name}`"));
                }
            }
            StmtKind::ForceReturnScope { body, .. } => self.block(body),
        }
    }

    fn assign(&mut self, target: &mut Expr, value: &mut Expr) {
        let target_ty = match &mut target.kind {
            ExprKind::Name { name, res } => match self.lookup(name, target.span) {
                Some((r, t)) => {
                    *res = Some(r);
                    Some(t)
                }
                None => {
                    let n = name.clone();
                    self.error(target.span, format!("unknown variable `{n}`"));
                    None
                }
            },
            ExprKind::Field { .. } => self.field(target, SiteKind::FieldWrite),
            _ => {
                self.error(target.span, "invalid assignment target");
                None
            }
        };
        target.ty = target_ty.clone();
        if let (Some(v), Some(t)) = (self.expr(value), target_ty) {
            if !self.assignable(&v, &t) {
                self.error(value.span, format!("cannot assign {v} to a target of type {t}"));
            }
        }
    }

    // ---- expressions ----

    fn record_site(&mut self, id: SiteId, e: &Expr, receiver: &Expr, rt: &StaticType, kind: SiteKind) {
        let Some(enclosing) = self.ctx.enclosing.clone() else {
            return;
        };
        let Some((stmt, stmt_span, stmt_kind)) = self.ctx.stmt else {
            return;
        };
        let receiver_var = receiver_var(receiver);
        let scope = self.scope_snapshot(receiver_var.as_ref());
        self.sites.push(DerefSite {
            id,
            span: e.span,
            receiver: receiver.clone(),
            receiver_type: rt.clone(),
            kind,
            method: enclosing,
            stmt,
            stmt_span,
            stmt_kind,
            receiver_var,
            scope,
        });
    }

    /// Whether a receiver expression needs a site (it could be null).
    fn may_be_null(&self, target: &Expr) -> bool {
        !matches!(target.kind, ExprKind::This | ExprKind::New { .. })
            && self.ctx.suppress_sites == 0
    }

    fn field(&mut self, e: &mut Expr, kind: SiteKind) -> Option<StaticType> {
        let span = e.span;
        let ExprKind::Field {
            target,
            field,
            site,
        } = &mut e.kind
        else {
            unreachable!()
        };
        if self.ctx.in_field_init {
            self.error(span, "field initializers cannot access fields");
            return None;
        }
        if let Some(cid) = self.is_class_ref(target) {
            if let ExprKind::Name { res, .. } = &mut target.kind {
                *res = Some(NameRes::Class);
            }
            return match self.table.static_field(cid, field) {
                Some(f) => Some(f.ty.clone()),
                None => {
                    let f = field.clone();
                    self.error(span, format!("no static field `{f}` in `{}`", self.table.get(cid).name));
                    None
                }
            };
        }
        let id = if self.may_be_null(target) {
            let id = self.next_site;
            self.next_site += 1;
            Some(id)
        } else {
            None
        };
        let tt = self.expr(target)?;
        let Some(cname) = tt.class_name() else {
            self.error(target.span, format!("cannot access field `{field}` on {tt}"));
            return None;
        };
        let cid = self.table.id(cname)?;
        let Some(f) = self.table.instance_field(cid, field) else {
            let f = field.clone();
            self.error(span, format!("no field `{f}` in `{cname}`"));
            return None;
        };
        let fty = f.ty.clone();
        *site = id;
        if let Some(id) = id {
            let receiver = (**target).clone();
            self.record_site(id, &Expr::new(ExprKind::Null, span), &receiver, &tt, kind);
        }
        Some(fty)
    }

    fn check_args(&mut self, span: Span, what: &str, params: &[StaticType], args: &mut [Expr]) {
        if params.len() != args.len() {
            self.error(
                span,
                format!("{what} expects {} arguments, found {}", params.len(), args.len()),
            );
        }
        for (a, p) in args.iter_mut().zip(params.iter().chain(std::iter::repeat(&StaticType::Void))) {
            if let Some(t) = self.expr(a) {
                if *p != StaticType::Void && !self.assignable(&t, p) {
                    self.error(a.span, format!("argument of type {t} is not assignable to {p}"));
                }
            }
        }
    }

    fn call(&mut self, e: &mut Expr) -> Option<StaticType> {
        let span = e.span;
        let ExprKind::Call {
            target,
            method,
            args,
            site,
        } = &mut e.kind
        else {
            unreachable!()
        };
        if self.ctx.in_field_init {
            self.error(span, "field initializers cannot call methods");
            return None;
        }
        let method = method.clone();
        match target {
            None => {
                let Some(info) = self.table.method(self.ctx.class, &method).cloned() else {
                    self.error(span, format!("unknown method `{method}`"));
                    return None;
                };
                if info.kind != MethodKind::Static && self.ctx.is_static {
                    self.error(span, format!("instance method `{method}` called from a static context"));
                }
                self.check_args(span, &format!("`{method}`"), &info.params, args);
                Some(info.ret)
            }
            Some(t) => {
                if let Some(cid) = self.is_class_ref(t) {
                    if let ExprKind::Name { res, .. } = &mut t.kind {
                        *res = Some(NameRes::Class);
                    }
                    let Some(info) = self.table.method(cid, &method).cloned() else {
                        self.error(span, format!("unknown method `{method}`"));
                        return None;
                    };
                    if info.kind != MethodKind::Static {
                        self.error(span, format!("`{method}` is not static"));
                    }
                    self.check_args(span, &format!("`{method}`"), &info.params, args);
                    return Some(info.ret);
                }
                let id = if self.may_be_null(t) {
                    let id = self.next_site;
                    self.next_site += 1;
                    Some(id)
                } else {
                    None
                };
                let tt = self.expr(t)?;
                let Some(cname) = tt.class_name() else {
                    self.error(t.span, format!("cannot call `{method}` on {tt}"));
                    return None;
                };
                let cid = self.table.id(cname)?;
                let Some(info) = self.table.method(cid, &method).cloned() else {
                    self.error(span, format!("no method `{method}` in `{cname}`"));
                    return None;
                };
                if info.kind == MethodKind::Static {
                    self.error(span, format!("static method `{method}` called on an instance"));
                }
                *site = id;
                if let Some(id) = id {
                    let receiver = (**t).clone();
                    self.record_site(
                        id,
                        &Expr::new(ExprKind::Null, span),
                        &receiver,
                        &tt,
                        SiteKind::MethodCallReceiver,
                    );
                }
                self.check_args(span, &format!("`{method}`"), &info.params, args);
                Some(info.ret)
            }
        }
    }

    fn expr(&mut self, e: &mut Expr) -> Option<StaticType> {
        let t = self.expr_inner(e);
        e.ty = t.clone();
        t
    }

    fn expr_inner(&mut self, e: &mut Expr) -> Option<StaticType> {
        let span = e.span;
        match &mut e.kind {
            ExprKind::Int(_) => Some(StaticType::Int),
            ExprKind::Bool(_) => Some(StaticType::Bool),
            ExprKind::Str(_) => Some(StaticType::Str),
            ExprKind::Null => Some(StaticType::Null),
            ExprKind::This => {
                if self.ctx.is_static {
                    self.error(span, "`this` in a static context");
                    None
                } else {
                    Some(StaticType::Class(self.table.get(self.ctx.class).name.clone()))
                }
            }
            ExprKind::Name { name, res } => {
                if self.ctx.in_field_init {
                    self.error(span, "field initializers cannot read variables");
                    return None;
                }
                match self.lookup(name, span) {
                    Some((r, t)) => {
                        *res = Some(r);
                        Some(t)
                    }
                    None => {
                        let n = name.clone();
                        if self.table.id(&n).is_some() {
                            self.error(span, format!("class `{n}` used as a value"));
                        } else {
                            self.error(span, format!("unknown variable `{n}`"));
                        }
                        None
                    }
                }
            }
            ExprKind::Field { .. } => self.field(e, SiteKind::FieldRead),
            ExprKind::Call { .. } => self.call(e),
            ExprKind::New { class, args } => {
                let Some(cid) = self.table.id(class) else {
                    let c = class.clone();
                    self.error(span, format!("unknown class `{c}`"));
                    return None;
                };
                let class = class.clone();
                match self.table.ctor(cid, args.len()).cloned() {
                    Some(sig) => self.check_args(span, &format!("`new {class}`"), &sig.params, args),
                    None => {
                        self.error(
                            span,
                            format!("`{class}` has no constructor taking {} arguments", args.len()),
                        );
                        for a in args.iter_mut() {
                            self.expr(a);
                        }
                    }
                }
                Some(StaticType::Class(class))
            }
            ExprKind::Unary { op, expr } => {
                let t = self.expr(expr)?;
                let want = match op {
                    UnaryOp::Not => StaticType::Bool,
                    UnaryOp::Neg => StaticType::Int,
                };
                if t != want {
                    self.error(span, format!("operator expects {want}, found {t}"));
                    return None;
                }
                Some(want)
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let op = *op;
                let (l, r) = (self.expr(lhs), self.expr(rhs));
                let (l, r) = (l?, r?);
                use StaticType::*;
                let out = match op {
                    BinaryOp::Add => match (&l, &r) {
                        (Int, Int) => Some(Int),
                        (Str, Str | Int | Bool) | (Int | Bool, Str) => Some(Str),
                        _ => None,
                    },
                    BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem => {
                        (l == Int && r == Int).then_some(Int)
                    }
                    BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
                        (l == Int && r == Int).then_some(Bool)
                    }
                    BinaryOp::And | BinaryOp::Or => (l == Bool && r == Bool).then_some(Bool),
                    BinaryOp::Eq | BinaryOp::Ne => {
                        let ok = if l.is_nullable() && r.is_nullable() {
                            self.table.related(&l, &r)
                        } else {
                            l == r && l.is_primitive()
                        };
                        ok.then_some(Bool)
                    }
                };
                if out.is_none() {
                    self.error(span, format!("operator `{}` cannot be applied to {l} and {r}", op.symbol()));
                }
                out
            }
            ExprKind::Cast { class, expr } => {
                if self.table.id(class).is_none() {
                    let c = class.clone();
                    self.error(span, format!("unknown class `{c}`"));
                    return None;
                }
                let target = StaticType::Class(class.clone());
                let t = self.expr(expr)?;
                if !t.is_nullable() || !self.table.related(&t, &target) {
                    self.error(span, format!("cannot cast {t} to {target}"));
                    return None;
                }
                Some(target)
            }
            ExprKind::CheckForNull { expr, class, .. } => {
                let target = StaticType::Class(class.clone());
                let t = self.expr(expr)?;
                if !self.assignable(&t, &target) {
                    self.error(span, format!("checkForNull on {t} declared as {target}"));
                }
                Some(target)
            }
            ExprKind::PoolEvent { expr, .. } => self.expr(expr),
        }
    }
}

/// The variable a receiver expression reads, if it is a plain variable.
pub fn receiver_var(e: &Expr) -> Option<VarRef> {
    match &e.kind {
        ExprKind::Name { name, res } => match res.as_ref()? {
            NameRes::Local => Some(VarRef::local(name.clone())),
            NameRes::Param => Some(VarRef::param(name.clone())),
            NameRes::Field => Some(VarRef::field(name.clone())),
            NameRes::Static(c) => Some(VarRef::static_field(c.clone(), name.clone())),
            NameRes::Class => None,
        },
        ExprKind::Field { target, field, .. } => match &target.kind {
            ExprKind::This => Some(VarRef::field(field.clone())),
            ExprKind::Name {
                name,
                res: Some(NameRes::Class),
            } => Some(VarRef::static_field(name.clone(), field.clone())),
            _ => None,
        },
        _ => None,
    }
}

impl VarKind {
    pub fn is_field(&self) -> bool {
        matches!(self, VarKind::Field | VarKind::Static { .. })
    }
}
