//! Tree-walking interpreter for MJ. Runs plain programs and metaprograms;
//! the metaprogram intrinsics are dispatched to the hook runtime here.

mod value;

pub use value::{default_value_of, ObjId, Object, Value};

use crate::lang::ast::*;
use crate::lang::typeck::MemberRef;
use crate::lang::{ClassId, SiteId, StaticType, TypedProgram, VarKind, VarRef};
use crate::meta::pool::Pool;
use crate::strategy::{ArgPlan, Const, ConstructionPlan, Decision, Param, Strategy};
use serde::Serialize;
use std::fmt;

pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Maximum number of executed statements.
    pub budget: u64,
    /// Calls nested deeper than this raise `StackOverflow`.
    pub max_call_depth: usize,
    pub trace: bool,
    /// Compare the pool against the live frames at every null check.
    pub audit_pool: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            budget: DEFAULT_BUDGET,
            max_call_depth: 100,
            trace: false,
            audit_pool: false,
        }
    }
}

/// Hook activation for a metaprogram run.
#[derive(Debug, Clone, Default)]
pub enum Hooks {
    #[default]
    Off,
    /// Stop at the first harmful null dereference and record the pool.
    Detect,
    /// Apply one decision every time its site dereferences null.
    Replay(Decision),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ExcKind {
    #[serde(rename = "NPE")]
    Npe,
    ArithmeticError,
    ClassCastError,
    StackOverflow,
}

impl fmt::Display for ExcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExcKind::Npe => "NPE",
            ExcKind::ArithmeticError => "ArithmeticError",
            ExcKind::ClassCastError => "ClassCastError",
            ExcKind::StackOverflow => "StackOverflow",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    AssertFail { line: u32, col: u32 },
    Uncaught { kind: ExcKind, site: Option<SiteId> },
    BudgetExhausted,
    /// Detection run stopped at a harmful null dereference.
    DetectionHalt,
    /// Building the object of a creation strategy raised `kind`.
    ConstructionFailure { kind: ExcKind },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        *self == Verdict::Pass
    }

    /// Site of an uncaught null dereference.
    pub fn npe_site(&self) -> Option<SiteId> {
        match self {
            Verdict::Uncaught {
                kind: ExcKind::Npe,
                site,
            } => *site,
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("Pass"),
            Verdict::AssertFail { line, col } => write!(f, "AssertFail({line}:{col})"),
            Verdict::Uncaught {
                kind,
                site: Some(s),
            } => write!(f, "Uncaught({kind}, site {s})"),
            Verdict::Uncaught { kind, site: None } => write!(f, "Uncaught({kind})"),
            Verdict::BudgetExhausted => f.write_str("BudgetExhausted"),
            Verdict::DetectionHalt => f.write_str("DetectionHalt"),
            Verdict::ConstructionFailure { kind } => write!(f, "ConstructionFailure({kind})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceKind {
    Deref,
    NullDeref,
    Replace,
    Skip,
    ForceReturn,
    Detect,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub step: u64,
    #[serde(rename = "siteId")]
    pub site: SiteId,
    pub event: TraceKind,
}

/// A pool variable as seen by a detection run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservedVar {
    pub var: VarRef,
    pub ty: StaticType,
    pub value: Value,
    /// Class of the referenced object, for non-null class values.
    pub runtime_class: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Detection {
    pub site: SiteId,
    pub vars: Vec<ObservedVar>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecOutcome {
    pub verdict: Verdict,
    pub steps: u64,
    pub trace: Vec<TraceEvent>,
    pub detection: Option<Detection>,
    /// How many times the replayed decision took effect.
    pub hook_fired: u32,
    /// Null checks at which the pool disagreed with the live frames.
    pub pool_mismatches: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error("no test named `{0}`")]
    UnknownTest(String),
}

/// Runs test method `test` on a fresh instance of its class.
pub fn run_test(
    tp: &TypedProgram,
    test: &str,
    hooks: &Hooks,
    cfg: &RunConfig,
) -> Result<ExecOutcome, RunError> {
    let (class, _) = tp
        .find_test(test)
        .ok_or_else(|| RunError::UnknownTest(test.to_string()))?;
    let info = tp.classes.get(class);
    let at = info.methods[test].at;
    let mut it = Interp::new(tp, hooks, cfg);
    let result = it.init_statics().and_then(|()| {
        let this = it.construct(class, Vec::new())?;
        it.invoke(at, this.as_obj(), Vec::new())
    });
    let verdict = match result {
        Ok(_) => Verdict::Pass,
        Err(Abort::Throw { kind, site }) => Verdict::Uncaught { kind, site },
        Err(Abort::Assert(line, col)) => Verdict::AssertFail { line, col },
        Err(Abort::Budget) => Verdict::BudgetExhausted,
        Err(Abort::Halt) => Verdict::DetectionHalt,
        Err(Abort::Construction(kind)) => Verdict::ConstructionFailure { kind },
        Err(Abort::ForceReturn(_)) => unreachable!("forced return escaped its method"),
        Err(Abort::Skip(site)) => Verdict::Uncaught {
            kind: ExcKind::Npe,
            site: Some(site),
        },
    };
    Ok(ExecOutcome {
        verdict,
        steps: it.steps,
        trace: it.trace,
        detection: it.detection,
        hook_fired: it.hook_fired,
        pool_mismatches: it.pool_mismatches,
    })
}

/// Whether a handler of kind `catch` handles `kind`.
pub fn catches(catch: CatchKind, kind: ExcKind) -> bool {
    match catch {
        CatchKind::Npe => kind == ExcKind::Npe,
        CatchKind::Any => kind != ExcKind::StackOverflow,
    }
}

/// Non-local control transfer.
#[derive(Debug)]
enum Abort {
    Throw { kind: ExcKind, site: Option<SiteId> },
    Assert(u32, u32),
    Budget,
    Halt,
    Construction(ExcKind),
    ForceReturn(Value),
    /// Lazy skip requested at a site; caught by the statement's guard.
    Skip(SiteId),
}

type R<T> = Result<T, Abort>;

fn throw<T>(kind: ExcKind, site: Option<SiteId>) -> R<T> {
    Err(Abort::Throw { kind, site })
}

enum Flow {
    Normal,
    Return(Value),
}

struct Frame<'p> {
    this: Option<ObjId>,
    /// Class declaring the running method.
    class: ClassId,
    params: Vec<(&'p str, Value)>,
    scopes: Vec<Vec<(&'p str, Value)>>,
}

struct Interp<'p> {
    tp: &'p TypedProgram,
    hooks: &'p Hooks,
    cfg: &'p RunConfig,
    heap: Vec<Object>,
    /// Static fields by declaring class, in declaration order.
    statics: Vec<Vec<Value>>,
    frames: Vec<Frame<'p>>,
    /// Live handlers with the frame depth that installed them.
    handlers: Vec<(CatchKind, usize)>,
    pool: Option<Pool>,
    steps: u64,
    trace: Vec<TraceEvent>,
    detection: Option<Detection>,
    hook_fired: u32,
    pool_mismatches: u32,
}

impl<'p> Interp<'p> {
    fn new(tp: &'p TypedProgram, hooks: &'p Hooks, cfg: &'p RunConfig) -> Self {
        let statics = tp
            .classes
            .iter()
            .map(|(_, info)| {
                info.own_fields
                    .iter()
                    .filter(|f| f.is_static)
                    .map(|f| default_value_of(&f.ty))
                    .collect()
            })
            .collect();
        Interp {
            tp,
            hooks,
            cfg,
            heap: Vec::new(),
            statics,
            frames: Vec::new(),
            handlers: Vec::new(),
            pool: (!matches!(hooks, Hooks::Off)).then(Pool::new),
            steps: 0,
            trace: Vec::new(),
            detection: None,
            hook_fired: 0,
            pool_mismatches: 0,
        }
    }

    fn init_statics(&mut self) -> R<()> {
        let tp = self.tp;
        for (cid, _) in tp.classes.iter() {
            let Some(decl) = tp.class_decl(cid) else { continue };
            for f in decl.fields().filter(|f| f.is_static) {
                if let Some(init) = &f.init {
                    let v = self.eval(init)?;
                    let slot = self.static_slot(cid, &f.name);
                    self.statics[cid][slot] = v;
                }
            }
        }
        Ok(())
    }

    fn record(&mut self, site: SiteId, event: TraceKind) {
        if self.cfg.trace {
            self.trace.push(TraceEvent {
                step: self.steps,
                site,
                event,
            });
        }
    }

    fn step(&mut self) -> R<()> {
        self.steps += 1;
        if self.steps > self.cfg.budget {
            Err(Abort::Budget)
        } else {
            Ok(())
        }
    }

    fn frame(&self) -> &Frame<'p> {
        self.frames.last().expect("no active frame")
    }

    fn frame_mut(&mut self) -> &mut Frame<'p> {
        self.frames.last_mut().expect("no active frame")
    }

    fn can_catch_npe(&self) -> bool {
        self.handlers
            .iter()
            .any(|(k, _)| catches(*k, ExcKind::Npe))
    }

    fn class_of(&self, o: ObjId) -> ClassId {
        self.heap[o as usize].class
    }

    fn class_id(&self, name: &str) -> ClassId {
        self.tp.classes.id(name).expect("checked class name")
    }

    fn static_slot(&self, owner: ClassId, name: &str) -> usize {
        self.tp
            .classes
            .statics(owner)
            .position(|f| f.name == name)
            .expect("checked static field")
    }

    /// Declaring class and slot of static `name` as seen from `class`.
    fn static_loc(&self, class: ClassId, name: &str) -> (ClassId, usize) {
        let owner = self
            .tp
            .classes
            .static_field(class, name)
            .expect("checked static field")
            .owner;
        (owner, self.static_slot(owner, name))
    }

    fn field_slot(&self, o: ObjId, name: &str) -> usize {
        self.tp
            .classes
            .field_slot(self.class_of(o), name)
            .expect("checked field")
    }

    // ---- variables ----

    fn read_name(&self, name: &str, res: &NameRes) -> Value {
        let frame = self.frame();
        match res {
            NameRes::Local => frame
                .scopes
                .iter()
                .rev()
                .find_map(|s| s.iter().rev().find(|(n, _)| *n == name))
                .map(|(_, v)| v.clone())
                .expect("checked local"),
            NameRes::Param => frame
                .params
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, v)| v.clone())
                .expect("checked parameter"),
            NameRes::Field => {
                let o = frame.this.expect("field access without this");
                self.heap[o as usize].fields[self.field_slot(o, name)].clone()
            }
            NameRes::Static(owner) => {
                let (c, slot) = self.static_loc(self.class_id(owner), name);
                self.statics[c][slot].clone()
            }
            NameRes::Class => unreachable!("class name used as a value"),
        }
    }

    fn write_name(&mut self, name: &str, res: &NameRes, v: Value) {
        match res {
            NameRes::Local | NameRes::Param => self.write_local(name, v),
            NameRes::Field => {
                let o = self.frame().this.expect("field access without this");
                let slot = self.field_slot(o, name);
                self.heap[o as usize].fields[slot] = v;
            }
            NameRes::Static(owner) => {
                let (c, slot) = self.static_loc(self.class_id(owner), name);
                self.statics[c][slot] = v;
            }
            NameRes::Class => unreachable!("assignment to a class name"),
        }
    }

    /// Writes the innermost local named `name`, else the parameter.
    fn write_local(&mut self, name: &str, v: Value) {
        let frame = self.frame_mut();
        for scope in frame.scopes.iter_mut().rev() {
            if let Some(slot) = scope.iter_mut().rev().find(|(n, _)| *n == name) {
                slot.1 = v;
                return;
            }
        }
        let slot = frame
            .params
            .iter_mut()
            .find(|(n, _)| *n == name)
            .expect("checked variable");
        slot.1 = v;
    }

    fn declare(&mut self, name: &'p str, ty: &StaticType, v: Value) {
        if let Some(pool) = &mut self.pool {
            pool.init_var(name, ty, v.clone());
        }
        self.frame_mut()
            .scopes
            .last_mut()
            .expect("declaration outside a block")
            .push((name, v));
    }

    /// Reads a field or static variable of the current frame.
    fn read_var(&self, var: &VarRef) -> Option<Value> {
        match &var.kind {
            VarKind::Field => {
                let o = self.frames.last()?.this?;
                let slot = self.tp.classes.field_slot(self.class_of(o), &var.name)?;
                Some(self.heap[o as usize].fields[slot].clone())
            }
            VarKind::Static { class } => {
                let cid = self.tp.classes.id(class)?;
                let f = self.tp.classes.static_field(cid, &var.name)?;
                let slot = self.static_slot(f.owner, &var.name);
                Some(self.statics[f.owner][slot].clone())
            }
            _ => None,
        }
    }

    /// Accessible variables computed directly from the live frame; the
    /// reference the pool is audited against.
    fn live_vars(&self) -> Vec<(VarRef, Value)> {
        let frame = self.frame();
        let mut out = Vec::new();
        let mut bound: Vec<&str> = Vec::new();
        for scope in frame.scopes.iter().rev() {
            for (n, v) in scope {
                out.push((VarRef::local(*n), v.clone()));
                bound.push(n);
            }
        }
        for (n, v) in &frame.params {
            out.push((VarRef::param(*n), v.clone()));
            bound.push(n);
        }
        if let Some(o) = frame.this {
            let mut cur = Some(frame.class);
            while let Some(c) = cur {
                let info = self.tp.classes.get(c);
                for f in info.own_fields.iter().filter(|f| !f.is_static) {
                    if !bound.contains(&f.name.as_str()) {
                        let slot = self.field_slot(o, &f.name);
                        out.push((
                            VarRef::field(f.name.clone()),
                            self.heap[o as usize].fields[slot].clone(),
                        ));
                    }
                }
                cur = info.superclass;
            }
        }
        for (cid, info) in self.tp.classes.iter() {
            for (slot, f) in info.own_fields.iter().filter(|f| f.is_static).enumerate() {
                out.push((
                    VarRef::static_field(info.name.clone(), f.name.clone()),
                    self.statics[cid][slot].clone(),
                ));
            }
        }
        out
    }

    fn observe(&self) -> Vec<ObservedVar> {
        let Some(pool) = &self.pool else {
            return Vec::new();
        };
        pool.snapshot(&|v| self.read_var(v))
            .into_iter()
            .map(|p| {
                let runtime_class = p
                    .value
                    .as_obj()
                    .map(|o| self.tp.classes.get(self.class_of(o)).name.clone());
                ObservedVar {
                    var: p.var,
                    ty: p.ty,
                    value: p.value,
                    runtime_class,
                }
            })
            .collect()
    }

    // ---- calls and objects ----

    fn invoke(&mut self, at: MemberRef, this: Option<ObjId>, args: Vec<Value>) -> R<Value> {
        if self.frames.len() >= self.cfg.max_call_depth {
            return throw(ExcKind::StackOverflow, None);
        }
        let tp = self.tp;
        let (params, body, ret) = match tp.member(at) {
            Member::Method(m) => (&m.params, &m.body, &m.ret),
            Member::Ctor(k) => (&k.params, &k.body, &StaticType::Void),
            Member::Field(_) => unreachable!("invoking a field"),
        };
        self.frames.push(Frame {
            this,
            class: at.class,
            params: params
                .iter()
                .map(|p| p.name.as_str())
                .zip(args)
                .collect(),
            scopes: Vec::new(),
        });
        if let Some(pool) = &mut self.pool {
            pool.push_frame();
        }
        let r = self.exec_block(body);
        self.frames.pop();
        if let Some(pool) = &mut self.pool {
            pool.pop_frame();
        }
        match r {
            Ok(Flow::Return(v)) | Err(Abort::ForceReturn(v)) => Ok(v),
            Ok(Flow::Normal) if *ret == StaticType::Void => Ok(Value::Null),
            Ok(Flow::Normal) => Ok(default_value_of(ret)),
            Err(e) => Err(e),
        }
    }

    fn construct(&mut self, cid: ClassId, args: Vec<Value>) -> R<Value> {
        let tp = self.tp;
        let info = tp.classes.get(cid);
        let fields = info.layout.iter().map(|f| default_value_of(&f.ty)).collect();
        let id = self.heap.len() as ObjId;
        self.heap.push(Object { class: cid, fields });
        let mut chain = Vec::new();
        let mut cur = Some(cid);
        while let Some(c) = cur {
            chain.push(c);
            cur = tp.classes.get(c).superclass;
        }
        for &c in chain.iter().rev() {
            let Some(decl) = tp.class_decl(c) else { continue };
            for f in decl.fields().filter(|f| !f.is_static) {
                if let Some(init) = &f.init {
                    let v = self.eval(init)?;
                    let slot = self.field_slot(id, &f.name);
                    self.heap[id as usize].fields[slot] = v;
                }
            }
        }
        let sig = tp
            .classes
            .ctor(cid, args.len())
            .expect("checked constructor arity");
        if let Some(member) = sig.member {
            self.invoke(MemberRef { class: cid, member }, Some(id), args)?;
        }
        Ok(Value::Obj(id))
    }

    /// Executes a construction plan; exceptions become construction failures.
    fn build(&mut self, plan: &ConstructionPlan) -> R<Value> {
        let mut args = Vec::with_capacity(plan.args.len());
        for a in &plan.args {
            args.push(match a {
                ArgPlan::Default(t) => default_value_of(t),
                ArgPlan::Null => Value::Null,
                ArgPlan::New(p) => self.build(p)?,
            });
        }
        let cid = self.class_id(&plan.class);
        match self.construct(cid, args) {
            Err(Abort::Throw { kind, .. }) => Err(Abort::Construction(kind)),
            r => r,
        }
    }

    // ---- statements ----

    fn exec_block(&mut self, b: &'p Block) -> R<Flow> {
        self.frame_mut().scopes.push(Vec::new());
        if let Some(pool) = &mut self.pool {
            pool.push_scope();
        }
        let mut r = Ok(Flow::Normal);
        for s in &b.stmts {
            r = self.exec(s);
            if !matches!(r, Ok(Flow::Normal)) {
                break;
            }
        }
        self.frame_mut().scopes.pop();
        if let Some(pool) = &mut self.pool {
            pool.pop_scope();
        }
        r
    }

    fn exec(&mut self, s: &'p Stmt) -> R<Flow> {
        match &s.kind {
            StmtKind::Block(b) => self.exec_block(b),
            StmtKind::VarDecl { ty, name, init } => {
                self.step()?;
                let v = match init {
                    Some(e) => self.eval(e)?,
                    None => default_value_of(ty),
                };
                self.declare(name, ty, v);
                Ok(Flow::Normal)
            }
            StmtKind::Assign { target, value } => {
                self.step()?;
                match &target.kind {
                    ExprKind::Name { name, res } => {
                        let v = self.eval(value)?;
                        let res = res.as_ref().expect("resolved name");
                        if let (Some(pool), NameRes::Local | NameRes::Param) = (&mut self.pool, res) {
                            pool.modify_var(name, v.clone());
                        }
                        self.write_name(name, res, v);
                    }
                    ExprKind::Field {
                        target: t,
                        field,
                        site,
                    } => {
                        if let Some(cid) = class_ref(t) {
                            let v = self.eval(value)?;
                            let (c, slot) = self.static_loc(self.class_id(cid), field);
                            self.statics[c][slot] = v;
                        } else {
                            let recv = self.receiver(t, *site)?;
                            let v = self.eval(value)?;
                            let o = recv.as_obj().expect("object receiver");
                            let slot = self.field_slot(o, field);
                            self.heap[o as usize].fields[slot] = v;
                        }
                    }
                    _ => unreachable!("checked assignment target"),
                }
                Ok(Flow::Normal)
            }
            StmtKind::If {
                cond,
                then_block,
                else_branch,
            } => {
                self.step()?;
                if self.eval(cond)?.as_bool() {
                    self.exec_block(then_block)
                } else if let Some(e) = else_branch {
                    self.exec(e)
                } else {
                    Ok(Flow::Normal)
                }
            }
            StmtKind::While { cond, body } => loop {
                self.step()?;
                if !self.eval(cond)?.as_bool() {
                    return Ok(Flow::Normal);
                }
                if let Flow::Return(v) = self.exec_block(body)? {
                    return Ok(Flow::Return(v));
                }
            },
            StmtKind::Return(e) => {
                self.step()?;
                let v = match e {
                    Some(e) => self.eval(e)?,
                    None => Value::Null,
                };
                Ok(Flow::Return(v))
            }
            StmtKind::Try {
                body,
                catch,
                handler,
                ..
            } => {
                self.step()?;
                self.handlers.push((*catch, self.frames.len()));
                let r = self.exec_block(body);
                self.handlers.pop();
                match r {
                    Err(Abort::Throw { kind, .. }) if catches(*catch, kind) => {
                        self.exec_block(handler)
                    }
                    r => r,
                }
            }
            StmtKind::Assert(e) => {
                self.step()?;
                if self.eval(e)?.as_bool() {
                    Ok(Flow::Normal)
                } else {
                    Err(Abort::Assert(s.span.line, s.span.col))
                }
            }
            StmtKind::Expr(e) => {
                self.step()?;
                self.eval(e)?;
                Ok(Flow::Normal)
            }
            StmtKind::SkipGuard { receivers, body } => self.guard(receivers, body),
            StmtKind::Collect { kind, name, ty } => {
                let v = match kind {
                    CollectKind::Param if self.pool.is_some() => Some(self.read_name(name, &NameRes::Param)),
                    _ => None,
                };
                if let Some(pool) = self.pool.as_mut() {
                    match kind {
                        CollectKind::Param => pool.collect_param(name, ty, v.unwrap()),
                        CollectKind::Field => pool.collect_field(name, ty),
                        CollectKind::Static => {
                            let (c, f) = name.split_once('.').expect("qualified static");
                            pool.collect_static(c, f, ty);
                        }
                    }
                }
                Ok(Flow::Normal)
            }
            StmtKind::ForceReturnScope { body, .. } => match self.exec_block(body) {
                Err(Abort::ForceReturn(v)) => Ok(Flow::Return(v)),
                r => r,
            },
        }
    }

    // ---- hooks ----

    fn replay(&self) -> Option<&'p Decision> {
        match self.hooks {
            Hooks::Replay(d) => Some(d),
            _ => None,
        }
    }

    fn guard(&mut self, receivers: &'p [GuardReceiver], body: &'p Stmt) -> R<Flow> {
        if let Some(d) = self.replay() {
            if d.strategy == Strategy::S3 || d.strategy.is_method_skip() {
                let path = receivers
                    .iter()
                    .find(|r| r.site == d.site)
                    .and_then(|r| r.path.as_ref());
                if let Some(p) = path {
                    if self.eval_path(p) == Some(Value::Null) && !self.can_catch_npe() {
                        self.hook_fired += 1;
                        if d.strategy == Strategy::S3 {
                            self.record(d.site, TraceKind::Skip);
                            return self.skip(body);
                        }
                        self.record(d.site, TraceKind::ForceReturn);
                        return Err(Abort::ForceReturn(self.payload(d)?));
                    }
                }
            }
        }
        match self.exec(body) {
            Err(Abort::Skip(site)) if receivers.iter().any(|r| r.site == site) => self.skip(body),
            r => r,
        }
    }

    /// Skipping a declaration still binds the variable, to its default.
    fn skip(&mut self, body: &'p Stmt) -> R<Flow> {
        if let StmtKind::VarDecl { ty, name, .. } = &body.kind {
            self.declare(name, ty, default_value_of(ty));
        }
        Ok(Flow::Normal)
    }

    /// Evaluates a side-effect-free access path; `None` when an
    /// intermediate receiver is null.
    fn eval_path(&self, e: &Expr) -> Option<Value> {
        match &e.kind {
            ExprKind::This => self.frame().this.map(Value::Obj),
            ExprKind::Name { name, res } => Some(self.read_name(name, res.as_ref()?)),
            ExprKind::Field { target, field, .. } => {
                if let Some(c) = class_ref(target) {
                    let (c, slot) = self.static_loc(self.class_id(c), field);
                    return Some(self.statics[c][slot].clone());
                }
                let o = self.eval_path(target)?.as_obj()?;
                Some(self.heap[o as usize].fields[self.field_slot(o, field)].clone())
            }
            _ => None,
        }
    }

    fn param_value(&mut self, param: &Param) -> Value {
        match param {
            Param::Var { var, .. } => {
                let pool = self.pool.as_ref().expect("hooks active");
                pool.lookup(var, &|v| self.read_var(v)).unwrap_or(Value::Null)
            }
            Param::Const(Const::Null) => Value::Null,
            Param::Const(Const::Int(v)) => Value::Int(*v),
            Param::Const(Const::Str(s)) => Value::Str(s.clone()),
            Param::None | Param::Ctor(_) => Value::Null,
        }
    }

    fn payload(&mut self, d: &Decision) -> R<Value> {
        match (&d.strategy, &d.param) {
            (Strategy::S4b, Param::Ctor(plan)) => self.build(plan),
            (Strategy::S4c, p) => Ok(self.param_value(p)),
            _ => Ok(Value::Null),
        }
    }

    fn check_for_null(
        &mut self,
        expr: &'p Expr,
        class: &str,
        site: SiteId,
        writeback: Option<&str>,
    ) -> R<Value> {
        let v = self.eval(expr)?;
        if !v.is_null() {
            return Ok(v);
        }
        if let (Some(pool), true) = (&self.pool, self.cfg.audit_pool) {
            let pooled: Vec<(VarRef, Value)> = pool
                .snapshot(&|v| self.read_var(v))
                .into_iter()
                .map(|p| (p.var, p.value))
                .collect();
            if pooled != self.live_vars() {
                self.pool_mismatches += 1;
            }
        }
        if self.can_catch_npe() {
            return Ok(v);
        }
        match self.hooks {
            Hooks::Off => Ok(v),
            Hooks::Detect => {
                self.record(site, TraceKind::Detect);
                self.detection = Some(Detection {
                    site,
                    vars: self.observe(),
                });
                Err(Abort::Halt)
            }
            Hooks::Replay(d) if d.site == site => {
                self.hook_fired += 1;
                let r = match d.strategy {
                    Strategy::S1a | Strategy::S1b => self.param_value(&d.param),
                    Strategy::S2a | Strategy::S2b => match &d.param {
                        Param::Ctor(plan) => self.build(plan)?,
                        _ => Value::Null,
                    },
                    Strategy::S3 => {
                        self.record(site, TraceKind::Skip);
                        return Err(Abort::Skip(site));
                    }
                    _ => {
                        self.record(site, TraceKind::ForceReturn);
                        return Err(Abort::ForceReturn(self.payload(d)?));
                    }
                };
                self.record(site, TraceKind::Replace);
                if let Value::Obj(o) = r {
                    let want = self.class_id(class);
                    if !self.tp.classes.is_subclass(self.class_of(o), want) {
                        return throw(ExcKind::ClassCastError, None);
                    }
                }
                if d.strategy.is_global() {
                    if let Some(name) = writeback {
                        if let Some(pool) = &mut self.pool {
                            pool.modify_var(name, r.clone());
                        }
                        self.write_local(name, r.clone());
                    }
                }
                Ok(r)
            }
            Hooks::Replay(_) => Ok(v),
        }
    }

    // ---- expressions ----

    /// Evaluates a receiver and raises the NPE of `site` on null.
    fn receiver(&mut self, target: &'p Expr, site: Option<SiteId>) -> R<Value> {
        let v = self.eval(target)?;
        if let Some(s) = site {
            self.record(s, TraceKind::Deref);
            if v.is_null() {
                self.record(s, TraceKind::NullDeref);
            }
        }
        if v.is_null() {
            return throw(ExcKind::Npe, site);
        }
        Ok(v)
    }

    fn eval_args(&mut self, args: &'p [Expr]) -> R<Vec<Value>> {
        args.iter().map(|a| self.eval(a)).collect()
    }

    fn eval(&mut self, e: &'p Expr) -> R<Value> {
        match &e.kind {
            ExprKind::Int(v) => Ok(Value::Int(*v)),
            ExprKind::Bool(b) => Ok(Value::Bool(*b)),
            ExprKind::Str(s) => Ok(Value::Str(s.clone())),
            ExprKind::Null => Ok(Value::Null),
            ExprKind::This => Ok(Value::Obj(self.frame().this.expect("this in instance context"))),
            ExprKind::Name { name, res } => Ok(self.read_name(name, res.as_ref().expect("resolved name"))),
            ExprKind::Field {
                target,
                field,
                site,
            } => {
                if let Some(c) = class_ref(target) {
                    let (c, slot) = self.static_loc(self.class_id(c), field);
                    return Ok(self.statics[c][slot].clone());
                }
                let o = self.receiver(target, *site)?.as_obj().expect("object receiver");
                let slot = self.field_slot(o, field);
                Ok(self.heap[o as usize].fields[slot].clone())
            }
            ExprKind::Call {
                target,
                method,
                args,
                site,
            } => {
                let tp = self.tp;
                match target {
                    None => {
                        let frame = self.frame();
                        let info = tp.classes.method(frame.class, method).expect("checked method");
                        if info.kind == MethodKind::Static {
                            let at = info.at;
                            let args = self.eval_args(args)?;
                            self.invoke(at, None, args)
                        } else {
                            let this = frame.this.expect("instance call without this");
                            let at = tp.classes.method(self.class_of(this), method).unwrap().at;
                            let args = self.eval_args(args)?;
                            self.invoke(at, Some(this), args)
                        }
                    }
                    Some(t) => {
                        if let Some(c) = class_ref(t) {
                            let at = tp.classes.method(self.class_id(c), method).unwrap().at;
                            let args = self.eval_args(args)?;
                            return self.invoke(at, None, args);
                        }
                        let o = self.receiver(t, *site)?.as_obj().expect("object receiver");
                        let args = self.eval_args(args)?;
                        let at = tp.classes.method(self.class_of(o), method).unwrap().at;
                        self.invoke(at, Some(o), args)
                    }
                }
            }
            ExprKind::New { class, args } => {
                let args = self.eval_args(args)?;
                let cid = self.class_id(class);
                self.construct(cid, args)
            }
            ExprKind::Unary { op, expr } => {
                let v = self.eval(expr)?;
                Ok(match (op, v) {
                    (UnaryOp::Not, Value::Bool(b)) => Value::Bool(!b),
                    (UnaryOp::Neg, Value::Int(i)) => Value::Int(i.wrapping_neg()),
                    _ => unreachable!("checked unary operand"),
                })
            }
            ExprKind::Binary { op, lhs, rhs } => self.binary(*op, lhs, rhs),
            ExprKind::Cast { class, expr } => {
                let v = self.eval(expr)?;
                if let Value::Obj(o) = v {
                    if !self.tp.classes.is_subclass(self.class_of(o), self.class_id(class)) {
                        return throw(ExcKind::ClassCastError, None);
                    }
                }
                Ok(v)
            }
            ExprKind::CheckForNull {
                expr,
                class,
                site,
                writeback,
            } => self.check_for_null(expr, class, *site, writeback.as_deref()),
            ExprKind::PoolEvent { expr, .. } => self.eval(expr),
        }
    }

    fn binary(&mut self, op: BinaryOp, lhs: &'p Expr, rhs: &'p Expr) -> R<Value> {
        let l = self.eval(lhs)?;
        match (op, &l) {
            (BinaryOp::And, Value::Bool(false)) => return Ok(l),
            (BinaryOp::Or, Value::Bool(true)) => return Ok(l),
            _ => {}
        }
        let r = self.eval(rhs)?;
        use Value::*;
        Ok(match (op, l, r) {
            (BinaryOp::And | BinaryOp::Or, _, r) => r,
            (BinaryOp::Eq, l, r) => Bool(l == r),
            (BinaryOp::Ne, l, r) => Bool(l != r),
            (BinaryOp::Add, Int(a), Int(b)) => Int(a.wrapping_add(b)),
            (BinaryOp::Add, a, b) => Str(format!("{}{}", concat_part(&a), concat_part(&b))),
            (BinaryOp::Sub, Int(a), Int(b)) => Int(a.wrapping_sub(b)),
            (BinaryOp::Mul, Int(a), Int(b)) => Int(a.wrapping_mul(b)),
            (BinaryOp::Div | BinaryOp::Rem, Int(_), Int(0)) => {
                return throw(ExcKind::ArithmeticError, None)
            }
            (BinaryOp::Div, Int(a), Int(b)) => Int(a.wrapping_div(b)),
            (BinaryOp::Rem, Int(a), Int(b)) => Int(a.wrapping_rem(b)),
            (BinaryOp::Lt, Int(a), Int(b)) => Bool(a < b),
            (BinaryOp::Le, Int(a), Int(b)) => Bool(a <= b),
            (BinaryOp::Gt, Int(a), Int(b)) => Bool(a > b),
            (BinaryOp::Ge, Int(a), Int(b)) => Bool(a >= b),
            _ => unreachable!("checked binary operands"),
        })
    }
}

fn concat_part(v: &Value) -> String {
    match v {
        Value::Str(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Class name of a `C.member` qualifier.
fn class_ref(e: &Expr) -> Option<&str> {
    match &e.kind {
        ExprKind::Name {
            name,
            res: Some(NameRes::Class),
        } => Some(name),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::compile;

    fn run(src: &str) -> ExecOutcome {
        let tp = compile("t.mj", src).unwrap();
        run_test(&tp, "t", &Hooks::Off, &RunConfig::default()).unwrap()
    }

    fn verdict(body: &str) -> Verdict {
        run(&format!(
            "class A {{ int v; A n; int get() {{ return v; }} }}
             class T {{ test void t() {{ {body} }} }}"
        ))
        .verdict
    }

    #[test]
    fn trivial_pass() {
        assert_eq!(verdict("assert(1 + 1 == 2);"), Verdict::Pass);
    }

    #[test]
    fn null_call_reports_site() {
        assert_eq!(
            verdict("A a = null; a.get();"),
            Verdict::Uncaught {
                kind: ExcKind::Npe,
                site: Some(0)
            }
        );
    }

    #[test]
    fn infinite_loop_exhausts_budget() {
        assert_eq!(verdict("while (true) { }"), Verdict::BudgetExhausted);
    }

    #[test]
    fn assert_failure_position() {
        assert!(matches!(verdict("assert(false);"), Verdict::AssertFail { .. }));
    }

    #[test]
    fn default_values() {
        assert_eq!(default_value_of(&StaticType::Int), Value::Int(0));
        assert_eq!(default_value_of(&StaticType::Bool), Value::Bool(false));
        assert_eq!(default_value_of(&StaticType::Str), Value::Str(String::new()));
        assert_eq!(default_value_of(&StaticType::class("A")), Value::Null);
    }

    #[test]
    #[should_panic]
    fn void_has_no_default() {
        default_value_of(&StaticType::Void);
    }

    #[test]
    fn handlers_catch_npe() {
        assert_eq!(verdict("A a = null; try { a.get(); } catch (NPE e) { }"), Verdict::Pass);
        assert_eq!(
            verdict("int x = 0; try { x = 1 / x; } catch (NPE) { }"),
            Verdict::Uncaught {
                kind: ExcKind::ArithmeticError,
                site: None
            }
        );
        assert_eq!(verdict("int x = 0; try { x = 1 / x; } catch (Any) { }"), Verdict::Pass);
    }

    #[test]
    fn semantics() {
        assert_eq!(
            verdict(
                r#"A a = new A(); a.v = 4; A b = a; b.v = b.v * 10 + 2;
                   assert(a.get() == 42 && a == b && a != new A());
                   str s = "x" + 1 + true; assert(s == "x1true");
                   assert(-7 / 2 == -3 && -7 % 2 == -1 && !(3 < 2) && 2 <= 2);
                   int i = 0; while (i < 10) { i = i + 1; } assert(i == 10);
                   assert(a.n == null);"#
            ),
            Verdict::Pass
        );
    }

    #[test]
    fn inheritance_dispatch_and_init_order() {
        let src = "class A { int x = 1; A() { x = x + 10; } int f() { return 1; } }
                   class B extends A { int y = 5; B() { y = y + x; } int f() { return 2; } }
                   class T { static int s = 7; test void t() {
                       A a = new B(); assert(a.f() == 2 && a.x == 1 && s == 7);
                       B b = (B) a; assert(b.y == 6);
                       A c = new A(); assert(c.x == 11);
                       B bad = (B) c; } }";
        assert_eq!(
            run(src).verdict,
            Verdict::Uncaught {
                kind: ExcKind::ClassCastError,
                site: None
            }
        );
    }

    #[test]
    fn deep_recursion_overflows() {
        let src = "class T { int f(int n) { return f(n + 1); } test void t() { f(0); } }";
        assert_eq!(
            run(src).verdict,
            Verdict::Uncaught {
                kind: ExcKind::StackOverflow,
                site: None
            }
        );
    }

    #[test]
    fn nested_frame_handler_is_live() {
        let src = "class A { void m() { } }
                   class T { A a; void inner() { a.m(); }
                     test void t() { try { inner(); } catch (Any) { } } }";
        assert_eq!(run(src).verdict, Verdict::Pass);
    }

    #[test]
    fn deterministic_steps() {
        let src = "class T { test void t() { int i = 0; while (i < 100) { i = i + 1; } } }";
        let a = run(src);
        assert_eq!(a, run(src));
        assert_eq!(a.steps, 1 + 101 + 100);
    }
}
