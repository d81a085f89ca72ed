//! The variable pool: per-activation registry of the variables a repair
//! may reuse, fed by the metaprogram's pool events.

use crate::interp::Value;
use crate::lang::{StaticType, VarKind, VarRef};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolVar {
    pub var: VarRef,
    pub ty: StaticType,
    pub value: Value,
}

#[derive(Debug, Clone)]
struct Slot {
    name: String,
    ty: StaticType,
    value: Value,
}

#[derive(Debug, Clone, Default)]
struct Frame {
    params: Vec<Slot>,
    scopes: Vec<Vec<Slot>>,
    /// Registered instance fields; values are read through at snapshot time.
    fields: Vec<(String, StaticType)>,
    statics: Vec<(String, String, StaticType)>,
}

/// Stack of pool frames, one per active method or constructor.
#[derive(Debug, Clone, Default)]
pub struct Pool {
    frames: Vec<Frame>,
}

impl Pool {
    pub fn new() -> Self {
        Pool::default()
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    pub fn push_frame(&mut self) {
        self.frames.push(Frame::default());
    }

    pub fn pop_frame(&mut self) {
        self.frames.pop();
    }

    fn top(&mut self) -> &mut Frame {
        self.frames.last_mut().expect("pool event outside a frame")
    }

    pub fn push_scope(&mut self) {
        if let Some(f) = self.frames.last_mut() {
            f.scopes.push(Vec::new());
        }
    }

    pub fn pop_scope(&mut self) {
        if let Some(f) = self.frames.last_mut() {
            f.scopes.pop();
        }
    }

    pub fn collect_param(&mut self, name: &str, ty: &StaticType, value: Value) {
        self.top().params.push(Slot {
            name: name.to_string(),
            ty: ty.clone(),
            value,
        });
    }

    pub fn collect_field(&mut self, name: &str, ty: &StaticType) {
        self.top().fields.push((name.to_string(), ty.clone()));
    }

    pub fn collect_static(&mut self, class: &str, name: &str, ty: &StaticType) {
        self.top()
            .statics
            .push((class.to_string(), name.to_string(), ty.clone()));
    }

    pub fn init_var(&mut self, name: &str, ty: &StaticType, value: Value) {
        let frame = self.top();
        if frame.scopes.is_empty() {
            frame.scopes.push(Vec::new());
        }
        frame.scopes.last_mut().unwrap().push(Slot {
            name: name.to_string(),
            ty: ty.clone(),
            value,
        });
    }

    /// Updates the innermost binding of a local or parameter.
    pub fn modify_var(&mut self, name: &str, value: Value) {
        let frame = self.top();
        for scope in frame.scopes.iter_mut().rev() {
            if let Some(s) = scope.iter_mut().rev().find(|s| s.name == name) {
                s.value = value;
                return;
            }
        }
        if let Some(s) = frame.params.iter_mut().find(|s| s.name == name) {
            s.value = value;
        }
    }

    /// Current value of `var` in the top frame; `read` resolves fields
    /// and statics against the heap.
    pub fn lookup(&self, var: &VarRef, read: &dyn Fn(&VarRef) -> Option<Value>) -> Option<Value> {
        let frame = self.frames.last()?;
        match &var.kind {
            VarKind::Local => frame
                .scopes
                .iter()
                .rev()
                .find_map(|sc| sc.iter().rev().find(|s| s.name == var.name))
                .map(|s| s.value.clone()),
            VarKind::Param => frame
                .params
                .iter()
                .find(|s| s.name == var.name)
                .map(|s| s.value.clone()),
            VarKind::Field | VarKind::Static { .. } => read(var),
        }
    }

    /// Variables visible in the top frame: locals innermost scope first,
    /// parameters, unshadowed fields, statics.
    pub fn snapshot(&self, read: &dyn Fn(&VarRef) -> Option<Value>) -> Vec<PoolVar> {
        let Some(frame) = self.frames.last() else {
            return Vec::new();
        };
        let mut out = Vec::new();
        let mut bound: Vec<&str> = Vec::new();
        for scope in frame.scopes.iter().rev() {
            for s in scope {
                out.push(PoolVar {
                    var: VarRef::local(s.name.clone()),
                    ty: s.ty.clone(),
                    value: s.value.clone(),
                });
                bound.push(&s.name);
            }
        }
        for s in &frame.params {
            out.push(PoolVar {
                var: VarRef::param(s.name.clone()),
                ty: s.ty.clone(),
                value: s.value.clone(),
            });
            bound.push(&s.name);
        }
        for (name, ty) in &frame.fields {
            if bound.contains(&name.as_str()) {
                continue;
            }
            let var = VarRef::field(name.clone());
            if let Some(value) = read(&var) {
                out.push(PoolVar {
                    var,
                    ty: ty.clone(),
                    value,
                });
            }
        }
        for (class, name, ty) in &frame.statics {
            let var = VarRef::static_field(class.clone(), name.clone());
            if let Some(value) = read(&var) {
                out.push(PoolVar {
                    var,
                    ty: ty.clone(),
                    value,
                });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_fields(_: &VarRef) -> Option<Value> {
        None
    }

    #[test]
    fn init_then_modify() {
        let mut p = Pool::new();
        p.push_frame();
        p.push_scope();
        p.init_var("a", &StaticType::class("A"), Value::Null);
        p.modify_var("a", Value::Obj(2));
        assert_eq!(p.lookup(&VarRef::local("a"), &no_fields), Some(Value::Obj(2)));
    }

    #[test]
    fn inner_frame_invisible_after_return() {
        let mut p = Pool::new();
        p.push_frame();
        p.collect_param("x", &StaticType::Int, Value::Int(1));
        p.push_frame();
        p.collect_param("y", &StaticType::Int, Value::Int(2));
        assert_eq!(p.snapshot(&no_fields).len(), 1);
        p.pop_frame();
        let snap = p.snapshot(&no_fields);
        assert_eq!(snap[0].var, VarRef::param("x"));
        assert_eq!(p.lookup(&VarRef::param("y"), &no_fields), None);
    }

    #[test]
    fn scopes_and_shadowing() {
        let mut p = Pool::new();
        p.push_frame();
        p.collect_field("f", &StaticType::Int);
        p.push_scope();
        p.init_var("a", &StaticType::Int, Value::Int(1));
        p.push_scope();
        p.init_var("f", &StaticType::Int, Value::Int(2));
        p.init_var("b", &StaticType::Int, Value::Int(3));
        let read = |v: &VarRef| (v.kind == VarKind::Field).then_some(Value::Int(9));
        let names: Vec<String> = p.snapshot(&read).iter().map(|v| v.var.to_string()).collect();
        assert_eq!(names, ["f", "b", "a"]);
        p.pop_scope();
        let names: Vec<String> = p.snapshot(&read).iter().map(|v| v.var.to_string()).collect();
        assert_eq!(names, ["a", "this.f"]);
    }
}
