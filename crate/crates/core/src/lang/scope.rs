//! Static repair context: variables in scope at a dereference site and the
//! constructors available for a type.

use super::ast::{Expr, ExprKind, NameRes};
use super::typeck::{CtorSig, DerefSite, TypedProgram};
use super::types::StaticType;
use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VarKind {
    Local,
    Param,
    Field,
    Static { class: String },
}

/// A variable as it can be named from source at a given program point.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct VarRef {
    pub name: String,
    pub kind: VarKind,
}

impl VarRef {
    pub fn local(name: impl Into<String>) -> Self {
        VarRef {
            name: name.into(),
            kind: VarKind::Local,
        }
    }

    pub fn param(name: impl Into<String>) -> Self {
        VarRef {
            name: name.into(),
            kind: VarKind::Param,
        }
    }

    pub fn field(name: impl Into<String>) -> Self {
        VarRef {
            name: name.into(),
            kind: VarKind::Field,
        }
    }

    pub fn static_field(class: impl Into<String>, name: impl Into<String>) -> Self {
        VarRef {
            name: name.into(),
            kind: VarKind::Static {
                class: class.into(),
            },
        }
    }

    /// Locals and parameters can be reassigned by a global strategy.
    pub fn is_assignable_local(&self) -> bool {
        matches!(self.kind, VarKind::Local | VarKind::Param)
    }

    /// Source expression that reads this variable without ambiguity:
    /// fields are qualified with `this`, statics with their class.
    pub fn to_expr(&self) -> Expr {
        match &self.kind {
            VarKind::Local | VarKind::Param => Expr::synthetic(ExprKind::Name {
                name: self.name.clone(),
                res: Some(if self.kind == VarKind::Local {
                    NameRes::Local
                } else {
                    NameRes::Param
                }),
            }),
            VarKind::Field => Expr::synthetic(ExprKind::Field {
                target: Box::new(Expr::synthetic(ExprKind::This)),
                field: self.name.clone(),
                site: None,
            }),
            VarKind::Static { class } => Expr::synthetic(ExprKind::Field {
                target: Box::new(Expr::synthetic(ExprKind::Name {
                    name: class.clone(),
                    res: Some(NameRes::Class),
                })),
                field: self.name.clone(),
                site: None,
            }),
        }
    }
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            VarKind::Local | VarKind::Param => f.write_str(&self.name),
            VarKind::Field => write!(f, "this.{}", self.name),
            VarKind::Static { class } => write!(f, "{}.{}", class, self.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VarCandidate {
    pub var: VarRef,
    pub ty: StaticType,
}

impl TypedProgram {
    /// Variables accessible at `site`: locals (innermost scope first, then
    /// declaration order), parameters, instance fields of the enclosing
    /// class and its superclasses, then static fields of every class.
    /// The receiver variable itself and shadowed fields are excluded.
    pub fn accessible_vars(&self, site: &DerefSite) -> Vec<VarCandidate> {
        site.scope.clone()
    }

    /// Constructors of `t` and of every subclass of `t`, in class
    /// declaration order and then by arity.
    pub fn constructors_of(&self, t: &StaticType) -> Vec<CtorSig> {
        let Some(name) = t.class_name() else {
            return Vec::new();
        };
        let Some(target) = self.classes.id(name) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for (id, info) in self.classes.iter() {
            if self.classes.is_subclass(id, target) {
                let mut ctors = info.ctors.clone();
                ctors.sort_by_key(|c| c.params.len());
                out.extend(ctors);
            }
        }
        out
    }

    pub fn subtype_of(&self, a: &StaticType, b: &StaticType) -> bool {
        self.classes.subtype_of(a, b)
    }
}
