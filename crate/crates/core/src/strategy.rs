//! The nine repair strategies, decisions and construction plans shared by
//! the template and the runtime repair modes.

use crate::lang::ast::{Expr, ExprKind};
use crate::lang::{DerefSite, SiteId, StaticType, StmtTag, TypedProgram, VarRef};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    S1a,
    S1b,
    S2a,
    S2b,
    S3,
    S4a,
    S4b,
    S4c,
    S4d,
}

impl Strategy {
    pub const ALL: [Strategy; 9] = [
        Strategy::S1a,
        Strategy::S1b,
        Strategy::S2a,
        Strategy::S2b,
        Strategy::S3,
        Strategy::S4a,
        Strategy::S4b,
        Strategy::S4c,
        Strategy::S4d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::S1a => "S1a",
            Strategy::S1b => "S1b",
            Strategy::S2a => "S2a",
            Strategy::S2b => "S2b",
            Strategy::S3 => "S3",
            Strategy::S4a => "S4a",
            Strategy::S4b => "S4b",
            Strategy::S4c => "S4c",
            Strategy::S4d => "S4d",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Strategy::S1a => "local reuse of an existing compatible object",
            Strategy::S1b => "global reuse of an existing compatible object",
            Strategy::S2a => "local creation of a new object",
            Strategy::S2b => "global creation of a new object",
            Strategy::S3 => "skip statement",
            Strategy::S4a => "return a null to caller",
            Strategy::S4b => "return a new object to caller",
            Strategy::S4c => "return an existing compatible object to caller",
            Strategy::S4d => "return to caller (void method)",
        }
    }

    pub fn parse(s: &str) -> Option<Strategy> {
        Strategy::ALL.into_iter().find(|x| x.name().eq_ignore_ascii_case(s))
    }

    /// Value replacement (S1a..S2b) as opposed to execution skipping.
    pub fn is_replacement(self) -> bool {
        matches!(
            self,
            Strategy::S1a | Strategy::S1b | Strategy::S2a | Strategy::S2b
        )
    }

    /// Strategies that write the replacement back to the receiver variable.
    pub fn is_global(self) -> bool {
        matches!(self, Strategy::S1b | Strategy::S2b)
    }

    pub fn is_method_skip(self) -> bool {
        matches!(
            self,
            Strategy::S4a | Strategy::S4b | Strategy::S4c | Strategy::S4d
        )
    }

    pub fn takes_var(self) -> bool {
        matches!(self, Strategy::S1a | Strategy::S1b | Strategy::S4c)
    }

    pub fn takes_plan(self) -> bool {
        matches!(self, Strategy::S2a | Strategy::S2b | Strategy::S4b)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Predefined constant parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Const {
    Null,
    Int(i64),
    Str(String),
}

impl Const {
    /// The constant pool: null, 0, 1 and the empty string.
    pub fn all() -> Vec<Const> {
        vec![
            Const::Null,
            Const::Int(0),
            Const::Int(1),
            Const::Str(String::new()),
        ]
    }

    pub fn ty(&self) -> StaticType {
        match self {
            Const::Null => StaticType::Null,
            Const::Int(_) => StaticType::Int,
            Const::Str(_) => StaticType::Str,
        }
    }

    pub fn to_expr(&self) -> Expr {
        Expr::typed(
            match self {
                Const::Null => ExprKind::Null,
                Const::Int(v) => ExprKind::Int(*v),
                Const::Str(s) => ExprKind::Str(s.clone()),
            },
            self.ty(),
        )
    }
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Null => f.write_str("null"),
            Const::Int(v) => write!(f, "{v}"),
            Const::Str(s) => write!(f, "{s:?}"),
        }
    }
}

/// One constructor argument of a plan.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ArgPlan {
    /// Default literal of a primitive parameter type.
    Default(StaticType),
    Null,
    New(ConstructionPlan),
}

/// A bounded recursive recipe for creating an object.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ConstructionPlan {
    pub class: String,
    pub args: Vec<ArgPlan>,
    pub depth: u32,
}

impl ConstructionPlan {
    /// The plan as a nested `new` expression with literal defaults.
    pub fn to_expr(&self) -> Expr {
        let args = self
            .args
            .iter()
            .map(|a| match a {
                ArgPlan::Default(t) => default_literal(t),
                ArgPlan::Null => Expr::typed(ExprKind::Null, StaticType::Null),
                ArgPlan::New(p) => p.to_expr(),
            })
            .collect();
        Expr::typed(
            ExprKind::New {
                class: self.class.clone(),
                args,
            },
            StaticType::class(self.class.clone()),
        )
    }
}

impl fmt::Display for ConstructionPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::lang::printer::print_expr(&self.to_expr()))
    }
}

/// Source literal of `defaultValueOf(t)`.
pub fn default_literal(t: &StaticType) -> Expr {
    let kind = match t {
        StaticType::Int => ExprKind::Int(0),
        StaticType::Bool => ExprKind::Bool(false),
        StaticType::Str => ExprKind::Str(String::new()),
        _ => ExprKind::Null,
    };
    Expr::typed(kind, t.clone())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Param {
    None,
    Var {
        var: VarRef,
        /// Declared type of the variable.
        ty: StaticType,
        /// Class of the value observed at detection time (runtime mode).
        #[serde(skip_serializing_if = "Option::is_none")]
        runtime_class: Option<String>,
    },
    Ctor(ConstructionPlan),
    Const(Const),
}

impl Param {
    pub fn var(var: VarRef, ty: StaticType) -> Param {
        Param::Var {
            var,
            ty,
            runtime_class: None,
        }
    }

    /// Short form used in reports: `o`, `this.f`, `new A()`, `null`, or `-`.
    pub fn describe(&self) -> String {
        match self {
            Param::None => "-".into(),
            Param::Var { var, .. } => var.to_string(),
            Param::Ctor(p) => p.to_string(),
            Param::Const(c) => c.to_string(),
        }
    }

    pub fn var_ref(&self) -> Option<&VarRef> {
        match self {
            Param::Var { var, .. } => Some(var),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Provenance {
    Static,
    Runtime,
}

/// One point of the repair search space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Decision {
    pub site: SiteId,
    pub strategy: Strategy,
    pub param: Param,
    pub provenance: Provenance,
}

impl Decision {
    pub fn new(site: SiteId, strategy: Strategy, param: Param, provenance: Provenance) -> Self {
        let d = Decision {
            site,
            strategy,
            param,
            provenance,
        };
        debug_assert!(d.is_well_formed(), "{d:?}");
        d
    }

    /// The parameter kind matches the strategy.
    pub fn is_well_formed(&self) -> bool {
        match (&self.param, self.strategy) {
            (Param::Var { .. } | Param::Const(_), s) => s.takes_var(),
            (Param::Ctor(_), s) => s.takes_plan(),
            (Param::None, s) => matches!(s, Strategy::S3 | Strategy::S4a | Strategy::S4d),
        }
    }

    pub fn describe(&self) -> String {
        match self.param {
            Param::None => format!("{} at site {}", self.strategy, self.site),
            _ => format!(
                "{}({}) at site {}",
                self.strategy,
                self.param.describe(),
                self.site
            ),
        }
    }
}

/// Which repair mode asks about applicability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Template,
    Meta,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Template => "template",
            Mode::Meta => "meta",
        })
    }
}

/// Strategies applicable at `site`, in table order.
pub fn applicable_strategies(site: &DerefSite, mode: Mode) -> Vec<Strategy> {
    let ret = &site.method.ret;
    let assignable = site
        .receiver_var
        .as_ref()
        .is_some_and(|v| v.is_assignable_local());
    Strategy::ALL
        .into_iter()
        .filter(|s| match s {
            Strategy::S1a | Strategy::S2a => true,
            Strategy::S1b | Strategy::S2b => assignable,
            Strategy::S3 => mode == Mode::Meta || site.stmt_kind != StmtTag::VarDecl,
            Strategy::S4a | Strategy::S4b => ret.is_class(),
            Strategy::S4c => *ret != StaticType::Void,
            Strategy::S4d => *ret == StaticType::Void,
        })
        .collect()
}

/// Upper bound on plans returned for one type, so that broad types such
/// as `Object` with many constructible subclasses stay tractable.
pub const MAX_PLANS: usize = 64;

/// Construction plans for `t` and its subclasses: one per constructor and
/// argument choice, constructors in class declaration order then arity,
/// class-typed arguments `null` first then nested plans.
pub fn plan_constructions(tp: &TypedProgram, t: &StaticType, max_depth: u32) -> Vec<ConstructionPlan> {
    if max_depth == 0 || !t.is_class() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for ctor in tp.constructors_of(t) {
        let mut choices: Vec<Vec<(ArgPlan, u32)>> = Vec::new();
        for p in &ctor.params {
            let mut c = Vec::new();
            if p.is_class() {
                c.push((ArgPlan::Null, 0));
                for nested in plan_constructions(tp, p, max_depth - 1) {
                    let d = nested.depth;
                    c.push((ArgPlan::New(nested), d));
                }
            } else {
                c.push((ArgPlan::Default(p.clone()), 0));
            }
            choices.push(c);
        }
        for combo in cartesian(&choices) {
            if out.len() == MAX_PLANS {
                return out;
            }
            let depth = 1 + combo.iter().map(|(_, d)| *d).max().unwrap_or(0);
            out.push(ConstructionPlan {
                class: ctor.class.clone(),
                args: combo.into_iter().map(|(a, _)| a).collect(),
                depth,
            });
        }
    }
    out
}

fn cartesian<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut acc: Vec<Vec<T>> = vec![Vec::new()];
    for c in choices {
        let mut next = Vec::with_capacity(acc.len() * c.len());
        for prefix in &acc {
            for x in c {
                let mut v = prefix.clone();
                v.push(x.clone());
                next.push(v);
            }
        }
        acc = next;
        if acc.len() > MAX_PLANS {
            acc.truncate(MAX_PLANS);
        }
    }
    acc
}
