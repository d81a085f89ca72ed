use super::ast::*;
use super::types::StaticType;
use std::fmt::Write;

const INDENT: &str = "    ";

/// Renders a program in canonical layout. Reparsing the output yields the
/// same tree modulo spans.
pub fn pretty_print(program: &Program) -> String {
    let mut p = Printer::new("");
    for (i, c) in program.classes.iter().enumerate() {
        if i > 0 {
            p.out.push('\n');
        }
        p.class(c);
    }
    p.out
}

/// Renders one statement; every line is prefixed with `base_indent`.
pub fn print_stmt(stmt: &Stmt, base_indent: &str) -> String {
    let mut p = Printer::new(base_indent);
    p.stmt(stmt);
    p.out
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    expr(&mut s, e, 0);
    s
}

struct Printer {
    out: String,
    base: String,
    level: usize,
}

impl Printer {
    fn new(base: &str) -> Self {
        Printer {
            out: String::new(),
            base: base.to_string(),
            level: 0,
        }
    }

    fn line(&mut self, text: &str) {
        self.out.push_str(&self.base);
        for _ in 0..self.level {
            self.out.push_str(INDENT);
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn class(&mut self, c: &ClassDecl) {
        match &c.superclass {
            Some(s) => self.line(&format!("class {} extends {} {{", c.name, s)),
            None => self.line(&format!("class {} {{", c.name)),
        }
        self.level += 1;
        let mut prev_field = true;
        for (i, m) in c.members.iter().enumerate() {
            let is_field = matches!(m, Member::Field(_));
            if i > 0 && !(is_field && prev_field) {
                self.out.push('\n');
            }
            prev_field = is_field;
            match m {
                Member::Field(f) => {
                    let mut s = String::new();
                    if f.is_static {
                        s.push_str("static ");
                    }
                    write!(s, "{} {}", f.ty, f.name).unwrap();
                    if let Some(init) = &f.init {
                        s.push_str(" = ");
                        expr(&mut s, init, 0);
                    }
                    s.push(';');
                    self.line(&s);
                }
                Member::Ctor(k) => {
                    let head = format!("{}({})", c.name, params(&k.params));
                    self.block_with_head(&head, &k.body);
                }
                Member::Method(m) => {
                    let prefix = match m.kind {
                        MethodKind::Instance => "",
                        MethodKind::Static => "static ",
                        MethodKind::Test => "test ",
                    };
                    let head = format!("{}{} {}({})", prefix, m.ret, m.name, params(&m.params));
                    self.block_with_head(&head, &m.body);
                }
            }
        }
        self.level -= 1;
        self.line("}");
    }

    /// `head {` ... `}` with the body indented one level.
    fn block_with_head(&mut self, head: &str, body: &Block) {
        if body.stmts.is_empty() {
            self.line(&format!("{head} {{ }}"));
            return;
        }
        self.line(&format!("{head} {{"));
        self.body(body);
        self.line("}");
    }

    fn body(&mut self, b: &Block) {
        self.level += 1;
        for s in &b.stmts {
            self.stmt(s);
        }
        self.level -= 1;
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Block(b) => {
                if b.stmts.is_empty() {
                    self.line("{ }");
                } else {
                    self.line("{");
                    self.body(b);
                    self.line("}");
                }
            }
            StmtKind::VarDecl { ty, name, init } => {
                let mut t = format!("{ty} {name}");
                if let Some(e) = init {
                    t.push_str(" = ");
                    expr(&mut t, e, 0);
                }
                t.push(';');
                self.line(&t);
            }
            StmtKind::Assign { target, value } => {
                let mut t = String::new();
                expr(&mut t, target, 0);
                t.push_str(" = ");
                expr(&mut t, value, 0);
                t.push(';');
                self.line(&t);
            }
            StmtKind::If { .. } => self.if_chain(s, ""),
            StmtKind::While { cond, body } => {
                let head = format!("while ({})", print_expr(cond));
                self.block_with_head(&head, body);
            }
            StmtKind::Return(e) => match e {
                Some(e) => self.line(&format!("return {};", print_expr(e))),
                None => self.line("return;"),
            },
            StmtKind::Try {
                body,
                catch,
                binder,
                handler,
            } => {
                self.open("try", body);
                let kind = match catch {
                    CatchKind::Npe => "NPE",
                    CatchKind::Any => "Any",
                };
                let clause = match binder {
                    Some(b) => format!("}} catch ({kind} {b})"),
                    None => format!("}} catch ({kind})"),
                };
                self.open(&clause, handler);
                self.line("}");
            }
            StmtKind::Assert(e) => self.line(&format!("assert({});", print_expr(e))),
            StmtKind::Expr(e) => self.line(&format!("{};", print_expr(e))),
            StmtKind::SkipGuard { receivers, body } => {
                let args: Vec<String> = receivers
                    .iter()
                    .map(|r| match &r.path {
                        Some(p) => format!("{}: {}", r.site, print_expr(p)),
                        None => format!("{}: <in place>", r.site),
                    })
                    .collect();
                self.line(&format!("if (skipLine({})) {{", args.join(", ")));
                self.level += 1;
                self.stmt(body);
                self.level -= 1;
                self.line("}");
            }
            StmtKind::Collect { kind, name, .. } => {
                let t = match kind {
                    CollectKind::Param => format!("collectParam({name}, \"{name}\");"),
                    CollectKind::Field => format!("collectField(this.{name}, \"{name}\");"),
                    CollectKind::Static => format!("collectStatic({name}, \"{name}\");"),
                };
                self.line(&t);
            }
            StmtKind::ForceReturnScope { body, ret } => {
                self.open("try", body);
                self.line("} catch (ForceReturn f) {");
                self.level += 1;
                if *ret == StaticType::Void {
                    self.line("return;");
                } else {
                    self.line("return f.value();");
                }
                self.level -= 1;
                self.line("}");
            }
        }
    }

    /// Writes `head {` and the indented body, leaving the block open.
    fn open(&mut self, head: &str, body: &Block) {
        self.line(&format!("{head} {{"));
        self.body(body);
    }

    fn if_chain(&mut self, s: &Stmt, prefix: &str) {
        let StmtKind::If {
            cond,
            then_block,
            else_branch,
        } = &s.kind
        else {
            unreachable!()
        };
        self.open(&format!("{prefix}if ({})", print_expr(cond)), then_block);
        match else_branch.as_deref() {
            None => self.line("}"),
            Some(e @ Stmt {
                kind: StmtKind::If { .. },
                ..
            }) => self.if_chain(e, "} else "),
            Some(Stmt {
                kind: StmtKind::Block(b),
                ..
            }) => {
                self.open("} else", b);
                self.line("}");
            }
            Some(other) => {
                // rewrites only ever place blocks or ifs here
                self.line("} else {");
                self.level += 1;
                self.stmt(other);
                self.level -= 1;
                self.line("}");
            }
        }
    }
}

fn params(ps: &[Param]) -> String {
    ps.iter()
        .map(|p| format!("{} {}", p.ty, p.name))
        .collect::<Vec<_>>()
        .join(", ")
}

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary { op, .. } => op.precedence(),
        ExprKind::Unary { .. } | ExprKind::Cast { .. } => 7,
        _ => 8,
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn args(out: &mut String, args: &[Expr]) {
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        expr(out, a, 0);
    }
    out.push(')');
}

fn expr(out: &mut String, e: &Expr, min_prec: u8) {
    let p = prec(e);
    let paren = p < min_prec;
    if paren {
        out.push('(');
    }
    match &e.kind {
        ExprKind::Int(v) => write!(out, "{v}").unwrap(),
        ExprKind::Bool(b) => write!(out, "{b}").unwrap(),
        ExprKind::Str(s) => out.push_str(&escape(s)),
        ExprKind::Null => out.push_str("null"),
        ExprKind::This => out.push_str("this"),
        ExprKind::Name { name, .. } => out.push_str(name),
        ExprKind::Field { target, field, .. } => {
            expr(out, target, 8);
            write!(out, ".{field}").unwrap();
        }
        ExprKind::Call {
            target,
            method,
            args: a,
            ..
        } => {
            if let Some(t) = target {
                expr(out, t, 8);
                out.push('.');
            }
            out.push_str(method);
            args(out, a);
        }
        ExprKind::New { class, args: a } => {
            write!(out, "new {class}").unwrap();
            args(out, a);
        }
        ExprKind::Unary { op, expr: inner } => {
            out.push(match op {
                UnaryOp::Not => '!',
                UnaryOp::Neg => '-',
            });
            expr(out, inner, 7);
        }
        ExprKind::Binary { op, lhs, rhs } => {
            expr(out, lhs, p);
            write!(out, " {} ", op.symbol()).unwrap();
            expr(out, rhs, p + 1);
        }
        ExprKind::Cast { class, expr: inner } => {
            write!(out, "({class}) ").unwrap();
            expr(out, inner, 7);
        }
        ExprKind::CheckForNull {
            expr: inner,
            class,
            site,
            ..
        } => {
            out.push_str("checkForNull(");
            expr(out, inner, 0);
            write!(out, ", {class}, {site})").unwrap();
        }
        ExprKind::PoolEvent {
            kind,
            name,
            expr: inner,
        } => {
            out.push_str(match kind {
                PoolEventKind::InitVar => "initVar(",
                PoolEventKind::ModifyVar => "modifyVar(",
            });
            expr(out, inner, 0);
            write!(out, ", \"{name}\")").unwrap();
        }
    }
    if paren {
        out.push(')');
    }
}
