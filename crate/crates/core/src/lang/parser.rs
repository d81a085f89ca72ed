use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::span::Span;
use super::types::StaticType;
use super::SyntaxError;

/// Parses an MJ compilation unit.
pub fn parse(file: &str, source: &str) -> Result<Program, SyntaxError> {
    let toks = tokenize(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        next_stmt: 0,
        expected: Vec::new(),
    };
    let mut classes = Vec::new();
    while !p.at(&Tok::Eof) {
        classes.push(p.class_decl()?);
    }
    Ok(Program {
        file: file.to_string(),
        classes,
    })
}

/// Parses a single statement; statement ids start at zero.
pub fn parse_stmt(source: &str) -> Result<Stmt, SyntaxError> {
    let toks = tokenize(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        next_stmt: 0,
        expected: Vec::new(),
    };
    let s = p.stmt()?;
    p.expect(Tok::Eof)?;
    Ok(s)
}

pub fn parse_expr(source: &str) -> Result<Expr, SyntaxError> {
    let toks = tokenize(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        next_stmt: 0,
        expected: Vec::new(),
    };
    let e = p.expr()?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    next_stmt: u32,
    /// Alternatives tried at the current position, for diagnostics.
    expected: Vec<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        self.expected.clear();
        t
    }

    fn note(&mut self, what: impl Into<String>) {
        let w = what.into();
        if !self.expected.contains(&w) {
            self.expected.push(w);
        }
    }

    fn at(&mut self, t: &Tok) -> bool {
        if std::mem::discriminant(self.peek()) == std::mem::discriminant(t) {
            true
        } else {
            self.note(t.to_string());
            false
        }
    }

    fn eat(&mut self, t: Tok) -> bool {
        if self.at(&t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<Span, SyntaxError> {
        if self.at(&t) {
            Ok(self.bump().span)
        } else {
            Err(self.error())
        }
    }

    fn error(&mut self) -> SyntaxError {
        let t = &self.toks[self.pos];
        let mut expected = std::mem::take(&mut self.expected);
        expected.sort();
        SyntaxError {
            line: t.span.line,
            col: t.span.col,
            message: format!("unexpected {}", t.tok),
            expected,
        }
    }

    fn ident(&mut self) -> Result<(String, Span), SyntaxError> {
        if let Tok::Ident(name) = self.peek() {
            let name = name.clone();
            let span = self.bump().span;
            Ok((name, span))
        } else {
            self.note("identifier");
            Err(self.error())
        }
    }

    fn stmt_id(&mut self) -> StmtId {
        let id = StmtId(self.next_stmt);
        self.next_stmt += 1;
        id
    }

    // ---- declarations ----

    fn class_decl(&mut self) -> Result<ClassDecl, SyntaxError> {
        let start = self.expect(Tok::Class)?;
        let (name, _) = self.ident()?;
        let superclass = if self.eat(Tok::Extends) {
            Some(self.ident()?.0)
        } else {
            None
        };
        self.expect(Tok::LBrace)?;
        let mut members = Vec::new();
        while !self.eat(Tok::RBrace) {
            members.push(self.member(&name)?);
        }
        Ok(ClassDecl {
            name,
            superclass,
            members,
            span: start.to(self.prev_span()),
        })
    }

    fn member(&mut self, class: &str) -> Result<Member, SyntaxError> {
        let start = self.span();
        if self.eat(Tok::Static) {
            let ty = self.ret_type()?;
            let (name, _) = self.ident()?;
            return if self.at(&Tok::LParen) {
                self.method_rest(start, MethodKind::Static, ty, name)
            } else {
                self.field_rest(start, true, ty, name)
            };
        }
        if self.eat(Tok::Test) {
            let ty = self.ret_type()?;
            let (name, _) = self.ident()?;
            return self.method_rest(start, MethodKind::Test, ty, name);
        }
        if matches!(self.peek(), Tok::Ident(n) if n == class) && *self.peek_at(1) == Tok::LParen {
            self.bump();
            let params = self.params()?;
            let body = self.block()?;
            return Ok(Member::Ctor(CtorDecl {
                params,
                span: start.to(body.span),
                body,
            }));
        }
        let ty = self.ret_type()?;
        let (name, _) = self.ident()?;
        if self.at(&Tok::LParen) {
            self.method_rest(start, MethodKind::Instance, ty, name)
        } else {
            self.field_rest(start, false, ty, name)
        }
    }

    fn method_rest(
        &mut self,
        start: Span,
        kind: MethodKind,
        ret: StaticType,
        name: String,
    ) -> Result<Member, SyntaxError> {
        let params = self.params()?;
        let body = self.block()?;
        Ok(Member::Method(MethodDecl {
            kind,
            ret,
            name,
            params,
            span: start.to(body.span),
            body,
        }))
    }

    fn field_rest(
        &mut self,
        start: Span,
        is_static: bool,
        ty: StaticType,
        name: String,
    ) -> Result<Member, SyntaxError> {
        let init = if self.eat(Tok::Assign) {
            Some(self.expr()?)
        } else {
            None
        };
        let end = self.expect(Tok::Semi)?;
        Ok(Member::Field(FieldDecl {
            is_static,
            ty,
            name,
            init,
            span: start.to(end),
        }))
    }

    fn params(&mut self) -> Result<Vec<Param>, SyntaxError> {
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if self.eat(Tok::RParen) {
            return Ok(params);
        }
        loop {
            let start = self.span();
            let ty = self.value_type()?;
            let (name, end) = self.ident()?;
            params.push(Param {
                ty,
                name,
                span: start.to(end),
            });
            if self.eat(Tok::RParen) {
                return Ok(params);
            }
            self.expect(Tok::Comma)?;
        }
    }

    fn value_type(&mut self) -> Result<StaticType, SyntaxError> {
        let ty = match self.peek() {
            Tok::KwInt => StaticType::Int,
            Tok::KwBool => StaticType::Bool,
            Tok::KwStr => StaticType::Str,
            Tok::Ident(n) => StaticType::Class(n.clone()),
            _ => {
                self.note("type");
                return Err(self.error());
            }
        };
        self.bump();
        Ok(ty)
    }

    fn ret_type(&mut self) -> Result<StaticType, SyntaxError> {
        if self.eat(Tok::Void) {
            Ok(StaticType::Void)
        } else {
            self.value_type()
        }
    }

    // ---- statements ----

    fn block(&mut self) -> Result<Block, SyntaxError> {
        let start = self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while !self.eat(Tok::RBrace) {
            if self.at(&Tok::Eof) {
                return Err(self.error());
            }
            stmts.push(self.stmt()?);
        }
        Ok(Block {
            stmts,
            span: start.to(self.prev_span()),
        })
    }

    fn stmt(&mut self) -> Result<Stmt, SyntaxError> {
        let id = self.stmt_id();
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::LBrace => StmtKind::Block(self.block()?),
            Tok::If => return self.if_stmt(id),
            Tok::While => {
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.expr()?;
                self.expect(Tok::RParen)?;
                let body = self.block()?;
                StmtKind::While { cond, body }
            }
            Tok::Return => {
                self.bump();
                let value = if self.at(&Tok::Semi) {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(Tok::Semi)?;
                StmtKind::Return(value)
            }
            Tok::Try => {
                self.bump();
                let body = self.block()?;
                self.expect(Tok::Catch)?;
                self.expect(Tok::LParen)?;
                let (kind_name, _) = self.ident()?;
                let catch = match kind_name.as_str() {
                    "NPE" => CatchKind::Npe,
                    "Any" => CatchKind::Any,
                    _ => {
                        self.pos -= 1;
                        self.expected = vec!["`NPE`".into(), "`Any`".into()];
                        return Err(self.error());
                    }
                };
                let binder = if let Tok::Ident(n) = self.peek() {
                    let n = n.clone();
                    self.bump();
                    Some(n)
                } else {
                    None
                };
                self.expect(Tok::RParen)?;
                let handler = self.block()?;
                StmtKind::Try {
                    body,
                    catch,
                    binder,
                    handler,
                }
            }
            Tok::Assert => {
                self.bump();
                self.expect(Tok::LParen)?;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Semi)?;
                StmtKind::Assert(e)
            }
            Tok::KwInt | Tok::KwBool | Tok::KwStr => self.var_decl_rest()?,
            Tok::Ident(_) if matches!(self.peek_at(1), Tok::Ident(_)) => self.var_decl_rest()?,
            _ => {
                let target = self.expr()?;
                if self.eat(Tok::Assign) {
                    if !matches!(
                        target.kind,
                        ExprKind::Name { .. } | ExprKind::Field { .. }
                    ) {
                        return Err(SyntaxError {
                            line: target.span.line,
                            col: target.span.col,
                            message: "invalid assignment target".into(),
                            expected: Vec::new(),
                        });
                    }
                    let value = self.expr()?;
                    self.expect(Tok::Semi)?;
                    StmtKind::Assign { target, value }
                } else {
                    if !matches!(target.kind, ExprKind::Call { .. } | ExprKind::New { .. }) {
                        return Err(SyntaxError {
                            line: target.span.line,
                            col: target.span.col,
                            message: "not a statement".into(),
                            expected: Vec::new(),
                        });
                    }
                    self.expect(Tok::Semi)?;
                    StmtKind::Expr(target)
                }
            }
        };
        Ok(Stmt {
            id,
            kind,
            span: start.to(self.prev_span()),
        })
    }

    fn var_decl_rest(&mut self) -> Result<StmtKind, SyntaxError> {
        let ty = self.value_type()?;
        let (name, _) = self.ident()?;
        let init = if self.eat(Tok::Assign) {
            Some(self.expr()?)
        } else {
            None
        };
        self.expect(Tok::Semi)?;
        Ok(StmtKind::VarDecl { ty, name, init })
    }

    fn if_stmt(&mut self, id: StmtId) -> Result<Stmt, SyntaxError> {
        let start = self.expect(Tok::If)?;
        self.expect(Tok::LParen)?;
        let cond = self.expr()?;
        self.expect(Tok::RParen)?;
        let then_block = self.block()?;
        let else_branch = if self.eat(Tok::Else) {
            if self.at(&Tok::If) {
                let nested = self.stmt_id();
                Some(Box::new(self.if_stmt(nested)?))
            } else {
                let bid = self.stmt_id();
                let b = self.block()?;
                Some(Box::new(Stmt {
                    id: bid,
                    span: b.span,
                    kind: StmtKind::Block(b),
                }))
            }
        } else {
            None
        };
        Ok(Stmt {
            id,
            kind: StmtKind::If {
                cond,
                then_block,
                else_branch,
            },
            span: start.to(self.prev_span()),
        })
    }

    // ---- expressions ----

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinaryOp> {
        Some(match self.peek() {
            Tok::OrOr => BinaryOp::Or,
            Tok::AndAnd => BinaryOp::And,
            Tok::EqEq => BinaryOp::Eq,
            Tok::NotEq => BinaryOp::Ne,
            Tok::Lt => BinaryOp::Lt,
            Tok::Le => BinaryOp::Le,
            Tok::Gt => BinaryOp::Gt,
            Tok::Ge => BinaryOp::Ge,
            Tok::Plus => BinaryOp::Add,
            Tok::Minus => BinaryOp::Sub,
            Tok::Star => BinaryOp::Mul,
            Tok::Slash => BinaryOp::Div,
            Tok::Percent => BinaryOp::Rem,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            if op.precedence() < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(op.precedence() + 1)?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr::new(
                ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                span,
            );
        }
        Ok(lhs)
    }

    fn starts_primary(t: &Tok) -> bool {
        matches!(
            t,
            Tok::Ident(_)
                | Tok::Int(_)
                | Tok::Str(_)
                | Tok::True
                | Tok::False
                | Tok::Null
                | Tok::This
                | Tok::New
                | Tok::LParen
        )
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        let start = self.span();
        let op = match self.peek() {
            Tok::Bang => Some(UnaryOp::Not),
            Tok::Minus => Some(UnaryOp::Neg),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let e = self.unary()?;
            let span = start.to(e.span);
            return Ok(Expr::new(
                ExprKind::Unary {
                    op,
                    expr: Box::new(e),
                },
                span,
            ));
        }
        // `(Class) operand`
        if *self.peek() == Tok::LParen
            && matches!(self.peek_at(1), Tok::Ident(_))
            && *self.peek_at(2) == Tok::RParen
            && Self::starts_primary(self.peek_at(3))
        {
            self.bump();
            let (class, _) = self.ident()?;
            self.bump();
            let e = self.unary()?;
            let span = start.to(e.span);
            return Ok(Expr::new(
                ExprKind::Cast {
                    class,
                    expr: Box::new(e),
                },
                span,
            ));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.primary()?;
        while self.eat(Tok::Dot) {
            let (name, name_span) = self.ident()?;
            if self.at(&Tok::LParen) {
                let args = self.args()?;
                let span = e.span.to(self.prev_span());
                e = Expr::new(
                    ExprKind::Call {
                        target: Some(Box::new(e)),
                        method: name,
                        args,
                        site: None,
                    },
                    span,
                );
            } else {
                let span = e.span.to(name_span);
                e = Expr::new(
                    ExprKind::Field {
                        target: Box::new(e),
                        field: name,
                        site: None,
                    },
                    span,
                );
            }
        }
        Ok(e)
    }

    fn args(&mut self) -> Result<Vec<Expr>, SyntaxError> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if self.eat(Tok::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(Tok::RParen) {
                return Ok(args);
            }
            self.expect(Tok::Comma)?;
        }
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                ExprKind::Int(v)
            }
            Tok::Str(s) => {
                self.bump();
                ExprKind::Str(s)
            }
            Tok::True => {
                self.bump();
                ExprKind::Bool(true)
            }
            Tok::False => {
                self.bump();
                ExprKind::Bool(false)
            }
            Tok::Null => {
                self.bump();
                ExprKind::Null
            }
            Tok::This => {
                self.bump();
                ExprKind::This
            }
            Tok::Ident(name) => {
                self.bump();
                if self.at(&Tok::LParen) {
                    let args = self.args()?;
                    ExprKind::Call {
                        target: None,
                        method: name,
                        args,
                        site: None,
                    }
                } else {
                    ExprKind::Name { name, res: None }
                }
            }
            Tok::New => {
                self.bump();
                let (class, _) = self.ident()?;
                let args = self.args()?;
                ExprKind::New { class, args }
            }
            Tok::LParen => {
                self.bump();
                let mut e = self.expr()?;
                self.expect(Tok::RParen)?;
                e.span = start.to(self.prev_span());
                return Ok(e);
            }
            _ => {
                self.note("expression");
                return Err(self.error());
            }
        };
        Ok(Expr::new(kind, start.to(self.prev_span())))
    }
}
