use std::collections::HashMap;

use super::ast::{ExprKind, Pos, SourceAst, SrcBinOp, SrcExpr, SrcType, Stmt};
use super::lexer::{lex, Tok};
use super::FrontendError;

const KEYWORDS: &[&str] = &[
    "fn", "let", "for", "in", "return", "len", "int", "list", "if", "else", "while", "loop",
];

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

fn syntax(pos: Pos, message: impl Into<String>) -> FrontendError {
    FrontendError::Syntax {
        pos,
        message: message.into(),
    }
}

fn unsupported(pos: Pos, message: impl Into<String>) -> FrontendError {
    FrontendError::Unsupported {
        pos,
        message: message.into(),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.at + n).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Pos, FrontendError> {
        let (tok, pos) = self.bump();
        if tok == want {
            Ok(pos)
        } else {
            Err(syntax(
                pos,
                format!("expected {}, found {}", want.describe(), tok.describe()),
            ))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<Pos, FrontendError> {
        if self.is_keyword(kw) {
            Ok(self.bump().1)
        } else {
            Err(syntax(
                self.pos(),
                format!("expected `{kw}`, found {}", self.peek().describe()),
            ))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), FrontendError> {
        match self.bump() {
            (Tok::Ident(s), pos) if !KEYWORDS.contains(&s.as_str()) => Ok((s, pos)),
            (tok, pos) => Err(syntax(
                pos,
                format!("expected an identifier, found {}", tok.describe()),
            )),
        }
    }

    fn ty(&mut self) -> Result<SrcType, FrontendError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Ident(s) if s == "int" => Ok(SrcType::Int),
            Tok::Ident(s) if s == "list" => {
                self.expect(Tok::Lt)?;
                let inner_pos = self.pos();
                let inner = self.ty();
                self.expect(Tok::Gt)?;
                match inner {
                    Ok(SrcType::Int) => Ok(SrcType::ListInt),
                    Ok(SrcType::ListInt) => Err(unsupported(inner_pos, "nested list element type")),
                    Err(e) => Err(e),
                }
            }
            Tok::Ident(s) => Err(unsupported(
                pos,
                format!("type `{s}` (only int elements are supported)"),
            )),
            other => Err(syntax(
                pos,
                format!("expected a type, found {}", other.describe()),
            )),
        }
    }

    fn program(&mut self) -> Result<SourceAst, FrontendError> {
        self.expect_keyword("fn")?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let (p, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                params.push((p, self.ty()?));
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Arrow)?;
        let ret = self.ty()?;
        self.expect(Tok::LBrace)?;
        let body = self.block()?;
        if *self.peek() != Tok::Eof {
            let pos = self.pos();
            return Err(if self.is_keyword("fn") {
                unsupported(pos, "more than one function per file")
            } else {
                syntax(
                    pos,
                    format!("unexpected {} after function", self.peek().describe()),
                )
            });
        }
        Ok(SourceAst {
            name,
            params,
            ret,
            body,
        })
    }

    /// Statements up to and including the closing brace.
    fn block(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        let mut stmts = Vec::new();
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    return Ok(stmts);
                }
                Tok::Eof => return Err(syntax(self.pos(), "expected `}`, found end of input")),
                _ => stmts.push(self.stmt()?),
            }
        }
    }

    fn stmt(&mut self) -> Result<Stmt, FrontendError> {
        let pos = self.pos();
        let word = match self.peek() {
            Tok::Ident(s) => s.clone(),
            other => {
                return Err(syntax(
                    pos,
                    format!("expected a statement, found {}", other.describe()),
                ))
            }
        };
        match word.as_str() {
            "if" | "else" => Err(unsupported(pos, "branches")),
            "while" | "loop" => Err(unsupported(pos, "loops other than `for`")),
            "let" => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let ty = self.ty()?;
                self.expect(Tok::Assign)?;
                let init = self.expr()?;
                self.expect(Tok::Semi)?;
                Ok(Stmt::Let {
                    name,
                    ty,
                    init,
                    pos,
                })
            }
            "for" => {
                self.bump();
                let (var, _) = self.ident()?;
                self.expect_keyword("in")?;
                let lo = self.expr()?;
                self.expect(Tok::DotDot)?;
                let hi = self.expr()?;
                self.expect(Tok::LBrace)?;
                let body = self.block()?;
                Ok(Stmt::For {
                    var,
                    lo,
                    hi,
                    body,
                    pos,
                })
            }
            "return" => {
                self.bump();
                let value = self.expr()?;
                self.expect(Tok::Semi)?;
                Ok(Stmt::Return { value, pos })
            }
            _ => {
                let (name, _) = self.ident()?;
                match self.peek() {
                    Tok::Assign => {
                        self.bump();
                        let value = self.expr()?;
                        self.expect(Tok::Semi)?;
                        Ok(Stmt::Assign { name, value, pos })
                    }
                    Tok::Dot => {
                        self.bump();
                        let (method, mpos) = match self.bump() {
                            (Tok::Ident(m), p) => (m, p),
                            (tok, p) => {
                                return Err(syntax(
                                    p,
                                    format!("expected a method name, found {}", tok.describe()),
                                ))
                            }
                        };
                        if method != "push" {
                            return Err(unsupported(mpos, format!("method `{method}`")));
                        }
                        self.expect(Tok::LParen)?;
                        let value = self.expr()?;
                        self.expect(Tok::RParen)?;
                        self.expect(Tok::Semi)?;
                        Ok(Stmt::Push { name, value, pos })
                    }
                    other => Err(syntax(
                        self.pos(),
                        format!("expected `=` or `.push(`, found {}", other.describe()),
                    )),
                }
            }
        }
    }

    fn expr(&mut self) -> Result<SrcExpr, FrontendError> {
        let mut lhs = self.comparison()?;
        while *self.peek() == Tok::AndAnd {
            let pos = self.bump().1;
            let rhs = self.comparison()?;
            lhs = binary(SrcBinOp::And, lhs, rhs, pos);
        }
        Ok(lhs)
    }

    fn comparison(&mut self) -> Result<SrcExpr, FrontendError> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Tok::Lt => SrcBinOp::Lt,
            Tok::Le => SrcBinOp::Le,
            Tok::EqEq => SrcBinOp::Eq,
            Tok::Gt => return Err(syntax(self.pos(), "operator `>` is not supported; use `<`")),
            _ => return Ok(lhs),
        };
        let pos = self.bump().1;
        let rhs = self.additive()?;
        if matches!(self.peek(), Tok::Lt | Tok::Le | Tok::EqEq) {
            return Err(syntax(self.pos(), "comparisons do not chain"));
        }
        Ok(binary(op, lhs, rhs, pos))
    }

    fn additive(&mut self) -> Result<SrcExpr, FrontendError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => SrcBinOp::Add,
                Tok::Minus => SrcBinOp::Sub,
                _ => return Ok(lhs),
            };
            let pos = self.bump().1;
            let rhs = self.multiplicative()?;
            lhs = binary(op, lhs, rhs, pos);
        }
    }

    fn multiplicative(&mut self) -> Result<SrcExpr, FrontendError> {
        let mut lhs = self.atom()?;
        while *self.peek() == Tok::Star {
            let pos = self.bump().1;
            let rhs = self.atom()?;
            lhs = binary(SrcBinOp::Mul, lhs, rhs, pos);
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<SrcExpr, FrontendError> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                ExprKind::Int(v)
            }
            Tok::LBracket => {
                self.bump();
                if *self.peek() != Tok::RBracket {
                    return Err(syntax(
                        self.pos(),
                        "only the empty list literal `[]` is supported",
                    ));
                }
                self.bump();
                ExprKind::EmptyList
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                return Ok(inner);
            }
            Tok::Ident(s) if s == "len" && *self.peek_at(1) == Tok::LParen => {
                self.bump();
                self.bump();
                let (name, _) = self.ident()?;
                self.expect(Tok::RParen)?;
                ExprKind::Len(name)
            }
            Tok::Ident(_) => {
                let (name, _) = self.ident()?;
                if *self.peek() == Tok::LBracket {
                    self.bump();
                    let idx = self.expr()?;
                    self.expect(Tok::RBracket)?;
                    ExprKind::Index(name, Box::new(idx))
                } else {
                    ExprKind::Var(name)
                }
            }
            other => {
                return Err(syntax(
                    pos,
                    format!("expected an expression, found {}", other.describe()),
                ))
            }
        };
        Ok(SrcExpr { kind, pos })
    }
}

fn binary(op: SrcBinOp, a: SrcExpr, b: SrcExpr, pos: Pos) -> SrcExpr {
    SrcExpr {
        kind: ExprKind::Binary(op, Box::new(a), Box::new(b)),
        pos,
    }
}

/// Expression types during checking; `Bool` only arises from comparisons.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CheckTy {
    Src(SrcType),
    Bool,
}

impl std::fmt::Display for CheckTy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CheckTy::Src(t) => write!(f, "{t}"),
            CheckTy::Bool => f.write_str("bool"),
        }
    }
}

struct Checker {
    scopes: Vec<HashMap<String, SrcType>>,
    ret: SrcType,
}

fn semantic(pos: Pos, message: impl Into<String>) -> FrontendError {
    FrontendError::Semantic {
        pos,
        message: message.into(),
    }
}

impl Checker {
    fn lookup(&self, name: &str, pos: Pos) -> Result<SrcType, FrontendError> {
        self.scopes
            .iter()
            .rev()
            .find_map(|s| s.get(name).copied())
            .ok_or_else(|| semantic(pos, format!("`{name}` is not declared")))
    }

    fn declare(&mut self, name: &str, ty: SrcType, pos: Pos) -> Result<(), FrontendError> {
        if self.scopes.iter().any(|s| s.contains_key(name)) {
            return Err(semantic(
                pos,
                format!("`{name}` is already declared (shadowing is not allowed)"),
            ));
        }
        self.scopes.last_mut().unwrap().insert(name.to_string(), ty);
        Ok(())
    }

    fn expr(&self, e: &SrcExpr) -> Result<CheckTy, FrontendError> {
        let want = |sub: &SrcExpr, t: CheckTy| -> Result<(), FrontendError> {
            let got = self.expr(sub)?;
            if got == t {
                Ok(())
            } else {
                Err(semantic(sub.pos, format!("expected {t}, found {got}")))
            }
        };
        let int = CheckTy::Src(SrcType::Int);
        let list = CheckTy::Src(SrcType::ListInt);
        match &e.kind {
            ExprKind::Int(_) => Ok(int),
            ExprKind::EmptyList => Ok(list),
            ExprKind::Var(v) => Ok(CheckTy::Src(self.lookup(v, e.pos)?)),
            ExprKind::Index(v, i) => {
                if self.lookup(v, e.pos)? != SrcType::ListInt {
                    return Err(semantic(e.pos, format!("`{v}` is not a list")));
                }
                want(i, int)?;
                Ok(int)
            }
            ExprKind::Len(v) => {
                if self.lookup(v, e.pos)? != SrcType::ListInt {
                    return Err(semantic(e.pos, format!("`{v}` is not a list")));
                }
                Ok(int)
            }
            ExprKind::Binary(op, a, b) => match op {
                SrcBinOp::Add | SrcBinOp::Sub | SrcBinOp::Mul => {
                    want(a, int)?;
                    want(b, int)?;
                    Ok(int)
                }
                SrcBinOp::Lt | SrcBinOp::Le => {
                    want(a, int)?;
                    want(b, int)?;
                    Ok(CheckTy::Bool)
                }
                SrcBinOp::Eq => {
                    let t = self.expr(a)?;
                    want(b, t)?;
                    Ok(CheckTy::Bool)
                }
                SrcBinOp::And => {
                    want(a, CheckTy::Bool)?;
                    want(b, CheckTy::Bool)?;
                    Ok(CheckTy::Bool)
                }
            },
        }
    }

    fn expect(&self, e: &SrcExpr, t: SrcType) -> Result<(), FrontendError> {
        let got = self.expr(e)?;
        if got == CheckTy::Src(t) {
            Ok(())
        } else {
            Err(semantic(e.pos, format!("expected {t}, found {got}")))
        }
    }

    fn block(
        &mut self,
        stmts: &[Stmt],
        in_loop: bool,
        loops: &mut usize,
    ) -> Result<(), FrontendError> {
        for (k, s) in stmts.iter().enumerate() {
            match s {
                Stmt::Let {
                    name,
                    ty,
                    init,
                    pos,
                } => {
                    self.expect(init, *ty)?;
                    self.declare(name, *ty, *pos)?;
                }
                Stmt::Assign { name, value, pos } => {
                    let t = self.lookup(name, *pos)?;
                    self.expect(value, t)?;
                }
                Stmt::Push { name, value, pos } => {
                    if self.lookup(name, *pos)? != SrcType::ListInt {
                        return Err(semantic(*pos, format!("`{name}` is not a list")));
                    }
                    self.expect(value, SrcType::Int)?;
                }
                Stmt::For {
                    var,
                    lo,
                    hi,
                    body,
                    pos,
                } => {
                    if in_loop {
                        return Err(unsupported(*pos, "nested loops"));
                    }
                    *loops += 1;
                    if *loops > 1 {
                        return Err(unsupported(*pos, "more than one loop"));
                    }
                    self.expect(lo, SrcType::Int)?;
                    self.scopes.push(HashMap::new());
                    self.declare(var, SrcType::Int, *pos)?;
                    self.expect(hi, SrcType::Int)?;
                    self.block(body, true, loops)?;
                    self.scopes.pop();
                }
                Stmt::Return { value, pos } => {
                    if in_loop {
                        return Err(unsupported(*pos, "return inside a loop"));
                    }
                    if k + 1 != stmts.len() {
                        return Err(semantic(stmts[k + 1].pos(), "statement after return"));
                    }
                    self.expect(value, self.ret)?;
                }
            }
        }
        Ok(())
    }
}

/// Parse and check a mini-language program.
pub fn parse_source(text: &str) -> Result<SourceAst, FrontendError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let ast = p.program()?;
    let mut checker = Checker {
        scopes: vec![HashMap::new()],
        ret: ast.ret,
    };
    for (name, ty) in &ast.params {
        checker.declare(name, *ty, Pos { line: 1, col: 1 })?;
    }
    checker.block(&ast.body, false, &mut 0)?;
    if !matches!(ast.body.last(), Some(Stmt::Return { .. })) {
        let pos = p.toks.last().map(|t| t.1).unwrap_or_default();
        return Err(semantic(pos, "function must end with a return statement"));
    }
    Ok(ast)
}
