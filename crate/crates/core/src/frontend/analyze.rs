use std::collections::{BTreeMap, HashMap};

use crate::ir::{BinOp, Expr, Type, TypeCtx};

use super::ast::{ExprKind, Pos, SourceAst, SrcBinOp, SrcExpr, SrcType, Stmt};
use super::FrontendError;

/// Symbolic form of a single-loop kernel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopNest {
    pub name: String,
    pub params: Vec<(String, Type)>,
    /// Loop counter first, then mutated variables in declaration order.
    pub state_vars: Vec<(String, Type)>,
    pub init: BTreeMap<String, Expr>,
    pub cond: Expr,
    pub update: BTreeMap<String, Expr>,
    pub output_var: String,
    pub output_type: Type,
    pub counter: String,
}

impl LoopNest {
    /// Types of all params and state variables.
    pub fn context(&self) -> TypeCtx {
        self.params
            .iter()
            .chain(&self.state_vars)
            .cloned()
            .collect()
    }

    /// Upper bound `hi` of the guard `counter < hi`.
    pub fn bound(&self) -> &Expr {
        match &self.cond {
            Expr::Binary(BinOp::Lt, _, hi) => hi,
            other => other,
        }
    }

    pub fn counter_init(&self) -> &Expr {
        &self.init[&self.counter]
    }

    pub fn param_type(&self, name: &str) -> Option<Type> {
        self.params.iter().find(|(p, _)| p == name).map(|(_, t)| *t)
    }
}

fn ir_type(t: SrcType) -> Type {
    match t {
        SrcType::Int => Type::Int,
        SrcType::ListInt => Type::SeqInt,
    }
}

fn unsupported(pos: Pos, message: impl Into<String>) -> FrontendError {
    FrontendError::Unsupported {
        pos,
        message: message.into(),
    }
}

/// Translate a source expression, resolving names through `env`.
fn translate(e: &SrcExpr, env: &HashMap<String, Expr>) -> Expr {
    let name = |v: &str| env.get(v).cloned().unwrap_or_else(|| Expr::var(v));
    match &e.kind {
        ExprKind::Int(v) => Expr::Int(v.clone()),
        ExprKind::EmptyList => Expr::Empty(Type::SeqInt),
        ExprKind::Var(v) => name(v),
        ExprKind::Index(v, i) => Expr::index(name(v), translate(i, env)),
        ExprKind::Len(v) => Expr::len(name(v)),
        ExprKind::Binary(op, a, b) => {
            let op = match op {
                SrcBinOp::Add => BinOp::Add,
                SrcBinOp::Sub => BinOp::Sub,
                SrcBinOp::Mul => BinOp::Mul,
                SrcBinOp::Lt => BinOp::Lt,
                SrcBinOp::Le => BinOp::Le,
                SrcBinOp::Eq => BinOp::Eq,
                SrcBinOp::And => BinOp::And,
            };
            Expr::binary(op, translate(a, env), translate(b, env))
        }
    }
}

fn mutated(stmts: &[Stmt], out: &mut Vec<(String, Pos)>) {
    for s in stmts {
        match s {
            Stmt::Assign { name, pos, .. } | Stmt::Push { name, pos, .. } => {
                out.push((name.clone(), *pos))
            }
            Stmt::For { body, .. } => mutated(body, out),
            _ => {}
        }
    }
}

/// Symbolically execute the program into a [`LoopNest`].
pub fn analyze(ast: &SourceAst) -> Result<LoopNest, FrontendError> {
    let loop_at = ast
        .body
        .iter()
        .position(|s| matches!(s, Stmt::For { .. }))
        .ok_or(FrontendError::NoLoop)?;
    let params: Vec<(String, Type)> = ast
        .params
        .iter()
        .map(|(p, t)| (p.clone(), ir_type(*t)))
        .collect();
    let is_param = |n: &str| params.iter().any(|(p, _)| p == n);

    let mut writes = Vec::new();
    mutated(&ast.body, &mut writes);
    if let Some((n, pos)) = writes.iter().find(|(n, _)| is_param(n)) {
        return Err(unsupported(*pos, format!("parameter `{n}` is read-only")));
    }

    // Straight-line prefix: symbolic values of local variables.
    let mut sym: HashMap<String, Expr> = HashMap::new();
    let mut locals: Vec<(String, Type)> = Vec::new();
    for s in &ast.body[..loop_at] {
        match s {
            Stmt::Let { name, ty, init, .. } => {
                let v = translate(init, &sym);
                sym.insert(name.clone(), v);
                locals.push((name.clone(), ir_type(*ty)));
            }
            Stmt::Assign { name, value, .. } => {
                let v = translate(value, &sym);
                sym.insert(name.clone(), v);
            }
            Stmt::Push { name, value, .. } => {
                let v = Expr::append(sym[name].clone(), translate(value, &sym));
                sym.insert(name.clone(), v);
            }
            Stmt::For { .. } | Stmt::Return { .. } => unreachable!("checked by the parser"),
        }
    }

    let Stmt::For {
        var: counter,
        lo,
        hi,
        body,
        ..
    } = &ast.body[loop_at]
    else {
        unreachable!()
    };
    let output_var = match &ast.body[loop_at + 1..] {
        [Stmt::Return { value, .. }] => match &value.kind {
            ExprKind::Var(v) if locals.iter().any(|(l, _)| l == v) => v.clone(),
            _ => {
                return Err(unsupported(
                    value.pos,
                    "the returned value must be a variable computed by the loop",
                ))
            }
        },
        [first, ..] => {
            return Err(unsupported(
                first.pos(),
                "statements between the loop and the return",
            ))
        }
        [] => unreachable!("checked by the parser"),
    };

    let mut body_writes = Vec::new();
    mutated(body, &mut body_writes);
    if let Some((_, pos)) = body_writes.iter().find(|(n, _)| n == counter) {
        return Err(unsupported(
            *pos,
            "the loop counter is modified in the loop body",
        ));
    }
    let mut state_vars = vec![(counter.clone(), Type::Int)];
    for (name, t) in &locals {
        if body_writes.iter().any(|(n, _)| n == name) || *name == output_var {
            state_vars.push((name.clone(), *t));
        }
    }
    let is_state = |n: &str| state_vars.iter().any(|(s, _)| s == n);

    let mut init = BTreeMap::new();
    init.insert(counter.clone(), translate(lo, &sym));
    for (name, _) in &state_vars[1..] {
        init.insert(name.clone(), sym[name].clone());
    }

    // Inside the loop, state variables are symbolic; other locals are constants.
    let mut head: HashMap<String, Expr> = sym
        .iter()
        .filter(|(n, _)| !is_state(n))
        .map(|(n, e)| (n.clone(), e.clone()))
        .collect();
    for (n, _) in &state_vars {
        head.insert(n.clone(), Expr::var(n));
    }
    let cond = Expr::lt(Expr::var(counter), translate(hi, &head));

    let mut cur = head.clone();
    for s in body {
        match s {
            Stmt::Let { name, init, .. } => {
                let v = translate(init, &cur);
                cur.insert(name.clone(), v);
            }
            Stmt::Assign { name, value, .. } => {
                let v = translate(value, &cur);
                cur.insert(name.clone(), v);
            }
            Stmt::Push { name, value, .. } => {
                let v = Expr::append(cur[name].clone(), translate(value, &cur));
                cur.insert(name.clone(), v);
            }
            Stmt::For { pos, .. } => return Err(unsupported(*pos, "nested loops")),
            Stmt::Return { pos, .. } => return Err(unsupported(*pos, "return inside a loop")),
        }
    }
    let mut update = BTreeMap::new();
    for (name, _) in &state_vars {
        update.insert(name.clone(), cur[name].clone());
    }
    update.insert(counter.clone(), Expr::add(Expr::var(counter), Expr::int(1)));

    let output_type = state_vars
        .iter()
        .find(|(n, _)| *n == output_var)
        .map(|(_, t)| *t)
        .unwrap();
    Ok(LoopNest {
        name: ast.name.clone(),
        params,
        state_vars,
        init,
        cond,
        update,
        output_var,
        output_type,
        counter: counter.clone(),
    })
}
