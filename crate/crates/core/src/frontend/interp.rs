use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::ir::{eval, Env, IrError, NoOperators, Value};

use super::analyze::LoopNest;
use super::ast::{ExprKind, SourceAst, SrcBinOp, SrcExpr, Stmt};
use super::FrontendError;

/// Iteration budget for a single execution.
pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Val {
    Int(BigInt),
    Bool(bool),
    List(Vec<BigInt>),
}

struct Machine {
    vars: HashMap<String, Val>,
    fuel: u64,
}

fn runtime(e: IrError) -> FrontendError {
    FrontendError::Runtime(e)
}

impl Machine {
    fn list(&self, name: &str) -> Result<&Vec<BigInt>, FrontendError> {
        match self.vars.get(name) {
            Some(Val::List(l)) => Ok(l),
            _ => Err(runtime(IrError::UnboundVariable(name.to_string()))),
        }
    }

    fn int(&self, e: &SrcExpr) -> Result<BigInt, FrontendError> {
        match self.expr(e)? {
            Val::Int(v) => Ok(v),
            _ => Err(runtime(IrError::TypeError {
                expr: format!("expression at {}", e.pos),
                message: "expected int".into(),
            })),
        }
    }

    fn expr(&self, e: &SrcExpr) -> Result<Val, FrontendError> {
        Ok(match &e.kind {
            ExprKind::Int(v) => Val::Int(v.clone()),
            ExprKind::EmptyList => Val::List(Vec::new()),
            ExprKind::Var(v) => self
                .vars
                .get(v)
                .cloned()
                .ok_or_else(|| runtime(IrError::UnboundVariable(v.clone())))?,
            ExprKind::Len(v) => Val::Int(self.list(v)?.len().into()),
            ExprKind::Index(v, i) => {
                let l = self.list(v)?;
                let idx = self.int(i)?;
                let at = idx.to_usize().filter(|p| *p < l.len()).ok_or_else(|| {
                    runtime(IrError::IndexOutOfBounds {
                        index: idx.to_string(),
                        len: l.len(),
                    })
                })?;
                Val::Int(l[at].clone())
            }
            ExprKind::Binary(op, a, b) => match op {
                SrcBinOp::And => {
                    let x = self.expr(a)? == Val::Bool(true);
                    Val::Bool(x && self.expr(b)? == Val::Bool(true))
                }
                SrcBinOp::Eq => Val::Bool(self.expr(a)? == self.expr(b)?),
                _ => {
                    let (x, y) = (self.int(a)?, self.int(b)?);
                    match op {
                        SrcBinOp::Add => Val::Int(x + y),
                        SrcBinOp::Sub => Val::Int(x - y),
                        SrcBinOp::Mul => Val::Int(x * y),
                        SrcBinOp::Lt => Val::Bool(x < y),
                        SrcBinOp::Le => Val::Bool(x <= y),
                        SrcBinOp::Eq | SrcBinOp::And => unreachable!(),
                    }
                }
            },
        })
    }

    /// Run statements; returns the value of a `return` if one executes.
    fn exec(&mut self, stmts: &[Stmt]) -> Result<Option<Val>, FrontendError> {
        for s in stmts {
            match s {
                Stmt::Let {
                    name, init: value, ..
                }
                | Stmt::Assign { name, value, .. } => {
                    let v = self.expr(value)?;
                    self.vars.insert(name.clone(), v);
                }
                Stmt::Push { name, value, .. } => {
                    let v = self.int(value)?;
                    match self.vars.get_mut(name) {
                        Some(Val::List(l)) => l.push(v),
                        _ => return Err(runtime(IrError::UnboundVariable(name.clone()))),
                    }
                }
                Stmt::For {
                    var, lo, hi, body, ..
                } => {
                    let mut i = self.int(lo)?;
                    loop {
                        self.vars.insert(var.clone(), Val::Int(i.clone()));
                        if i >= self.int(hi)? {
                            break;
                        }
                        if self.fuel == 0 {
                            return Err(FrontendError::FuelExhausted);
                        }
                        self.fuel -= 1;
                        if let Some(v) = self.exec(body)? {
                            return Ok(Some(v));
                        }
                        i += 1;
                    }
                    self.vars.remove(var);
                }
                Stmt::Return { value, .. } => return Ok(Some(self.expr(value)?)),
            }
        }
        Ok(None)
    }
}

fn to_val(v: &Value) -> Val {
    match v {
        Value::Int(i) => Val::Int(i.clone()),
        Value::Bool(b) => Val::Bool(*b),
        Value::Seq(s) => Val::List(s.clone()),
        Value::Matrix(_) => Val::List(Vec::new()),
    }
}

/// Execute the source program directly, statement by statement.
pub fn run_source(ast: &SourceAst, inputs: &Env, fuel: u64) -> Result<Value, FrontendError> {
    let mut m = Machine {
        vars: HashMap::new(),
        fuel,
    };
    for (p, _) in &ast.params {
        let v = inputs
            .get(p)
            .ok_or_else(|| runtime(IrError::UnboundVariable(p.clone())))?;
        m.vars.insert(p.clone(), to_val(v));
    }
    match m.exec(&ast.body)? {
        Some(Val::Int(v)) => Ok(Value::Int(v)),
        Some(Val::List(l)) => Ok(Value::Seq(l)),
        Some(Val::Bool(b)) => Ok(Value::Bool(b)),
        None => Err(runtime(IrError::UnboundVariable("<return>".into()))),
    }
}

/// Loop-head states of one execution plus the final output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    /// Environments binding params and state variables, one per loop-head visit
    /// (the initial state first, the exit state last).
    pub states: Vec<Env>,
    pub output: Value,
}

impl Trace {
    pub fn final_state(&self) -> &Env {
        self.states.last().expect("a trace has at least one state")
    }
}

/// Execute a [`LoopNest`]: initialize, iterate `update` while `cond`, read the output.
pub fn run_loop(nest: &LoopNest, inputs: &Env, fuel: u64) -> Result<Trace, FrontendError> {
    let mut env = Env::new();
    for (p, _) in &nest.params {
        let v = inputs
            .get(p)
            .ok_or_else(|| runtime(IrError::UnboundVariable(p.clone())))?;
        env.insert(p.clone(), v.clone());
    }
    let mut state = env.clone();
    for (v, _) in &nest.state_vars {
        let value = eval(&nest.init[v], &env, &NoOperators).map_err(runtime)?;
        state.insert(v.clone(), value);
    }
    let mut states = Vec::new();
    let mut fuel = fuel;
    loop {
        states.push(state.clone());
        match eval(&nest.cond, &state, &NoOperators).map_err(runtime)? {
            Value::Bool(true) => {}
            _ => break,
        }
        if fuel == 0 {
            return Err(FrontendError::FuelExhausted);
        }
        fuel -= 1;
        let mut next = env.clone();
        for (v, _) in &nest.state_vars {
            let value = eval(&nest.update[v], &state, &NoOperators).map_err(runtime)?;
            next.insert(v.clone(), value);
        }
        state = next;
    }
    let output = state[&nest.output_var].clone();
    Ok(Trace { states, output })
}
