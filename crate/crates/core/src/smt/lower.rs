//! IR expressions to SMT terms, plus definitional unfolding of operators.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::ir::{BinOp, Expr, IrError, Type};
use crate::target::Registry;

use super::term::{Arena, Node, TermId};

pub type TermEnv = HashMap<String, TermId>;

/// Accumulates the terms and background facts of one solver query.
pub struct Builder<'r> {
    pub arena: Arena,
    pub reg: &'r Registry,
    pub facts: Vec<TermId>,
    unfolded: HashSet<TermId>,
}

impl<'r> Builder<'r> {
    pub fn new(reg: &'r Registry) -> Builder<'r> {
        Builder {
            arena: Arena::new(),
            reg,
            facts: Vec::new(),
            unfolded: HashSet::new(),
        }
    }

    pub fn lower(&mut self, e: &Expr, env: &TermEnv) -> Result<TermId, IrError> {
        let a = &mut self.arena;
        Ok(match e {
            Expr::Int(v) => a.int(v.clone()),
            Expr::Bool(b) => a.bool(*b),
            Expr::Var(v) => *env
                .get(v)
                .ok_or_else(|| IrError::UnboundVariable(v.clone()))?,
            Expr::Binary(op, x, y) => {
                let x = self.lower(x, env)?;
                let y = self.lower(y, env)?;
                let a = &mut self.arena;
                match op {
                    BinOp::Add => a.add(x, y),
                    BinOp::Sub => a.sub(x, y),
                    BinOp::Mul => a.mul(x, y),
                    BinOp::Mod => a.modulo(x, y),
                    BinOp::Lt => a.lt(x, y),
                    BinOp::Le => a.le(x, y),
                    BinOp::Eq => a.eq(x, y),
                    BinOp::And => a.and(vec![x, y]),
                    BinOp::Or => a.or(vec![x, y]),
                    BinOp::Implies => a.implies(x, y),
                }
            }
            Expr::Not(x) => {
                let x = self.lower(x, env)?;
                self.arena.not(x)
            }
            Expr::Ite(c, x, y) => {
                let c = self.lower(c, env)?;
                let x = self.lower(x, env)?;
                let y = self.lower(y, env)?;
                self.arena.ite(c, x, y)
            }
            Expr::Empty(t) => a.empty(*t),
            Expr::List(items) => {
                let elems = items
                    .iter()
                    .map(|i| self.lower(i, env))
                    .collect::<Result<Vec<_>, _>>()?;
                let sort = Type::seq_of(self.arena.sort(elems[0]))
                    .ok_or_else(|| IrError::type_error(e, "nested too deeply"))?;
                self.arena.from_elems(&elems, sort)
            }
            Expr::Len(s) => {
                let s = self.lower(s, env)?;
                self.arena.len_of(s)
            }
            Expr::Index(s, i) => {
                let s = self.lower(s, env)?;
                let i = self.lower(i, env)?;
                self.arena.nth(s, i)
            }
            Expr::Append(s, x) => {
                let s = self.lower(s, env)?;
                let x = self.lower(x, env)?;
                let u = self.arena.unit(x);
                self.arena.concat(s, u)
            }
            Expr::Prepend(x, s) => {
                let x = self.lower(x, env)?;
                let s = self.lower(s, env)?;
                let u = self.arena.unit(x);
                self.arena.concat(u, s)
            }
            Expr::Slice(s, lo, hi) => {
                let s = self.lower(s, env)?;
                let lo = self.lower(lo, env)?;
                let hi = self.lower(hi, env)?;
                self.arena.slice(s, lo, hi)
            }
            Expr::Call(f, args) => {
                let ret = self
                    .reg
                    .get(f)
                    .ok_or_else(|| IrError::UnknownOperator(f.clone()))?
                    .sig
                    .ret;
                let args = args
                    .iter()
                    .map(|x| self.lower(x, env))
                    .collect::<Result<Vec<_>, _>>()?;
                self.arena.call(f, args, ret)
            }
        })
    }

    /// `requires => call = body` for one call term.
    fn definition(&mut self, call: TermId) -> Result<TermId, IrError> {
        let Node::Call(name, args) = self.arena.node(call).clone() else {
            unreachable!("definition of a non-call")
        };
        let op = self
            .reg
            .get(&name)
            .ok_or_else(|| IrError::UnknownOperator(name.clone()))?;
        let env: TermEnv = op
            .params()
            .iter()
            .map(|(p, _)| p.clone())
            .zip(args)
            .collect();
        let mut reqs = Vec::new();
        for r in &op.requires {
            reqs.push(self.lower(&r.cond, &env)?);
        }
        let body = self.lower(&op.body, &env)?;
        let pre = self.arena.and(reqs);
        let eq = self.arena.eq(call, body);
        Ok(self.arena.implies(pre, eq))
    }

    fn calls_in(&self, roots: &[TermId]) -> Vec<TermId> {
        self.arena
            .reachable(roots)
            .into_iter()
            .filter(|t| matches!(self.arena.node(*t), Node::Call(..)))
            .collect()
    }

    /// Parameter positions on which `f` only recurses through `(slice p k (len p))`, k >= 1.
    fn decreasing_params(&self, f: &str) -> Vec<usize> {
        let Some(op) = self.reg.get(f) else {
            return Vec::new();
        };
        let mut self_calls = Vec::new();
        op.body.visit(&mut |e| {
            if let Expr::Call(g, args) = e {
                if g == f {
                    self_calls.push(args);
                }
            }
        });
        if self_calls.is_empty() {
            return Vec::new();
        }
        (0..op.params().len())
            .filter(|&i| {
                let p = Expr::var(&op.params()[i].0);
                self_calls.iter().all(|args| match &args[i] {
                    Expr::Slice(b, lo, hi) => {
                        **b == p
                            && matches!(&**lo, Expr::Int(k) if *k >= 1.into())
                            && **hi == Expr::len(p.clone())
                    }
                    _ => false,
                })
            })
            .collect()
    }

    /// True when `call` recurses on a literal sequence that shrinks each time,
    /// so unfolding it completely terminates.
    fn literal_bounded(&self, call: TermId) -> bool {
        let Node::Call(f, xs) = self.arena.node(call) else {
            return false;
        };
        self.decreasing_params(f)
            .into_iter()
            .any(|i| self.arena.literal_elems(xs[i]).is_some())
    }

    /// Add definitional instances for every call reachable from `roots`, up to
    /// `depth` nested unfoldings. Calls recursing on a shrinking literal are free.
    pub fn unfold(&mut self, roots: &[TermId], depth: usize) -> Result<(), IrError> {
        let mut best: HashMap<TermId, usize> = HashMap::new();
        let mut queue: VecDeque<(TermId, usize)> = VecDeque::new();
        for c in self.calls_in(roots) {
            best.insert(c, 0);
            queue.push_back((c, 0));
        }
        while let Some((call, d)) = queue.pop_front() {
            if d >= depth || best.get(&call).is_some_and(|b| *b < d) || !self.unfolded.insert(call)
            {
                continue;
            }
            let fact = self.definition(call)?;
            self.facts.push(fact);
            for child in self.calls_in(&[fact]) {
                if self.unfolded.contains(&child) {
                    continue;
                }
                let free = self.literal_bounded(child);
                let cd = if free { d } else { d + 1 };
                if best.get(&child).is_some_and(|b| *b <= cd) {
                    continue;
                }
                best.insert(child, cd);
                if free {
                    queue.push_front((child, cd));
                } else {
                    queue.push_back((child, cd));
                }
            }
        }
        Ok(())
    }
}
