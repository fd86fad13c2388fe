//! Deterministic enumeration of (summary, invariant) candidates.

use std::rc::Rc;

use crate::frontend::LoopNest;
use crate::ir::{simplify, Expr, Type, Value};
use crate::target::{OpRole, Registry};
use crate::vcgen::{Candidate, CandidateMeta};

use super::config::GrammarConfig;

/// An operator composition with its constant parameters left open.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Skeleton {
    Param(String),
    Hole { op: String, param: String },
    Op { name: String, args: Vec<Skeleton> },
}

impl Skeleton {
    /// Holes in preorder.
    fn holes(&self, out: &mut Vec<(String, String)>) {
        match self {
            Skeleton::Param(_) => {}
            Skeleton::Hole { op, param } => out.push((op.clone(), param.clone())),
            Skeleton::Op { args, .. } => args.iter().for_each(|a| a.holes(out)),
        }
    }

    /// Build the expression with holes filled in preorder from `values`.
    fn fill(&self, values: &mut std::slice::Iter<'_, Value>, leaf: &dyn Fn(&str) -> Expr) -> Expr {
        match self {
            Skeleton::Param(p) => leaf(p),
            Skeleton::Hole { .. } => values.next().expect("one value per hole").to_expr(),
            Skeleton::Op { name, args } => {
                Expr::call(name, args.iter().map(|a| a.fill(values, leaf)).collect())
            }
        }
    }

    fn top(&self) -> Option<&str> {
        match self {
            Skeleton::Op { name, .. } => Some(name),
            _ => None,
        }
    }
}

fn in_grammar(role: OpRole, cfg: &GrammarConfig) -> bool {
    match role {
        OpRole::Search => true,
        OpRole::Optional => cfg.enable_empty_op,
        OpRole::Library | OpRole::Helper => false,
    }
}

/// Ways to split `total` into `parts` nonnegative sizes, lexicographically.
fn splits(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in splits(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

struct SkeletonGen<'a> {
    nest: &'a LoopNest,
    reg: &'a Registry,
    cfg: &'a GrammarConfig,
}

impl SkeletonGen<'_> {
    /// Terms of type `ty` with exactly `size` operator nodes and nesting at most `depth`.
    fn of(&self, ty: Type, size: usize, depth: usize) -> Vec<Skeleton> {
        if size == 0 {
            return self
                .nest
                .params
                .iter()
                .filter(|(_, t)| *t == ty)
                .map(|(p, _)| Skeleton::Param(p.clone()))
                .collect();
        }
        if depth == 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for op in self.reg.operators() {
            if op.sig.ret != ty || !in_grammar(op.role, self.cfg) {
                continue;
            }
            let slots: Vec<(usize, Option<Type>)> = op
                .params()
                .iter()
                .enumerate()
                .map(|(i, (p, t))| {
                    (
                        i,
                        self.cfg.grid(self.reg, &op.name, p).is_none().then_some(*t),
                    )
                })
                .collect();
            let open: Vec<Type> = slots.iter().filter_map(|(_, t)| *t).collect();
            for split in splits(size - 1, open.len()) {
                let choices: Vec<Vec<Skeleton>> = open
                    .iter()
                    .zip(&split)
                    .map(|(t, s)| self.of(*t, *s, depth - 1))
                    .collect();
                for combo in product(&choices) {
                    let mut it = combo.into_iter();
                    let args = slots
                        .iter()
                        .map(|(i, t)| match t {
                            Some(_) => it.next().expect("one choice per open slot"),
                            None => Skeleton::Hole {
                                op: op.name.clone(),
                                param: op.params()[*i].0.clone(),
                            },
                        })
                        .collect();
                    out.push(Skeleton::Op {
                        name: op.name.clone(),
                        args,
                    });
                }
            }
        }
        out
    }
}

/// Cartesian product, first position most significant.
fn product<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for c in choices {
        let mut next = Vec::with_capacity(out.len() * c.len());
        for prefix in &out {
            for x in c {
                let mut p = prefix.clone();
                p.push(x.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Summary skeletons for the loop output, ordered by size then construction order.
pub fn skeletons(nest: &LoopNest, cfg: &GrammarConfig, reg: &Registry) -> Vec<Skeleton> {
    let g = SkeletonGen { nest, reg, cfg };
    // A tree of depth D whose nodes have at most A operator children.
    let arity = reg
        .operators()
        .iter()
        .filter(|op| in_grammar(op.role, cfg))
        .map(|op| {
            op.params()
                .iter()
                .filter(|(p, _)| cfg.grid(reg, &op.name, p).is_none())
                .count()
        })
        .max()
        .unwrap_or(0)
        .max(1);
    let max_size = (0..cfg.max_op_depth)
        .map(|d| arity.pow(d as u32))
        .sum::<usize>();
    let mut out = Vec::new();
    for size in 1..=max_size {
        out.extend(g.of(nest.output_type, size, cfg.max_op_depth));
    }
    out
}

/// One summary and its invariant variants, which share enumeration order.
/// Invariants are built on demand, since most summaries are refuted first.
#[derive(Clone, Debug)]
pub struct Family<'a> {
    pub ps: Expr,
    nest: &'a LoopNest,
    cfg: &'a GrammarConfig,
    skel: Rc<Skeleton>,
    values: Vec<Value>,
    bounds: Rc<Vec<Vec<Expr>>>,
}

impl Family<'_> {
    pub fn operator(&self) -> Option<String> {
        self.skel.top().map(str::to_string)
    }

    /// `(operator.param, value)` per hole, in preorder.
    pub fn holes(&self) -> Vec<(String, String)> {
        let mut names = Vec::new();
        self.skel.holes(&mut names);
        names
            .iter()
            .zip(&self.values)
            .map(|((op, p), v)| (format!("{op}.{p}"), v.to_expr().to_string()))
            .collect()
    }

    fn has_seq_leaf(&self) -> bool {
        fn walk(s: &Skeleton, nest: &LoopNest) -> bool {
            match s {
                Skeleton::Param(p) => nest.param_type(p).is_some_and(Type::is_seq),
                Skeleton::Hole { .. } => false,
                Skeleton::Op { args, .. } => args.iter().any(|a| walk(a, nest)),
            }
        }
        walk(&self.skel, self.nest)
    }

    /// Number of invariant variants, without building them.
    pub fn len(&self) -> usize {
        let offsets = if self.has_seq_leaf() {
            self.cfg.slice_offsets.len()
        } else {
            1
        };
        offsets * self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Invariants in order: slice offset, then bound conjunct option.
    pub fn invs(&self) -> Vec<Expr> {
        let mut names = Vec::new();
        self.skel.holes(&mut names);
        // Prefixes advance by the first stride-like constant per iteration.
        let step = names
            .iter()
            .zip(&self.values)
            .find(|((_, p), _)| p == "stride")
            .map(|(_, v)| v.to_expr())
            .unwrap_or_else(|| Expr::int(1));
        let i = Expr::var(&self.nest.counter);
        let elapsed = Expr::sub(i, self.nest.counter_init().clone());
        let out = Expr::var(&self.nest.output_var);
        let offsets = if self.has_seq_leaf() {
            &self.cfg.slice_offsets[..]
        } else {
            &self.cfg.slice_offsets[..1]
        };
        let mut invs = Vec::new();
        for c in offsets {
            let hi = simplify(&Expr::add(
                Expr::mul(step.clone(), elapsed.clone()),
                Expr::int(*c),
            ));
            let leaf = |p: &str| match self.nest.param_type(p) {
                Some(t) if t.is_seq() => Expr::slice(Expr::var(p), Expr::int(0), hi.clone()),
                _ => Expr::var(p),
            };
            let body = Expr::eq(out.clone(), self.skel.fill(&mut self.values.iter(), &leaf));
            for extra in self.bounds.iter() {
                invs.push(Expr::and_all(extra.iter().cloned().chain([body.clone()])));
            }
        }
        invs
    }
}

/// Counter bound conjunct options, in enumeration order.
fn bound_options(nest: &LoopNest, cfg: &GrammarConfig) -> Vec<Vec<Expr>> {
    let i = Expr::var(&nest.counter);
    let lo = nest.counter_init().clone();
    let hi = nest.bound().clone();
    let mut out = vec![vec![]];
    if cfg.bound_conjuncts {
        let ge = Expr::le(lo, i.clone());
        let le = Expr::le(i.clone(), hi.clone());
        out.push(vec![ge.clone()]);
        out.push(vec![le.clone()]);
        out.push(vec![ge, le]);
        out.push(vec![Expr::lt(i, hi)]);
    }
    out
}

/// Lazily expands skeletons and hole tuples into families.
pub struct Families<'a> {
    nest: &'a LoopNest,
    cfg: &'a GrammarConfig,
    skeletons: Vec<Rc<Skeleton>>,
    grids: Vec<Vec<Vec<Value>>>,
    bounds: Rc<Vec<Vec<Expr>>>,
    skel: usize,
    /// Odometer over the current skeleton's hole grids; `None` before its first tuple.
    digits: Option<Vec<usize>>,
}

impl<'a> Families<'a> {
    pub fn new(nest: &'a LoopNest, cfg: &'a GrammarConfig, reg: &'a Registry) -> Families<'a> {
        let skeletons: Vec<Rc<Skeleton>> =
            skeletons(nest, cfg, reg).into_iter().map(Rc::new).collect();
        let grids = skeletons
            .iter()
            .map(|s| {
                let mut hs = Vec::new();
                s.holes(&mut hs);
                hs.iter()
                    .map(|(op, p)| cfg.grid(reg, op, p).expect("holes have grids"))
                    .collect()
            })
            .collect();
        Families {
            nest,
            cfg,
            skeletons,
            grids,
            bounds: Rc::new(bound_options(nest, cfg)),
            skel: 0,
            digits: None,
        }
    }

    fn advance(&mut self) -> bool {
        while self.skel < self.skeletons.len() {
            let grids = &self.grids[self.skel];
            match &mut self.digits {
                None => {
                    if grids.iter().all(|g| !g.is_empty()) {
                        self.digits = Some(vec![0; grids.len()]);
                        return true;
                    }
                }
                Some(d) => {
                    for pos in (0..d.len()).rev() {
                        d[pos] += 1;
                        if d[pos] < grids[pos].len() {
                            return true;
                        }
                        d[pos] = 0;
                    }
                }
            }
            self.skel += 1;
            self.digits = None;
        }
        false
    }

    fn build(&self) -> Family<'a> {
        let skel = &self.skeletons[self.skel];
        let digits = self.digits.as_ref().expect("positioned on a tuple");
        let values: Vec<Value> = digits
            .iter()
            .zip(&self.grids[self.skel])
            .map(|(d, g)| g[*d].clone())
            .collect();
        let out = Expr::var(&self.nest.output_var);
        let ps = Expr::eq(out, skel.fill(&mut values.iter(), &Expr::var));
        Family {
            ps,
            nest: self.nest,
            cfg: self.cfg,
            skel: skel.clone(),
            values,
            bounds: self.bounds.clone(),
        }
    }
}

impl<'a> Iterator for Families<'a> {
    type Item = Family<'a>;

    fn next(&mut self) -> Option<Family<'a>> {
        self.advance().then(|| self.build())
    }
}

/// The candidate stream: families flattened, indexed, and cut at `max_candidates`.
pub fn enumerate_candidates<'a>(
    nest: &'a LoopNest,
    cfg: &'a GrammarConfig,
    reg: &'a Registry,
) -> impl Iterator<Item = Candidate> + 'a {
    Families::new(nest, cfg, reg)
        .flat_map(|f| {
            let (operator, holes) = (f.operator(), f.holes());
            let ps = f.ps.clone();
            f.invs().into_iter().map(move |inv| Candidate {
                ps: ps.clone(),
                inv,
                meta: CandidateMeta {
                    index: 0,
                    operator: operator.clone(),
                    holes: holes.clone(),
                },
            })
        })
        .enumerate()
        .map(|(index, mut c)| {
            c.meta.index = index;
            c
        })
        .take(cfg.max_candidates.unwrap_or(usize::MAX))
}
