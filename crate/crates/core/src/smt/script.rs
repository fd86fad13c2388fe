//! SMT-LIB v2.6 rendering of a term arena.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::ir::Type;
use crate::target::Registry;

use super::term::{Arena, Lin, Node, TermId};

/// Names that cannot be declared as constants or functions.
const RESERVED: &[&str] = &[
    "abs", "and", "as", "assert", "distinct", "div", "exists", "false", "forall", "ite", "let",
    "mod", "not", "or", "par", "true", "xor", "Int", "Bool", "Seq", "Real", "String", "_", "!",
    "to_real", "to_int", "is_int", "min", "max", "select", "store", "const",
];

/// Symbol used in the script for an IR variable or operator name.
pub fn symbol(name: &str) -> String {
    if RESERVED.contains(&name) {
        format!("{name}!")
    } else {
        name.to_string()
    }
}

pub fn sort_name(t: Type) -> &'static str {
    match t {
        Type::Int => "Int",
        Type::Bool => "Bool",
        Type::SeqInt => "(Seq Int)",
        Type::SeqSeqInt => "(Seq (Seq Int))",
    }
}

fn int_lit(v: &BigInt) -> String {
    if v.is_negative() {
        format!("(- {})", -v)
    } else {
        v.to_string()
    }
}

struct Printer<'a> {
    arena: &'a Arena,
    shared: HashMap<TermId, String>,
}

impl Printer<'_> {
    fn term(&self, t: TermId) -> String {
        match self.shared.get(&t) {
            Some(name) => name.clone(),
            None => self.node(t),
        }
    }

    fn lin(&self, l: &Lin) -> String {
        let mut items: Vec<String> = l
            .terms
            .iter()
            .map(|(t, c)| {
                let x = self.term(*t);
                if c.is_one() {
                    x
                } else if *c == BigInt::from(-1) {
                    format!("(- {x})")
                } else {
                    format!("(* {} {x})", int_lit(c))
                }
            })
            .collect();
        if items.is_empty() {
            return int_lit(&l.constant);
        }
        if l.constant.is_positive() {
            items.push(l.constant.to_string());
        }
        let sum = if items.len() == 1 {
            items.pop().unwrap()
        } else {
            format!("(+ {})", items.join(" "))
        };
        if l.constant.is_negative() {
            format!("(- {sum} {})", -&l.constant)
        } else {
            sum
        }
    }

    fn list(&self, head: &str, xs: &[TermId]) -> String {
        let parts: Vec<String> = xs.iter().map(|x| self.term(*x)).collect();
        format!("({head} {})", parts.join(" "))
    }

    /// Rendering of a node itself, with shared children by name.
    fn node(&self, t: TermId) -> String {
        let a = self.arena;
        match a.node(t) {
            Node::Const(name, _) => symbol(name),
            Node::Lin(l) => self.lin(l),
            Node::Mul(x, y) => self.list("*", &[*x, *y]),
            Node::Mod(x, y) => self.list("mod", &[*x, *y]),
            Node::Clamp(v, lo, hi) => {
                let (v, lo_t, hi_t) = (*v, *lo, *hi);
                let (sv, slo, shi) = (self.term(v), self.term(lo_t), self.term(hi_t));
                let upper = format!("(ite (< {shi} {sv}) {shi} {sv})");
                if a.proves_le(lo_t, v) {
                    upper
                } else if a.proves_le(v, hi_t) {
                    format!("(ite (< {sv} {slo}) {slo} {sv})")
                } else {
                    format!("(ite (< {sv} {slo}) {slo} {upper})")
                }
            }
            Node::Len(s) => self.list("seq.len", &[*s]),
            Node::Nth(s, i) => self.list("seq.nth", &[*s, *i]),
            Node::Bool(b) => b.to_string(),
            Node::Not(x) => self.list("not", &[*x]),
            Node::And(xs) => self.list("and", xs),
            Node::Or(xs) => self.list("or", xs),
            Node::Implies(x, y) => self.list("=>", &[*x, *y]),
            Node::Eq(x, y) => self.list("=", &[*x, *y]),
            Node::Le(x, y) => self.list("<=", &[*x, *y]),
            Node::Ite(c, x, y) => self.list("ite", &[*c, *x, *y]),
            Node::Empty(sort) => format!("(as seq.empty {})", sort_name(*sort)),
            Node::Unit(x) => self.list("seq.unit", &[*x]),
            Node::Concat(x, y) => self.list("seq.++", &[*x, *y]),
            Node::View(base, lo, hi) => {
                let width = a.lin(*hi).sub(&a.lin(*lo));
                format!(
                    "(seq.extract {} {} {})",
                    self.term(*base),
                    self.term(*lo),
                    self.lin(&width)
                )
            }
            Node::Call(f, xs) if xs.is_empty() => symbol(f),
            Node::Call(f, xs) => self.list(&symbol(f), xs),
        }
    }
}

/// Number of times each term is printed when its parents are printed inline.
fn occurrences(arena: &Arena, reachable: &[TermId], roots: &[TermId]) -> HashMap<TermId, usize> {
    let mut count: HashMap<TermId, usize> = HashMap::new();
    for r in roots {
        *count.entry(*r).or_default() += 1;
    }
    for t in reachable {
        let weight = match arena.node(*t) {
            Node::Clamp(..) => 2,
            _ => 1,
        };
        for c in arena.children(*t) {
            *count.entry(c).or_default() += weight;
        }
        if let Node::View(_, lo, hi) = arena.node(*t) {
            *count.entry(*lo).or_default() += 1;
            for (c, _) in arena.lin(*hi).terms {
                *count.entry(c).or_default() += 1;
            }
        }
    }
    count
}

fn is_leaf(arena: &Arena, t: TermId) -> bool {
    match arena.node(t) {
        Node::Const(..) | Node::Bool(_) | Node::Empty(_) => true,
        Node::Lin(l) => l.terms.is_empty(),
        Node::Call(_, xs) => xs.is_empty(),
        _ => false,
    }
}

/// Render a complete script: declarations, shared definitions, assertions and
/// `check-sat`. Terms used more than once are bound once with `define-fun`.
pub fn render(arena: &Arena, reg: &Registry, asserts: &[TermId]) -> String {
    let reachable = arena.reachable(asserts);
    let count = occurrences(arena, &reachable, asserts);
    let mut out = String::from("(set-logic ALL)\n");

    let mut ops: Vec<&str> = Vec::new();
    for t in &reachable {
        if let Node::Call(f, _) = arena.node(*t) {
            if !ops.contains(&f.as_str()) {
                ops.push(f);
            }
        }
    }
    ops.sort_by_key(|f| reg.position(f));
    for f in ops {
        let sig = &reg.get(f).expect("operator in registry").sig;
        let params: Vec<&str> = sig.params.iter().map(|(_, t)| sort_name(*t)).collect();
        let _ = writeln!(
            out,
            "(declare-fun {} ({}) {})",
            symbol(f),
            params.join(" "),
            sort_name(sig.ret)
        );
    }
    // Every constant is declared, even when folding removed its uses, so that
    // `get-value` can still name it.
    for i in 0..arena.len() as u32 {
        if let Node::Const(name, sort) = arena.node(TermId(i)) {
            let _ = writeln!(out, "(declare-const {} {})", symbol(name), sort_name(*sort));
        }
    }

    let mut p = Printer {
        arena,
        shared: HashMap::new(),
    };
    for t in &reachable {
        if count.get(t).copied().unwrap_or(0) >= 2 && !is_leaf(arena, *t) {
            let name = format!("t!{}", p.shared.len());
            let _ = writeln!(
                out,
                "(define-fun {name} () {} {})",
                sort_name(arena.sort(*t)),
                p.node(*t)
            );
            p.shared.insert(*t, name);
        }
    }
    for a in asserts {
        let _ = writeln!(out, "(assert {})", p.term(*a));
    }
    out.push_str("(check-sat)\n");
    out
}
