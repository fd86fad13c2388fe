//! Hash-consed SMT terms with linear-arithmetic normalization.
//!
//! Integer terms are kept as linear combinations over non-linear "atoms", so
//! clamp bounds coming from nested slices can often be decided statically.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::ir::Type;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(pub u32);

/// `constant + sum(coef * atom)`, atoms sorted by id.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lin {
    pub terms: Vec<(TermId, BigInt)>,
    pub constant: BigInt,
}

impl Lin {
    pub fn constant(c: BigInt) -> Lin {
        Lin {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn atom(t: TermId) -> Lin {
        Lin {
            terms: vec![(t, BigInt::one())],
            constant: BigInt::zero(),
        }
    }

    pub fn as_constant(&self) -> Option<&BigInt> {
        self.terms.is_empty().then_some(&self.constant)
    }

    pub fn scale(&self, k: &BigInt) -> Lin {
        if k.is_zero() {
            return Lin::constant(BigInt::zero());
        }
        Lin {
            terms: self.terms.iter().map(|(t, c)| (*t, c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    /// `self + k * other`
    pub fn plus(&self, other: &Lin, k: &BigInt) -> Lin {
        let mut terms = self.terms.clone();
        for (t, c) in &other.terms {
            let add = c * k;
            match terms.binary_search_by_key(t, |(x, _)| *x) {
                Ok(p) => {
                    terms[p].1 += add;
                    if terms[p].1.is_zero() {
                        terms.remove(p);
                    }
                }
                Err(p) => {
                    if !add.is_zero() {
                        terms.insert(p, (*t, add));
                    }
                }
            }
        }
        Lin {
            terms,
            constant: &self.constant + &other.constant * k,
        }
    }

    pub fn sub(&self, other: &Lin) -> Lin {
        self.plus(other, &BigInt::from(-1))
    }

    pub fn add(&self, other: &Lin) -> Lin {
        self.plus(other, &BigInt::one())
    }

    pub fn offset(&self, c: i64) -> Lin {
        let mut l = self.clone();
        l.constant += c;
        l
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    /// A declared constant (quantified variable).
    Const(String, Type),
    /// Integer linear combination; also used for integer literals.
    Lin(Lin),
    Mul(TermId, TermId),
    Mod(TermId, TermId),
    /// `min(max(v, lo), hi)`, always built with `lo <= hi`.
    Clamp(TermId, TermId, TermId),
    Len(TermId),
    Nth(TermId, TermId),
    Bool(bool),
    Not(TermId),
    And(Vec<TermId>),
    Or(Vec<TermId>),
    Implies(TermId, TermId),
    Eq(TermId, TermId),
    Le(TermId, TermId),
    Ite(TermId, TermId, TermId),
    Empty(Type),
    Unit(TermId),
    Concat(TermId, TermId),
    /// Elements `[lo, hi)` of `base`, with `0 <= lo <= hi <= len(base)`.
    View(TermId, TermId, TermId),
    Call(String, Vec<TermId>),
}

pub struct Arena {
    nodes: Vec<(Node, Type)>,
    index: HashMap<Node, TermId>,
    /// Terms known to be non-negative (lengths, clamps with a non-negative floor).
    nonneg: Vec<bool>,
}

const PROOF_FUEL: usize = 12;

impl Default for Arena {
    fn default() -> Self {
        Arena::new()
    }
}

impl Arena {
    pub fn new() -> Arena {
        Arena {
            nodes: Vec::new(),
            index: HashMap::new(),
            nonneg: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, t: TermId) -> &Node {
        &self.nodes[t.0 as usize].0
    }

    pub fn sort(&self, t: TermId) -> Type {
        self.nodes[t.0 as usize].1
    }

    fn intern(&mut self, node: Node, sort: Type) -> TermId {
        if let Some(t) = self.index.get(&node) {
            return *t;
        }
        let id = TermId(self.nodes.len() as u32);
        let nonneg = match &node {
            Node::Len(_) => true,
            Node::Clamp(_, lo, _) => self.provably_nonneg(&self.lin(*lo)),
            _ => false,
        };
        self.nodes.push((node.clone(), sort));
        self.nonneg.push(nonneg);
        self.index.insert(node, id);
        id
    }

    // ---- integers ----

    pub fn lin(&self, t: TermId) -> Lin {
        match self.node(t) {
            Node::Lin(l) => l.clone(),
            _ => Lin::atom(t),
        }
    }

    pub fn mk_lin(&mut self, l: Lin) -> TermId {
        if l.constant.is_zero() && l.terms.len() == 1 && l.terms[0].1.is_one() {
            return l.terms[0].0;
        }
        self.intern(Node::Lin(l), Type::Int)
    }

    pub fn int(&mut self, v: impl Into<BigInt>) -> TermId {
        self.mk_lin(Lin::constant(v.into()))
    }

    pub fn const_int(&self, t: TermId) -> Option<BigInt> {
        self.lin(t).as_constant().cloned()
    }

    pub fn add(&mut self, a: TermId, b: TermId) -> TermId {
        let l = self.lin(a).add(&self.lin(b));
        self.mk_lin(l)
    }

    pub fn sub(&mut self, a: TermId, b: TermId) -> TermId {
        let l = self.lin(a).sub(&self.lin(b));
        self.mk_lin(l)
    }

    pub fn mul(&mut self, a: TermId, b: TermId) -> TermId {
        if let Some(k) = self.const_int(a) {
            let l = self.lin(b).scale(&k);
            return self.mk_lin(l);
        }
        if let Some(k) = self.const_int(b) {
            let l = self.lin(a).scale(&k);
            return self.mk_lin(l);
        }
        self.intern(Node::Mul(a, b), Type::Int)
    }

    pub fn modulo(&mut self, a: TermId, b: TermId) -> TermId {
        match (self.const_int(a), self.const_int(b)) {
            (_, Some(d)) if d.is_one() => self.int(0),
            (Some(x), Some(d)) if d.is_positive() => {
                let r = ((x % &d) + &d) % &d;
                self.int(r)
            }
            _ => self.intern(Node::Mod(a, b), Type::Int),
        }
    }

    /// Sound but incomplete check that a linear term is `>= 0`.
    pub fn provably_nonneg(&self, l: &Lin) -> bool {
        let mut l = l.clone();
        for _ in 0..PROOF_FUEL {
            let trivially = l.constant >= BigInt::zero()
                && l.terms
                    .iter()
                    .all(|(t, c)| c.is_positive() && self.nonneg[t.0 as usize]);
            if trivially {
                return true;
            }
            // Replace the outermost clamp by the bound that can only lower the sum.
            let Some((t, c)) = l
                .terms
                .iter()
                .rev()
                .find(|(t, _)| matches!(self.node(*t), Node::Clamp(..)))
                .cloned()
            else {
                return false;
            };
            let Node::Clamp(_, lo, hi) = self.node(t) else {
                unreachable!()
            };
            let bound = if c.is_positive() { *lo } else { *hi };
            l = l.plus(&Lin::atom(t), &-&c).plus(&self.lin(bound), &c);
        }
        false
    }

    /// Proves `a <= b`.
    pub fn proves_le(&self, a: TermId, b: TermId) -> bool {
        self.provably_nonneg(&self.lin(b).sub(&self.lin(a)))
    }

    /// `min(max(v, lo), hi)`; callers guarantee `lo <= hi`.
    pub fn clamp(&mut self, v: TermId, lo: TermId, hi: TermId) -> TermId {
        if self.proves_le(v, lo) {
            return lo;
        }
        if self.proves_le(hi, v) {
            return hi;
        }
        if self.proves_le(lo, v) && self.proves_le(v, hi) {
            return v;
        }
        self.intern(Node::Clamp(v, lo, hi), Type::Int)
    }

    // ---- booleans ----

    pub fn bool(&mut self, b: bool) -> TermId {
        self.intern(Node::Bool(b), Type::Bool)
    }

    pub fn const_bool(&self, t: TermId) -> Option<bool> {
        match self.node(t) {
            Node::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn not(&mut self, a: TermId) -> TermId {
        match self.node(a) {
            Node::Bool(b) => {
                let b = !*b;
                self.bool(b)
            }
            Node::Not(x) => *x,
            _ => self.intern(Node::Not(a), Type::Bool),
        }
    }

    pub fn and(&mut self, items: Vec<TermId>) -> TermId {
        let mut out = Vec::new();
        for t in items {
            let parts = match self.node(t) {
                Node::And(xs) => xs.clone(),
                _ => vec![t],
            };
            for p in parts {
                match self.const_bool(p) {
                    Some(true) => {}
                    Some(false) => return self.bool(false),
                    None => {
                        if !out.contains(&p) {
                            out.push(p)
                        }
                    }
                }
            }
        }
        match out.len() {
            0 => self.bool(true),
            1 => out[0],
            _ => self.intern(Node::And(out), Type::Bool),
        }
    }

    pub fn or(&mut self, items: Vec<TermId>) -> TermId {
        let mut out = Vec::new();
        for t in items {
            let parts = match self.node(t) {
                Node::Or(xs) => xs.clone(),
                _ => vec![t],
            };
            for p in parts {
                match self.const_bool(p) {
                    Some(false) => {}
                    Some(true) => return self.bool(true),
                    None => {
                        if !out.contains(&p) {
                            out.push(p)
                        }
                    }
                }
            }
        }
        match out.len() {
            0 => self.bool(false),
            1 => out[0],
            _ => self.intern(Node::Or(out), Type::Bool),
        }
    }

    pub fn implies(&mut self, a: TermId, b: TermId) -> TermId {
        match (self.const_bool(a), self.const_bool(b)) {
            (Some(false), _) | (_, Some(true)) => self.bool(true),
            (Some(true), _) => b,
            (_, Some(false)) => self.not(a),
            _ if a == b => self.bool(true),
            _ => self.intern(Node::Implies(a, b), Type::Bool),
        }
    }

    pub fn le(&mut self, a: TermId, b: TermId) -> TermId {
        if self.proves_le(a, b) {
            return self.bool(true);
        }
        let b1 = self.add_const(b, 1);
        if self.proves_le(b1, a) {
            return self.bool(false);
        }
        self.intern(Node::Le(a, b), Type::Bool)
    }

    pub fn lt(&mut self, a: TermId, b: TermId) -> TermId {
        let a1 = self.add_const(a, 1);
        self.le(a1, b)
    }

    pub fn add_const(&mut self, a: TermId, c: i64) -> TermId {
        let l = self.lin(a).offset(c);
        self.mk_lin(l)
    }

    pub fn eq(&mut self, a: TermId, b: TermId) -> TermId {
        if a == b {
            return self.bool(true);
        }
        match self.sort(a) {
            Type::Int => {
                if let Some(d) = self.lin(a).sub(&self.lin(b)).as_constant() {
                    let z = d.is_zero();
                    return self.bool(z);
                }
            }
            Type::Bool => {
                if let (Some(x), Some(y)) = (self.const_bool(a), self.const_bool(b)) {
                    return self.bool(x == y);
                }
            }
            _ => {
                if let (Some(x), Some(y)) = (self.literal_elems(a), self.literal_elems(b)) {
                    if x.len() != y.len() {
                        return self.bool(false);
                    }
                    let parts: Vec<TermId> =
                        x.iter().zip(&y).map(|(p, q)| self.eq(*p, *q)).collect();
                    return self.and(parts);
                }
            }
        }
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.intern(Node::Eq(a, b), Type::Bool)
    }

    pub fn ite(&mut self, c: TermId, a: TermId, b: TermId) -> TermId {
        match self.const_bool(c) {
            Some(true) => a,
            Some(false) => b,
            None if a == b => a,
            None => {
                let sort = self.sort(a);
                self.intern(Node::Ite(c, a, b), sort)
            }
        }
    }

    // ---- sequences ----

    pub fn constant(&mut self, name: &str, sort: Type) -> TermId {
        self.intern(Node::Const(name.to_string(), sort), sort)
    }

    pub fn empty(&mut self, sort: Type) -> TermId {
        self.intern(Node::Empty(sort), sort)
    }

    pub fn unit(&mut self, x: TermId) -> TermId {
        let sort = Type::seq_of(self.sort(x)).expect("element sort");
        self.intern(Node::Unit(x), sort)
    }

    pub fn concat(&mut self, a: TermId, b: TermId) -> TermId {
        if matches!(self.node(a), Node::Empty(_)) {
            return b;
        }
        if matches!(self.node(b), Node::Empty(_)) {
            return a;
        }
        let sort = self.sort(a);
        self.intern(Node::Concat(a, b), sort)
    }

    /// Element terms of a sequence built only from units, concatenation and views
    /// with constant bounds.
    pub fn literal_elems(&self, s: TermId) -> Option<Vec<TermId>> {
        match self.node(s) {
            Node::Empty(_) => Some(Vec::new()),
            Node::Unit(x) => Some(vec![*x]),
            Node::Concat(a, b) => {
                let mut v = self.literal_elems(*a)?;
                v.extend(self.literal_elems(*b)?);
                Some(v)
            }
            _ => None,
        }
    }

    pub fn from_elems(&mut self, elems: &[TermId], sort: Type) -> TermId {
        let mut acc = self.empty(sort);
        for e in elems.iter().rev() {
            let u = self.unit(*e);
            acc = self.concat(u, acc);
        }
        acc
    }

    pub fn len_of(&mut self, s: TermId) -> TermId {
        match self.node(s).clone() {
            Node::Empty(_) => self.int(0),
            Node::Unit(_) => self.int(1),
            Node::Concat(a, b) => {
                let (x, y) = (self.len_of(a), self.len_of(b));
                self.add(x, y)
            }
            Node::View(_, lo, hi) => self.sub(hi, lo),
            _ => self.intern(Node::Len(s), Type::Int),
        }
    }

    pub fn nth(&mut self, s: TermId, i: TermId) -> TermId {
        let elem = self.sort(s).elem().expect("sequence sort");
        let ci = self.const_int(i);
        match self.node(s).clone() {
            Node::View(base, lo, _) => {
                let j = self.add(lo, i);
                return self.nth(base, j);
            }
            Node::Unit(x) if ci.as_ref().is_some_and(|c| c.is_zero()) => return x,
            Node::Concat(a, b) => {
                let la = self.len_of(a);
                if let (Some(k), Some(c)) = (self.const_int(la), ci) {
                    if c < k {
                        return self.nth(a, i);
                    }
                    let j = self.int(c - k);
                    return self.nth(b, j);
                }
            }
            _ => {}
        }
        self.intern(Node::Nth(s, i), elem)
    }

    /// Clamped slice `s[lo:hi]`, normalized to a view over a non-view base.
    pub fn slice(&mut self, s: TermId, lo: TermId, hi: TermId) -> TermId {
        let zero = self.int(0);
        let (base, a, b) = match self.node(s).clone() {
            Node::View(base, a0, b0) => {
                let width = self.sub(b0, a0);
                let l = self.clamp(lo, zero, width);
                let h = self.clamp(hi, l, width);
                (base, self.add(a0, l), self.add(a0, h))
            }
            _ => {
                let len = self.len_of(s);
                let a = self.clamp(lo, zero, len);
                let b = self.clamp(hi, a, len);
                (s, a, b)
            }
        };
        self.view(base, a, b)
    }

    fn view(&mut self, base: TermId, a: TermId, b: TermId) -> TermId {
        let sort = self.sort(base);
        if a == b {
            return self.empty(sort);
        }
        let len = self.len_of(base);
        if self.const_int(a).is_some_and(|c| c.is_zero()) && self.lin(len) == self.lin(b) {
            return base;
        }
        if let (Some(elems), Some(x), Some(y)) = (
            self.literal_elems(base),
            self.const_int(a),
            self.const_int(b),
        ) {
            let (x, y) = (
                usize::try_from(x).unwrap_or(0),
                usize::try_from(y).unwrap_or(0),
            );
            let part =
                elems[x.min(elems.len())..y.min(elems.len()).max(x.min(elems.len()))].to_vec();
            return self.from_elems(&part, sort);
        }
        self.intern(Node::View(base, a, b), sort)
    }

    pub fn call(&mut self, name: &str, args: Vec<TermId>, ret: Type) -> TermId {
        self.intern(Node::Call(name.to_string(), args), ret)
    }

    /// Direct children, in a fixed order.
    pub fn children(&self, t: TermId) -> Vec<TermId> {
        match self.node(t) {
            Node::Const(..) | Node::Bool(_) | Node::Empty(_) => Vec::new(),
            Node::Lin(l) => l.terms.iter().map(|(t, _)| *t).collect(),
            Node::Mul(a, b)
            | Node::Mod(a, b)
            | Node::Implies(a, b)
            | Node::Eq(a, b)
            | Node::Le(a, b)
            | Node::Concat(a, b)
            | Node::Nth(a, b) => vec![*a, *b],
            Node::Clamp(a, b, c) | Node::Ite(a, b, c) | Node::View(a, b, c) => vec![*a, *b, *c],
            Node::Len(a) | Node::Not(a) | Node::Unit(a) => vec![*a],
            Node::And(xs) | Node::Or(xs) | Node::Call(_, xs) => xs.clone(),
        }
    }

    /// All terms reachable from `roots`, in increasing id order.
    pub fn reachable(&self, roots: &[TermId]) -> Vec<TermId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<TermId> = roots.to_vec();
        while let Some(t) = stack.pop() {
            if std::mem::replace(&mut seen[t.0 as usize], true) {
                continue;
            }
            stack.extend(self.children(t));
        }
        (0..self.nodes.len() as u32)
            .map(TermId)
            .filter(|t| seen[t.0 as usize])
            .collect()
    }
}
