//! Matching law triggers against VC terms, and the induction queries that
//! establish each law before it is used.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::ir::{difference, simplify, substitute, Bindings, Expr, Linear};
use crate::target::{Law, TriggerKind};

/// Constant gaps between matched prefix lengths that are filled with
/// intermediate instances (strided operators advance several elements per step).
const CHAIN_GAPS: std::ops::RangeInclusive<i64> = 2..=4;

fn same(a: &Expr, b: &Expr) -> bool {
    a == b || difference(a, b).is_some_and(|d| d == BigInt::from(0))
}

struct Matcher<'l> {
    law: &'l Law,
    prefix: Option<&'l str>,
}

impl Matcher<'_> {
    fn is_var(&self, v: &str) -> bool {
        self.law.vars.iter().any(|(x, _)| x == v)
    }

    fn bind(&self, b: &mut Bindings, v: &str, t: &Expr) -> bool {
        match b.get(v) {
            Some(old) => same(old, t),
            None => {
                b.insert(v.to_string(), t.clone());
                true
            }
        }
    }

    fn matches(&self, p: &Expr, t: &Expr, b: &mut Bindings) -> bool {
        if let Expr::Var(v) = p {
            if self.is_var(v) && Some(v.as_str()) != self.prefix {
                return self.bind(b, v, t);
            }
        }
        if let Some(n) = self.prefix {
            if let Some(c) = offset_of(n, p) {
                let value = simplify(&Expr::sub(t.clone(), Expr::Int(c)));
                return self.bind(b, n, &value);
            }
        }
        match (p, t) {
            (Expr::Slice(pb, plo, phi), other)
                if self.prefix.is_some() && !matches!(other, Expr::Slice(..)) =>
            {
                // A whole sequence is its own prefix `x[0:len x]`.
                **plo == Expr::int(0)
                    && self.matches(pb, other, b)
                    && self.matches(phi, &Expr::len(other.clone()), b)
            }
            _ => {
                let blank = |e: &Expr| e.map_children(&mut |_| Expr::Bool(false));
                if blank(p) != blank(t) {
                    return false;
                }
                let (pc, tc) = (p.children(), t.children());
                pc.len() == tc.len() && pc.iter().zip(tc).all(|(x, y)| self.matches(x, y, b))
            }
        }
    }
}

/// `Some(c)` when `p` is `n + c`.
fn offset_of(n: &str, p: &Expr) -> Option<BigInt> {
    if !p.free_vars().iter().any(|v| v == n) {
        return None;
    }
    let lin = Linear::of(p);
    let unit =
        lin.terms.len() == 1 && lin.terms[0].0 == Expr::var(n) && lin.terms[0].1 == BigInt::from(1);
    unit.then_some(lin.constant)
}

fn key_without(b: &Bindings, skip: &str) -> String {
    b.iter()
        .filter(|(k, _)| k.as_str() != skip)
        .map(|(k, v)| format!("{k}={v};"))
        .collect()
}

/// All instantiations of `law` triggered by subterms of `target`, in discovery order.
pub fn instances(law: &Law, target: &Expr) -> Vec<Bindings> {
    let prefix = match &law.trigger.kind {
        TriggerKind::Prefix(n) => Some(n.as_str()),
        TriggerKind::Any => None,
    };
    let m = Matcher { law, prefix };
    let Expr::Call(head, _) = &law.trigger.pattern else {
        return Vec::new();
    };
    let mut found: Vec<Bindings> = Vec::new();
    target.visit(&mut |e| {
        if !matches!(e, Expr::Call(f, _) if f == head) {
            return;
        }
        let mut b = Bindings::new();
        if !m.matches(&law.trigger.pattern, e, &mut b) {
            return;
        }
        let complete = law.vars.iter().all(|(v, _)| b.contains_key(v));
        let fixed_ok = law
            .fixed
            .iter()
            .all(|v| b.get(v).is_some_and(Expr::is_literal));
        if complete && fixed_ok && !found.contains(&b) {
            found.push(b);
        }
    });
    if let Some(n) = prefix {
        chain(&mut found, n);
    }
    found
}

/// Fill constant gaps between prefix instances that share all other bindings.
fn chain(found: &mut Vec<Bindings>, n: &str) {
    let mut groups: BTreeMap<String, Vec<Bindings>> = BTreeMap::new();
    for b in found.iter() {
        groups.entry(key_without(b, n)).or_default().push(b.clone());
    }
    let mut extra = Vec::new();
    for group in groups.values() {
        for x in group {
            for y in group {
                let Some(gap) = difference(&y[n], &x[n]) else {
                    continue;
                };
                let Ok(gap) = i64::try_from(gap) else {
                    continue;
                };
                if !CHAIN_GAPS.contains(&gap) {
                    continue;
                }
                for j in 1..gap {
                    let mut b = x.clone();
                    b.insert(
                        n.to_string(),
                        simplify(&Expr::add(x[n].clone(), Expr::int(j))),
                    );
                    if !found.contains(&b) && !extra.contains(&b) {
                        extra.push(b);
                    }
                }
            }
        }
    }
    found.extend(extra);
}

/// Name of a law specialised to its fixed bindings, e.g. `conv1d.prefix[k=(list 1 1),s=1]`.
pub fn lemma_key(law: &Law, b: &Bindings) -> String {
    if law.fixed.is_empty() {
        return law.name.clone();
    }
    let parts: Vec<String> = law.fixed.iter().map(|v| format!("{v}={}", b[v])).collect();
    format!("{}[{}]", law.name, parts.join(","))
}

/// `measure >= 0 => holds`, instantiated.
pub fn instance_formula(law: &Law, b: &Bindings) -> Expr {
    Expr::implies(
        Expr::le(Expr::int(0), substitute(&law.measure, b)),
        substitute(&law.holds, b),
    )
}
