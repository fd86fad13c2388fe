use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{BinOp, Expr};

/// A linear combination `sum(coeff * atom) + constant` over non-linear atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Linear {
    /// Atoms in first-occurrence order, with nonzero coefficients.
    pub terms: Vec<(Expr, BigInt)>,
    pub constant: BigInt,
}

impl Linear {
    pub fn constant(c: BigInt) -> Linear {
        Linear {
            terms: Vec::new(),
            constant: c,
        }
    }

    /// Linearize an integer expression; sub-terms that are not linear become atoms.
    pub fn of(e: &Expr) -> Linear {
        match e {
            Expr::Int(v) => Linear::constant(v.clone()),
            Expr::Binary(BinOp::Add, a, b) => Linear::of(a).plus(&Linear::of(b), &BigInt::one()),
            Expr::Binary(BinOp::Sub, a, b) => Linear::of(a).plus(&Linear::of(b), &-BigInt::one()),
            Expr::Binary(BinOp::Mul, a, b) => {
                let (la, lb) = (Linear::of(a), Linear::of(b));
                if la.terms.is_empty() {
                    lb.scale(&la.constant)
                } else if lb.terms.is_empty() {
                    la.scale(&lb.constant)
                } else {
                    Linear::atom(Expr::mul(la.to_expr(), lb.to_expr()))
                }
            }
            other => Linear::atom(simplify(other)),
        }
    }

    fn atom(e: Expr) -> Linear {
        Linear {
            terms: vec![(e, BigInt::one())],
            constant: BigInt::zero(),
        }
    }

    pub fn scale(mut self, k: &BigInt) -> Linear {
        if k.is_zero() {
            return Linear::constant(BigInt::zero());
        }
        for (_, c) in &mut self.terms {
            *c *= k;
        }
        self.constant *= k;
        self
    }

    /// `self + k * other`.
    pub fn plus(mut self, other: &Linear, k: &BigInt) -> Linear {
        for (atom, c) in &other.terms {
            match self.terms.iter_mut().find(|(a, _)| a == atom) {
                Some((_, existing)) => *existing += c * k,
                None => self.terms.push((atom.clone(), c * k)),
            }
        }
        self.terms.retain(|(_, c)| !c.is_zero());
        self.constant += &other.constant * k;
        self
    }

    pub fn as_constant(&self) -> Option<&BigInt> {
        self.terms.is_empty().then_some(&self.constant)
    }

    pub fn to_expr(&self) -> Expr {
        let term = |a: &Expr, c: &BigInt| {
            if c.is_one() {
                a.clone()
            } else {
                Expr::mul(Expr::Int(c.clone()), a.clone())
            }
        };
        let mut acc: Option<Expr> = None;
        for (a, c) in &self.terms {
            acc = Some(match acc {
                None => term(a, c),
                Some(prev) if c.is_negative() => Expr::sub(prev, term(a, &-c)),
                Some(prev) => Expr::add(prev, term(a, c)),
            });
        }
        match acc {
            None => Expr::Int(self.constant.clone()),
            Some(e) if self.constant.is_zero() => e,
            Some(e) if self.constant.is_negative() => Expr::sub(e, Expr::Int(-&self.constant)),
            Some(e) => Expr::add(e, Expr::Int(self.constant.clone())),
        }
    }
}

/// Normalize integer arithmetic to linear canonical form and fold constants.
pub fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Binary(BinOp::Add | BinOp::Sub | BinOp::Mul, ..) => Linear::of(e).to_expr(),
        Expr::Binary(op, a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            match (op, a.as_int(), b.as_int()) {
                (BinOp::Lt, Some(x), Some(y)) => Expr::Bool(x < y),
                (BinOp::Le, Some(x), Some(y)) => Expr::Bool(x <= y),
                (BinOp::Mod, Some(x), Some(y)) if y.is_positive() => {
                    let r = x % y;
                    Expr::Int(if r.is_negative() { r + y } else { r })
                }
                _ => Expr::binary(*op, a, b),
            }
        }
        _ => e.map_children(&mut simplify),
    }
}

/// `a - b` when it is a constant.
pub fn difference(a: &Expr, b: &Expr) -> Option<BigInt> {
    Linear::of(a)
        .plus(&Linear::of(b), &-BigInt::one())
        .as_constant()
        .cloned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_expr;

    fn simp(s: &str) -> String {
        simplify(&parse_expr(s).unwrap()).to_string()
    }

    #[test]
    fn linear_normal_forms() {
        assert_eq!(simp("(+ (* 1 (- i 0)) 1)"), "(+ i 1)");
        assert_eq!(simp("(+ (* 2 (- i 0)) 0)"), "(* 2 i)");
        assert_eq!(simp("(- (+ i 1) 1)"), "i");
        assert_eq!(simp("(- (- (len d) 1) i)"), "(- (- (len d) i) 1)");
        assert_eq!(simp("(* x y)"), "(* x y)");
        assert_eq!(simp("(slice d 0 (+ (+ i 1) 1))"), "(slice d 0 (+ i 2))");
    }

    #[test]
    fn differences() {
        let a = parse_expr("(+ i 2)").unwrap();
        let b = parse_expr("(- (+ i 1) 0)").unwrap();
        assert_eq!(difference(&a, &b), Some(BigInt::from(1)));
        assert_eq!(difference(&a, &parse_expr("j").unwrap()), None);
    }
}
