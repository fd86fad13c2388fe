use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use super::{BinOp, Env, Expr, IrError, Operators, Value};

/// Maximum nesting of operator calls before evaluation gives up.
pub const MAX_CALL_DEPTH: usize = 4096;

pub fn eval(expr: &Expr, env: &Env, ops: &dyn Operators) -> Result<Value, IrError> {
    eval_with_depth(expr, env, ops, 0)
}

fn as_int(v: Value, e: &Expr) -> Result<BigInt, IrError> {
    match v {
        Value::Int(i) => Ok(i),
        other => Err(IrError::type_error(
            e,
            format!("expected Int, found {}", other.ty()),
        )),
    }
}

fn as_bool(v: Value, e: &Expr) -> Result<bool, IrError> {
    match v {
        Value::Bool(b) => Ok(b),
        other => Err(IrError::type_error(
            e,
            format!("expected Bool, found {}", other.ty()),
        )),
    }
}

/// Clamp a bound into `[0, len]`.
fn clamp(v: &BigInt, len: usize) -> usize {
    if v.is_negative() {
        0
    } else {
        v.to_usize().map_or(len, |x| x.min(len))
    }
}

pub fn eval_with_depth(
    expr: &Expr,
    env: &Env,
    ops: &dyn Operators,
    depth: usize,
) -> Result<Value, IrError> {
    let ev = |e: &Expr| eval_with_depth(e, env, ops, depth);
    let int = |e: &Expr| ev(e).and_then(|v| as_int(v, e));
    let boolean = |e: &Expr| ev(e).and_then(|v| as_bool(v, e));
    match expr {
        Expr::Int(v) => Ok(Value::Int(v.clone())),
        Expr::Bool(b) => Ok(Value::Bool(*b)),
        Expr::Var(v) => env
            .get(v)
            .cloned()
            .ok_or_else(|| IrError::UnboundVariable(v.clone())),
        Expr::Binary(op, a, b) => match op {
            BinOp::And => Ok(Value::Bool(boolean(a)? && boolean(b)?)),
            BinOp::Or => Ok(Value::Bool(boolean(a)? || boolean(b)?)),
            BinOp::Implies => Ok(Value::Bool(!boolean(a)? || boolean(b)?)),
            BinOp::Eq => Ok(Value::Bool(ev(a)? == ev(b)?)),
            BinOp::Lt => Ok(Value::Bool(int(a)? < int(b)?)),
            BinOp::Le => Ok(Value::Bool(int(a)? <= int(b)?)),
            BinOp::Add => Ok(Value::Int(int(a)? + int(b)?)),
            BinOp::Sub => Ok(Value::Int(int(a)? - int(b)?)),
            BinOp::Mul => Ok(Value::Int(int(a)? * int(b)?)),
            BinOp::Mod => {
                let x = int(a)?;
                let m = int(b)?;
                if !m.is_positive() {
                    return Err(IrError::NonPositiveModulus(m.to_string()));
                }
                let r = x % &m;
                Ok(Value::Int(if r.is_negative() { r + m } else { r }))
            }
        },
        Expr::Not(a) => Ok(Value::Bool(!boolean(a)?)),
        Expr::Ite(c, t, e) => {
            if boolean(c)? {
                ev(t)
            } else {
                ev(e)
            }
        }
        Expr::Empty(t) => match t {
            super::Type::SeqInt => Ok(Value::Seq(vec![])),
            super::Type::SeqSeqInt => Ok(Value::Matrix(vec![])),
            _ => Err(IrError::type_error(expr, "empty requires a sequence type")),
        },
        Expr::List(items) => {
            let vals = items.iter().map(ev).collect::<Result<Vec<_>, _>>()?;
            match vals.first() {
                Some(Value::Int(_)) => vals
                    .into_iter()
                    .zip(items)
                    .map(|(v, e)| as_int(v, e))
                    .collect::<Result<_, _>>()
                    .map(Value::Seq),
                Some(Value::Seq(_)) => {
                    let mut rows = Vec::with_capacity(vals.len());
                    for (v, e) in vals.into_iter().zip(items) {
                        match v {
                            Value::Seq(r) => rows.push(r),
                            other => {
                                return Err(IrError::type_error(
                                    e,
                                    format!("expected SeqInt, found {}", other.ty()),
                                ))
                            }
                        }
                    }
                    Ok(Value::Matrix(rows))
                }
                _ => Err(IrError::type_error(expr, "bad list literal")),
            }
        }
        Expr::Len(a) => match ev(a)? {
            Value::Seq(s) => Ok(Value::Int(s.len().into())),
            Value::Matrix(m) => Ok(Value::Int(m.len().into())),
            other => Err(IrError::type_error(
                a,
                format!("expected a sequence, found {}", other.ty()),
            )),
        },
        Expr::Index(a, i) => {
            let s = ev(a)?;
            let idx = int(i)?;
            let len = s
                .seq_len()
                .ok_or_else(|| IrError::type_error(a, "expected a sequence"))?;
            let pos =
                idx.to_usize()
                    .filter(|p| *p < len)
                    .ok_or_else(|| IrError::IndexOutOfBounds {
                        index: idx.to_string(),
                        len,
                    })?;
            Ok(match s {
                Value::Seq(mut v) => Value::Int(v.swap_remove(pos)),
                Value::Matrix(mut m) => Value::Seq(m.swap_remove(pos)),
                _ => unreachable!(),
            })
        }
        Expr::Append(a, x) => match (ev(a)?, ev(x)?) {
            (Value::Seq(mut s), Value::Int(v)) => {
                s.push(v);
                Ok(Value::Seq(s))
            }
            (Value::Matrix(mut m), Value::Seq(r)) => {
                m.push(r);
                Ok(Value::Matrix(m))
            }
            _ => Err(IrError::type_error(expr, "append element type mismatch")),
        },
        Expr::Prepend(x, a) => match (ev(x)?, ev(a)?) {
            (Value::Int(v), Value::Seq(mut s)) => {
                s.insert(0, v);
                Ok(Value::Seq(s))
            }
            (Value::Seq(r), Value::Matrix(mut m)) => {
                m.insert(0, r);
                Ok(Value::Matrix(m))
            }
            _ => Err(IrError::type_error(expr, "prepend element type mismatch")),
        },
        Expr::Slice(a, lo, hi) => {
            let s = ev(a)?;
            let lo = int(lo)?;
            let hi = int(hi)?;
            let len = s
                .seq_len()
                .ok_or_else(|| IrError::type_error(a, "expected a sequence"))?;
            let l = clamp(&lo, len);
            let h = clamp(&hi, len).max(l);
            Ok(match s {
                Value::Seq(v) => Value::Seq(v[l..h].to_vec()),
                Value::Matrix(m) => Value::Matrix(m[l..h].to_vec()),
                _ => unreachable!(),
            })
        }
        Expr::Call(name, args) => {
            if depth >= MAX_CALL_DEPTH {
                return Err(IrError::RecursionLimit);
            }
            let vals = args.iter().map(ev).collect::<Result<Vec<_>, _>>()?;
            ops.apply(name, vals, depth + 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::NoOperators;

    fn env(pairs: &[(&str, Value)]) -> Env {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect()
    }

    #[test]
    fn window_element() {
        let e = Expr::add(
            Expr::index(Expr::var("data"), Expr::var("i")),
            Expr::index(Expr::var("data"), Expr::add(Expr::var("i"), Expr::int(1))),
        );
        let v = eval(
            &e,
            &env(&[("data", Value::seq(&[1, 2, 3])), ("i", Value::int(1))]),
            &NoOperators,
        );
        assert_eq!(v.unwrap(), Value::int(5));
    }

    #[test]
    fn slices_clamp() {
        let s = Expr::slice(
            Expr::var("data"),
            Expr::int(0),
            Expr::add(Expr::var("i"), Expr::int(1)),
        );
        let v = eval(
            &s,
            &env(&[("data", Value::seq(&[])), ("i", Value::int(0))]),
            &NoOperators,
        );
        assert_eq!(v.unwrap(), Value::seq(&[]));
        let s = Expr::slice(Expr::var("data"), Expr::int(0), Expr::int(99));
        let v = eval(&s, &env(&[("data", Value::seq(&[4, 5]))]), &NoOperators);
        assert_eq!(v.unwrap(), Value::seq(&[4, 5]));
        let s = Expr::slice(Expr::var("data"), Expr::int(3), Expr::int(1));
        let v = eval(
            &s,
            &env(&[("data", Value::seq(&[4, 5, 6, 7]))]),
            &NoOperators,
        );
        assert_eq!(v.unwrap(), Value::seq(&[]));
    }

    #[test]
    fn index_out_of_bounds() {
        let e = Expr::index(Expr::var("d"), Expr::int(2));
        let err = eval(&e, &env(&[("d", Value::seq(&[1, 2]))]), &NoOperators).unwrap_err();
        assert!(matches!(err, IrError::IndexOutOfBounds { len: 2, .. }));
        let e = Expr::index(Expr::var("d"), Expr::int(-1));
        assert!(eval(&e, &env(&[("d", Value::seq(&[1, 2]))]), &NoOperators).is_err());
    }

    #[test]
    fn euclidean_mod() {
        let e = Expr::binary(BinOp::Mod, Expr::int(-3), Expr::int(2));
        assert_eq!(eval(&e, &Env::new(), &NoOperators).unwrap(), Value::int(1));
        let e = Expr::binary(BinOp::Mod, Expr::int(3), Expr::int(0));
        assert!(matches!(
            eval(&e, &Env::new(), &NoOperators),
            Err(IrError::NonPositiveModulus(_))
        ));
    }

    #[test]
    fn implication_short_circuits() {
        let bad = Expr::lt(Expr::index(Expr::var("d"), Expr::int(5)), Expr::int(0));
        let e = Expr::implies(Expr::Bool(false), bad);
        let v = eval(&e, &env(&[("d", Value::seq(&[]))]), &NoOperators);
        assert_eq!(v.unwrap(), Value::Bool(true));
    }
}
