use std::collections::BTreeMap;

use super::{BinOp, Expr, IrError, Operators, Type};

pub type TypeCtx = BTreeMap<String, Type>;

/// Compute the type of `expr` under `ctx`.
pub fn typecheck(expr: &Expr, ctx: &TypeCtx, ops: &dyn Operators) -> Result<Type, IrError> {
    let expect = |e: &Expr, want: Type| -> Result<(), IrError> {
        let got = typecheck(e, ctx, ops)?;
        if got == want {
            Ok(())
        } else {
            Err(IrError::type_error(
                e,
                format!("expected {want}, found {got}"),
            ))
        }
    };
    let seq_type = |e: &Expr| -> Result<Type, IrError> {
        let t = typecheck(e, ctx, ops)?;
        if t.is_seq() {
            Ok(t)
        } else {
            Err(IrError::type_error(
                e,
                format!("expected a sequence, found {t}"),
            ))
        }
    };
    match expr {
        Expr::Int(_) => Ok(Type::Int),
        Expr::Bool(_) => Ok(Type::Bool),
        Expr::Var(v) => ctx
            .get(v)
            .copied()
            .ok_or_else(|| IrError::UnboundVariable(v.clone())),
        Expr::Binary(op, a, b) => match op {
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Mod => {
                expect(a, Type::Int)?;
                expect(b, Type::Int)?;
                Ok(Type::Int)
            }
            BinOp::Lt | BinOp::Le => {
                expect(a, Type::Int)?;
                expect(b, Type::Int)?;
                Ok(Type::Bool)
            }
            BinOp::Eq => {
                let ta = typecheck(a, ctx, ops)?;
                expect(b, ta)?;
                Ok(Type::Bool)
            }
            BinOp::And | BinOp::Or | BinOp::Implies => {
                expect(a, Type::Bool)?;
                expect(b, Type::Bool)?;
                Ok(Type::Bool)
            }
        },
        Expr::Not(a) => {
            expect(a, Type::Bool)?;
            Ok(Type::Bool)
        }
        Expr::Ite(c, t, e) => {
            expect(c, Type::Bool)?;
            let tt = typecheck(t, ctx, ops)?;
            expect(e, tt)?;
            Ok(tt)
        }
        Expr::Empty(t) => {
            if t.is_seq() {
                Ok(*t)
            } else {
                Err(IrError::type_error(expr, "empty requires a sequence type"))
            }
        }
        Expr::List(items) => {
            let first = items
                .first()
                .ok_or_else(|| IrError::type_error(expr, "list literal must be nonempty"))?;
            let et = typecheck(first, ctx, ops)?;
            for item in &items[1..] {
                expect(item, et)?;
            }
            Type::seq_of(et)
                .ok_or_else(|| IrError::type_error(expr, format!("no sequence type over {et}")))
        }
        Expr::Len(a) => {
            seq_type(a)?;
            Ok(Type::Int)
        }
        Expr::Index(a, i) => {
            let t = seq_type(a)?;
            expect(i, Type::Int)?;
            Ok(t.elem().unwrap())
        }
        Expr::Append(a, x) => {
            let t = seq_type(a)?;
            expect(x, t.elem().unwrap())?;
            Ok(t)
        }
        Expr::Prepend(x, a) => {
            let t = seq_type(a)?;
            expect(x, t.elem().unwrap())?;
            Ok(t)
        }
        Expr::Slice(a, lo, hi) => {
            let t = seq_type(a)?;
            expect(lo, Type::Int)?;
            expect(hi, Type::Int)?;
            Ok(t)
        }
        Expr::Call(name, args) => {
            let sig = ops
                .signature(name)
                .ok_or_else(|| IrError::UnknownOperator(name.clone()))?;
            if sig.params.len() != args.len() {
                return Err(IrError::ArityMismatch {
                    op: name.clone(),
                    expected: sig.params.len(),
                    got: args.len(),
                });
            }
            for (arg, (_, pt)) in args.iter().zip(&sig.params) {
                expect(arg, *pt)?;
            }
            Ok(sig.ret)
        }
    }
}
