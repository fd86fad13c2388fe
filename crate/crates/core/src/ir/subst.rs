use std::collections::BTreeMap;

use super::{typecheck, Expr, IrError, Operators, TypeCtx};

pub type Bindings = BTreeMap<String, Expr>;

/// Simultaneous substitution. The IR has no binders, so this is capture-free.
pub fn substitute(expr: &Expr, bindings: &Bindings) -> Expr {
    if bindings.is_empty() {
        return expr.clone();
    }
    match expr {
        Expr::Var(v) => bindings.get(v).cloned().unwrap_or_else(|| expr.clone()),
        _ => expr.map_children(&mut |c| substitute(c, bindings)),
    }
}

/// Like [`substitute`], but first checks each replacement has the type of
/// the variable it replaces in `ctx`.
pub fn substitute_checked(
    expr: &Expr,
    bindings: &Bindings,
    ctx: &TypeCtx,
    ops: &dyn Operators,
) -> Result<Expr, IrError> {
    for (name, replacement) in bindings {
        let want = ctx
            .get(name)
            .ok_or_else(|| IrError::UnboundVariable(name.clone()))?;
        let got = typecheck(replacement, ctx, ops)?;
        if got != *want {
            return Err(IrError::type_error(
                replacement,
                format!("replacement for `{name}` has type {got}, expected {want}"),
            ));
        }
    }
    Ok(substitute(expr, bindings))
}
