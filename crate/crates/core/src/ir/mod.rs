//! Typed expression IR: syntax, values, typing, evaluation and rendering.

mod eval;
mod expr;
mod infix;
mod sexpr;
mod simplify;
mod subst;
mod typecheck;
mod value;

use thiserror::Error;

pub use eval::{eval, eval_with_depth, MAX_CALL_DEPTH};
pub use expr::{BinOp, Expr, Type, RESERVED_HEADS};
pub use infix::to_infix;
pub use sexpr::{expr_from_sexp, parse_expr, parse_sexps, Sexp, SexpError};
pub use simplify::{difference, simplify, Linear};
pub use subst::{substitute, substitute_checked, Bindings};
pub use typecheck::{typecheck, TypeCtx};
pub use value::{render_env, Env, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IrError {
    #[error("type error in `{expr}`: {message}")]
    TypeError { expr: String, message: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("index {index} out of bounds for sequence of length {len}")]
    IndexOutOfBounds { index: String, len: usize },
    #[error("non-rectangular matrix in `{0}`")]
    NonRectangularMatrix(String),
    #[error("operator `{op}` expects {expected} arguments, got {got}")]
    ArityMismatch {
        op: String,
        expected: usize,
        got: usize,
    },
    #[error("precondition of `{op}` failed: {message}")]
    PreconditionFailed { op: String, message: String },
    #[error("modulus must be positive, got {0}")]
    NonPositiveModulus(String),
    #[error("call depth limit exceeded")]
    RecursionLimit,
}

impl IrError {
    pub fn type_error(expr: &Expr, message: impl Into<String>) -> IrError {
        IrError::TypeError {
            expr: expr.to_string(),
            message: message.into(),
        }
    }
}

/// Parameter list and return type of an operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub params: Vec<(String, Type)>,
    pub ret: Type,
}

/// Anything that can resolve and execute named operators.
pub trait Operators {
    fn signature(&self, name: &str) -> Option<&Signature>;

    /// Apply `name` to already-evaluated arguments. `depth` is the current
    /// call depth, used to bound runaway recursion.
    fn apply(&self, name: &str, args: Vec<Value>, depth: usize) -> Result<Value, IrError>;
}

/// An empty operator set, for expressions without calls.
pub struct NoOperators;

impl Operators for NoOperators {
    fn signature(&self, _name: &str) -> Option<&Signature> {
        None
    }

    fn apply(&self, name: &str, _args: Vec<Value>, _depth: usize) -> Result<Value, IrError> {
        Err(IrError::UnknownOperator(name.to_string()))
    }
}
