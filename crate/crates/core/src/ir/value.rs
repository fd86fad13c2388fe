use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;

use super::expr::{Expr, Type};

/// A concrete runtime value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(BigInt),
    Bool(bool),
    Seq(Vec<BigInt>),
    Matrix(Vec<Vec<BigInt>>),
}

/// Variable bindings for evaluation.
pub type Env = BTreeMap<String, Value>;

impl Value {
    pub fn int(v: i64) -> Value {
        Value::Int(BigInt::from(v))
    }

    pub fn seq(values: &[i64]) -> Value {
        Value::Seq(values.iter().map(|v| BigInt::from(*v)).collect())
    }

    pub fn matrix(rows: &[&[i64]]) -> Value {
        Value::Matrix(
            rows.iter()
                .map(|r| r.iter().map(|v| BigInt::from(*v)).collect())
                .collect(),
        )
    }

    pub fn ty(&self) -> Type {
        match self {
            Value::Int(_) => Type::Int,
            Value::Bool(_) => Type::Bool,
            Value::Seq(_) => Type::SeqInt,
            Value::Matrix(_) => Type::SeqSeqInt,
        }
    }

    /// Sequence length, for sequence values.
    pub fn seq_len(&self) -> Option<usize> {
        match self {
            Value::Seq(s) => Some(s.len()),
            Value::Matrix(m) => Some(m.len()),
            _ => None,
        }
    }

    pub fn to_expr(&self) -> Expr {
        fn ints(v: &[BigInt]) -> Expr {
            if v.is_empty() {
                Expr::Empty(Type::SeqInt)
            } else {
                Expr::List(v.iter().cloned().map(Expr::Int).collect())
            }
        }
        match self {
            Value::Int(v) => Expr::Int(v.clone()),
            Value::Bool(b) => Expr::Bool(*b),
            Value::Seq(s) => ints(s),
            Value::Matrix(m) if m.is_empty() => Expr::Empty(Type::SeqSeqInt),
            Value::Matrix(m) => Expr::List(m.iter().map(|r| ints(r)).collect()),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::Value as J;
        fn num(v: &BigInt) -> J {
            match i64::try_from(v) {
                Ok(x) => J::from(x),
                Err(_) => J::String(v.to_string()),
            }
        }
        match self {
            Value::Int(v) => num(v),
            Value::Bool(b) => J::Bool(*b),
            Value::Seq(s) => J::Array(s.iter().map(num).collect()),
            Value::Matrix(m) => J::Array(
                m.iter()
                    .map(|r| J::Array(r.iter().map(num).collect()))
                    .collect(),
            ),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, v: &[BigInt]) -> fmt::Result {
            f.write_str("[")?;
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str("]")
        }
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Seq(s) => list(f, s),
            Value::Matrix(m) => {
                f.write_str("[")?;
                for (i, r) in m.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    list(f, r)?;
                }
                f.write_str("]")
            }
        }
    }
}

/// Render an environment as `{a = [1, 2], i = 0}`.
pub fn render_env(env: &Env) -> String {
    let parts: Vec<String> = env.iter().map(|(k, v)| format!("{k} = {v}")).collect();
    format!("{{{}}}", parts.join(", "))
}
