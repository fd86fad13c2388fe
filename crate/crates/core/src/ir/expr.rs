use std::fmt;

use num_bigint::BigInt;

/// The closed set of IR types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Int,
    Bool,
    SeqInt,
    /// Matrices, as sequences of row sequences.
    SeqSeqInt,
}

impl Type {
    pub fn elem(self) -> Option<Type> {
        match self {
            Type::SeqInt => Some(Type::Int),
            Type::SeqSeqInt => Some(Type::SeqInt),
            _ => None,
        }
    }

    pub fn seq_of(elem: Type) -> Option<Type> {
        match elem {
            Type::Int => Some(Type::SeqInt),
            Type::SeqInt => Some(Type::SeqSeqInt),
            _ => None,
        }
    }

    pub fn is_seq(self) -> bool {
        self.elem().is_some()
    }

    pub fn name(self) -> &'static str {
        match self {
            Type::Int => "Int",
            Type::Bool => "Bool",
            Type::SeqInt => "SeqInt",
            Type::SeqSeqInt => "SeqSeqInt",
        }
    }

    pub fn from_name(s: &str) -> Option<Type> {
        match s {
            "Int" => Some(Type::Int),
            "Bool" => Some(Type::Bool),
            "SeqInt" => Some(Type::SeqInt),
            "SeqSeqInt" => Some(Type::SeqSeqInt),
            _ => None,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    /// Euclidean remainder; the divisor must be positive.
    Mod,
    Lt,
    Le,
    Eq,
    And,
    Or,
    Implies,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Mod => "mod",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Eq => "=",
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Implies => "=>",
        }
    }

    pub fn from_symbol(s: &str) -> Option<BinOp> {
        Some(match s {
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "mod" => BinOp::Mod,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            "=" => BinOp::Eq,
            "and" => BinOp::And,
            "or" => BinOp::Or,
            "=>" => BinOp::Implies,
            _ => return None,
        })
    }
}

/// Typed symbolic expression tree shared by analysis, operator semantics,
/// VC generation and SMT emission.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Int(BigInt),
    Bool(bool),
    Var(String),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
    /// The empty sequence of the given sequence type.
    Empty(Type),
    /// Nonempty sequence literal.
    List(Vec<Expr>),
    Len(Box<Expr>),
    Index(Box<Expr>, Box<Expr>),
    /// `Append(seq, x)` adds `x` at the tail.
    Append(Box<Expr>, Box<Expr>),
    /// `Prepend(x, seq)` adds `x` at the head.
    Prepend(Box<Expr>, Box<Expr>),
    /// Clamped slice `seq[lo..hi]`.
    Slice(Box<Expr>, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
}

impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Int(BigInt::from(v))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Sub, a, b)
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Mul, a, b)
    }

    pub fn lt(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Lt, a, b)
    }

    pub fn le(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Le, a, b)
    }

    pub fn eq(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Eq, a, b)
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::And, a, b)
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Or, a, b)
    }

    pub fn implies(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Implies, a, b)
    }

    pub fn not(a: Expr) -> Expr {
        Expr::Not(Box::new(a))
    }

    pub fn ite(c: Expr, t: Expr, e: Expr) -> Expr {
        Expr::Ite(Box::new(c), Box::new(t), Box::new(e))
    }

    pub fn len(e: Expr) -> Expr {
        Expr::Len(Box::new(e))
    }

    pub fn index(e: Expr, i: Expr) -> Expr {
        Expr::Index(Box::new(e), Box::new(i))
    }

    pub fn append(e: Expr, x: Expr) -> Expr {
        Expr::Append(Box::new(e), Box::new(x))
    }

    pub fn prepend(x: Expr, e: Expr) -> Expr {
        Expr::Prepend(Box::new(x), Box::new(e))
    }

    pub fn slice(e: Expr, lo: Expr, hi: Expr) -> Expr {
        Expr::Slice(Box::new(e), Box::new(lo), Box::new(hi))
    }

    pub fn call(name: &str, args: Vec<Expr>) -> Expr {
        Expr::Call(name.to_string(), args)
    }

    /// Integer list literal; the empty list becomes `Empty(SeqInt)`.
    pub fn int_list(values: &[i64]) -> Expr {
        if values.is_empty() {
            Expr::Empty(Type::SeqInt)
        } else {
            Expr::List(values.iter().map(|v| Expr::int(*v)).collect())
        }
    }

    /// Conjunction of all items, `true` when empty.
    pub fn and_all(items: impl IntoIterator<Item = Expr>) -> Expr {
        let mut items: Vec<Expr> = items.into_iter().collect();
        match items.len() {
            0 => Expr::Bool(true),
            _ => {
                let mut acc = items.pop().unwrap();
                while let Some(prev) = items.pop() {
                    acc = Expr::and(prev, acc);
                }
                acc
            }
        }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Expr::Int(v) => Some(v),
            _ => None,
        }
    }

    /// Literal values: integers, booleans and sequence literals of literals.
    pub fn is_literal(&self) -> bool {
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Empty(_) => true,
            Expr::List(items) => items.iter().all(Expr::is_literal),
            _ => false,
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Var(_) | Expr::Empty(_) => vec![],
            Expr::Binary(_, a, b)
            | Expr::Index(a, b)
            | Expr::Append(a, b)
            | Expr::Prepend(a, b) => vec![a, b],
            Expr::Not(a) | Expr::Len(a) => vec![a],
            Expr::Ite(a, b, c) | Expr::Slice(a, b, c) => vec![a, b, c],
            Expr::List(items) | Expr::Call(_, items) => items.iter().collect(),
        }
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Free variables in first-occurrence order.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Var(v) = e {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        });
        out
    }

    /// Names of all called operators, in first-occurrence order.
    pub fn called_operators(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Call(name, _) = e {
                if !out.contains(name) {
                    out.push(name.clone());
                }
            }
        });
        out
    }

    /// Rebuild the node with children mapped through `f`.
    pub fn map_children(&self, f: &mut impl FnMut(&Expr) -> Expr) -> Expr {
        let b = |e: &Expr, f: &mut dyn FnMut(&Expr) -> Expr| Box::new(f(e));
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Var(_) | Expr::Empty(_) => self.clone(),
            Expr::Binary(op, x, y) => Expr::Binary(*op, b(x, f), b(y, f)),
            Expr::Not(x) => Expr::Not(b(x, f)),
            Expr::Ite(c, t, e) => Expr::Ite(b(c, f), b(t, f), b(e, f)),
            Expr::List(items) => Expr::List(items.iter().map(|x| f(x)).collect()),
            Expr::Len(x) => Expr::Len(b(x, f)),
            Expr::Index(x, i) => Expr::Index(b(x, f), b(i, f)),
            Expr::Append(x, y) => Expr::Append(b(x, f), b(y, f)),
            Expr::Prepend(x, y) => Expr::Prepend(b(x, f), b(y, f)),
            Expr::Slice(x, lo, hi) => Expr::Slice(b(x, f), b(lo, f), b(hi, f)),
            Expr::Call(name, args) => Expr::Call(name.clone(), args.iter().map(|x| f(x)).collect()),
        }
    }
}

impl fmt::Display for Expr {
    /// Canonical s-expression rendering.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Var(v) => f.write_str(v),
            Expr::Binary(op, a, b) => write!(f, "({} {a} {b})", op.symbol()),
            Expr::Not(a) => write!(f, "(not {a})"),
            Expr::Ite(c, t, e) => write!(f, "(ite {c} {t} {e})"),
            Expr::Empty(t) => write!(f, "(empty {t})"),
            Expr::List(items) => {
                f.write_str("(list")?;
                for i in items {
                    write!(f, " {i}")?;
                }
                f.write_str(")")
            }
            Expr::Len(a) => write!(f, "(len {a})"),
            Expr::Index(a, i) => write!(f, "(index {a} {i})"),
            Expr::Append(a, x) => write!(f, "(append {a} {x})"),
            Expr::Prepend(x, a) => write!(f, "(prepend {x} {a})"),
            Expr::Slice(a, lo, hi) => write!(f, "(slice {a} {lo} {hi})"),
            Expr::Call(name, args) => {
                write!(f, "({name}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Words that cannot be used as operator names because they are IR syntax.
pub const RESERVED_HEADS: &[&str] = &[
    "+", "-", "*", "mod", "<", "<=", "=", "and", "or", "=>", "not", "ite", "empty", "list", "len",
    "index", "append", "prepend", "slice", "true", "false", "forall",
];
