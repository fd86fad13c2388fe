use std::fmt;

use num_bigint::BigInt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SrcType {
    Int,
    ListInt,
}

impl fmt::Display for SrcType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SrcType::Int => "int",
            SrcType::ListInt => "list<int>",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SrcBinOp {
    Add,
    Sub,
    Mul,
    Lt,
    Le,
    Eq,
    And,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Int(BigInt),
    EmptyList,
    Var(String),
    Binary(SrcBinOp, Box<SrcExpr>, Box<SrcExpr>),
    Index(String, Box<SrcExpr>),
    Len(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SrcExpr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Let {
        name: String,
        ty: SrcType,
        init: SrcExpr,
        pos: Pos,
    },
    Assign {
        name: String,
        value: SrcExpr,
        pos: Pos,
    },
    Push {
        name: String,
        value: SrcExpr,
        pos: Pos,
    },
    For {
        var: String,
        lo: SrcExpr,
        hi: SrcExpr,
        body: Vec<Stmt>,
        pos: Pos,
    },
    Return {
        value: SrcExpr,
        pos: Pos,
    },
}

impl Stmt {
    pub fn pos(&self) -> Pos {
        match self {
            Stmt::Let { pos, .. }
            | Stmt::Assign { pos, .. }
            | Stmt::Push { pos, .. }
            | Stmt::For { pos, .. }
            | Stmt::Return { pos, .. } => *pos,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceAst {
    pub name: String,
    pub params: Vec<(String, SrcType)>,
    pub ret: SrcType,
    pub body: Vec<Stmt>,
}
