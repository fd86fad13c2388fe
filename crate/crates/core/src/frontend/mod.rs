//! Mini-language frontend: parsing, checking, loop analysis and interpretation.

mod analyze;
mod ast;
mod interp;
mod lexer;
mod parser;

use thiserror::Error;

use crate::ir::IrError;

pub use analyze::{analyze, LoopNest};
pub use ast::{ExprKind, Pos, SourceAst, SrcBinOp, SrcExpr, SrcType, Stmt};
pub use interp::{run_loop, run_source, Trace, DEFAULT_FUEL};
pub use parser::parse_source;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("unsupported construct at {pos}: {message}")]
    Unsupported { pos: Pos, message: String },
    #[error("error at {pos}: {message}")]
    Semantic { pos: Pos, message: String },
    #[error("the function has no loop to lift")]
    NoLoop,
    #[error("runtime error: {0}")]
    Runtime(IrError),
    #[error("iteration budget exhausted")]
    FuelExhausted,
}

/// Parse and analyze source text in one step.
pub fn load_kernel(text: &str) -> Result<(SourceAst, LoopNest), FrontendError> {
    let ast = parse_source(text)?;
    let nest = analyze(&ast)?;
    Ok((ast, nest))
}
