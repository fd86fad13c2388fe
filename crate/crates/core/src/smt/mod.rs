//! SMT-LIB encoding of verification conditions and the external solver driver.

mod laws;
mod lower;
mod script;
mod solver;
mod term;
mod verify;

use thiserror::Error;

use crate::ir::IrError;

pub use laws::{instance_formula, instances, lemma_key};
pub use lower::{Builder, TermEnv};
pub use script::{render, sort_name, symbol};
pub use solver::{parse_model, run_solver, SmtQuery, SolverAnswer, SolverCmd, SolverRun};
pub use term::{Arena, Lin, Node, TermId};
pub use verify::{Outcome, QueryRecord, Verifier, VerifyConfig};

#[derive(Debug, Error)]
pub enum SmtError {
    #[error("solver unavailable: {0}")]
    SolverUnavailable(String),
    #[error("solver protocol error: {0}")]
    ProtocolError(String),
    #[error("type `{0}` has no SMT encoding")]
    UnsupportedType(String),
    #[error(transparent)]
    Ir(#[from] IrError),
    #[error("cannot write `{path}`: {message}")]
    Dump { path: String, message: String },
}
