//! Candidate enumeration, concrete filtering and counterexample-guided search.

mod config;
mod grammar;
mod oracle;
mod search;

use thiserror::Error;

use crate::ir::IrError;
use crate::smt::SmtError;

pub use config::{GrammarConfig, GridValue};
pub use grammar::{enumerate_candidates, skeletons, Families, Family, Skeleton};
pub use oracle::{
    default_tests, oracle_prefilter, random_inputs, summary_refuted, TestCase, Verdict,
};
pub use search::{synthesize, SynthStats, SynthStatus, SynthesisResult};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Smt(#[from] SmtError),
    #[error(transparent)]
    Ir(#[from] IrError),
}
