//! Concrete-execution filter run before any solver query.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::frontend::{run_loop, FrontendError, LoopNest, Trace, DEFAULT_FUEL};
use crate::ir::{eval, Env, Expr, Operators, Type, Value};
use crate::vcgen::Candidate;

use super::config::GrammarConfig;

/// A test input with its recorded loop trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestCase {
    pub inputs: Env,
    pub trace: Trace,
}

impl TestCase {
    pub fn new(nest: &LoopNest, inputs: Env) -> Result<TestCase, FrontendError> {
        let trace = run_loop(nest, &inputs, DEFAULT_FUEL)?;
        Ok(TestCase { inputs, trace })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// The input on which the candidate was refuted.
    Fail(Env),
}

/// Random inputs in which all sequence parameters share one length.
pub fn random_inputs(nest: &LoopNest, rng: &mut ChaCha8Rng, len: usize, lo: i64, hi: i64) -> Env {
    let draw = |rng: &mut ChaCha8Rng| -> Vec<BigInt> {
        (0..len)
            .map(|_| BigInt::from(rng.gen_range(lo..=hi)))
            .collect()
    };
    let mut env = Env::new();
    for (p, t) in &nest.params {
        let v = match t {
            Type::Int => Value::Int(BigInt::from(rng.gen_range(lo..=hi))),
            Type::Bool => Value::Bool(rng.gen()),
            Type::SeqInt => Value::Seq(draw(rng)),
            Type::SeqSeqInt => Value::Matrix((0..len).map(|_| draw(rng)).collect()),
        };
        env.insert(p.clone(), v);
    }
    env
}

/// The seeded default suite. Inputs on which the source itself faults are dropped.
pub fn default_tests(nest: &LoopNest, cfg: &GrammarConfig) -> Vec<TestCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::new();
    for &len in &cfg.test_lengths {
        for _ in 0..cfg.tests_per_length {
            let inputs = random_inputs(nest, &mut rng, len, cfg.value_min, cfg.value_max);
            if let Ok(t) = TestCase::new(nest, inputs) {
                if !out.contains(&t) {
                    out.push(t);
                }
            }
        }
    }
    out
}

fn holds(e: &Expr, env: &Env, ops: &dyn Operators) -> bool {
    matches!(eval(e, env, ops), Ok(Value::Bool(true)))
}

/// The first test whose final state falsifies the summary, if any.
pub fn summary_refuted(ps: &Expr, tests: &[TestCase], ops: &dyn Operators) -> Option<Env> {
    tests
        .iter()
        .find(|t| !holds(ps, t.trace.final_state(), ops))
        .map(|t| t.inputs.clone())
}

/// Pass iff the invariant holds at every loop head and the summary at exit,
/// on every test. Evaluation errors count as failures.
pub fn oracle_prefilter(cand: &Candidate, tests: &[TestCase], ops: &dyn Operators) -> Verdict {
    for t in tests {
        let inv_ok = t.trace.states.iter().all(|s| holds(&cand.inv, s, ops));
        if !inv_ok || !holds(&cand.ps, t.trace.final_state(), ops) {
            return Verdict::Fail(t.inputs.clone());
        }
    }
    Verdict::Pass
}
