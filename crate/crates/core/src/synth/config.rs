use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Duration;

use serde::Deserialize;

use crate::ir::Value;
use crate::target::Registry;

use super::SynthError;

/// A hole grid entry as written in a config file: a scalar or an integer list.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum GridValue {
    Int(i64),
    List(Vec<i64>),
}

impl GridValue {
    pub fn to_value(&self) -> Value {
        match self {
            GridValue::Int(v) => Value::int(*v),
            GridValue::List(v) => Value::seq(v),
        }
    }
}

/// Search space and budgets. Every field can be set from a TOML file.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrammarConfig {
    /// Maximum nesting of operator applications in a summary.
    pub max_op_depth: usize,
    /// Grid overrides keyed by `operator.param`, e.g. `"conv1d.stride" = [1]`.
    pub holes: BTreeMap<String, Vec<GridValue>>,
    /// Values of `c` in invariant prefixes `slice(x, 0, stride*(i - init) + c)`.
    pub slice_offsets: Vec<i64>,
    /// Try invariants with bound conjuncts on the loop counter.
    pub bound_conjuncts: bool,
    /// Let the grammar use the `empty_seq` operator.
    pub enable_empty_op: bool,
    pub test_lengths: Vec<usize>,
    pub tests_per_length: usize,
    pub value_min: i64,
    pub value_max: i64,
    pub seed: u64,
    /// Stop after this many enumerated candidates.
    pub max_candidates: Option<usize>,
    pub query_timeout_secs: f64,
    /// Solver resource limit per query (z3 `rlimit`); 0 disables it.
    pub solver_rlimit: u64,
    pub total_timeout_secs: f64,
    /// Length bound for bounded verification; `None` is full verification.
    pub bounded: Option<usize>,
    /// Candidates verified concurrently. Fixed rather than taken from the
    /// machine so that reports do not depend on the host.
    pub jobs: usize,
    #[serde(skip)]
    pub dump_smt: Option<PathBuf>,
    /// Directory for the VCs of every candidate sent to the solver.
    #[serde(skip)]
    pub dump_vcs: Option<PathBuf>,
}

impl Default for GrammarConfig {
    fn default() -> Self {
        GrammarConfig {
            max_op_depth: 2,
            holes: BTreeMap::new(),
            slice_offsets: vec![0, 1, 2],
            bound_conjuncts: true,
            enable_empty_op: false,
            test_lengths: vec![0, 1, 2, 3, 5, 8],
            tests_per_length: 2,
            value_min: -10,
            value_max: 10,
            seed: 42,
            max_candidates: None,
            query_timeout_secs: 10.0,
            solver_rlimit: 4_000_000,
            total_timeout_secs: 600.0,
            bounded: None,
            jobs: 1,
            dump_smt: None,
            dump_vcs: None,
        }
    }
}

impl GrammarConfig {
    pub fn from_toml(text: &str) -> Result<GrammarConfig, SynthError> {
        toml::from_str(text).map_err(|e| SynthError::Config(e.to_string()))
    }

    pub fn query_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.query_timeout_secs)
    }

    pub fn total_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.total_timeout_secs)
    }

    /// Check the config against the registry it will be used with.
    pub fn validate(&self, reg: &Registry) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Config(m));
        if self.max_op_depth == 0 {
            return bad("max_op_depth must be at least 1".into());
        }
        if self.jobs == 0 {
            return bad("jobs must be at least 1".into());
        }
        if self.test_lengths.is_empty() || self.tests_per_length == 0 {
            return bad("the test suite must not be empty".into());
        }
        if self.value_min > self.value_max {
            return bad(format!(
                "value_min {} exceeds value_max {}",
                self.value_min, self.value_max
            ));
        }
        if self.slice_offsets.is_empty() {
            return bad("slice_offsets must not be empty".into());
        }
        for t in [self.query_timeout_secs, self.total_timeout_secs] {
            if !t.is_finite() || t < 0.0 {
                return bad(format!("invalid timeout {t}"));
            }
        }
        for (key, grid) in &self.holes {
            let Some((op, param)) = key.split_once('.') else {
                return bad(format!("hole key `{key}` is not `operator.param`"));
            };
            let Some(spec) = reg.get(op) else {
                return bad(format!("hole key `{key}`: unknown operator `{op}`"));
            };
            let Some((_, ty)) = spec.params().iter().find(|(p, _)| p == param) else {
                return bad(format!(
                    "hole key `{key}`: `{op}` has no parameter `{param}`"
                ));
            };
            if grid.is_empty() {
                return bad(format!("hole grid `{key}` is empty"));
            }
            if let Some(v) = grid.iter().map(GridValue::to_value).find(|v| v.ty() != *ty) {
                return bad(format!("hole grid `{key}`: `{v}` is not {}", ty.name()));
            }
        }
        Ok(())
    }

    /// Grid for a hole parameter: the override if any, else the registry default.
    pub fn grid(&self, reg: &Registry, op: &str, param: &str) -> Option<Vec<Value>> {
        if let Some(g) = self.holes.get(&format!("{op}.{param}")) {
            return Some(g.iter().map(GridValue::to_value).collect());
        }
        reg.get(op)?.hole(param).map(<[Value]>::to_vec)
    }
}
