//! Discharging a [`VcSet`] with the external solver.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Duration;

use crate::ir::{Bindings, Env, Type};
use crate::target::{Law, Registry};
use crate::vcgen::{Vc, VcKind, VcSet};

use super::laws::{instance_formula, instances, lemma_key};
use super::lower::{Builder, TermEnv};
use super::script::render;
use super::solver::{run_solver, SmtQuery, SolverAnswer, SolverCmd};
use super::term::TermId;
use super::SmtError;

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub timeout: Duration,
    /// Length cap for bounded mode; `None` means full verification.
    pub bounded: Option<usize>,
    /// Nested definitional unfoldings per call term in VC queries.
    pub unfold_depth: usize,
    /// Unfoldings in law induction queries.
    pub lemma_depth: usize,
    /// Length cap for the exact re-query after a spurious model.
    pub exact_bound: usize,
    /// Solver resource budget per query, sent as `(set-option :rlimit N)`; 0 sends nothing.
    /// Unlike the wall-clock timeout it gives the same answer on every run.
    pub rlimit: u64,
    pub dump_dir: Option<PathBuf>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            timeout: Duration::from_secs(10),
            bounded: None,
            unfold_depth: 2,
            lemma_depth: 1,
            exact_bound: 4,
            rlimit: 0,
            dump_dir: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Verified,
    /// All conditions hold for sequences up to `bound` elements.
    BoundedVerified {
        bound: usize,
    },
    Counterexample {
        vc: VcKind,
        witness: Env,
    },
    Unknown {
        vc: VcKind,
        reason: String,
    },
    Timeout {
        vc: VcKind,
    },
}

impl Outcome {
    pub fn is_verified(&self) -> bool {
        matches!(self, Outcome::Verified | Outcome::BoundedVerified { .. })
    }
}

/// One solver exchange.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryRecord {
    pub label: String,
    pub status: String,
    pub output: String,
}

/// Verifies candidates for one kernel, caching proven laws across candidates.
pub struct Verifier<'r> {
    reg: &'r Registry,
    solver: SolverCmd,
    pub cfg: VerifyConfig,
    kernel: String,
    lemmas: BTreeMap<String, bool>,
    pub transcript: Vec<QueryRecord>,
}

impl<'r> Verifier<'r> {
    pub fn new(
        reg: &'r Registry,
        solver: SolverCmd,
        cfg: VerifyConfig,
        kernel: &str,
    ) -> Verifier<'r> {
        Verifier {
            reg,
            solver,
            cfg,
            kernel: kernel.to_string(),
            lemmas: BTreeMap::new(),
            transcript: Vec::new(),
        }
    }

    /// Laws attempted so far and whether each was proven.
    pub fn lemmas(&self) -> &BTreeMap<String, bool> {
        &self.lemmas
    }

    pub fn registry(&self) -> &'r Registry {
        self.reg
    }

    /// A verifier sharing this one's proven lemmas, with an empty transcript.
    pub fn fork(&self) -> Verifier<'r> {
        Verifier {
            reg: self.reg,
            solver: self.solver.clone(),
            cfg: self.cfg.clone(),
            kernel: self.kernel.clone(),
            lemmas: self.lemmas.clone(),
            transcript: Vec::new(),
        }
    }

    /// Take over the lemma results and transcript of a fork.
    pub fn absorb(&mut self, other: Verifier<'r>) {
        for (k, v) in other.lemmas {
            self.lemmas.entry(k).or_insert(v);
        }
        self.transcript.extend(other.transcript);
    }

    fn run(&mut self, q: &SmtQuery) -> Result<SolverAnswer, SmtError> {
        let limited;
        let q = if self.cfg.rlimit > 0 {
            limited = SmtQuery {
                script: format!("(set-option :rlimit {})\n{}", self.cfg.rlimit, q.script),
                ..q.clone()
            };
            &limited
        } else {
            q
        };
        if let Some(dir) = &self.cfg.dump_dir {
            let path = dir.join(format!("{}.smt2", q.label));
            std::fs::write(&path, q.full_text()).map_err(|e| SmtError::Dump {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        }
        let r = run_solver(q, &self.solver, self.cfg.timeout)?;
        self.transcript.push(QueryRecord {
            label: q.label.clone(),
            status: r.answer.status().to_string(),
            output: r.output,
        });
        Ok(r.answer)
    }

    /// Prove `law` for the fixed part of `inst` by strong induction on its measure.
    fn lemma_holds(&mut self, law: &Law, inst: &Bindings, index: usize) -> Result<bool, SmtError> {
        let key = lemma_key(law, inst);
        if let Some(ok) = self.lemmas.get(&key) {
            return Ok(*ok);
        }
        let mut b = Builder::new(self.reg);
        let mut env = TermEnv::new();
        for (v, t) in &law.vars {
            let term = if law.fixed.contains(v) {
                b.lower(&inst[v], &TermEnv::new())?
            } else {
                b.arena.constant(v, *t)
            };
            env.insert(v.clone(), term);
        }
        let mut stepped = env.clone();
        for (v, e) in &law.step {
            stepped.insert(v.clone(), b.lower(e, &env)?);
        }
        let holds = b.lower(&law.holds, &env)?;
        let mu = b.lower(&law.measure, &env)?;
        let holds_s = b.lower(&law.holds, &stepped)?;
        let mu_s = b.lower(&law.measure, &stepped)?;
        let a = &mut b.arena;
        let zero = a.int(0);
        let lo = a.le(zero, mu_s);
        let hi = a.lt(mu_s, mu);
        let smaller = a.and(vec![lo, hi]);
        let ih = a.implies(smaller, holds_s);
        let nonneg = a.le(zero, mu);
        let claim = a.implies(nonneg, holds);
        let goal = a.not(claim);
        b.unfold(&[goal, ih], self.cfg.lemma_depth)?;
        let mut asserts = vec![ih];
        asserts.extend(b.facts.iter().copied());
        asserts.push(goal);
        let n = self.lemmas.len();
        let q = SmtQuery {
            label: format!("{}.{index}.lemma{n}.{}", self.kernel, law.name),
            script: render(&b.arena, self.reg, &asserts),
            model_vars: Vec::new(),
        };
        let ok = self.run(&q)? == SolverAnswer::Unsat;
        self.lemmas.insert(key, ok);
        Ok(ok)
    }

    fn vc_query(
        &mut self,
        vc: &Vc,
        index: usize,
        label: String,
        bound: Option<usize>,
        depth: usize,
    ) -> Result<SmtQuery, SmtError> {
        let mut b = Builder::new(self.reg);
        let env: TermEnv = vc
            .vars
            .iter()
            .map(|(v, t)| (v.clone(), b.arena.constant(v, *t)))
            .collect();
        let body = b.lower(&vc.body, &env)?;
        let goal = b.arena.not(body);
        let mut background: Vec<TermId> = Vec::new();
        if let Some(d) = bound {
            for (v, t) in &vc.vars {
                if matches!(t, Type::SeqInt | Type::SeqSeqInt) {
                    let len = b.arena.len_of(env[v]);
                    let cap = b.arena.int(d as u64);
                    background.push(b.arena.le(len, cap));
                }
            }
        }
        for law in self.reg.laws() {
            for inst in instances(law, &vc.body) {
                if self.lemma_holds(law, &inst, index)? {
                    background.push(b.lower(&instance_formula(law, &inst), &env)?);
                }
            }
        }
        let mut roots = background.clone();
        roots.push(goal);
        b.unfold(&roots, depth)?;
        let mut asserts = background;
        asserts.extend(b.facts.iter().copied());
        asserts.push(goal);
        Ok(SmtQuery {
            label,
            script: render(&b.arena, self.reg, &asserts),
            model_vars: vc.vars.clone(),
        })
    }

    fn falsifies(&self, vc: &Vc, env: &Env) -> bool {
        matches!(vc.holds(env, self.reg), Ok(false))
    }

    fn check_one(&mut self, vc: &Vc, index: usize) -> Result<Option<Outcome>, SmtError> {
        let label = format!("{}.{index}.{}", self.kernel, vc.kind);
        let bound = self.cfg.bounded;
        let depth = match bound {
            Some(d) => d + 2,
            None => self.cfg.unfold_depth,
        };
        let q = self.vc_query(vc, index, label.clone(), bound, depth)?;
        match self.run(&q)? {
            SolverAnswer::Unsat => Ok(None),
            SolverAnswer::Timeout => Ok(Some(Outcome::Timeout { vc: vc.kind })),
            SolverAnswer::Unknown => Ok(Some(Outcome::Unknown {
                vc: vc.kind,
                reason: "solver returned unknown".into(),
            })),
            SolverAnswer::Sat(env) => {
                if self.falsifies(vc, &env) {
                    return Ok(Some(Outcome::Counterexample {
                        vc: vc.kind,
                        witness: env,
                    }));
                }
                // The model relies on an unconstrained operator value; look for a
                // genuine witness among short sequences, where unfolding is exact.
                let b = self.cfg.exact_bound.min(bound.unwrap_or(usize::MAX));
                let q = self.vc_query(vc, index, format!("{label}.exact"), Some(b), b + 2)?;
                Ok(Some(match self.run(&q)? {
                    SolverAnswer::Sat(env) if self.falsifies(vc, &env) => Outcome::Counterexample {
                        vc: vc.kind,
                        witness: env,
                    },
                    SolverAnswer::Timeout => Outcome::Timeout { vc: vc.kind },
                    _ => Outcome::Unknown {
                        vc: vc.kind,
                        reason: "solver model does not falsify the condition".into(),
                    },
                }))
            }
        }
    }

    /// Check the three conditions in order, stopping at the first that is not proven.
    pub fn verify(&mut self, vcs: &VcSet, index: usize) -> Result<Outcome, SmtError> {
        for kind in VcKind::ALL {
            if let Some(o) = self.check_one(vcs.get(kind), index)? {
                return Ok(o);
            }
        }
        Ok(match self.cfg.bounded {
            Some(bound) => Outcome::BoundedVerified { bound },
            None => Outcome::Verified,
        })
    }
}
