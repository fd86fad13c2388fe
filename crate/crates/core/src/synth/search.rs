//! The enumerate, filter, verify loop.

use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use crate::frontend::LoopNest;
use crate::ir::Env;
use crate::smt::{Outcome, QueryRecord, SmtError, SolverCmd, Verifier, VerifyConfig};
use crate::target::Registry;
use crate::vcgen::{make_vcs, Candidate, CandidateMeta};

use super::config::GrammarConfig;
use super::grammar::Families;
use super::oracle::{default_tests, oracle_prefilter, summary_refuted, TestCase, Verdict};
use super::SynthError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SynthStatus {
    Found,
    NoCandidateFound,
    Timeout,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SynthStats {
    pub enumerated: usize,
    pub oracle_pruned: usize,
    /// Candidates handed to the solver.
    pub smt_queries: usize,
    pub counterexamples: usize,
    /// Candidates whose verification ended in unknown or timeout.
    pub inconclusive: usize,
    pub wall_ms: u64,
}

#[derive(Clone, Debug)]
pub struct SynthesisResult {
    pub kernel: String,
    pub status: SynthStatus,
    pub candidate: Option<Candidate>,
    /// `Verified` or `BoundedVerified` when found.
    pub outcome: Option<Outcome>,
    pub stats: SynthStats,
    /// One line per inconclusive candidate.
    pub notes: Vec<String>,
    pub transcript: Vec<QueryRecord>,
    /// Lemmas attempted and whether each was proven.
    pub lemmas: Vec<(String, bool)>,
}

impl SynthesisResult {
    pub fn is_bounded(&self) -> bool {
        matches!(self.outcome, Some(Outcome::BoundedVerified { .. }))
    }
}

fn verifier_config(cfg: &GrammarConfig) -> VerifyConfig {
    VerifyConfig {
        timeout: cfg.query_timeout(),
        bounded: cfg.bounded,
        rlimit: cfg.solver_rlimit,
        dump_dir: cfg.dump_smt.clone(),
        ..VerifyConfig::default()
    }
}

/// Learn a counterexample's inputs as a new test, if the source runs on them.
fn learn(nest: &LoopNest, tests: &mut Vec<TestCase>, witness: &Env) {
    let inputs: Env = nest
        .params
        .iter()
        .filter_map(|(p, _)| witness.get(p).map(|v| (p.clone(), v.clone())))
        .collect();
    if inputs.len() != nest.params.len() || tests.iter().any(|t| t.inputs == inputs) {
        return;
    }
    if let Ok(t) = TestCase::new(nest, inputs) {
        // Newest first: a fresh witness is the likeliest to refute the next candidate.
        tests.insert(0, t);
    }
}

/// A candidate that passed the oracle, with the pruning count when it was reached.
struct Pending {
    cand: Candidate,
    pruned_before: usize,
}

struct Search<'a, 'r> {
    nest: &'a LoopNest,
    dump_vcs: Option<PathBuf>,
    tests: Vec<TestCase>,
    verifier: Verifier<'r>,
    stats: SynthStats,
    notes: Vec<String>,
    found: Option<(Candidate, Outcome)>,
}

impl Search<'_, '_> {
    /// Verify a batch concurrently and merge the results in index order.
    /// The least-index verified candidate wins; later ones are discarded.
    fn run_batch(&mut self, batch: &mut Vec<Pending>) -> Result<(), SynthError> {
        let reg = self.verifier.registry();
        let mut work = Vec::new();
        for p in batch.iter() {
            let vcs = make_vcs(self.nest, &p.cand, reg)?;
            if let Some(dir) = &self.dump_vcs {
                let path = dir.join(format!("{}.{}.vcs", self.nest.name, p.cand.meta.index));
                std::fs::write(&path, vcs.render()).map_err(|e| SmtError::Dump {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
            }
            work.push((vcs, p.cand.meta.index, self.verifier.fork()));
        }
        let results: Vec<(Result<Outcome, SmtError>, Verifier)> = std::thread::scope(|s| {
            let handles: Vec<_> = work
                .into_iter()
                .map(|(vcs, index, mut v)| s.spawn(move || (v.verify(&vcs, index), v)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("verification thread panicked"))
                .collect()
        });
        for (p, (r, v)) in batch.drain(..).zip(results) {
            if self.found.is_some() {
                break;
            }
            self.verifier.absorb(v);
            self.stats.smt_queries += 1;
            match r? {
                o @ (Outcome::Verified | Outcome::BoundedVerified { .. }) => {
                    // Report counts as of the winner, independent of batching.
                    self.stats.enumerated = p.cand.meta.index + 1;
                    self.stats.oracle_pruned = p.pruned_before;
                    self.found = Some((p.cand, o));
                }
                Outcome::Counterexample { witness, .. } => {
                    self.stats.counterexamples += 1;
                    learn(self.nest, &mut self.tests, &witness);
                }
                Outcome::Unknown { vc, reason } => {
                    self.stats.inconclusive += 1;
                    self.notes.push(format!(
                        "candidate {}: {vc} unknown: {reason}",
                        p.cand.meta.index
                    ));
                }
                Outcome::Timeout { vc } => {
                    self.stats.inconclusive += 1;
                    self.notes
                        .push(format!("candidate {}: {vc} timed out", p.cand.meta.index));
                }
            }
        }
        Ok(())
    }
}

/// Search for a verified (summary, invariant) pair for `nest`.
pub fn synthesize(
    nest: &LoopNest,
    cfg: &GrammarConfig,
    reg: &Registry,
    solver: &SolverCmd,
) -> Result<SynthesisResult, SynthError> {
    cfg.validate(reg)?;
    let start = Instant::now();
    let mut search = Search {
        nest,
        dump_vcs: cfg.dump_vcs.clone(),
        tests: default_tests(nest, cfg),
        verifier: Verifier::new(reg, solver.clone(), verifier_config(cfg), &nest.name),
        stats: SynthStats::default(),
        notes: Vec::new(),
        found: None,
    };
    let limit = cfg.max_candidates.unwrap_or(usize::MAX);
    let deadline = cfg.total_timeout();
    let mut timed_out = false;
    let mut batch: Vec<Pending> = Vec::new();

    'search: for family in Families::new(nest, cfg, reg) {
        let stats = &mut search.stats;
        if stats.enumerated >= limit {
            break;
        }
        if start.elapsed() >= deadline {
            timed_out = true;
            break;
        }
        if summary_refuted(&family.ps, &search.tests, reg).is_some() {
            let n = family.len().min(limit - stats.enumerated);
            stats.enumerated += n;
            stats.oracle_pruned += n;
            continue;
        }
        let (operator, holes) = (family.operator(), family.holes());
        for inv in family.invs() {
            if search.stats.enumerated >= limit {
                break 'search;
            }
            let cand = Candidate {
                ps: family.ps.clone(),
                inv,
                meta: CandidateMeta {
                    index: search.stats.enumerated,
                    operator: operator.clone(),
                    holes: holes.clone(),
                },
            };
            search.stats.enumerated += 1;
            if let Verdict::Fail(_) = oracle_prefilter(&cand, &search.tests, reg) {
                search.stats.oracle_pruned += 1;
                continue;
            }
            batch.push(Pending {
                cand,
                pruned_before: search.stats.oracle_pruned,
            });
            if batch.len() >= cfg.jobs {
                search.run_batch(&mut batch)?;
                if search.found.is_some() {
                    break 'search;
                }
            }
            if start.elapsed() >= deadline {
                timed_out = true;
                break 'search;
            }
        }
    }
    if search.found.is_none() && !batch.is_empty() {
        search.run_batch(&mut batch)?;
    }

    let Search {
        mut stats,
        notes,
        found,
        mut verifier,
        ..
    } = search;
    stats.wall_ms = start.elapsed().as_millis() as u64;
    let status = match (&found, timed_out) {
        (Some(_), _) => SynthStatus::Found,
        (None, true) => SynthStatus::Timeout,
        (None, false) => SynthStatus::NoCandidateFound,
    };
    let (candidate, outcome) = match found {
        Some((c, o)) => (Some(c), Some(o)),
        None => (None, None),
    };
    Ok(SynthesisResult {
        kernel: nest.name.clone(),
        status,
        candidate,
        outcome,
        stats,
        notes,
        lemmas: verifier
            .lemmas()
            .iter()
            .map(|(k, v)| (k.clone(), *v))
            .collect(),
        transcript: std::mem::take(&mut verifier.transcript),
    })
}
