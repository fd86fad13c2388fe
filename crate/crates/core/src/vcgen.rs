//! Verification conditions for a (summary, invariant) candidate.

use std::fmt;

use serde::Serialize;

use crate::frontend::LoopNest;
use crate::ir::{eval, substitute, typecheck, Env, Expr, IrError, Operators, Type, Value};

/// Where a candidate came from: its enumeration index and hole values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CandidateMeta {
    pub index: usize,
    pub operator: Option<String>,
    pub holes: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    /// `output == T(params...)`
    pub ps: Expr,
    pub inv: Expr,
    pub meta: CandidateMeta,
}

impl Candidate {
    pub fn new(ps: Expr, inv: Expr) -> Candidate {
        Candidate {
            ps,
            inv,
            meta: CandidateMeta::default(),
        }
    }

    /// Right-hand side of the summary equation.
    pub fn lifted(&self) -> &Expr {
        match &self.ps {
            Expr::Binary(crate::ir::BinOp::Eq, _, rhs) => rhs,
            other => other,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VcKind {
    Initial,
    Preservation,
    Termination,
}

impl VcKind {
    pub const ALL: [VcKind; 3] = [VcKind::Initial, VcKind::Preservation, VcKind::Termination];

    pub fn label(self) -> &'static str {
        match self {
            VcKind::Initial => "initial",
            VcKind::Preservation => "preservation",
            VcKind::Termination => "termination",
        }
    }
}

impl fmt::Display for VcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A closed formula `forall vars. body`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vc {
    pub kind: VcKind,
    pub vars: Vec<(String, Type)>,
    pub body: Expr,
}

impl Vc {
    /// Evaluate the body under a concrete assignment of the quantified variables.
    pub fn holds(&self, env: &Env, ops: &dyn Operators) -> Result<bool, IrError> {
        match eval(&self.body, env, ops)? {
            Value::Bool(b) => Ok(b),
            _ => Err(IrError::type_error(
                &self.body,
                "verification condition is not boolean",
            )),
        }
    }
}

impl fmt::Display for Vc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.vars.is_empty() {
            return write!(f, "{}", self.body);
        }
        f.write_str("(forall (")?;
        for (k, (v, t)) in self.vars.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "({v} {})", t.name())?;
        }
        write!(f, ") {})", self.body)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VcSet {
    pub initial: Vc,
    pub preservation: Vc,
    pub termination: Vc,
}

impl VcSet {
    pub fn iter(&self) -> impl Iterator<Item = &Vc> {
        [&self.initial, &self.preservation, &self.termination].into_iter()
    }

    pub fn get(&self, kind: VcKind) -> &Vc {
        match kind {
            VcKind::Initial => &self.initial,
            VcKind::Preservation => &self.preservation,
            VcKind::Termination => &self.termination,
        }
    }

    /// Debug dump: one labelled s-expression per condition.
    pub fn render(&self) -> String {
        self.iter()
            .map(|vc| format!("; {}\n{}\n", vc.kind, vc))
            .collect()
    }
}

/// Bounds conditions for every index taken in `exprs`, innermost first.
pub fn definedness(exprs: &[&Expr]) -> Vec<Expr> {
    let mut out: Vec<Expr> = Vec::new();
    for e in exprs {
        collect_indexes(e, &mut out);
    }
    out
}

fn collect_indexes(e: &Expr, out: &mut Vec<Expr>) {
    for c in e.children() {
        collect_indexes(c, out);
    }
    if let Expr::Index(s, i) = e {
        let cond = Expr::and(
            Expr::le(Expr::int(0), (**i).clone()),
            Expr::lt((**i).clone(), Expr::len((**s).clone())),
        );
        if !out.contains(&cond) {
            out.push(cond);
        }
    }
}

fn check_bool(e: &Expr, what: &str, loop_: &LoopNest, ops: &dyn Operators) -> Result<(), IrError> {
    match typecheck(e, &loop_.context(), ops)? {
        Type::Bool => Ok(()),
        t => Err(IrError::type_error(
            e,
            format!("{what} has type {}, expected Bool", t.name()),
        )),
    }
}

fn guarded(conds: Vec<Expr>, goal: Expr) -> Expr {
    Expr::implies(Expr::and_all(conds), goal)
}

/// Build the initial, preservation and termination conditions.
///
/// Index expressions in the loop guard and body become explicit antecedents,
/// so preservation is only required on states where the body is defined.
pub fn make_vcs(loop_: &LoopNest, cand: &Candidate, ops: &dyn Operators) -> Result<VcSet, IrError> {
    check_bool(&cand.ps, "summary", loop_, ops)?;
    check_bool(&cand.inv, "invariant", loop_, ops)?;
    let all_vars: Vec<(String, Type)> = loop_
        .params
        .iter()
        .chain(&loop_.state_vars)
        .cloned()
        .collect();

    let init: Vec<&Expr> = loop_
        .state_vars
        .iter()
        .map(|(v, _)| &loop_.init[v])
        .collect();
    let inv_init = substitute(&cand.inv, &loop_.init);
    let initial_body = match definedness(&init) {
        d if d.is_empty() => inv_init,
        d => guarded(d, inv_init),
    };

    let mut pres_pre = vec![cand.inv.clone(), loop_.cond.clone()];
    let mut reads: Vec<&Expr> = vec![&loop_.cond];
    reads.extend(loop_.state_vars.iter().map(|(v, _)| &loop_.update[v]));
    pres_pre.extend(definedness(&reads));
    let preservation_body = guarded(pres_pre, substitute(&cand.inv, &loop_.update));

    let mut term_pre = vec![cand.inv.clone()];
    term_pre.extend(definedness(&[&loop_.cond]));
    term_pre.push(Expr::not(loop_.cond.clone()));
    let termination_body = guarded(term_pre, cand.ps.clone());

    Ok(VcSet {
        initial: Vc {
            kind: VcKind::Initial,
            vars: loop_.params.clone(),
            body: initial_body,
        },
        preservation: Vc {
            kind: VcKind::Preservation,
            vars: all_vars.clone(),
            body: preservation_body,
        },
        termination: Vc {
            kind: VcKind::Termination,
            vars: all_vars,
            body: termination_body,
        },
    })
}
