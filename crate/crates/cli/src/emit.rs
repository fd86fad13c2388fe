//! JSON reports, C stubs and the accelerator header.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Map, Value as Json};
use thiserror::Error;

use liftc_core::frontend::LoopNest;
use liftc_core::ir::{eval, Env, Expr, Type};
use liftc_core::smt::Outcome;
use liftc_core::synth::{SynthStatus, SynthesisResult};
use liftc_core::target::Registry;

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("no verified candidate for `{0}`")]
    NotFound(String),
    #[error("cannot emit `{expr}`: {message}")]
    Unsupported { expr: String, message: String },
}

fn unsupported(e: &Expr, message: &str) -> EmitError {
    EmitError::Unsupported {
        expr: e.to_string(),
        message: message.to_string(),
    }
}

#[derive(Serialize)]
struct Verification {
    mode: &'static str,
    bound: Option<usize>,
}

#[derive(Serialize)]
struct Stats {
    enumerated: usize,
    oracle_pruned: usize,
    smt_queries: usize,
    counterexamples: usize,
    wall_ms: u64,
}

#[derive(Serialize)]
struct Report {
    kernel: String,
    status: &'static str,
    lifted: Option<Json>,
    invariant: Option<String>,
    verification: Verification,
    stats: Stats,
}

pub fn status_name(s: SynthStatus) -> &'static str {
    match s {
        SynthStatus::Found => "found",
        SynthStatus::NoCandidateFound => "no_candidate",
        SynthStatus::Timeout => "timeout",
    }
}

/// `{op, args, constants}` for an operator call. Arguments that are kernel
/// parameters appear by name, nested calls as nested objects, literals as constants.
pub fn call_tree(e: &Expr, reg: &Registry) -> Result<Json, EmitError> {
    let Expr::Call(op, args) = e else {
        return Err(unsupported(e, "not an operator call"));
    };
    let spec = reg
        .get(op)
        .ok_or_else(|| unsupported(e, "unknown operator"))?;
    let mut tensors = Map::new();
    let mut constants = Map::new();
    for ((param, _), arg) in spec.params().iter().zip(args) {
        match arg {
            Expr::Var(v) => {
                tensors.insert(param.clone(), Json::String(v.clone()));
            }
            Expr::Call(..) => {
                tensors.insert(param.clone(), call_tree(arg, reg)?);
            }
            lit if lit.is_literal() => {
                let v = eval(lit, &Env::new(), reg)
                    .map_err(|err| unsupported(lit, &err.to_string()))?;
                constants.insert(param.clone(), v.to_json());
            }
            other => {
                return Err(unsupported(
                    other,
                    "argument is neither a parameter, a call nor a literal",
                ))
            }
        }
    }
    let mut obj = Map::new();
    obj.insert("op".into(), Json::String(op.clone()));
    obj.insert("args".into(), Json::Object(tensors));
    obj.insert("constants".into(), Json::Object(constants));
    Ok(Json::Object(obj))
}

/// The report for any status. `wall_ms` is written as 0 unless `timing` is set,
/// so that repeated runs produce identical bytes.
pub fn report_json(
    result: &SynthesisResult,
    reg: &Registry,
    timing: bool,
) -> Result<String, EmitError> {
    let lifted = match &result.candidate {
        Some(c) => Some(call_tree(c.lifted(), reg)?),
        None => None,
    };
    let bound = match result.outcome {
        Some(Outcome::BoundedVerified { bound }) => Some(bound),
        _ => None,
    };
    let s = &result.stats;
    let report = Report {
        kernel: result.kernel.clone(),
        status: status_name(result.status),
        lifted,
        invariant: result.candidate.as_ref().map(|c| c.inv.to_string()),
        verification: Verification {
            mode: if bound.is_some() { "bounded" } else { "full" },
            bound,
        },
        stats: Stats {
            enumerated: s.enumerated,
            oracle_pruned: s.oracle_pruned,
            smt_queries: s.smt_queries,
            counterexamples: s.counterexamples,
            wall_ms: if timing { s.wall_ms } else { 0 },
        },
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    Ok(text)
}

/// The report of a found result; other statuses are an error.
pub fn emit_json(
    result: &SynthesisResult,
    reg: &Registry,
    timing: bool,
) -> Result<String, EmitError> {
    if result.status != SynthStatus::Found {
        return Err(EmitError::NotFound(result.kernel.clone()));
    }
    report_json(result, reg, timing)
}

// C emission. Sequences are passed as pointer plus length, matrices as
// row-major pointer plus rows and columns. A sequence result is written to
// `out` and its length returned; a matrix result also reports its columns.

pub const HEADER_NAME: &str = "liftc_accel.h";

fn c_params(name: &str, t: Type, out: &mut Vec<String>) {
    match t {
        Type::Int | Type::Bool => out.push(format!("int {name}")),
        Type::SeqInt => {
            out.push(format!("const int *{name}"));
            out.push(format!("int {name}_len"));
        }
        Type::SeqSeqInt => {
            out.push(format!("const int *{name}"));
            out.push(format!("int {name}_rows"));
            out.push(format!("int {name}_cols"));
        }
    }
}

fn c_result(t: Type, out: &mut Vec<String>) {
    match t {
        Type::Int | Type::Bool => {}
        Type::SeqInt => out.push("int *out".into()),
        Type::SeqSeqInt => {
            out.push("int *out".into());
            out.push("int *out_cols".into());
        }
    }
}

fn prototype(name: &str, params: &[(String, Type)], ret: Type) -> String {
    let mut ps = Vec::new();
    for (p, t) in params {
        c_params(p, *t, &mut ps);
    }
    c_result(ret, &mut ps);
    if ps.is_empty() {
        ps.push("void".into());
    }
    format!("int {name}({})", ps.join(", "))
}

fn entry_point(op: &str) -> String {
    format!("liftc_{op}")
}

/// Declarations for every accelerator operator in the registry.
pub fn accel_header(reg: &Registry) -> String {
    let mut h = String::from(concat!(
        "/* Accelerator entry points targeted by liftc.\n",
        " *\n",
        " * Sequences are (pointer, length) pairs and matrices are row-major\n",
        " * (pointer, rows, cols). Operators returning a sequence write it to\n",
        " * `out` and return its length, which never exceeds the length of\n",
        " * their longest sequence argument. Operators returning a matrix also\n",
        " * store its column count in `out_cols` and return its row count.\n",
        " */\n",
        "#ifndef LIFTC_ACCEL_H\n#define LIFTC_ACCEL_H\n\n",
    ));
    for op in reg.operators() {
        if !op.role.is_accelerator() {
            continue;
        }
        let _ = writeln!(
            h,
            "{};",
            prototype(&entry_point(&op.name), op.params(), op.sig.ret)
        );
    }
    h.push_str("\n#endif\n");
    h
}

struct StubWriter<'a> {
    reg: &'a Registry,
    nest: &'a LoopNest,
    body: String,
    temps: usize,
    arrays: usize,
    used: BTreeSet<String>,
}

impl StubWriter<'_> {
    fn param_type(&self, v: &str, e: &Expr) -> Result<Type, EmitError> {
        self.nest
            .param_type(v)
            .ok_or_else(|| unsupported(e, "not a kernel parameter"))
    }

    /// Capacity for temporaries: no operator output is longer than its inputs.
    fn capacity(&self) -> String {
        let lens: Vec<String> = self
            .nest
            .params
            .iter()
            .filter(|(_, t)| *t == Type::SeqInt)
            .map(|(p, _)| format!("{p}_len"))
            .collect();
        if lens.is_empty() {
            "1".into()
        } else {
            format!("{} + 1", lens.join(" + "))
        }
    }

    /// C arguments for one IR argument of the given parameter type.
    fn argument(&mut self, e: &Expr, t: Type) -> Result<Vec<String>, EmitError> {
        match (e, t) {
            (Expr::Var(v), _) => {
                if self.param_type(v, e)? != t {
                    return Err(unsupported(e, "parameter type mismatch"));
                }
                self.used.insert(v.clone());
                Ok(match t {
                    Type::Int | Type::Bool => vec![v.clone()],
                    Type::SeqInt => vec![v.clone(), format!("{v}_len")],
                    Type::SeqSeqInt => vec![v.clone(), format!("{v}_rows"), format!("{v}_cols")],
                })
            }
            (Expr::Int(v), Type::Int) => Ok(vec![v.to_string()]),
            (Expr::List(items), Type::SeqInt) => {
                let name = format!("k{}", self.arrays);
                self.arrays += 1;
                let elems: Vec<String> = items.iter().map(|x| x.to_string()).collect();
                let _ = writeln!(
                    self.body,
                    "    static const int {name}[] = {{{}}};",
                    elems.join(", ")
                );
                Ok(vec![name, items.len().to_string()])
            }
            (Expr::Empty(Type::SeqInt), Type::SeqInt) => Ok(vec!["0".into(), "0".into()]),
            (Expr::Call(..), Type::SeqInt) => {
                let name = format!("t{}", self.temps);
                self.temps += 1;
                let cap = self.capacity();
                let _ = writeln!(self.body, "    int {name}[{cap}];");
                let call = self.call(e, Some(&name))?;
                let _ = writeln!(self.body, "    int {name}_len = {call};");
                Ok(vec![name.clone(), format!("{name}_len")])
            }
            (Expr::Call(..), Type::Int) => {
                let name = format!("t{}", self.temps);
                self.temps += 1;
                let call = self.call(e, None)?;
                let _ = writeln!(self.body, "    int {name} = {call};");
                Ok(vec![name])
            }
            _ => Err(unsupported(e, "argument form has no C rendering")),
        }
    }

    fn call(&mut self, e: &Expr, out: Option<&str>) -> Result<String, EmitError> {
        let Expr::Call(op, args) = e else {
            return Err(unsupported(e, "not an operator call"));
        };
        let spec = self
            .reg
            .get(op)
            .ok_or_else(|| unsupported(e, "unknown operator"))?;
        let params: Vec<Type> = spec.params().iter().map(|(_, t)| *t).collect();
        let ret = spec.sig.ret;
        let mut cargs = Vec::new();
        for (a, t) in args.iter().zip(params) {
            cargs.extend(self.argument(a, t)?);
        }
        match (ret, out) {
            (Type::Int, _) => {}
            (Type::SeqInt, Some(o)) => cargs.push(o.to_string()),
            (Type::SeqSeqInt, Some(o)) => {
                cargs.push(o.to_string());
                cargs.push(format!("{o}_cols"));
            }
            _ => return Err(unsupported(e, "result needs an output buffer")),
        }
        Ok(format!("{}({})", entry_point(op), cargs.join(", ")))
    }
}

/// A C function with the kernel's signature shape that forwards to the accelerator.
pub fn emit_c_stub(
    result: &SynthesisResult,
    nest: &LoopNest,
    reg: &Registry,
) -> Result<String, EmitError> {
    let Some(cand) = result
        .candidate
        .as_ref()
        .filter(|_| result.status == SynthStatus::Found)
    else {
        return Err(EmitError::NotFound(result.kernel.clone()));
    };
    c_stub_for(cand.lifted(), nest, reg)
}

/// Stub for an arbitrary lifted expression over the kernel's parameters.
pub fn c_stub_for(lifted: &Expr, nest: &LoopNest, reg: &Registry) -> Result<String, EmitError> {
    let mut w = StubWriter {
        reg,
        nest,
        body: String::new(),
        temps: 0,
        arrays: 0,
        used: BTreeSet::new(),
    };
    let out = match nest.output_type {
        Type::Int | Type::Bool => None,
        Type::SeqInt | Type::SeqSeqInt => Some("out"),
    };
    let call = w.call(lifted, out)?;
    let mut s = format!(
        "/* Generated by liftc from `{}`. */\n#include \"{HEADER_NAME}\"\n\n{}\n{{\n",
        nest.name,
        prototype(&nest.name, &nest.params, nest.output_type)
    );
    for (p, t) in &nest.params {
        if w.used.contains(p) {
            continue;
        }
        let mut cs = Vec::new();
        c_params(p, *t, &mut cs);
        for c in cs {
            let name = c.rsplit([' ', '*']).next().unwrap_or(&c);
            let _ = writeln!(s, "    (void){name};");
        }
    }
    s.push_str(&w.body);
    let _ = writeln!(s, "    return {call};\n}}");
    Ok(s)
}
