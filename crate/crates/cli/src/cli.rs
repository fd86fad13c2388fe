//! Command-line driver.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, ValueEnum};
use serde_json::json;

use liftc_core::frontend::{load_kernel, LoopNest};
use liftc_core::ir::{expr_from_sexp, parse_sexps, to_infix, Sexp};
use liftc_core::smt::{Outcome, SolverCmd, Verifier, VerifyConfig};
use liftc_core::synth::{synthesize, GrammarConfig, SynthStats, SynthStatus, SynthesisResult};
use liftc_core::target::{builtin_registry, Registry};
use liftc_core::vcgen::{make_vcs, Candidate};

use crate::emit::{accel_header, emit_c_stub, report_json, HEADER_NAME};

pub const EXIT_FOUND: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_FOUND: i32 = 2;
pub const EXIT_TIMEOUT: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EmitKind {
    Json,
    C,
    Both,
}

/// Lift a loop kernel to accelerator operator calls.
#[derive(Debug, Parser)]
#[command(name = "liftc", version)]
pub struct Args {
    /// Kernel source file.
    pub kernel: PathBuf,
    /// SMT-LIB solver reading a script on standard input.
    #[arg(long, env = "LIFTC_SOLVER", default_value = "z3 -in")]
    pub solver_cmd: String,
    /// TOML file overriding search settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Maximum operator nesting in summaries.
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Per-query solver timeout in seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
    /// Per-query solver resource limit (z3 `rlimit`); 0 disables it.
    #[arg(long, value_name = "N")]
    pub rlimit: Option<u64>,
    /// Seed for the generated test inputs.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Verify only for sequences up to N elements.
    #[arg(long, value_name = "N")]
    pub bounded: Option<usize>,
    /// Write every solver script into DIR.
    #[arg(long, value_name = "DIR")]
    pub dump_smt: Option<PathBuf>,
    /// Write the verification conditions of each verified candidate into the output directory.
    #[arg(long)]
    pub dump_vcs: bool,
    #[arg(long, value_enum, default_value = "both")]
    pub emit: EmitKind,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Check the summary and invariant in FILE instead of searching.
    #[arg(long, value_name = "FILE")]
    pub verify_only: Option<PathBuf>,
    /// Put the measured wall time in the report instead of 0.
    #[arg(long)]
    pub report_timing: bool,
}

/// Parse `(ps EXPR) (inv EXPR)` in either order.
pub fn parse_candidate(text: &str) -> Result<Candidate> {
    let mut ps = None;
    let mut inv = None;
    for s in parse_sexps(text)? {
        let Sexp::List(items, line) = &s else {
            bail!("expected `(ps EXPR)` or `(inv EXPR)`, found `{s}`");
        };
        let (Some(head), [body]) = (items.first().and_then(Sexp::atom), &items[1..]) else {
            bail!("line {line}: expected `(ps EXPR)` or `(inv EXPR)`");
        };
        let slot = match head {
            "ps" => &mut ps,
            "inv" => &mut inv,
            other => bail!("line {line}: unknown clause `{other}`"),
        };
        if slot.is_some() {
            bail!("line {line}: duplicate `{head}` clause");
        }
        *slot = Some(expr_from_sexp(body)?);
    }
    match (ps, inv) {
        (Some(ps), Some(inv)) => Ok(Candidate::new(ps, inv)),
        _ => bail!("a candidate file needs both `(ps EXPR)` and `(inv EXPR)`"),
    }
}

fn config(args: &Args) -> Result<GrammarConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read config `{}`", path.display()))?;
            GrammarConfig::from_toml(&text).with_context(|| format!("in `{}`", path.display()))?
        }
        None => GrammarConfig::default(),
    };
    if let Some(d) = args.max_depth {
        cfg.max_op_depth = d;
    }
    if let Some(t) = args.timeout {
        cfg.query_timeout_secs = t;
    }
    if let Some(r) = args.rlimit {
        cfg.solver_rlimit = r;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.bounded.is_some() {
        cfg.bounded = args.bounded;
    }
    cfg.dump_smt = args.dump_smt.clone();
    if args.dump_vcs {
        cfg.dump_vcs = Some(args.out.clone());
    }
    Ok(cfg)
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("cannot write `{}`", path.display()))
}

fn emit(args: &Args, result: &SynthesisResult, nest: &LoopNest, reg: &Registry) -> Result<()> {
    if matches!(args.emit, EmitKind::Json | EmitKind::Both) {
        write(
            &args.out,
            &format!("{}.json", nest.name),
            &report_json(result, reg, args.report_timing)?,
        )?;
    }
    if result.status == SynthStatus::Found && matches!(args.emit, EmitKind::C | EmitKind::Both) {
        write(
            &args.out,
            &format!("{}.c", nest.name),
            &emit_c_stub(result, nest, reg)?,
        )?;
        write(&args.out, HEADER_NAME, &accel_header(reg))?;
    }
    let timing = json!({ "kernel": nest.name, "wall_ms": result.stats.wall_ms });
    write(
        &args.out,
        &format!("{}.timing.json", nest.name),
        &format!("{timing}\n"),
    )?;
    Ok(())
}

fn describe(result: &SynthesisResult) -> String {
    match &result.candidate {
        Some(c) => {
            let mode = match result.outcome {
                Some(Outcome::BoundedVerified { bound }) => {
                    format!(" (bounded, lengths <= {bound})")
                }
                _ => String::new(),
            };
            format!(
                "{}: found{mode}\n  summary:   {}\n  invariant: {}",
                result.kernel,
                to_infix(&c.ps),
                to_infix(&c.inv)
            )
        }
        None => format!(
            "{}: {}",
            result.kernel,
            crate::emit::status_name(result.status)
        ),
    }
}

fn verify_only(
    args: &Args,
    file: &Path,
    nest: &LoopNest,
    cfg: &GrammarConfig,
    reg: &Registry,
) -> Result<i32> {
    let text = fs::read_to_string(file)
        .with_context(|| format!("cannot read candidate `{}`", file.display()))?;
    let cand = parse_candidate(&text).with_context(|| format!("in `{}`", file.display()))?;
    let vcs = make_vcs(nest, &cand, reg)?;
    if args.dump_vcs {
        write(&args.out, &format!("{}.0.vcs", nest.name), &vcs.render())?;
    }
    let solver = SolverCmd::parse(&args.solver_cmd)?;
    let vcfg = VerifyConfig {
        timeout: cfg.query_timeout(),
        bounded: cfg.bounded,
        rlimit: cfg.solver_rlimit,
        dump_dir: cfg.dump_smt.clone(),
        ..VerifyConfig::default()
    };
    let start = std::time::Instant::now();
    let outcome = Verifier::new(reg, solver, vcfg, &nest.name).verify(&vcs, 0)?;
    let wall_ms = start.elapsed().as_millis() as u64;
    eprintln!("liftc: verification took {wall_ms} ms");

    let (name, code, detail) = match &outcome {
        Outcome::Verified => ("verified", EXIT_FOUND, json!(null)),
        Outcome::BoundedVerified { bound } => {
            ("bounded_verified", EXIT_FOUND, json!({ "bound": bound }))
        }
        Outcome::Counterexample { vc, witness } => {
            let w: serde_json::Map<String, serde_json::Value> = witness
                .iter()
                .map(|(k, v)| (k.clone(), v.to_json()))
                .collect();
            (
                "counterexample",
                EXIT_NOT_FOUND,
                json!({ "vc": vc, "witness": w }),
            )
        }
        Outcome::Unknown { vc, reason } => (
            "unknown",
            EXIT_NOT_FOUND,
            json!({ "vc": vc, "reason": reason }),
        ),
        Outcome::Timeout { vc } => ("timeout", EXIT_TIMEOUT, json!({ "vc": vc })),
    };
    let report = json!({
        "kernel": nest.name,
        "summary": cand.ps.to_string(),
        "invariant": cand.inv.to_string(),
        "outcome": name,
        "detail": detail,
    });
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write(&args.out, &format!("{}.verify.json", nest.name), &text)?;
    println!("{}: {name}", nest.name);
    if let Outcome::Counterexample { vc, witness } = &outcome {
        println!("  {vc} fails on {}", liftc_core::ir::render_env(witness));
    }
    if outcome.is_verified() {
        let result = SynthesisResult {
            kernel: nest.name.clone(),
            status: SynthStatus::Found,
            candidate: Some(cand),
            outcome: Some(outcome),
            stats: SynthStats {
                smt_queries: 1,
                wall_ms,
                ..SynthStats::default()
            },
            notes: Vec::new(),
            transcript: Vec::new(),
            lemmas: Vec::new(),
        };
        if matches!(args.emit, EmitKind::C | EmitKind::Both) {
            write(
                &args.out,
                &format!("{}.c", nest.name),
                &emit_c_stub(&result, nest, reg)?,
            )?;
            write(&args.out, HEADER_NAME, &accel_header(reg))?;
        }
    }
    Ok(code)
}

fn run(args: &Args) -> Result<i32> {
    let text = fs::read_to_string(&args.kernel)
        .with_context(|| format!("cannot read `{}`", args.kernel.display()))?;
    let (_, nest) = load_kernel(&text).map_err(|e| anyhow!("{}: {e}", args.kernel.display()))?;
    let reg = builtin_registry();
    let cfg = config(args)?;
    cfg.validate(&reg)?;
    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create `{}`", args.out.display()))?;
    if let Some(dir) = &cfg.dump_smt {
        fs::create_dir_all(dir).with_context(|| format!("cannot create `{}`", dir.display()))?;
    }
    if let Some(file) = &args.verify_only {
        return verify_only(args, file, &nest, &cfg, &reg);
    }

    let solver = SolverCmd::parse(&args.solver_cmd)?;
    let result = synthesize(&nest, &cfg, &reg, &solver)?;
    eprintln!(
        "liftc: {} candidates, {} pruned by tests, {} sent to the solver, {} counterexamples, {} ms",
        result.stats.enumerated,
        result.stats.oracle_pruned,
        result.stats.smt_queries,
        result.stats.counterexamples,
        result.stats.wall_ms
    );
    for note in &result.notes {
        eprintln!("liftc: {note}");
    }
    emit(args, &result, &nest, &reg)?;
    println!("{}", describe(&result));
    Ok(match result.status {
        SynthStatus::Found => EXIT_FOUND,
        SynthStatus::NoCandidateFound => EXIT_NOT_FOUND,
        SynthStatus::Timeout => EXIT_TIMEOUT,
    })
}

/// Run the tool and return its exit code. Usage errors exit with 1.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_ERROR
            } else {
                EXIT_FOUND
            };
            let _ = e.print();
            return code;
        }
    };
    match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("liftc: {e:#}");
            EXIT_ERROR
        }
    }
}
