use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::Duration;

use liftc_core::frontend::{load_kernel, run_source, LoopNest, SourceAst, DEFAULT_FUEL};
use liftc_core::ir::{eval, parse_expr, Env, Expr, Type, Value};
use liftc_core::smt::{
    parse_model, render, run_solver, Builder, Outcome, SmtError, SmtQuery, SolverAnswer, SolverCmd,
    TermEnv, Verifier, VerifyConfig,
};
use liftc_core::target::{builtin_registry, Registry};
use liftc_core::vcgen::{make_vcs, Candidate, VcKind};
use proptest::prelude::*;

fn solver() -> SolverCmd {
    SolverCmd::parse(&std::env::var("LIFTC_SOLVER").unwrap_or_else(|_| "z3 -in".into())).unwrap()
}

fn kernel(name: &str) -> (SourceAst, LoopNest) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../corpus/{name}.mc"));
    load_kernel(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn cand(ps: &str, inv: &str) -> Candidate {
    Candidate::new(parse_expr(ps).unwrap(), parse_expr(inv).unwrap())
}

fn query(script: &str, vars: &[(&str, Type)]) -> SmtQuery {
    SmtQuery {
        label: "test".into(),
        script: script.into(),
        model_vars: vars.iter().map(|(v, t)| (v.to_string(), *t)).collect(),
    }
}

fn ask(script: &str) -> SolverAnswer {
    run_solver(&query(script, &[]), &solver(), Duration::from_secs(10))
        .unwrap()
        .answer
}

fn verify(name: &str, c: &Candidate) -> Outcome {
    let reg = builtin_registry();
    let (_, nest) = kernel(name);
    let vcs = make_vcs(&nest, c, &reg).unwrap();
    let mut v = Verifier::new(&reg, solver(), VerifyConfig::default(), name);
    v.verify(&vcs, 0).unwrap()
}

#[test]
fn false_assertion_is_unsat() {
    assert_eq!(ask("(assert false)(check-sat)\n"), SolverAnswer::Unsat);
}

#[test]
fn sat_answers_carry_the_requested_values() {
    let q = query(
        "(declare-const x Int)(assert (= x 1))(check-sat)\n",
        &[("x", Type::Int)],
    );
    let r = run_solver(&q, &solver(), Duration::from_secs(10)).unwrap();
    let mut want = Env::new();
    want.insert("x".into(), Value::int(1));
    assert_eq!(r.answer, SolverAnswer::Sat(want));
    assert!(r.output.contains("sat"));
}

#[test]
fn zero_timeout_reports_timeout() {
    assert_eq!(
        run_solver(&query("(check-sat)\n", &[]), &solver(), Duration::ZERO)
            .unwrap()
            .answer,
        SolverAnswer::Timeout
    );
}

#[test]
fn slow_queries_time_out() {
    // Nonlinear integer search that z3 does not finish quickly.
    let script = "(declare-const x Int)(declare-const y Int)(declare-const z Int)\
        (assert (> x 1))(assert (> y 1))(assert (> z 1))\
        (assert (= (+ (* x x x) (* y y y)) (* z z z)))(check-sat)\n";
    let r = run_solver(&query(script, &[]), &solver(), Duration::from_millis(300)).unwrap();
    assert_eq!(r.answer, SolverAnswer::Timeout);
}

#[test]
fn missing_solver_is_unavailable() {
    let cmd = SolverCmd::parse("/nonexistent/solver -in").unwrap();
    let err = run_solver(&query("(check-sat)\n", &[]), &cmd, Duration::from_secs(1)).unwrap_err();
    assert!(matches!(err, SmtError::SolverUnavailable(_)), "{err}");
    assert!(matches!(
        SolverCmd::parse("  "),
        Err(SmtError::SolverUnavailable(_))
    ));
}

#[test]
fn garbage_output_is_a_protocol_error() {
    let cmd = SolverCmd::parse("echo hello").unwrap();
    let err = run_solver(&query("(check-sat)\n", &[]), &cmd, Duration::from_secs(5)).unwrap_err();
    assert!(matches!(err, SmtError::ProtocolError(_)), "{err}");
    let cmd = SolverCmd::parse("true").unwrap();
    let err = run_solver(&query("(check-sat)\n", &[]), &cmd, Duration::from_secs(5)).unwrap_err();
    assert!(matches!(err, SmtError::ProtocolError(_)), "{err}");
}

#[test]
fn model_values_parse() {
    let vars = vec![
        ("data".to_string(), Type::SeqInt),
        ("i".to_string(), Type::Int),
        ("result".to_string(), Type::SeqInt),
        ("m".to_string(), Type::SeqSeqInt),
    ];
    let text = "((data (seq.++ (seq.unit 1) (seq.unit (- 7)) (seq.unit 0)))\n (i (- 2))\n \
                (result (as seq.empty (Seq Int)))\n (m (seq.unit (seq.++ (seq.unit 3) (seq.unit 4)))))";
    let env = parse_model(text, &vars).unwrap();
    assert_eq!(env["data"], Value::seq(&[1, -7, 0]));
    assert_eq!(env["i"], Value::int(-2));
    assert_eq!(env["result"], Value::seq(&[]));
    assert_eq!(env["m"], Value::matrix(&[&[3, 4]]));
    assert!(matches!(
        parse_model("((i x))", &vars[1..2]),
        Err(SmtError::ProtocolError(_))
    ));
    assert!(matches!(
        parse_model("((j 1))", &vars[1..2]),
        Err(SmtError::ProtocolError(_))
    ));
}

/// Feed a script without `check-sat` and expect the solver to stay silent.
fn parses_cleanly(script: &str) {
    let body = script.replace("(check-sat)\n", "");
    let cmd = solver();
    let mut child = Command::new(&cmd.argv[0])
        .args(&cmd.argv[1..])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(body.as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    let text =
        String::from_utf8_lossy(&out.stdout).to_string() + &String::from_utf8_lossy(&out.stderr);
    assert!(
        text.trim().is_empty(),
        "solver complained:\n{text}\nscript:\n{body}"
    );
}

#[test]
fn every_operator_emits_a_well_formed_script() {
    let reg = builtin_registry();
    for op in reg.operators() {
        let mut b = Builder::new(&reg);
        let args: Vec<_> = op
            .params()
            .iter()
            .map(|(p, t)| b.arena.constant(p, *t))
            .collect();
        let call = b.arena.call(&op.name, args, op.sig.ret);
        let same = b.arena.eq(call, call);
        b.unfold(&[call], 2).unwrap();
        let mut asserts = b.facts.clone();
        asserts.push(same);
        let script = render(&b.arena, &reg, &asserts);
        assert!(
            script.contains(&format!("(declare-fun {} ", op.name)),
            "{script}"
        );
        parses_cleanly(&script);
    }
}

#[test]
fn every_corpus_vc_emits_a_well_formed_script() {
    let reg = builtin_registry();
    let dir = tempfile::tempdir().unwrap();
    for (name, c) in [
        (
            "window_sum",
            cand(
                "(= result (conv1d data (list 1 1) 1))",
                "(= result (conv1d (slice data 0 (+ i 1)) (list 1 1) 1))",
            ),
        ),
        (
            "dotprod",
            cand(
                "(= s (dot_product a b))",
                "(= s (dot_product (slice a 0 i) (slice b 0 i)))",
            ),
        ),
        (
            "adjprod",
            cand(
                "(= result (elemwise_mul data data))",
                "(= result (elemwise_mul (slice data 0 i) (slice data 0 i)))",
            ),
        ),
        ("empty_loop", cand("(= result (empty_seq))", "true")),
    ] {
        let (_, nest) = kernel(name);
        let vcs = make_vcs(&nest, &c, &reg).unwrap();
        let cfg = VerifyConfig {
            dump_dir: Some(dir.path().to_path_buf()),
            ..VerifyConfig::default()
        };
        let mut v = Verifier::new(&reg, solver(), cfg, name);
        v.verify(&vcs, 0).unwrap();
        assert!(!v.transcript.is_empty());
    }
    let mut n = 0;
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        let script = text.split("(get-value").next().unwrap();
        parses_cleanly(script);
        n += 1;
    }
    assert!(n >= 10, "only {n} scripts dumped");
}

#[test]
fn golden_window_sum_candidate_is_verified() {
    let c = cand(
        "(= result (conv1d data (list 1 1) 1))",
        "(= result (conv1d (slice data 0 (+ i 1)) (list 1 1) 1))",
    );
    assert_eq!(verify("window_sum", &c), Outcome::Verified);
}

#[test]
fn reference_candidates_are_verified() {
    for (name, c) in [
        (
            "dotprod",
            cand(
                "(= s (dot_product a b))",
                "(= s (dot_product (slice a 0 i) (slice b 0 i)))",
            ),
        ),
        (
            "scale3",
            cand(
                "(= result (scalar_scale a 3))",
                "(= result (scalar_scale (slice a 0 i) 3))",
            ),
        ),
        (
            "vadd",
            cand(
                "(= result (elemwise_add a b))",
                "(= result (elemwise_add (slice a 0 i) (slice b 0 i)))",
            ),
        ),
        (
            "empty_loop",
            cand("(= result (empty_seq))", "(= result (empty_seq))"),
        ),
        (
            "weighted_window",
            cand(
                "(= result (conv1d data (list 1 0 -1) 2))",
                "(= result (conv1d (slice data 0 (+ (* 2 i) 1)) (list 1 0 -1) 2))",
            ),
        ),
    ] {
        assert_eq!(verify(name, &c), Outcome::Verified, "{name}");
    }
}

#[test]
fn tautological_candidate_is_verified() {
    assert_eq!(
        verify("window_sum", &cand("true", "true")),
        Outcome::Verified
    );
}

#[test]
fn wrong_kernel_yields_a_genuine_counterexample() {
    let reg = builtin_registry();
    let (ast, nest) = kernel("window_sum");
    let c = cand(
        "(= result (conv1d data (list 1 2) 1))",
        "(= result (conv1d (slice data 0 (+ i 1)) (list 1 2) 1))",
    );
    let vcs = make_vcs(&nest, &c, &reg).unwrap();
    let mut v = Verifier::new(&reg, solver(), VerifyConfig::default(), "window_sum");
    let Outcome::Counterexample { vc, witness } = v.verify(&vcs, 0).unwrap() else {
        panic!("expected a counterexample");
    };
    assert_eq!(vc, VcKind::Preservation);
    assert!(!vcs.get(vc).holds(&witness, &reg).unwrap());
    // On the witness input, the source and the candidate summary disagree.
    let mut inputs = Env::new();
    inputs.insert("data".into(), witness["data"].clone());
    let source = run_source(&ast, &inputs, DEFAULT_FUEL).unwrap();
    let lifted = eval(
        &parse_expr("(conv1d data (list 1 2) 1)").unwrap(),
        &inputs,
        &reg,
    )
    .unwrap();
    assert_ne!(source, lifted);
}

#[test]
fn negative_controls_are_never_verified() {
    for (name, c) in [
        (
            "adjprod",
            cand(
                "(= result (elemwise_mul data data))",
                "(= result (elemwise_mul (slice data 0 i) (slice data 0 i)))",
            ),
        ),
        (
            "window_sum",
            cand(
                "(= result (conv1d data (list 1 1) 1))",
                "(= result (conv1d (slice data 0 i) (list 1 1) 1))",
            ),
        ),
        (
            "window_sum",
            cand(
                "(= result (conv1d data (list 1 1) 2))",
                "(= result (conv1d (slice data 0 (+ i 1)) (list 1 1) 2))",
            ),
        ),
        (
            "dotprod",
            cand(
                "(= s (dot_product a a))",
                "(= s (dot_product (slice a 0 i) (slice a 0 i)))",
            ),
        ),
    ] {
        let o = verify(name, &c);
        assert!(!o.is_verified(), "{name}: {o:?}");
    }
}

#[test]
fn bounded_mode_never_claims_full_verification() {
    let reg = builtin_registry();
    let (_, nest) = kernel("window_sum");
    let c = cand(
        "(= result (conv1d data (list 1 1) 1))",
        "(= result (conv1d (slice data 0 (+ i 1)) (list 1 1) 1))",
    );
    let vcs = make_vcs(&nest, &c, &reg).unwrap();
    let cfg = VerifyConfig {
        bounded: Some(4),
        ..VerifyConfig::default()
    };
    let mut v = Verifier::new(&reg, solver(), cfg, "window_sum");
    assert_eq!(
        v.verify(&vcs, 0).unwrap(),
        Outcome::BoundedVerified { bound: 4 }
    );
}

// Encoding fidelity: a lowered expression equals its evaluated value once the
// free variables are pinned to concrete values.

fn seq_expr() -> impl Strategy<Value = Expr> {
    let int = prop_oneof![
        (-3i64..6).prop_map(Expr::int),
        Just(Expr::var("n")),
        (-2i64..3).prop_map(|c| Expr::add(Expr::var("n"), Expr::int(c))),
        Just(Expr::len(Expr::var("d"))),
    ];
    let leaf = prop_oneof![
        Just(Expr::var("d")),
        Just(Expr::Empty(Type::SeqInt)),
        Just(Expr::int_list(&[4, 5]))
    ];
    leaf.prop_recursive(3, 12, 2, move |inner| {
        prop_oneof![
            (inner.clone(), int.clone(), int.clone())
                .prop_map(|(s, lo, hi)| Expr::slice(s, lo, hi)),
            (inner.clone(), int.clone()).prop_map(|(s, x)| Expr::append(s, x)),
            (int.clone(), inner.clone()).prop_map(|(x, s)| Expr::prepend(x, s)),
        ]
    })
}

fn observation() -> impl Strategy<Value = Expr> {
    seq_expr().prop_flat_map(|s| {
        prop_oneof![
            Just(s.clone()),
            Just(Expr::len(s.clone())),
            (0i64..4).prop_map(move |i| Expr::index(s.clone(), Expr::int(i))),
        ]
    })
}

fn pinned_script(reg: &Registry, e: &Expr, env: &Env, value: &Value) -> String {
    let mut b = Builder::new(reg);
    let mut tenv = TermEnv::new();
    let mut asserts = Vec::new();
    for (v, val) in env {
        let c = b.arena.constant(v, val.ty());
        let lit = b.lower(&val.to_expr(), &TermEnv::new()).unwrap();
        asserts.push(b.arena.eq(c, lit));
        tenv.insert(v.clone(), c);
    }
    let t = b.lower(e, &tenv).unwrap();
    let want = b.lower(&value.to_expr(), &TermEnv::new()).unwrap();
    let same = b.arena.eq(t, want);
    asserts.push(b.arena.not(same));
    render(&b.arena, reg, &asserts)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lowering_agrees_with_evaluation(
        e in observation(),
        d in prop::collection::vec(-5i64..5, 0..5),
        n in -1i64..6,
    ) {
        let reg = builtin_registry();
        let mut env = Env::new();
        env.insert("d".into(), Value::seq(&d));
        env.insert("n".into(), Value::int(n));
        // Out-of-range indexing has no defined value to compare against.
        let Ok(value) = eval(&e, &env, &reg) else { return Ok(()) };
        let script = pinned_script(&reg, &e, &env, &value);
        prop_assert_eq!(ask(&script), SolverAnswer::Unsat, "{}\n{}", e, script);
    }
}

#[test]
fn resource_limit_is_sent_and_enforced() {
    let reg = builtin_registry();
    let (_, nest) = kernel("window_sum");
    let vcs = make_vcs(
        &nest,
        &cand(
            "(= result (conv1d data (list 1 1) 1))",
            "(= result (conv1d (slice data 0 (+ i 1)) (list 1 1) 1))",
        ),
        &reg,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cfg = VerifyConfig {
        rlimit: 1,
        dump_dir: Some(dir.path().to_path_buf()),
        ..VerifyConfig::default()
    };
    let mut v = Verifier::new(&reg, solver(), cfg, "window_sum");
    let outcome = v.verify(&vcs, 0).unwrap();
    assert!(!outcome.is_verified(), "{outcome:?}");
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        assert!(text.starts_with("(set-option :rlimit 1)\n"), "{text}");
    }
    let mut v = Verifier::new(
        &reg,
        solver(),
        VerifyConfig {
            rlimit: 4_000_000,
            ..VerifyConfig::default()
        },
        "window_sum",
    );
    assert_eq!(v.verify(&vcs, 0).unwrap(), Outcome::Verified);
}
