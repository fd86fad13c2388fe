use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use liftc::emit::{
    accel_header, c_stub_for, call_tree, emit_c_stub, emit_json, report_json, EmitError,
};
use liftc_core::frontend::{load_kernel, LoopNest};
use liftc_core::ir::{parse_expr, Type};
use liftc_core::synth::{SynthStats, SynthStatus, SynthesisResult};
use liftc_core::target::builtin_registry;
use liftc_core::vcgen::Candidate;
use serde_json::{json, Value as Json};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
}

fn liftc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liftc"))
        .args(args)
        .output()
        .unwrap()
}

fn nest(name: &str) -> LoopNest {
    load_kernel(&std::fs::read_to_string(corpus(&format!("{name}.mc"))).unwrap())
        .unwrap()
        .1
}

fn found(kernel: &str, ps: &str, inv: &str) -> SynthesisResult {
    SynthesisResult {
        kernel: kernel.into(),
        status: SynthStatus::Found,
        candidate: Some(Candidate::new(
            parse_expr(ps).unwrap(),
            parse_expr(inv).unwrap(),
        )),
        outcome: Some(liftc_core::smt::Outcome::Verified),
        stats: SynthStats::default(),
        notes: Vec::new(),
        transcript: Vec::new(),
        lemmas: Vec::new(),
    }
}

fn not_found(kernel: &str) -> SynthesisResult {
    SynthesisResult {
        status: SynthStatus::NoCandidateFound,
        candidate: None,
        outcome: None,
        ..found(kernel, "(= x 0)", "true")
    }
}

/// Syntax-check C source against the shipped header.
fn compiles(dir: &Path, file: &str) -> Result<(), String> {
    let out = Command::new("cc")
        .args([
            "-std=c99",
            "-Wall",
            "-Wextra",
            "-Werror",
            "-pedantic",
            "-fsyntax-only",
            "-I",
        ])
        .arg(dir)
        .arg(dir.join(file))
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&out.stderr).into_owned())
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(liftc(&["--help"]).status.code(), Some(0));
    assert_eq!(liftc(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(liftc(&[]).status.code(), Some(1));
    assert_eq!(liftc(&["--no-such-flag", "x.mc"]).status.code(), Some(1));
    assert_eq!(liftc(&["x.mc", "--emit", "pdf"]).status.code(), Some(1));
}

#[test]
fn missing_kernel_exits_one_with_a_diagnostic() {
    let out = liftc(&["missing.mc"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("missing.mc"), "{err}");
}

#[test]
fn malformed_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mc");
    std::fs::write(&bad, "fn f(a: list<int>) -> int { return ; }").unwrap();
    let out = liftc(&[bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.mc"));

    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "max_op_depth = 0\n").unwrap();
    let k = corpus("window_sum.mc");
    let out = liftc(&[k.to_str().unwrap(), "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let out = liftc(&[
        k.to_str().unwrap(),
        "--solver-cmd",
        "/nonexistent/solver -in",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));

    let cand = dir.path().join("c.cand");
    std::fs::write(&cand, "(ps (= result data))").unwrap();
    let out = liftc(&[k.to_str().unwrap(), "--verify-only", cand.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn window_sum_writes_report_stub_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let k = corpus("window_sum.mc");
    let out = liftc(&[k.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let report: Json =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("window_sum.json")).unwrap())
            .unwrap();
    assert_eq!(report["status"], "found");
    assert_eq!(report["lifted"]["op"], "conv1d");
    assert_eq!(
        report["lifted"]["constants"],
        json!({ "kernel": [1, 1], "stride": 1 })
    );
    assert_eq!(report["lifted"]["args"], json!({ "data": "data" }));
    assert_eq!(
        report["verification"],
        json!({ "mode": "full", "bound": null })
    );
    assert_eq!(report["stats"]["wall_ms"], 0);

    let stub = std::fs::read_to_string(dir.path().join("window_sum.c")).unwrap();
    assert!(
        stub.contains("{1, 1}") && stub.contains("liftc_conv1d("),
        "{stub}"
    );
    compiles(dir.path(), "window_sum.c").unwrap();

    let timing: Json = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("window_sum.timing.json")).unwrap(),
    )
    .unwrap();
    assert!(timing["wall_ms"].is_u64());
}

#[test]
fn emit_flag_selects_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let k = corpus("scale3.mc");
    let d = dir.path().to_str().unwrap();
    assert_eq!(
        liftc(&[k.to_str().unwrap(), "--out", d, "--emit", "json"])
            .status
            .code(),
        Some(0)
    );
    assert!(dir.path().join("scale3.json").exists());
    assert!(!dir.path().join("scale3.c").exists());

    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(
        liftc(&[k.to_str().unwrap(), "--out", d, "--emit", "c"])
            .status
            .code(),
        Some(0)
    );
    assert!(!dir.path().join("scale3.json").exists());
    assert!(dir.path().join("scale3.c").exists());
    assert!(dir.path().join("liftc_accel.h").exists());
}

#[test]
fn bounded_flag_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let k = corpus("vadd.mc");
    let out = liftc(&[
        k.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--bounded",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: Json =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("vadd.json")).unwrap())
            .unwrap();
    assert_eq!(
        report["verification"],
        json!({ "mode": "bounded", "bound": 3 })
    );
}

#[test]
fn dump_flags_write_scripts_and_vcs() {
    let dir = tempfile::tempdir().unwrap();
    let smt = dir.path().join("smt");
    let k = corpus("window_sum.mc");
    let out = liftc(&[
        k.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--dump-smt",
        smt.to_str().unwrap(),
        "--dump-vcs",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let scripts: Vec<_> = std::fs::read_dir(&smt).unwrap().collect();
    assert!(!scripts.is_empty());
    let vcs: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "vcs"))
        .collect();
    assert_eq!(vcs.len(), 1);
    let text = std::fs::read_to_string(vcs[0].path()).unwrap();
    assert!(
        text.contains("initial") && text.contains("preservation") && text.contains("termination")
    );
}

#[test]
fn verify_only_accepts_the_golden_candidate() {
    let dir = tempfile::tempdir().unwrap();
    let cand = dir.path().join("golden.cand");
    std::fs::write(
        &cand,
        "; reference candidate\n(inv (= result (conv1d (slice data 0 (+ i 1)) (list 1 1) 1)))\n(ps (= result (conv1d data (list 1 1) 1)))\n",
    )
    .unwrap();
    let k = corpus("window_sum.mc");
    let out = liftc(&[
        k.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--verify-only",
        cand.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: Json = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("window_sum.verify.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["outcome"], "verified");
    compiles(dir.path(), "window_sum.c").unwrap();
}

#[test]
fn every_found_corpus_stub_compiles() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    for (name, extra) in [
        ("dotprod", vec![]),
        ("scale3", vec![]),
        ("vadd", vec![]),
        ("weighted_window", vec![]),
        (
            "empty_loop",
            vec![
                "--config".to_string(),
                corpus("empty_loop.toml").display().to_string(),
            ],
        ),
    ] {
        let k = corpus(&format!("{name}.mc"));
        let mut args = vec![k.to_str().unwrap(), "--out", d, "--emit", "c"];
        args.extend(extra.iter().map(String::as_str));
        assert_eq!(liftc(&args).status.code(), Some(0), "{name}");
        compiles(dir.path(), &format!("{name}.c")).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn shipped_header_matches_the_registry() {
    let shipped = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/liftc_accel.h"),
    )
    .unwrap();
    let reg = builtin_registry();
    let generated = accel_header(&reg);
    assert_eq!(shipped, generated);
    for op in reg.operators().iter().filter(|o| o.role.is_accelerator()) {
        assert!(
            generated.contains(&format!("liftc_{}(", op.name)),
            "{}",
            op.name
        );
    }
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("liftc_accel.h"), &generated).unwrap();
    std::fs::write(
        dir.path().join("h.c"),
        "#include \"liftc_accel.h\"\n#include \"liftc_accel.h\"\n",
    )
    .unwrap();
    compiles(dir.path(), "h.c").unwrap();
}

#[test]
fn json_for_a_non_found_result_is_an_error() {
    let reg = builtin_registry();
    assert!(
        matches!(emit_json(&not_found("adjprod"), &reg, false), Err(EmitError::NotFound(k)) if k == "adjprod")
    );
    assert!(matches!(
        emit_c_stub(&not_found("adjprod"), &nest("adjprod"), &reg),
        Err(EmitError::NotFound(_))
    ));

    // The report itself is still available, with nulls.
    let r: Json =
        serde_json::from_str(&report_json(&not_found("adjprod"), &reg, false).unwrap()).unwrap();
    assert_eq!(r["status"], "no_candidate");
    assert!(r["lifted"].is_null() && r["invariant"].is_null());
}

#[test]
fn dotprod_json_has_two_tensor_arguments() {
    let reg = builtin_registry();
    let r = found(
        "dotprod",
        "(= s (dot_product a b))",
        "(= s (dot_product (slice a 0 i) (slice b 0 i)))",
    );
    let j: Json = serde_json::from_str(&emit_json(&r, &reg, false).unwrap()).unwrap();
    assert_eq!(
        j["lifted"],
        json!({ "op": "dot_product", "args": { "a": "a", "b": "b" }, "constants": {} })
    );
    let stub = emit_c_stub(&r, &nest("dotprod"), &reg).unwrap();
    assert!(
        stub.contains("return liftc_dot_product(a, a_len, b, b_len);"),
        "{stub}"
    );
}

#[test]
fn report_keys_are_in_a_stable_order() {
    let reg = builtin_registry();
    let r = found(
        "window_sum",
        "(= result (conv1d data (list 1 1) 1))",
        "true",
    );
    let text = report_json(&r, &reg, false).unwrap();
    let keys = [
        "\"kernel\"",
        "\"status\"",
        "\"lifted\"",
        "\"invariant\"",
        "\"verification\"",
        "\"stats\"",
    ];
    let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]), "{text}");
    assert_eq!(text, report_json(&r, &reg, false).unwrap());
}

#[test]
fn nested_calls_become_nested_trees_and_temporaries() {
    let reg = builtin_registry();
    let e = parse_expr("(elemwise_mul data (conv1d data (list 0 1) 1))").unwrap();
    let tree = call_tree(&e, &reg).unwrap();
    assert_eq!(tree["op"], "elemwise_mul");
    assert_eq!(tree["args"]["b"]["op"], "conv1d");
    assert_eq!(tree["args"]["b"]["constants"]["kernel"], json!([0, 1]));

    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("liftc_accel.h"), accel_header(&reg)).unwrap();
    std::fs::write(
        dir.path().join("adjprod.c"),
        c_stub_for(&e, &nest("adjprod"), &reg).unwrap(),
    )
    .unwrap();
    compiles(dir.path(), "adjprod.c").unwrap();
}

#[test]
fn hand_built_matmul_stub_calls_the_matmul_entry_point() {
    let reg = builtin_registry();
    let mut n = nest("vadd");
    n.name = "mm".into();
    n.params = vec![("A".into(), Type::SeqSeqInt), ("B".into(), Type::SeqSeqInt)];
    n.output_type = Type::SeqSeqInt;
    let stub = c_stub_for(&parse_expr("(matmul A B)").unwrap(), &n, &reg).unwrap();
    assert!(
        stub.contains("int mm(const int *A, int A_rows, int A_cols, const int *B, int B_rows, int B_cols, int *out, int *out_cols)"),
        "{stub}"
    );
    assert!(
        stub.contains("return liftc_matmul(A, A_rows, A_cols, B, B_rows, B_cols, out, out_cols);"),
        "{stub}"
    );
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("liftc_accel.h"), accel_header(&reg)).unwrap();
    std::fs::write(dir.path().join("mm.c"), stub).unwrap();
    compiles(dir.path(), "mm.c").unwrap();
}

#[test]
fn unsupported_lifted_forms_are_rejected() {
    let reg = builtin_registry();
    let e = parse_expr("(+ 1 2)").unwrap();
    assert!(matches!(
        call_tree(&e, &reg),
        Err(EmitError::Unsupported { .. })
    ));
    assert!(matches!(
        c_stub_for(&e, &nest("dotprod"), &reg),
        Err(EmitError::Unsupported { .. })
    ));
}
