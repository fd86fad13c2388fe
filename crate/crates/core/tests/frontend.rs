use std::path::PathBuf;

use liftc_core::frontend::{
    analyze, parse_source, run_loop, run_source, FrontendError, Pos, SrcType, Stmt, DEFAULT_FUEL,
};
use liftc_core::ir::{Env, Type, Value};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn corpus() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut out: Vec<(String, String)> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "mc"))
        .map(|p| {
            (
                p.file_stem().unwrap().to_string_lossy().into_owned(),
                std::fs::read_to_string(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

fn source(name: &str) -> String {
    corpus().into_iter().find(|(n, _)| n == name).unwrap().1
}

#[test]
fn window_sum_parses_to_one_loop_with_one_push() {
    let ast = parse_source(&source("window_sum")).unwrap();
    assert_eq!(ast.name, "window_sum");
    assert_eq!(ast.params, vec![("data".to_string(), SrcType::ListInt)]);
    let loops: Vec<&Stmt> = ast
        .body
        .iter()
        .filter(|s| matches!(s, Stmt::For { .. }))
        .collect();
    assert_eq!(loops.len(), 1);
    let Stmt::For { body, .. } = loops[0] else {
        unreachable!()
    };
    assert_eq!(body.len(), 1);
    assert!(matches!(body[0], Stmt::Push { .. }));
}

#[test]
fn loop_free_function_parses_but_does_not_analyze() {
    let ast = parse_source("fn id(x: int) -> int { return x; }").unwrap();
    assert_eq!(analyze(&ast), Err(FrontendError::NoLoop));
}

#[test]
fn syntax_errors_report_position() {
    match parse_source("fn f( {") {
        Err(FrontendError::Syntax { pos, .. }) => assert_eq!(pos, Pos { line: 1, col: 7 }),
        other => panic!("unexpected {other:?}"),
    }
    match parse_source("fn f(a: int) -> int {\n  return a +;\n}") {
        Err(FrontendError::Syntax { pos, .. }) => assert_eq!(pos.line, 2),
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(
        parse_source("fn f() -> int { return 1 / 2; }"),
        Err(FrontendError::Syntax { .. })
    ));
}

#[test]
fn unsupported_constructs() {
    let cases = [
        "fn f(a: list<int>) -> int { let s: int = 0; for i in 0 .. len(a) { for j in 0 .. 2 { s = s + 1; } } return s; }",
        "fn f(a: list<int>) -> int { let s: int = 0; for i in 0 .. len(a) { if s { s = 1; } } return s; }",
        "fn f(a: list<list<int>>) -> int { return 0; }",
        "fn f(a: list<bool>) -> int { return 0; }",
        "fn f(a: list<int>) -> int { let s: int = 0; for i in 0 .. 1 { s = 1; } for j in 0 .. 1 { s = 2; } return s; }",
        "fn f(a: list<int>) -> int { let s: int = 0; while s < 1 { s = 1; } return s; }",
    ];
    for c in cases {
        assert!(
            matches!(parse_source(c), Err(FrontendError::Unsupported { .. })),
            "{c}"
        );
    }
    let counter_write =
        "fn f(a: list<int>) -> int { let s: int = 0; for i in 0 .. len(a) { i = 2; } return s; }";
    let ast = parse_source(counter_write).unwrap();
    assert!(matches!(
        analyze(&ast),
        Err(FrontendError::Unsupported { .. })
    ));
}

#[test]
fn scope_errors() {
    let undeclared = "fn f(a: list<int>) -> int { return t; }";
    assert!(matches!(
        parse_source(undeclared),
        Err(FrontendError::Semantic { .. })
    ));
    let shadow = "fn f(a: list<int>) -> int { let a: int = 0; return a; }";
    assert!(matches!(
        parse_source(shadow),
        Err(FrontendError::Semantic { .. })
    ));
    let ill_typed = "fn f(a: list<int>) -> int { let s: int = a; return s; }";
    assert!(matches!(
        parse_source(ill_typed),
        Err(FrontendError::Semantic { .. })
    ));
}

#[test]
fn window_sum_loop_nest() {
    let nest = analyze(&parse_source(&source("window_sum")).unwrap()).unwrap();
    assert_eq!(nest.counter, "i");
    assert_eq!(
        nest.state_vars,
        vec![
            ("i".to_string(), Type::Int),
            ("result".to_string(), Type::SeqInt)
        ]
    );
    assert_eq!(nest.init["i"].to_string(), "0");
    assert_eq!(nest.init["result"].to_string(), "(empty SeqInt)");
    assert_eq!(nest.cond.to_string(), "(< i (- (len data) 1))");
    assert_eq!(nest.update["i"].to_string(), "(+ i 1)");
    assert_eq!(
        nest.update["result"].to_string(),
        "(append result (+ (index data i) (index data (+ i 1))))"
    );
    assert_eq!(nest.output_var, "result");
    assert_eq!(nest.output_type, Type::SeqInt);
}

#[test]
fn dotprod_loop_nest_has_scalar_output() {
    let nest = analyze(&parse_source(&source("dotprod")).unwrap()).unwrap();
    assert_eq!(nest.output_type, Type::Int);
    assert_eq!(
        nest.update["s"].to_string(),
        "(+ s (* (index a i) (index b i)))"
    );
    assert_eq!(nest.init["s"].to_string(), "0");
}

#[test]
fn straight_line_code_is_folded() {
    let text = "fn f(a: list<int>) -> int {
        let base: int = 2;
        let s: int = base * 5;
        for i in base .. len(a) {
            let t: int = a[i] + base;
            s = s + t;
            s = s * 2;
        }
        return s;
    }";
    let nest = analyze(&parse_source(text).unwrap()).unwrap();
    assert_eq!(nest.init["i"].to_string(), "2");
    assert_eq!(nest.init["s"].to_string(), "(* 2 5)");
    assert_eq!(
        nest.update["s"].to_string(),
        "(* (+ s (+ (index a i) 2)) 2)"
    );
    assert_eq!(nest.state_vars.len(), 2);
}

#[test]
fn analysis_is_deterministic_and_closed() {
    for (name, text) in corpus() {
        let a = analyze(&parse_source(&text).unwrap()).unwrap();
        let b = analyze(&parse_source(&text).unwrap()).unwrap();
        assert_eq!(a, b, "{name}");
        let ctx = a.context();
        let exprs = a
            .init
            .values()
            .chain(a.update.values())
            .chain(std::iter::once(&a.cond));
        for e in exprs {
            for v in e.free_vars() {
                assert!(
                    ctx.contains_key(&v),
                    "{name}: `{v}` is not a param or state var"
                );
            }
        }
        assert_eq!(a.update.len(), a.state_vars.len());
        assert!(a.state_vars.iter().any(|(v, _)| *v == a.output_var));
    }
}

fn random_inputs(rng: &mut ChaCha8Rng, params: &[(String, Type)]) -> Env {
    let len = rng.gen_range(0..=12);
    params
        .iter()
        .map(|(p, t)| {
            let v = match t {
                Type::SeqInt => Value::Seq(
                    (0..len)
                        .map(|_| BigInt::from(rng.gen_range(-10..=10)))
                        .collect(),
                ),
                _ => Value::int(rng.gen_range(-10..=10)),
            };
            (p.clone(), v)
        })
        .collect()
}

/// Direct execution and loop-nest execution agree on every corpus program.
#[test]
fn round_trip_faithfulness() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for (name, text) in corpus() {
        let ast = parse_source(&text).unwrap();
        let nest = analyze(&ast).unwrap();
        for _ in 0..300 {
            let inputs = random_inputs(&mut rng, &nest.params);
            let direct = run_source(&ast, &inputs, DEFAULT_FUEL);
            let lifted = run_loop(&nest, &inputs, DEFAULT_FUEL).map(|t| t.output);
            match (&direct, &lifted) {
                (Ok(x), Ok(y)) => assert_eq!(x, y, "{name} on {inputs:?}"),
                (Err(_), Err(_)) => {}
                _ => panic!("{name} on {inputs:?}: {direct:?} vs {lifted:?}"),
            }
        }
    }
}

#[test]
fn trace_of_window_sum() {
    let nest = analyze(&parse_source(&source("window_sum")).unwrap()).unwrap();
    let inputs: Env = [("data".to_string(), Value::seq(&[1, 2, 3, 4]))].into();
    let trace = run_loop(&nest, &inputs, DEFAULT_FUEL).unwrap();
    let results: Vec<Value> = trace.states.iter().map(|s| s["result"].clone()).collect();
    assert_eq!(
        results,
        vec![
            Value::seq(&[]),
            Value::seq(&[3]),
            Value::seq(&[3, 5]),
            Value::seq(&[3, 5, 7])
        ]
    );
    assert_eq!(trace.output, Value::seq(&[3, 5, 7]));
}

#[test]
fn weighted_window_trip_count() {
    let ast = parse_source(&source("weighted_window")).unwrap();
    for n in 0..12i64 {
        let data: Vec<i64> = (0..n).map(|x| x * x).collect();
        let inputs: Env = [("data".to_string(), Value::seq(&data))].into();
        let out = run_source(&ast, &inputs, DEFAULT_FUEL).unwrap();
        let want: Vec<i64> = (0..)
            .take_while(|i| 2 * i + 3 <= n)
            .map(|i| data[2 * i as usize] - data[2 * i as usize + 2])
            .collect();
        assert_eq!(out, Value::seq(&want), "n={n}");
    }
}

#[test]
fn fuel_bounds_execution() {
    let text = "fn f(a: list<int>) -> int { let s: int = 0; for i in 0 .. i + 1 { s = s + 1; } return s; }";
    let ast = parse_source(text).unwrap();
    let inputs: Env = [("a".to_string(), Value::seq(&[]))].into();
    assert_eq!(
        run_source(&ast, &inputs, 100),
        Err(FrontendError::FuelExhausted)
    );
    let nest = analyze(&ast).unwrap();
    assert_eq!(
        run_loop(&nest, &inputs, 100),
        Err(FrontendError::FuelExhausted)
    );
}
