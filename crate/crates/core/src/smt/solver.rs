//! Running an external SMT-LIB solver over stdin/stdout.

use std::io::{BufRead, BufReader, Read, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::{Duration, Instant};

use num_bigint::BigInt;

use crate::ir::{parse_sexps, Env, Sexp, Type, Value};

use super::script::symbol;
use super::SmtError;

/// A solver command line such as `z3 -in`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverCmd {
    pub argv: Vec<String>,
}

impl SolverCmd {
    pub fn parse(cmd: &str) -> Result<SolverCmd, SmtError> {
        let argv = shell_words::split(cmd)
            .map_err(|e| SmtError::SolverUnavailable(format!("`{cmd}`: {e}")))?;
        if argv.is_empty() {
            return Err(SmtError::SolverUnavailable("empty solver command".into()));
        }
        Ok(SolverCmd { argv })
    }
}

/// A script plus the variables whose values are requested on `sat`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmtQuery {
    pub label: String,
    /// Ends with `(check-sat)`.
    pub script: String,
    pub model_vars: Vec<(String, Type)>,
}

impl SmtQuery {
    pub fn model_request(&self) -> Option<String> {
        if self.model_vars.is_empty() {
            return None;
        }
        let names: Vec<String> = self.model_vars.iter().map(|(v, _)| symbol(v)).collect();
        Some(format!("(get-value ({}))\n", names.join(" ")))
    }

    /// The script as written by `--dump-smt`.
    pub fn full_text(&self) -> String {
        let mut s = self.script.clone();
        if let Some(r) = self.model_request() {
            s.push_str(&r);
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolverAnswer {
    Sat(Env),
    Unsat,
    Unknown,
    Timeout,
}

impl SolverAnswer {
    pub fn status(&self) -> &'static str {
        match self {
            SolverAnswer::Sat(_) => "sat",
            SolverAnswer::Unsat => "unsat",
            SolverAnswer::Unknown => "unknown",
            SolverAnswer::Timeout => "timeout",
        }
    }
}

/// Raw exchange with the solver, kept for diagnostics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverRun {
    pub answer: SolverAnswer,
    pub output: String,
}

struct Session {
    child: Child,
    lines: Receiver<String>,
    deadline: Instant,
    output: String,
}

impl Session {
    fn next_line(&mut self) -> Result<Option<String>, SmtError> {
        let left = self.deadline.saturating_duration_since(Instant::now());
        match self.lines.recv_timeout(left) {
            Ok(l) => {
                self.output.push_str(&l);
                self.output.push('\n');
                Ok(Some(l))
            }
            Err(RecvTimeoutError::Timeout) => Ok(None),
            Err(RecvTimeoutError::Disconnected) => {
                let mut err = String::new();
                if let Some(mut e) = self.child.stderr.take() {
                    let _ = e.read_to_string(&mut err);
                }
                Err(SmtError::ProtocolError(format!(
                    "solver exited without an answer{}{}",
                    if err.is_empty() { "" } else { ": " },
                    err.trim()
                )))
            }
        }
    }

    fn send(&mut self, text: &str) {
        if let Some(stdin) = self.child.stdin.as_mut() {
            // A solver that already exited is reported by the reader side.
            let _ = stdin.write_all(text.as_bytes()).and_then(|_| stdin.flush());
        }
    }

    fn finish(mut self) -> String {
        self.send("(exit)\n");
        drop(self.child.stdin.take());
        let _ = self.child.kill();
        let _ = self.child.wait();
        self.output
    }
}

fn spawn(cmd: &SolverCmd, timeout: Duration) -> Result<Session, SmtError> {
    let mut child = Command::new(&cmd.argv[0])
        .args(&cmd.argv[1..])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| SmtError::SolverUnavailable(format!("{}: {e}", cmd.argv.join(" "))))?;
    let stdout = child.stdout.take().expect("piped stdout");
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        for line in BufReader::new(stdout).lines() {
            let Ok(line) = line else { break };
            if tx.send(line).is_err() {
                break;
            }
        }
    });
    Ok(Session {
        child,
        lines: rx,
        deadline: Instant::now() + timeout,
        output: String::new(),
    })
}

fn paren_balance(s: &str) -> i64 {
    let mut depth = 0;
    let mut in_str = false;
    for ch in s.chars() {
        match ch {
            '"' => in_str = !in_str,
            '(' if !in_str => depth += 1,
            ')' if !in_str => depth -= 1,
            _ => {}
        }
    }
    depth
}

/// Run one query in a fresh solver process. A zero timeout answers `Timeout`
/// without starting the solver.
pub fn run_solver(
    query: &SmtQuery,
    cmd: &SolverCmd,
    timeout: Duration,
) -> Result<SolverRun, SmtError> {
    if timeout.is_zero() {
        return Ok(SolverRun {
            answer: SolverAnswer::Timeout,
            output: String::new(),
        });
    }
    let mut s = spawn(cmd, timeout)?;
    s.send(&query.script);
    let status = loop {
        let Some(line) = s.next_line()? else {
            return Ok(SolverRun {
                answer: SolverAnswer::Timeout,
                output: s.finish(),
            });
        };
        match line.trim() {
            "sat" | "unsat" | "unknown" => break line.trim().to_string(),
            "" | "success" => continue,
            other => {
                let out = s.finish();
                return Err(SmtError::ProtocolError(format!(
                    "unexpected solver output `{other}` for {}\n{out}",
                    query.label
                )));
            }
        }
    };
    let answer = match status.as_str() {
        "unsat" => SolverAnswer::Unsat,
        "unknown" => SolverAnswer::Unknown,
        _ => match query.model_request() {
            None => SolverAnswer::Sat(Env::new()),
            Some(req) => {
                s.send(&req);
                let mut text = String::new();
                loop {
                    let Some(line) = s.next_line()? else {
                        return Ok(SolverRun {
                            answer: SolverAnswer::Timeout,
                            output: s.finish(),
                        });
                    };
                    text.push_str(&line);
                    text.push('\n');
                    if paren_balance(&text) == 0 && !text.trim().is_empty() {
                        break;
                    }
                }
                SolverAnswer::Sat(parse_model(&text, &query.model_vars)?)
            }
        },
    };
    Ok(SolverRun {
        answer,
        output: s.finish(),
    })
}

fn int_value(s: &Sexp) -> Option<BigInt> {
    match s {
        Sexp::Atom(a, _) => a.parse().ok(),
        Sexp::List(items, _) => match items.as_slice() {
            [Sexp::Atom(m, _), x] if m == "-" => int_value(x).map(|v| -v),
            _ => None,
        },
    }
}

fn seq_items(s: &Sexp) -> Option<Vec<Sexp>> {
    let items = s.list()?;
    match items.first()?.atom()? {
        "as" => (items.get(1)?.atom()? == "seq.empty").then(Vec::new),
        "seq.unit" => Some(vec![items.get(1)?.clone()]),
        "seq.++" => {
            let mut out = Vec::new();
            for part in &items[1..] {
                out.extend(seq_items(part)?);
            }
            Some(out)
        }
        _ => None,
    }
}

fn value_of(s: &Sexp, t: Type) -> Option<Value> {
    match t {
        Type::Int => int_value(s).map(Value::Int),
        Type::Bool => match s.atom()? {
            "true" => Some(Value::Bool(true)),
            "false" => Some(Value::Bool(false)),
            _ => None,
        },
        Type::SeqInt => Some(Value::Seq(
            seq_items(s)?.iter().map(int_value).collect::<Option<_>>()?,
        )),
        Type::SeqSeqInt => {
            let rows = seq_items(s)?
                .iter()
                .map(|r| {
                    Some(
                        seq_items(r)?
                            .iter()
                            .map(int_value)
                            .collect::<Option<Vec<_>>>()?,
                    )
                })
                .collect::<Option<Vec<_>>>()?;
            Some(Value::Matrix(rows))
        }
    }
}

/// Parse a `get-value` response into an environment over `vars`.
pub fn parse_model(text: &str, vars: &[(String, Type)]) -> Result<Env, SmtError> {
    let bad = |m: &str| SmtError::ProtocolError(format!("{m} in model `{}`", text.trim()));
    let sexps = parse_sexps(text).map_err(|e| bad(&e.to_string()))?;
    let [Sexp::List(pairs, _)] = sexps.as_slice() else {
        return Err(bad("expected one list"));
    };
    let mut env = Env::new();
    for pair in pairs {
        let [Sexp::Atom(name, _), v] = pair.list().ok_or_else(|| bad("malformed pair"))? else {
            return Err(bad("malformed pair"));
        };
        let name = name.trim_matches('|');
        let Some((var, t)) = vars.iter().find(|(v, _)| symbol(v) == name) else {
            continue;
        };
        let value = value_of(v, *t).ok_or_else(|| bad(&format!("unreadable value for `{var}`")))?;
        env.insert(var.clone(), value);
    }
    if env.len() != vars.len() {
        return Err(bad("missing variables"));
    }
    Ok(env)
}
