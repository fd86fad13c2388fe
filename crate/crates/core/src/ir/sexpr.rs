use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use super::{BinOp, Expr, Type};

/// Generic s-expression tree, used for the IR text form and operator spec files.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SexpError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

fn syntax(line: usize, message: impl Into<String>) -> SexpError {
    SexpError::Syntax {
        line,
        message: message.into(),
    }
}

impl Sexp {
    pub fn line(&self) -> usize {
        match self {
            Sexp::Atom(_, l) | Sexp::List(_, l) => *l,
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a, _) => Some(a),
            Sexp::List(..) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            Sexp::Atom(..) => None,
        }
    }

    /// Head atom of a list form.
    pub fn head(&self) -> Option<&str> {
        self.list().and_then(|l| l.first()).and_then(Sexp::atom)
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a, _) => f.write_str(a),
            Sexp::List(items, _) => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Parse every top-level s-expression in `text`. `;` starts a line comment.
pub fn parse_sexps(text: &str) -> Result<Vec<Sexp>, SexpError> {
    let mut stack: Vec<(Vec<Sexp>, usize)> = Vec::new();
    let mut top = Vec::new();
    let mut line = 1;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\n' => line += 1,
            c if c.is_whitespace() => {}
            ';' => {
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '"' => {
                let start = line;
                let mut atom = String::from('"');
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some(n) => {
                            if n == '\n' {
                                line += 1;
                            }
                            atom.push(n);
                        }
                        None => return Err(syntax(start, "unterminated string")),
                    }
                }
                atom.push('"');
                let node = Sexp::Atom(atom, start);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(node),
                    None => top.push(node),
                }
            }
            '(' => stack.push((Vec::new(), line)),
            ')' => {
                let (items, start) = stack.pop().ok_or_else(|| syntax(line, "unbalanced `)`"))?;
                let node = Sexp::List(items, start);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(node),
                    None => top.push(node),
                }
            }
            _ => {
                let mut atom = String::from(c);
                while let Some(&n) = chars.peek() {
                    if n.is_whitespace() || n == '(' || n == ')' || n == ';' {
                        break;
                    }
                    atom.push(n);
                    chars.next();
                }
                let node = Sexp::Atom(atom, line);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(node),
                    None => top.push(node),
                }
            }
        }
    }
    if let Some((_, start)) = stack.last() {
        return Err(syntax(*start, "unclosed `(`"));
    }
    Ok(top)
}

/// Parse a single expression in the canonical rendering.
pub fn parse_expr(text: &str) -> Result<Expr, SexpError> {
    let mut items = parse_sexps(text)?;
    match items.len() {
        1 => expr_from_sexp(&items.remove(0)),
        0 => Err(syntax(1, "empty input")),
        _ => Err(syntax(items[1].line(), "trailing input after expression")),
    }
}

fn parse_int(a: &str) -> Option<BigInt> {
    let digits = a.strip_prefix('-').unwrap_or(a);
    if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
        a.parse().ok()
    } else {
        None
    }
}

fn valid_ident(a: &str) -> bool {
    let mut cs = a.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '!')
}

pub fn expr_from_sexp(s: &Sexp) -> Result<Expr, SexpError> {
    let line = s.line();
    match s {
        Sexp::Atom(a, _) => {
            if let Some(v) = parse_int(a) {
                Ok(Expr::Int(v))
            } else if a == "true" {
                Ok(Expr::Bool(true))
            } else if a == "false" {
                Ok(Expr::Bool(false))
            } else if valid_ident(a) {
                Ok(Expr::Var(a.clone()))
            } else {
                Err(syntax(line, format!("bad atom `{a}`")))
            }
        }
        Sexp::List(items, _) => {
            let head = items
                .first()
                .and_then(Sexp::atom)
                .ok_or_else(|| syntax(line, "expected an operator name at the head of a list"))?;
            let rest = &items[1..];
            let arity = |n: usize| -> Result<Vec<Expr>, SexpError> {
                if rest.len() != n {
                    return Err(syntax(
                        line,
                        format!("`{head}` takes {n} arguments, got {}", rest.len()),
                    ));
                }
                rest.iter().map(expr_from_sexp).collect()
            };
            if matches!(head, "and" | "or") && rest.len() > 2 {
                let op = BinOp::from_symbol(head).unwrap();
                let mut args: Vec<Expr> =
                    rest.iter().map(expr_from_sexp).collect::<Result<_, _>>()?;
                let mut acc = args.pop().unwrap();
                while let Some(prev) = args.pop() {
                    acc = Expr::binary(op, prev, acc);
                }
                return Ok(acc);
            }
            if let Some(op) = BinOp::from_symbol(head) {
                let mut a = arity(2)?;
                let b = a.pop().unwrap();
                return Ok(Expr::binary(op, a.pop().unwrap(), b));
            }
            match head {
                "not" => Ok(Expr::not(arity(1)?.remove(0))),
                "len" => Ok(Expr::len(arity(1)?.remove(0))),
                "ite" => {
                    let mut a = arity(3)?.into_iter();
                    Ok(Expr::ite(
                        a.next().unwrap(),
                        a.next().unwrap(),
                        a.next().unwrap(),
                    ))
                }
                "index" | "append" | "prepend" => {
                    let mut a = arity(2)?.into_iter();
                    let (x, y) = (a.next().unwrap(), a.next().unwrap());
                    Ok(match head {
                        "index" => Expr::index(x, y),
                        "append" => Expr::append(x, y),
                        _ => Expr::prepend(x, y),
                    })
                }
                "slice" => {
                    let mut a = arity(3)?.into_iter();
                    Ok(Expr::slice(
                        a.next().unwrap(),
                        a.next().unwrap(),
                        a.next().unwrap(),
                    ))
                }
                "empty" => {
                    let t = rest
                        .first()
                        .and_then(Sexp::atom)
                        .and_then(Type::from_name)
                        .filter(|t| t.is_seq() && rest.len() == 1)
                        .ok_or_else(|| syntax(line, "`empty` takes a sequence type name"))?;
                    Ok(Expr::Empty(t))
                }
                "list" => {
                    if rest.is_empty() {
                        return Err(syntax(
                            line,
                            "`list` needs at least one element; use `(empty T)`",
                        ));
                    }
                    Ok(Expr::List(
                        rest.iter().map(expr_from_sexp).collect::<Result<_, _>>()?,
                    ))
                }
                name if valid_ident(name) => Ok(Expr::Call(
                    name.to_string(),
                    rest.iter().map(expr_from_sexp).collect::<Result<_, _>>()?,
                )),
                other => Err(syntax(line, format!("unknown form `{other}`"))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_canonical_text() {
        for text in [
            "(= result (conv1d (slice data 0 (+ i 1)) (list 1 1) 1))",
            "(and (<= 0 i) (=> (not (< i n)) (= s (dot_product a b))))",
            "(append (prepend -3 (empty SeqInt)) (index x (mod i 2)))",
            "(ite true (list (list 1 2)) (empty SeqSeqInt))",
            "(len (slice d (- 1 k) 4))",
        ] {
            let e = parse_expr(text).unwrap();
            assert_eq!(e.to_string(), text);
        }
    }

    #[test]
    fn reports_lines() {
        let err = parse_expr("(+ 1\n 2").unwrap_err();
        assert_eq!(err, syntax(1, "unclosed `(`"));
        let err = parse_expr("(+ 1\n (slice a 1))").unwrap_err();
        assert!(matches!(err, SexpError::Syntax { line: 2, .. }));
    }

    #[test]
    fn comments_are_skipped() {
        let items = parse_sexps("; header\n(a b) ; trailing\n(c \"x ; y\")").unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!(items[1].line(), 3);
        assert_eq!(items[1].list().unwrap()[1].atom(), Some("\"x ; y\""));
    }
}
