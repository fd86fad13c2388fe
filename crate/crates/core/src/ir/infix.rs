use super::{BinOp, Expr};

fn prec(op: BinOp) -> u8 {
    match op {
        BinOp::Implies => 0,
        BinOp::Or => 1,
        BinOp::And => 2,
        BinOp::Lt | BinOp::Le | BinOp::Eq => 3,
        BinOp::Add | BinOp::Sub => 4,
        BinOp::Mul | BinOp::Mod => 5,
    }
}

fn symbol(op: BinOp) -> &'static str {
    match op {
        BinOp::Implies => "==>",
        BinOp::Or => "||",
        BinOp::And => "&&",
        BinOp::Lt => "<",
        BinOp::Le => "<=",
        BinOp::Eq => "==",
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Mod => "%",
    }
}

/// Human-readable infix rendering, e.g.
/// `result == conv1d(slice(data, 0, i + 1), [1, 1], 1)`.
pub fn to_infix(e: &Expr) -> String {
    render(e, 0)
}

fn args(items: &[Expr]) -> String {
    items
        .iter()
        .map(|a| render(a, 0))
        .collect::<Vec<_>>()
        .join(", ")
}

fn render(e: &Expr, min_prec: u8) -> String {
    match e {
        Expr::Int(v) => {
            if v.sign() == num_bigint::Sign::Minus && min_prec > 4 {
                format!("({v})")
            } else {
                v.to_string()
            }
        }
        Expr::Bool(b) => b.to_string(),
        Expr::Var(v) => v.clone(),
        Expr::Binary(op, a, b) => {
            let p = prec(*op);
            let (lp, rp) = match op {
                BinOp::Implies => (p + 1, p),
                BinOp::Lt | BinOp::Le | BinOp::Eq => (p + 1, p + 1),
                _ => (p, p + 1),
            };
            let s = format!("{} {} {}", render(a, lp), symbol(*op), render(b, rp));
            if p < min_prec {
                format!("({s})")
            } else {
                s
            }
        }
        Expr::Not(a) => format!("!{}", render(a, 6)),
        Expr::Ite(c, t, f) => format!(
            "ite({})",
            args(&[(**c).clone(), (**t).clone(), (**f).clone()])
        ),
        Expr::Empty(_) => "[]".to_string(),
        Expr::List(items) => format!("[{}]", args(items)),
        Expr::Len(a) => format!("len({})", render(a, 0)),
        Expr::Index(a, i) => match **a {
            Expr::Var(_) => format!("{}[{}]", render(a, 6), render(i, 0)),
            _ => format!("index({}, {})", render(a, 0), render(i, 0)),
        },
        Expr::Append(a, x) => format!("append({}, {})", render(a, 0), render(x, 0)),
        Expr::Prepend(x, a) => format!("prepend({}, {})", render(x, 0), render(a, 0)),
        Expr::Slice(a, lo, hi) => {
            format!(
                "slice({}, {}, {})",
                render(a, 0),
                render(lo, 0),
                render(hi, 0)
            )
        }
        Expr::Call(name, items) => format!("{name}({})", args(items)),
    }
}
