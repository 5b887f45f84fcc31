//! Random typed queries and a deliberately simple per-row interpreter,
//! written without reference to the library's parser or evaluator.

use rand::Rng;

use super::{RandomTable, CATEGORIES};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

const OPS: [Op; 6] = [Op::Eq, Op::Ne, Op::Lt, Op::Le, Op::Gt, Op::Ge];

impl Op {
    fn text(self) -> &'static str {
        match self {
            Op::Eq => "==",
            Op::Ne => "!=",
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Ge => ">=",
        }
    }

    /// The operator to use when the literal is written on the left.
    fn mirrored(self) -> Op {
        match self {
            Op::Lt => Op::Gt,
            Op::Gt => Op::Lt,
            Op::Le => Op::Ge,
            Op::Ge => Op::Le,
            o => o,
        }
    }

    fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            Op::Eq => ord == Equal,
            Op::Ne => ord != Equal,
            Op::Lt => ord == Less,
            Op::Le => ord != Greater,
            Op::Gt => ord == Greater,
            Op::Ge => ord != Less,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Lit {
    Num(f64),
    Str(String),
    Bool(bool),
}

#[derive(Debug, Clone)]
pub enum Ast {
    Cmp { col: usize, op: Op, lit: Lit },
    In { col: usize, negated: bool, lits: Vec<Lit> },
    And(Box<Ast>, Box<Ast>),
    Or(Box<Ast>, Box<Ast>),
    Not(Box<Ast>),
}

fn number_literal(rng: &mut impl Rng, t: &RandomTable, col: usize) -> Lit {
    if rng.random_bool(0.1) {
        return Lit::Bool(rng.random_bool(0.5));
    }
    let present: Vec<f64> = t.rows.iter().filter_map(|r| r[col].parse().ok()).collect();
    if !present.is_empty() && rng.random_bool(0.6) {
        Lit::Num(present[rng.random_range(0..present.len())])
    } else {
        Lit::Num(rng.random_range(-20i32..=20) as f64 / 4.0)
    }
}

fn string_literal(rng: &mut impl Rng) -> Lit {
    let extra = ["zzz", "", "Red", "p", "q"];
    if rng.random_bool(0.8) {
        Lit::Str(CATEGORIES[rng.random_range(0..CATEGORIES.len())].to_string())
    } else {
        Lit::Str(extra[rng.random_range(0..extra.len())].to_string())
    }
}

/// A well-typed random query of depth at most `depth`.
pub fn random_ast(rng: &mut impl Rng, t: &RandomTable, depth: u32) -> Ast {
    if depth <= 1 || rng.random_bool(0.35) {
        let col = rng.random_range(0..t.names.len());
        let numeric = t.numeric[col];
        let lit = |rng: &mut _| {
            if numeric {
                number_literal(rng, t, col)
            } else {
                string_literal(rng)
            }
        };
        return if rng.random_bool(0.8) {
            Ast::Cmp {
                col,
                op: OPS[rng.random_range(0..OPS.len())],
                lit: lit(rng),
            }
        } else {
            let n = rng.random_range(1..=3);
            Ast::In {
                col,
                negated: rng.random_bool(0.4),
                lits: (0..n).map(|_| lit(rng)).collect(),
            }
        };
    }
    match rng.random_range(0..3) {
        0 => Ast::And(
            Box::new(random_ast(rng, t, depth - 1)),
            Box::new(random_ast(rng, t, depth - 1)),
        ),
        1 => Ast::Or(
            Box::new(random_ast(rng, t, depth - 1)),
            Box::new(random_ast(rng, t, depth - 1)),
        ),
        _ => Ast::Not(Box::new(random_ast(rng, t, depth - 1))),
    }
}

fn pick<'a>(rng: &mut impl Rng, options: &[&'a str]) -> &'a str {
    options[rng.random_range(0..options.len())]
}

fn render_lit(rng: &mut impl Rng, lit: &Lit) -> String {
    match lit {
        Lit::Num(v) => {
            if v.fract() == 0.0 && rng.random_bool(0.5) {
                format!("{}", *v as i64)
            } else {
                format!("{v:?}")
            }
        }
        Lit::Str(s) => {
            if rng.random_bool(0.5) {
                format!("'{s}'")
            } else {
                format!("\"{s}\"")
            }
        }
        Lit::Bool(b) => pick(rng, if *b { &["True", "true"] } else { &["False", "false"] }).to_string(),
    }
}

fn render_col(rng: &mut impl Rng, name: &str) -> String {
    if rng.random_bool(0.5) {
        format!("`{name}`")
    } else {
        name.to_string()
    }
}

/// Surface syntax with randomly chosen spellings of the same query.
pub fn render(rng: &mut impl Rng, ast: &Ast, names: &[String]) -> String {
    match ast {
        Ast::Cmp { col, op, lit } => {
            let c = render_col(rng, &names[*col]);
            let l = render_lit(rng, lit);
            if rng.random_bool(0.25) {
                format!("{l} {} {c}", op.mirrored().text())
            } else {
                format!("{c} {} {l}", op.text())
            }
        }
        Ast::In { col, negated, lits } => {
            let items: Vec<String> = lits.iter().map(|l| render_lit(rng, l)).collect();
            let kw = if *negated {
                pick(rng, &["not in", "NOT IN"])
            } else {
                pick(rng, &["in", "IN"])
            };
            format!("{} {kw} [{}]", render_col(rng, &names[*col]), items.join(", "))
        }
        Ast::And(l, r) => {
            let kw = pick(rng, &["and", "&", "AND"]);
            format!("({}) {kw} ({})", render(rng, l, names), render(rng, r, names))
        }
        Ast::Or(l, r) => {
            let kw = pick(rng, &["or", "|", "Or"]);
            format!("({}) {kw} ({})", render(rng, l, names), render(rng, r, names))
        }
        Ast::Not(c) => {
            let kw = pick(rng, &["not ", "~", "NOT "]);
            format!("{kw}({})", render(rng, c, names))
        }
    }
}

/// Truth values ordered false < unknown < true, so `and` is the minimum,
/// `or` the maximum and `not` the mirror image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Truth {
    False,
    Unknown,
    True,
}

fn from_bool(b: bool) -> Truth {
    if b {
        Truth::True
    } else {
        Truth::False
    }
}

fn lit_number(lit: &Lit) -> f64 {
    match lit {
        Lit::Num(v) => *v,
        Lit::Bool(true) => 1.0,
        Lit::Bool(false) => 0.0,
        Lit::Str(_) => unreachable!("numeric columns get numeric literals"),
    }
}

fn lit_str(lit: &Lit) -> &str {
    match lit {
        Lit::Str(s) => s,
        _ => unreachable!("categorical columns get string literals"),
    }
}

fn truth(ast: &Ast, row: &[String], numeric: &[bool]) -> Truth {
    match ast {
        Ast::Cmp { col, op, lit } => {
            let cell = &row[*col];
            if cell.is_empty() {
                Truth::Unknown
            } else if numeric[*col] {
                let x: f64 = cell.parse().unwrap();
                from_bool(op.holds(x.partial_cmp(&lit_number(lit)).unwrap()))
            } else {
                from_bool(op.holds(cell.as_str().cmp(lit_str(lit))))
            }
        }
        Ast::In { col, negated, lits } => {
            let cell = &row[*col];
            if cell.is_empty() {
                return Truth::Unknown;
            }
            let hit = lits.iter().any(|l| {
                if numeric[*col] {
                    cell.parse::<f64>().unwrap() == lit_number(l)
                } else {
                    cell == lit_str(l)
                }
            });
            from_bool(hit != *negated)
        }
        Ast::And(l, r) => truth(l, row, numeric).min(truth(r, row, numeric)),
        Ast::Or(l, r) => truth(l, row, numeric).max(truth(r, row, numeric)),
        Ast::Not(c) => match truth(c, row, numeric) {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        },
    }
}

/// Indices of the rows where the query is definitely true.
pub fn naive_select(ast: &Ast, t: &RandomTable) -> Vec<usize> {
    t.rows
        .iter()
        .enumerate()
        .filter(|(_, row)| truth(ast, row, &t.numeric) == Truth::True)
        .map(|(i, _)| i)
        .collect()
}
