//! The row-retrieval query dialect.
//!
//! A small, verifiable subset of the dataframe `query()` expression language:
//!
//! ```text
//! expr       := or
//! or         := and (("or" | "|") and)*
//! and        := not (("and" | "&") not)*
//! not        := ("not" | "~") not | primary
//! primary    := "(" expr ")" | comparison | membership
//! comparison := column cmp literal | literal cmp column
//! membership := column ["not"] "in" "[" literal ("," literal)* "]"
//! cmp        := "==" | "!=" | "<" | "<=" | ">" | ">="
//! column     := bare-word+ | `backticked name`
//! literal    := ["-" | "+"] number | 'string' | "string" | True | False
//! ```
//!
//! Keywords are case-insensitive. A run of adjacent bare words names one
//! column: the words are joined with single spaces and looked up, then
//! joined with underscores, so `petal length` resolves to either
//! `petal length` or `petal_length`.
//!
//! Numeric columns compare against numbers (booleans count as 1/0);
//! categorical columns compare against strings, byte-wise and
//! case-sensitively. Chained comparisons, arithmetic, `@` references and
//! method calls are rejected.
//!
//! A comparison or membership test on a missing cell is unknown, and
//! unknown stays unknown through `not`, `and` and `or` (three-valued
//! logic). Only rows whose expression is definitely true are selected.

mod eval;
mod lexer;
mod parser;

use std::fmt;

use thiserror::Error;

pub use eval::evaluate_query;
pub use parser::parse_query;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    /// The operator with its operands swapped: `a < b` iff `b > a`.
    pub fn flipped(self) -> Self {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            other => other,
        }
    }

    pub fn apply<T: PartialOrd + ?Sized>(self, left: &T, right: &T) -> bool {
        match self {
            CmpOp::Eq => left == right,
            CmpOp::Ne => left != right,
            CmpOp::Lt => left < right,
            CmpOp::Le => left <= right,
            CmpOp::Gt => left > right,
            CmpOp::Ge => left >= right,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Number(f64),
    Str(String),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnRef {
    pub name: String,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Compare {
        column: ColumnRef,
        op: CmpOp,
        value: Literal,
    },
    Member {
        column: ColumnRef,
        negated: bool,
        values: Vec<Literal>,
    },
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
}

impl Expr {
    pub fn and(left: Expr, right: Expr) -> Expr {
        Expr::And(Box::new(left), Box::new(right))
    }

    pub fn or(left: Expr, right: Expr) -> Expr {
        Expr::Or(Box::new(left), Box::new(right))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(child: Expr) -> Expr {
        Expr::Not(Box::new(child))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedToken,
    UnknownColumn,
    TypeMismatch,
    UnbalancedParen,
    EmptyQuery,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind:?} at offset {position}: {detail}")]
pub struct ParseError {
    /// Character offset into the query text.
    pub position: usize,
    pub kind: ParseErrorKind,
    pub detail: String,
}

impl ParseError {
    pub(crate) fn new(kind: ParseErrorKind, position: usize, detail: impl Into<String>) -> Self {
        Self {
            position,
            kind,
            detail: detail.into(),
        }
    }
}

fn write_ident(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    write!(f, "`{}`", name.replace('`', "``"))
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // Debug keeps a decimal point and round-trips exactly
            Literal::Number(n) => write!(f, "{n:?}"),
            Literal::Str(s) => write!(f, "'{}'", s.replace('\\', "\\\\").replace('\'', "\\'")),
            Literal::Bool(true) => f.write_str("True"),
            Literal::Bool(false) => f.write_str("False"),
        }
    }
}

/// Canonical rendering: backticked identifiers and explicit parentheses.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Compare { column, op, value } => {
                write_ident(f, &column.name)?;
                write!(f, " {} {}", op.symbol(), value)
            }
            Expr::Member {
                column,
                negated,
                values,
            } => {
                write_ident(f, &column.name)?;
                f.write_str(if *negated { " not in [" } else { " in [" })?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
            Expr::And(l, r) => write!(f, "({l} and {r})"),
            Expr::Or(l, r) => write!(f, "({l} or {r})"),
            Expr::Not(c) => write!(f, "(not {c})"),
        }
    }
}
