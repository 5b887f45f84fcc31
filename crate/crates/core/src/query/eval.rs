use super::{Expr, Literal};
use crate::table::{Cell, Table};

/// Ascending indices of the rows for which `expr` is definitely true.
pub fn evaluate_query(expr: &Expr, table: &Table) -> Vec<usize> {
    (0..table.row_count())
        .filter(|&row| eval_row(expr, table.row(row)) == Some(true))
        .collect()
}

/// Three-valued evaluation; `None` means unknown (a missing cell was involved).
fn eval_row(expr: &Expr, row: &[Cell]) -> Option<bool> {
    match expr {
        Expr::Compare { column, op, value } => {
            let cell = &row[column.index];
            if cell.is_missing() {
                return None;
            }
            match value {
                Literal::Number(n) => cell.number.map(|x| op.apply(&x, n)),
                Literal::Bool(b) => cell.number.map(|x| op.apply(&x, &f64::from(u8::from(*b)))),
                Literal::Str(s) => Some(op.apply(cell.text.as_str(), s.as_str())),
            }
        }
        Expr::Member {
            column,
            negated,
            values,
        } => {
            let cell = &row[column.index];
            if cell.is_missing() {
                return None;
            }
            let found = values.iter().any(|v| match v {
                Literal::Number(n) => cell.number == Some(*n),
                Literal::Bool(b) => cell.number == Some(f64::from(u8::from(*b))),
                Literal::Str(s) => cell.text == *s,
            });
            Some(found != *negated)
        }
        Expr::And(l, r) => match (eval_row(l, row), eval_row(r, row)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        Expr::Or(l, r) => match (eval_row(l, row), eval_row(r, row)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
        Expr::Not(c) => eval_row(c, row).map(|v| !v),
    }
}
