//! Test rows made by averaging random pairs of same-label training rows.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{PipelineError, RunConfig};
use crate::table::{parse_decimal, render_record, Cell, ColumnKind, Schema, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRow {
    /// One cell per schema column, label included.
    pub values: Vec<Cell>,
    pub label: String,
    /// Training rows the values were averaged from.
    pub sources: (usize, usize),
}

impl TestRow {
    /// Builds a row from explicit cell texts aligned with `schema`.
    pub fn from_texts(schema: &Schema, texts: Vec<String>, sources: (usize, usize)) -> Self {
        let values: Vec<Cell> = texts
            .into_iter()
            .enumerate()
            .map(|(i, t)| match schema.column(i).kind {
                ColumnKind::Numeric => Cell::numeric(t),
                ColumnKind::Categorical => Cell::text(t),
            })
            .collect();
        let label = values[schema.label_index()].text.clone();
        Self { values, label, sources }
    }

    pub fn number(&self, column: usize) -> Option<f64> {
        self.values[column].number
    }

    /// Header and one data line, feature columns only, so the label is never shown.
    pub fn feature_csv(&self, schema: &Schema) -> String {
        let idx: Vec<usize> = schema.feature_indices().collect();
        let mut out = render_record(idx.iter().map(|&i| schema.column(i).name.as_str()));
        out.push_str(&render_record(idx.iter().map(|&i| self.values[i].text.as_str())));
        out
    }
}

/// `min(ceil(fraction * n), cap)`, and never less than one.
pub fn desired_test_rows(class_rows: usize, fraction: f64, cap: usize) -> usize {
    // the epsilon keeps e.g. 0.2 * 15 = 3.0000000000000004 from rounding up to 4
    let raw = (fraction * class_rows as f64 - 1e-9).ceil().max(0.0) as usize;
    raw.min(cap).max(1)
}

pub fn synthesize_test_set(table: &Table, config: &RunConfig) -> Result<Vec<TestRow>, PipelineError> {
    if table.is_empty() {
        return Err(PipelineError::EmptyClass);
    }
    let schema = table.schema();
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut out = Vec::new();
    for (label, &n) in &table.class_counts() {
        let members: Vec<usize> = (0..table.row_count()).filter(|&i| table.label(i) == label).collect();
        let want = 2 * desired_test_rows(n, config.test_fraction, config.per_class_cap);
        let draws: Vec<usize> = if want <= n {
            sample(&mut rng, n, want).into_iter().map(|k| members[k]).collect()
        } else {
            (0..want).map(|_| members[rng.random_range(0..n)]).collect()
        };
        for pair in draws.chunks_exact(2) {
            let values = average_pair(table.row(pair[0]), table.row(pair[1]), schema)?;
            out.push(TestRow {
                values,
                label: label.clone(),
                sources: (pair[0], pair[1]),
            });
        }
    }
    Ok(out)
}

/// Numeric cells become the mean of the pair; everything else comes from `a`.
pub fn average_pair(a: &[Cell], b: &[Cell], schema: &Schema) -> Result<Vec<Cell>, PipelineError> {
    let label = schema.label_index();
    if a[label].text != b[label].text {
        return Err(PipelineError::LabelMismatch(
            a[label].text.clone(),
            b[label].text.clone(),
        ));
    }
    Ok(schema
        .columns()
        .iter()
        .enumerate()
        .map(|(i, column)| match column.kind {
            ColumnKind::Categorical => a[i].clone(),
            ColumnKind::Numeric => match (a[i].number, b[i].number) {
                _ if a[i].text == b[i].text => a[i].clone(),
                (Some(x), Some(y)) => Cell::numeric(mean_text(&a[i].text, &b[i].text, x, y)),
                (Some(_), None) => a[i].clone(),
                (None, Some(_)) => b[i].clone(),
                (None, None) => a[i].clone(),
            },
        })
        .collect())
}

fn fraction_digits(text: &str) -> Option<usize> {
    if text.contains(['e', 'E']) {
        return None;
    }
    Some(text.split_once('.').map_or(0, |(_, frac)| frac.len()))
}

/// Mean of two decimals written with one more fractional digit than the
/// inputs, which is exact, then trimmed.
fn mean_text(a: &str, b: &str, x: f64, y: f64) -> String {
    let mean = (x + y) / 2.0;
    let Some(digits) = fraction_digits(a).zip(fraction_digits(b)).map(|(p, q)| p.max(q) + 1) else {
        return format!("{mean:?}");
    };
    let text = format!("{mean:.digits$}");
    let text = if text.contains('.') {
        text.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        text
    };
    debug_assert!(parse_decimal(&text).is_some());
    if text == "-0" {
        "0".to_string()
    } else {
        text
    }
}
