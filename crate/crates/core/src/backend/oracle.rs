//! A deterministic backend that computes every step directly from the data.
//!
//! Summaries are exact per-label statistics, merges combine them exactly,
//! queries select a box around the test row, and predictions pick the
//! nearest label centroid. Running the pipeline against it needs no network
//! and gives the same output on every run.

use std::collections::BTreeSet;
use std::ops::Range;

use indexmap::IndexMap;
use thiserror::Error;

use super::{BackendError, MergeRequest, PredictRequest, QueryRequest, StepBackend, SummarizeRequest};
use crate::pipeline::summary::{format_number, FeaturePattern, LabelPattern, MeanPrecision, PatternSummary};
use crate::pipeline::synth::TestRow;
use crate::table::{ColumnKind, Schema, Table};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("no summaries to merge")]
    NothingToMerge,
    #[error("summaries cannot be merged: {0}")]
    IncompatibleParts(String),
    #[error("the test row has no feature value usable in a query")]
    NoUsableColumns,
    #[error("even a single condition exceeds {0} characters")]
    QueryTooLong(usize),
    #[error("the summary has no labels")]
    EmptySummary,
}

/// Exact statistics for `rows` of `table`, labels in order of first appearance.
pub fn oracle_summarize(table: &Table, rows: Range<usize>) -> PatternSummary {
    let schema = table.schema();
    let features: Vec<usize> = schema.feature_indices().collect();
    let mut groups: IndexMap<&str, Vec<usize>> = IndexMap::new();
    for r in rows {
        groups.entry(table.label(r)).or_default().push(r);
    }
    let rows = groups
        .into_iter()
        .map(|(label, members)| {
            let mut patterns = IndexMap::new();
            for &c in &features {
                let column = schema.column(c);
                let pattern = match column.kind {
                    ColumnKind::Numeric => {
                        let values: Vec<f64> = members.iter().filter_map(|&r| table.cell(r, c).number).collect();
                        if values.is_empty() {
                            continue;
                        }
                        FeaturePattern::NumericRange {
                            min: values.iter().copied().fold(f64::INFINITY, f64::min),
                            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                            avg: values.iter().sum::<f64>() / values.len() as f64,
                        }
                    }
                    ColumnKind::Categorical => {
                        let values: BTreeSet<String> = members
                            .iter()
                            .map(|&r| table.cell(r, c))
                            .filter(|cell| !cell.is_missing())
                            .map(|cell| cell.text.clone())
                            .collect();
                        if values.is_empty() {
                            continue;
                        }
                        FeaturePattern::CategorySet(values)
                    }
                };
                patterns.insert(column.name.clone(), pattern);
            }
            LabelPattern {
                label: label.to_string(),
                patterns,
                num_rows: members.len(),
                comments: String::new(),
            }
        })
        .collect();
    PatternSummary {
        label_column: schema.label_column().to_string(),
        columns: schema.feature_names(),
        rows,
    }
}

/// Combines summaries of disjoint row sets. Ranges take the outer bounds,
/// averages are weighted by row count, category sets are unioned and
/// comments are concatenated.
pub fn oracle_merge(parts: &[PatternSummary]) -> Result<PatternSummary, OracleError> {
    let (first, rest) = parts.split_first().ok_or(OracleError::NothingToMerge)?;
    for part in rest {
        if part.columns != first.columns || part.label_column != first.label_column {
            return Err(OracleError::IncompatibleParts("column lists differ".into()));
        }
    }
    if rest.is_empty() {
        return Ok(first.clone());
    }
    let mut groups: IndexMap<&str, Vec<&LabelPattern>> = IndexMap::new();
    for row in parts.iter().flat_map(|p| &p.rows) {
        groups.entry(row.label.as_str()).or_default().push(row);
    }
    let rows = groups
        .into_values()
        .map(|rows| merge_label(&first.columns, &rows))
        .collect::<Result<_, _>>()?;
    Ok(PatternSummary {
        label_column: first.label_column.clone(),
        columns: first.columns.clone(),
        rows,
    })
}

fn merge_label(columns: &[String], rows: &[&LabelPattern]) -> Result<LabelPattern, OracleError> {
    if let [only] = rows {
        return Ok((*only).clone());
    }
    let mut patterns = IndexMap::new();
    for column in columns {
        let present: Vec<(&FeaturePattern, usize)> = rows
            .iter()
            .filter_map(|r| r.patterns.get(column).map(|p| (p, r.num_rows)))
            .collect();
        let Some(((head, _), _)) = present.split_first() else {
            continue;
        };
        let merged = match head {
            FeaturePattern::NumericRange { .. } => {
                let (mut lo, mut hi, mut sum, mut weight) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
                for (pattern, n) in &present {
                    let FeaturePattern::NumericRange { min, max, avg } = pattern else {
                        return Err(OracleError::IncompatibleParts(format!("`{column}` mixes kinds")));
                    };
                    lo = lo.min(*min);
                    hi = hi.max(*max);
                    sum += avg * *n as f64;
                    weight += n;
                }
                let avg = if weight == 0 {
                    (lo + hi) / 2.0
                } else {
                    sum / weight as f64
                };
                FeaturePattern::NumericRange {
                    min: lo,
                    max: hi,
                    avg: avg.clamp(lo, hi),
                }
            }
            FeaturePattern::CategorySet(_) => {
                let mut values = BTreeSet::new();
                for (pattern, _) in &present {
                    let FeaturePattern::CategorySet(set) = pattern else {
                        return Err(OracleError::IncompatibleParts(format!("`{column}` mixes kinds")));
                    };
                    values.extend(set.iter().cloned());
                }
                FeaturePattern::CategorySet(values)
            }
        };
        patterns.insert(column.clone(), merged);
    }
    let comments: Vec<&str> = rows
        .iter()
        .map(|r| r.comments.as_str())
        .filter(|c| !c.is_empty())
        .collect();
    Ok(LabelPattern {
        label: rows[0].label.clone(),
        patterns,
        num_rows: rows.iter().map(|r| r.num_rows).sum(),
        comments: comments.join("; "),
    })
}

fn round6(x: f64) -> f64 {
    let r = (x * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn quote(value: &str) -> String {
    format!("'{}'", value.replace('\\', "\\\\").replace('\'', "\\'"))
}

/// Conjuncts for widening `level`: a box of half-width `span / 10 * 2^level`
/// around every numeric value. With no numeric values, equality on the
/// categorical values, keeping `ceil(n / 2^level)` of them.
fn conjuncts(summary: &PatternSummary, schema: &Schema, row: &TestRow, level: u32) -> Vec<String> {
    let factor = 2f64.powi(level as i32);
    let mut numeric = Vec::new();
    let mut categorical = Vec::new();
    for c in schema.feature_indices() {
        let column = schema.column(c);
        let name = format!("`{}`", column.name.replace('`', "``"));
        match column.kind {
            ColumnKind::Numeric => {
                let (Some(v), Some((lo, hi))) = (row.number(c), summary.numeric_span(&column.name)) else {
                    continue;
                };
                let half = ((hi - lo) / 10.0).max(1e-5) * factor;
                numeric.push(format!(
                    "{name} >= {} and {name} <= {}",
                    format_number(round6(v - half)),
                    format_number(round6(v + half))
                ));
            }
            ColumnKind::Categorical => {
                if !row.values[c].is_missing() {
                    categorical.push(format!("{name} == {}", quote(&row.values[c].text)));
                }
            }
        }
    }
    if !numeric.is_empty() {
        return numeric;
    }
    let keep = categorical.len().div_ceil(1usize << level.min(16));
    categorical.truncate(keep);
    categorical
}

/// The retrieval query at widening `level`, keeping as many leading
/// conditions as fit in `max_chars`.
pub fn oracle_query(
    summary: &PatternSummary,
    schema: &Schema,
    row: &TestRow,
    level: u32,
    max_chars: usize,
) -> Result<String, OracleError> {
    let parts = conjuncts(summary, schema, row, level);
    if parts.is_empty() {
        return Err(OracleError::NoUsableColumns);
    }
    let mut query = String::new();
    for part in parts {
        let next = if query.is_empty() {
            part
        } else {
            format!("{query} and {part}")
        };
        if next.chars().count() > max_chars {
            break;
        }
        query = next;
    }
    if query.is_empty() {
        return Err(OracleError::QueryTooLong(max_chars));
    }
    Ok(query)
}

const MAX_LEVEL: u32 = 16;

/// The widening level that follows `prior`, the query that selected nothing.
fn next_level(summary: &PatternSummary, schema: &Schema, row: &TestRow, prior: Option<&str>, max_chars: usize) -> u32 {
    let Some(prior) = prior else {
        return 0;
    };
    (0..MAX_LEVEL)
        .find(|&k| oracle_query(summary, schema, row, k, max_chars).is_ok_and(|q| q == prior.trim()))
        .map_or(1, |k| k + 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OraclePrediction {
    pub label: String,
    pub reason: String,
}

/// Squared distance to each label centroid. Numeric terms are
/// `((v - avg) / span)^2` over columns with a positive span; a categorical
/// value outside the label's set adds 1.
pub fn centroid_distances(summary: &PatternSummary, schema: &Schema, row: &TestRow) -> Vec<(String, Option<f64>)> {
    let features: Vec<usize> = schema.feature_indices().collect();
    summary
        .rows
        .iter()
        .map(|label| {
            let mut total = 0.0;
            let mut terms = 0;
            for &c in &features {
                let column = schema.column(c);
                match (label.patterns.get(&column.name), column.kind) {
                    (Some(FeaturePattern::NumericRange { avg, .. }), ColumnKind::Numeric) => {
                        let (Some(v), Some((lo, hi))) = (row.number(c), summary.numeric_span(&column.name)) else {
                            continue;
                        };
                        if hi > lo {
                            total += ((v - avg) / (hi - lo)).powi(2);
                            terms += 1;
                        }
                    }
                    (Some(FeaturePattern::CategorySet(set)), ColumnKind::Categorical) => {
                        let cell = &row.values[c];
                        if !cell.is_missing() {
                            if !set.contains(&cell.text) {
                                total += 1.0;
                            }
                            terms += 1;
                        }
                    }
                    _ => {}
                }
            }
            (label.label.clone(), (terms > 0).then_some(total))
        })
        .collect()
}

/// Nearest centroid; ties go to the lexicographically smallest label. When
/// no label has a usable feature the largest class wins.
pub fn oracle_predict(
    summary: &PatternSummary,
    schema: &Schema,
    row: &TestRow,
    table: &Table,
    retrieved: &[usize],
) -> Result<OraclePrediction, OracleError> {
    if summary.rows.is_empty() {
        return Err(OracleError::EmptySummary);
    }
    let mut scored: Vec<(String, f64)> = centroid_distances(summary, schema, row)
        .into_iter()
        .filter_map(|(label, d)| d.map(|d| (label, d)))
        .collect();
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let agreeing = |label: &str| retrieved.iter().filter(|&&r| table.label(r) == label).count();
    let (label, mut reason) = match scored.as_slice() {
        [] => {
            let largest = summary
                .rows
                .iter()
                .max_by(|a, b| a.num_rows.cmp(&b.num_rows).then_with(|| b.label.cmp(&a.label)))
                .expect("summary is non-empty");
            (
                largest.label.clone(),
                "no comparable features; chose the largest class".to_string(),
            )
        }
        [(best, d)] => (best.clone(), format!("nearest centroid {best} (distance {d:.4})")),
        [(best, d), (second, d2), ..] => (
            best.clone(),
            format!("nearest centroid {best} (distance {d:.4}), next {second} (distance {d2:.4})"),
        ),
    };
    reason.push_str(&format!(
        "; {} of {} retrieved rows are labelled {label}",
        agreeing(&label),
        retrieved.len()
    ));
    Ok(OraclePrediction { label, reason })
}

/// [`StepBackend`] over the oracle functions, wrapping answers in the same
/// tags a chat model is asked to use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleBackend {
    pub query_max_chars: usize,
}

impl Default for OracleBackend {
    fn default() -> Self {
        Self { query_max_chars: 350 }
    }
}

fn tagged_summary(summary: &PatternSummary) -> String {
    format!("<patterns>\n{}</patterns>", summary.render_csv(MeanPrecision::Exact))
}

impl StepBackend for OracleBackend {
    fn summarize_chunk(&self, req: &SummarizeRequest<'_>) -> Result<String, BackendError> {
        Ok(tagged_summary(&oracle_summarize(req.table, req.rows.clone())))
    }

    fn merge_summaries(&self, req: &MergeRequest<'_>) -> Result<String, BackendError> {
        Ok(tagged_summary(&oracle_merge(req.parts)?))
    }

    fn generate_query(&self, req: &QueryRequest<'_>) -> Result<String, BackendError> {
        let level = next_level(
            req.summary,
            req.schema,
            req.test_row,
            req.prior_failed_query,
            self.query_max_chars,
        );
        let query = oracle_query(req.summary, req.schema, req.test_row, level, self.query_max_chars)?;
        Ok(format!("<dfquery>{query}</dfquery>"))
    }

    fn predict(&self, req: &PredictRequest<'_>) -> Result<String, BackendError> {
        let p = oracle_predict(req.summary, req.table.schema(), req.test_row, req.table, req.retrieved)?;
        Ok(format!(
            "<prediction>{}</prediction>\n<reason>{}</reason>",
            p.label, p.reason
        ))
    }
}
