//! Per-label pattern tables: one row per label with a value range or a
//! category list for each feature, a row count, and free-text comments.

use std::collections::{BTreeSet, HashSet};
use std::sync::OnceLock;

use indexmap::IndexMap;
use regex::Regex;
use thiserror::Error;

use crate::table::render_record;

#[derive(Debug, Clone, PartialEq)]
pub enum FeaturePattern {
    NumericRange { min: f64, max: f64, avg: f64 },
    CategorySet(BTreeSet<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelPattern {
    pub label: String,
    /// Feature column name to pattern. Columns with no observed values are absent.
    pub patterns: IndexMap<String, FeaturePattern>,
    pub num_rows: usize,
    pub comments: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternSummary {
    pub label_column: String,
    pub columns: Vec<String>,
    pub rows: Vec<LabelPattern>,
}

/// How averages are written when a summary is rendered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanPrecision {
    /// Rounded to two decimals, the way a person would write a summary table.
    TwoDecimals,
    /// Shortest text that reads back as the identical float.
    Exact,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatternError {
    #[error("pattern table is empty")]
    Empty,
    #[error("label `{0}` appears in more than one row")]
    DuplicateLabel(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("malformed cell at row {row}, column `{column}`")]
    MalformedCell { row: usize, column: String },
    #[error("missing column `{0}`")]
    MissingColumn(String),
}

impl PatternSummary {
    pub fn row(&self, label: &str) -> Option<&LabelPattern> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn labels(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.label.as_str()).collect()
    }

    pub fn total_rows(&self) -> usize {
        self.rows.iter().map(|r| r.num_rows).sum()
    }

    /// `(global min, global max)` of a numeric column across all labels.
    pub fn numeric_span(&self, column: &str) -> Option<(f64, f64)> {
        let mut span: Option<(f64, f64)> = None;
        for row in &self.rows {
            if let Some(FeaturePattern::NumericRange { min, max, .. }) = row.patterns.get(column) {
                span = Some(match span {
                    None => (*min, *max),
                    Some((lo, hi)) => (lo.min(*min), hi.max(*max)),
                });
            }
        }
        span
    }

    /// CSV with a `Label (<label column>)` column, the feature columns,
    /// `Num rows` and `Comments`.
    pub fn render_csv(&self, precision: MeanPrecision) -> String {
        let label_header = format!("Label ({})", self.label_column);
        let mut header: Vec<&str> = vec![&label_header];
        header.extend(self.columns.iter().map(String::as_str));
        header.extend(["Num rows", "Comments"]);
        let mut out = render_record(header.into_iter());
        for row in &self.rows {
            let mut fields = vec![row.label.clone()];
            for column in &self.columns {
                fields.push(match row.patterns.get(column) {
                    None => String::new(),
                    Some(pattern) => render_pattern(pattern, precision),
                });
            }
            fields.push(row.num_rows.to_string());
            fields.push(row.comments.clone());
            out.push_str(&render_record(fields.iter().map(String::as_str)));
        }
        out
    }
}

pub fn format_number(value: f64) -> String {
    format!("{value:?}")
}

fn render_pattern(pattern: &FeaturePattern, precision: MeanPrecision) -> String {
    match pattern {
        FeaturePattern::NumericRange { min, max, avg } => {
            let avg = match precision {
                MeanPrecision::TwoDecimals => (avg * 100.0).round() / 100.0,
                MeanPrecision::Exact => *avg,
            };
            format!(
                "{}-{} (avg: {})",
                format_number(*min),
                format_number(*max),
                format_number(avg)
            )
        }
        FeaturePattern::CategorySet(values) => values.iter().cloned().collect::<Vec<_>>().join(", "),
    }
}

fn range_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        let num = r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?";
        Regex::new(&format!(
            r"(?i)^\s*({num})\s*[-–]\s*({num})\s*\(\s*(?:avg\s*[:=]?\s*)?({num})\s*\)\s*$"
        ))
        .unwrap()
    })
}

/// Parses a `min-max (avg: x)` or `min-max (x)` cell. Reversed endpoints are
/// swapped and the average is clamped into the range, since two-decimal
/// averages can land just outside a narrow range.
pub fn parse_range_cell(cell: &str) -> Option<FeaturePattern> {
    let caps = range_regex().captures(cell)?;
    let a: f64 = caps[1].parse().ok()?;
    let b: f64 = caps[2].parse().ok()?;
    let avg: f64 = caps[3].parse().ok()?;
    let (min, max) = if a <= b { (a, b) } else { (b, a) };
    Some(FeaturePattern::NumericRange {
        min,
        max,
        avg: avg.clamp(min, max),
    })
}

fn parse_cell(cell: &str) -> Option<FeaturePattern> {
    let cell = cell.trim();
    if cell.is_empty() {
        return None;
    }
    if let Some(range) = parse_range_cell(cell) {
        return Some(range);
    }
    let values: BTreeSet<String> = cell
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(str::to_string)
        .collect();
    (!values.is_empty()).then_some(FeaturePattern::CategorySet(values))
}

fn is_separator_row(cells: &[String]) -> bool {
    let mut any = false;
    for cell in cells {
        let cell = cell.trim();
        if cell.is_empty() {
            continue;
        }
        if !cell.chars().all(|c| matches!(c, '-' | ':' | '=' | '+' | '|')) {
            return false;
        }
        any = true;
    }
    any
}

fn split_rows(text: &str) -> Vec<Vec<String>> {
    let lines: Vec<&str> = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with("```"))
        .collect();
    let body = lines.join("\n");
    let rows: Vec<Vec<String>> = if lines.first().is_some_and(|l| l.contains('|')) {
        lines
            .iter()
            .map(|line| {
                let trimmed = line.trim().trim_start_matches('|').trim_end_matches('|');
                trimmed.split('|').map(|c| c.trim().to_string()).collect()
            })
            .collect()
    } else if lines.first().is_some_and(|l| l.contains('\t')) {
        lines
            .iter()
            .map(|line| line.split('\t').map(|c| c.trim().to_string()).collect())
            .collect()
    } else {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(body.as_bytes());
        reader
            .records()
            .filter_map(Result::ok)
            .map(|r| r.iter().map(str::to_string).collect())
            .collect()
    };
    rows.into_iter().filter(|r| !is_separator_row(r)).collect()
}

fn clean_header(cell: &str) -> String {
    cell.trim().trim_matches('*').trim().to_string()
}

fn clean_value(cell: &str) -> String {
    cell.trim()
        .trim_matches('*')
        .trim_matches(['"', '\''])
        .trim()
        .to_string()
}

/// Parses a pattern table given as CSV, a pipe-delimited table, or a
/// tab-separated table. The label and `Num rows` columns are required; a
/// missing `Comments` column reads as empty comments.
pub fn parse_pattern_table(
    text: &str,
    label_column: &str,
    expected_labels: &[String],
) -> Result<PatternSummary, PatternError> {
    let rows = split_rows(text);
    let Some((header, body)) = rows.split_first() else {
        return Err(PatternError::Empty);
    };
    let header: Vec<String> = header.iter().map(|h| clean_header(h)).collect();
    let lower: Vec<String> = header.iter().map(|h| h.to_lowercase()).collect();
    let label_idx = lower
        .iter()
        .position(|h| {
            h == "label" || h.starts_with("label (") || h.starts_with("label(") || *h == label_column.to_lowercase()
        })
        .ok_or_else(|| PatternError::MissingColumn("Label".into()))?;
    // the canonical spelling wins, so a feature called `num_rows` stays a feature
    let rows_idx = lower
        .iter()
        .rposition(|h| h == "num rows")
        .or_else(|| {
            lower
                .iter()
                .rposition(|h| matches!(h.as_str(), "num_rows" | "number of rows" | "rows"))
        })
        .ok_or_else(|| PatternError::MissingColumn("Num rows".into()))?;
    let comments_idx = lower.iter().position(|h| h == "comments" || h == "comment");
    let features: Vec<(usize, String)> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx && *i != rows_idx && Some(*i) != comments_idx)
        .map(|(i, h)| (i, h.clone()))
        .collect();

    let known: HashSet<&str> = expected_labels.iter().map(String::as_str).collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (r, cells) in body.iter().enumerate() {
        if cells.len() > header.len() && cells[header.len()..].iter().any(|c| !c.trim().is_empty()) {
            return Err(PatternError::MalformedCell {
                row: r,
                column: "<extra cells>".into(),
            });
        }
        let get = |i: usize| cells.get(i).map(String::as_str).unwrap_or("");
        let label = clean_value(get(label_idx));
        if !known.contains(label.as_str()) {
            return Err(PatternError::UnknownLabel(label));
        }
        if !seen.insert(label.clone()) {
            return Err(PatternError::DuplicateLabel(label));
        }
        let num_rows = parse_count(get(rows_idx)).ok_or_else(|| PatternError::MalformedCell {
            row: r,
            column: header[rows_idx].clone(),
        })?;
        let mut patterns = IndexMap::new();
        for (i, name) in &features {
            if let Some(pattern) = parse_cell(get(*i)) {
                patterns.insert(name.clone(), pattern);
            }
        }
        out.push(LabelPattern {
            label,
            patterns,
            num_rows,
            comments: comments_idx.map(|i| get(i).trim().to_string()).unwrap_or_default(),
        });
    }
    if out.is_empty() {
        return Err(PatternError::Empty);
    }
    Ok(PatternSummary {
        label_column: label_column.to_string(),
        columns: features.into_iter().map(|(_, h)| h).collect(),
        rows: out,
    })
}

fn parse_count(cell: &str) -> Option<usize> {
    let cell = cell.trim().replace(',', "");
    let cell = cell.strip_suffix(".0").unwrap_or(&cell);
    cell.parse().ok().filter(|&n| n >= 1)
}
