//! Immutable columnar table with CSV ingestion and deterministic CSV rendering.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Read;
use std::ops::Range;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    columns: Vec<Column>,
    label_index: usize,
}

impl Schema {
    /// Builds a schema, forcing the label column to `Categorical`.
    pub fn new(mut columns: Vec<Column>, label_column: &str) -> Result<Self, TableError> {
        let mut seen = HashSet::new();
        for column in &columns {
            if !seen.insert(column.name.as_str()) {
                return Err(TableError::DuplicateColumn(column.name.clone()));
            }
        }
        let label_index = columns
            .iter()
            .position(|c| c.name == label_column)
            .ok_or_else(|| TableError::MissingLabelColumn(label_column.to_string()))?;
        columns[label_index].kind = ColumnKind::Categorical;
        Ok(Self { columns, label_index })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn label_index(&self) -> usize {
        self.label_index
    }

    pub fn label_column(&self) -> &str {
        &self.columns[self.label_index].name
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, index: usize) -> &Column {
        &self.columns[index]
    }

    /// Indices of every column except the label, in schema order.
    pub fn feature_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.columns.len()).filter(move |&i| i != self.label_index)
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.feature_indices().map(|i| self.columns[i].name.clone()).collect()
    }

    /// One `name: dtype` line per column, in the vocabulary a dataframe user expects.
    pub fn dtypes_text(&self) -> String {
        let mut out = String::new();
        for column in &self.columns {
            let dtype = match column.kind {
                ColumnKind::Numeric => "float64",
                ColumnKind::Categorical => "object",
            };
            let _ = writeln!(out, "{}: {}", column.name, dtype);
        }
        out
    }
}

/// A single cell. Numeric cells carry their parsed value; empty text means missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub number: Option<f64>,
}

impl Cell {
    pub fn text(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            number: None,
        }
    }

    pub fn numeric(text: impl Into<String>) -> Self {
        let text = text.into();
        let number = parse_decimal(&text);
        Self { text, number }
    }

    pub fn is_missing(&self) -> bool {
        self.text.is_empty()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("input is empty: no header line")]
    EmptyInput,
    #[error("label column `{0}` not found in header")]
    MissingLabelColumn(String),
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow { line: u64, expected: usize, found: usize },
    #[error("line {0}: empty label value")]
    EmptyLabel(u64),
    #[error("row range {start}..{end} out of bounds for {rows} rows")]
    OutOfRange { start: usize, end: usize, rows: usize },
    #[error("csv error: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    schema: Schema,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    /// Builds a table from raw cell texts, inferring column kinds.
    pub fn from_rows(header: Vec<String>, rows: Vec<Vec<String>>, label_column: &str) -> Result<Self, TableError> {
        let width = header.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(TableError::RaggedRow {
                    line: i as u64 + 2,
                    expected: width,
                    found: row.len(),
                });
            }
        }
        let columns = header
            .into_iter()
            .enumerate()
            .map(|(i, name)| Column {
                name,
                kind: infer_kind(rows.iter().map(|r| r[i].as_str())),
            })
            .collect();
        let schema = Schema::new(columns, label_column)?;
        let label_index = schema.label_index();
        if let Some(i) = rows.iter().position(|r| r[label_index].is_empty()) {
            return Err(TableError::EmptyLabel(i as u64 + 2));
        }
        let rows = rows
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .enumerate()
                    .map(|(i, text)| match schema.columns[i].kind {
                        ColumnKind::Numeric => Cell::numeric(text),
                        ColumnKind::Categorical => Cell::text(text),
                    })
                    .collect()
            })
            .collect();
        Ok(Self { schema, rows })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, index: usize) -> &[Cell] {
        &self.rows[index]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Cell]> {
        self.rows.iter().map(Vec::as_slice)
    }

    pub fn cell(&self, row: usize, column: usize) -> &Cell {
        &self.rows[row][column]
    }

    pub fn label(&self, row: usize) -> &str {
        &self.rows[row][self.schema.label_index].text
    }

    /// Distinct labels in order of first appearance.
    pub fn labels(&self) -> Vec<String> {
        self.class_counts().into_keys().collect()
    }

    /// Row count per label, ordered by first appearance.
    pub fn class_counts(&self) -> IndexMap<String, usize> {
        let mut counts = IndexMap::new();
        for row in 0..self.rows.len() {
            *counts.entry(self.label(row).to_string()).or_insert(0) += 1;
        }
        counts
    }

    /// Header line followed by the selected rows.
    pub fn to_csv_text(&self, rows: Range<usize>) -> Result<String, TableError> {
        if rows.start > rows.end || rows.end > self.rows.len() {
            return Err(TableError::OutOfRange {
                start: rows.start,
                end: rows.end,
                rows: self.rows.len(),
            });
        }
        let mut out = self.header_line();
        for row in &self.rows[rows] {
            out.push_str(&render_record(row.iter().map(|c| c.text.as_str())));
        }
        Ok(out)
    }

    /// CSV text for an arbitrary (possibly non-contiguous) selection of rows.
    pub fn rows_to_csv_text(&self, indices: &[usize]) -> String {
        let mut out = self.header_line();
        for &i in indices {
            out.push_str(&render_record(self.rows[i].iter().map(|c| c.text.as_str())));
        }
        out
    }

    pub fn header_line(&self) -> String {
        render_record(self.schema.columns.iter().map(|c| c.name.as_str()))
    }

    /// Rendered data line (with trailing newline) for a single row.
    pub fn row_line(&self, index: usize) -> String {
        render_record(self.rows[index].iter().map(|c| c.text.as_str()))
    }
}

/// Reads a table from CSV. The first record is the header.
pub fn load_csv<R: Read>(source: R, label_column: &str) -> Result<Table, TableError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    let mut records = reader.records();
    let header: Vec<String> = match records.next() {
        None => return Err(TableError::EmptyInput),
        Some(record) => {
            let record = record.map_err(|e| TableError::Csv(e.to_string()))?;
            record.iter().map(str::to_string).collect()
        }
    };
    if header.len() == 1 && header[0].is_empty() {
        return Err(TableError::EmptyInput);
    }
    if !header.iter().any(|h| h == label_column) {
        return Err(TableError::MissingLabelColumn(label_column.to_string()));
    }
    let mut rows = Vec::new();
    for record in records {
        let record = record.map_err(|e| TableError::Csv(e.to_string()))?;
        if record.len() != header.len() {
            let line = record.position().map_or(0, |p| p.line());
            return Err(TableError::RaggedRow {
                line,
                expected: header.len(),
                found: record.len(),
            });
        }
        rows.push(record.iter().map(str::to_string).collect());
    }
    Table::from_rows(header, rows, label_column)
}

/// Locale-independent decimal: optional sign, digits with optional fraction, optional exponent.
pub fn parse_decimal(text: &str) -> Option<f64> {
    let bytes = text.as_bytes();
    let mut i = 0;
    if matches!(bytes.first(), Some(b'+' | b'-')) {
        i += 1;
    }
    let int_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac_start;
    }
    if digits == 0 {
        return None;
    }
    if i < bytes.len() && matches!(bytes[i], b'e' | b'E') {
        i += 1;
        if i < bytes.len() && matches!(bytes[i], b'+' | b'-') {
            i += 1;
        }
        let exp_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return None;
        }
    }
    if i != bytes.len() {
        return None;
    }
    text.parse().ok()
}

fn infer_kind<'a>(cells: impl Iterator<Item = &'a str>) -> ColumnKind {
    let mut any = false;
    for cell in cells.filter(|c| !c.is_empty()) {
        if parse_decimal(cell).is_none() {
            return ColumnKind::Categorical;
        }
        any = true;
    }
    if any {
        ColumnKind::Numeric
    } else {
        ColumnKind::Categorical
    }
}

fn needs_quotes(field: &str) -> bool {
    field.contains([',', '"', '\n', '\r'])
}

/// One CSV record with a trailing `\n`.
pub(crate) fn render_record<'a>(fields: impl Iterator<Item = &'a str>) -> String {
    let fields: Vec<&str> = fields.collect();
    let mut out = String::new();
    if fields.len() == 1 && fields[0].is_empty() {
        // a lone empty field would otherwise read back as a blank line
        out.push_str("\"\"\n");
        return out;
    }
    for (i, field) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        if needs_quotes(field) {
            out.push('"');
            out.push_str(&field.replace('"', "\"\""));
            out.push('"');
        } else {
            out.push_str(field);
        }
    }
    out.push('\n');
    out
}
