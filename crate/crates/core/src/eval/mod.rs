//! Scoring a run and keeping its results.

mod store;

use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::pipeline::{MeanPrecision, PatternSummary, RunConfig};

pub use store::{header_path, load_report, persist_report, records_path, StoreError, SCHEMA_VERSION};

/// Predicted label recorded for a row whose retrieval or prediction failed.
pub const FAILED_LABEL: &str = "<failed>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub retrieve_ms: u64,
    pub predict_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub test_index: usize,
    /// Cell texts of the test row in schema order, label included.
    pub test_row: Vec<String>,
    pub truth: String,
    pub sources: (usize, usize),
    pub generated_query: String,
    pub retrieval_attempts: u32,
    pub retrieved_row_indices: Vec<usize>,
    pub retrieval_failed: bool,
    pub predicted_label: String,
    pub reason: String,
    pub correct: bool,
    /// Set when the row failed; the prediction is then [`FAILED_LABEL`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub timings: Timings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Accuracy {
    pub correct: usize,
    pub total: usize,
}

impl Accuracy {
    pub fn ratio(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    /// Whole percent, halves rounded up; exact integer arithmetic.
    pub fn percent(&self) -> u32 {
        if self.total == 0 {
            return 0;
        }
        ((200 * self.correct + self.total) / (2 * self.total)) as u32
    }
}

impl fmt::Display for Accuracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}% ({}/{})", self.percent(), self.correct, self.total)
    }
}

pub fn compute_accuracy(records: &[PredictionRecord]) -> Accuracy {
    Accuracy {
        correct: records.iter().filter(|r| r.correct).count(),
        total: records.len(),
    }
}

/// Counts by (true label, predicted label). Columns are the labels followed
/// by [`FAILED_LABEL`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn columns(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(String::as_str).chain([FAILED_LABEL])
    }

    pub fn get(&self, truth: &str, predicted: &str) -> usize {
        let row = self.labels.iter().position(|l| l == truth);
        let col = self.columns().position(|l| l == predicted);
        match (row, col) {
            (Some(r), Some(c)) => self.counts[r][c],
            _ => 0,
        }
    }
}

impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let first = self
            .labels
            .iter()
            .map(String::len)
            .max()
            .unwrap_or(0)
            .max("truth \\ predicted".len());
        let widths: Vec<usize> = self.columns().map(|c| c.len().max(3)).collect();
        write!(f, "{:<first$}", "truth \\ predicted")?;
        for (c, w) in self.columns().zip(&widths) {
            write!(f, "  {c:>w$}")?;
        }
        writeln!(f)?;
        for (label, row) in self.labels.iter().zip(&self.counts) {
            write!(f, "{label:<first$}")?;
            for (n, w) in row.iter().zip(&widths) {
                write!(f, "  {n:>w$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Rows follow `labels`; truths or predictions outside it are added in order
/// of first appearance.
pub fn confusion_matrix(records: &[PredictionRecord], labels: &[String]) -> ConfusionMatrix {
    let mut labels = labels.to_vec();
    for r in records {
        for l in [&r.truth, &r.predicted_label] {
            if l != FAILED_LABEL && !labels.contains(l) {
                labels.push(l.clone());
            }
        }
    }
    let width = labels.len() + 1;
    let mut counts = vec![vec![0; width]; labels.len()];
    for r in records {
        let row = labels.iter().position(|l| *l == r.truth).expect("truth was added");
        let col = labels.iter().position(|l| *l == r.predicted_label).unwrap_or(width - 1);
        counts[row][col] += 1;
    }
    ConfusionMatrix { labels, counts }
}

/// Everything a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub dataset: String,
    pub config: RunConfig,
    /// The final pattern table with exact averages.
    pub summary: String,
    /// Ordered by test index.
    pub records: Vec<PredictionRecord>,
    pub accuracy: Accuracy,
    pub confusion: ConfusionMatrix,
    pub created_at: DateTime<Utc>,
}

impl RunReport {
    pub fn new(dataset: &str, config: RunConfig, summary: &PatternSummary, mut records: Vec<PredictionRecord>) -> Self {
        records.sort_by_key(|r| r.test_index);
        let labels: Vec<String> = summary.labels().into_iter().map(String::from).collect();
        Self {
            dataset: dataset.to_string(),
            config,
            summary: summary.render_csv(MeanPrecision::Exact),
            accuracy: compute_accuracy(&records),
            confusion: confusion_matrix(&records, &labels),
            records,
            created_at: Utc::now(),
        }
    }
}
