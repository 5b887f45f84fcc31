use std::time::Duration;

use super::retrieve::Retrieval;
use super::summary::{MeanPrecision, PatternSummary};
use super::synth::TestRow;
use super::tags::extract_tagged;
use super::{unreadable, with_step_retry, PipelineError, RunConfig, StepFailure};
use crate::backend::{PredictRequest, StepBackend};
use crate::eval::{PredictionRecord, Timings};
use crate::table::Table;

/// Resolves a predicted label against the known labels: exact match first,
/// then a unique case-insensitive match.
pub fn match_label<'a>(predicted: &str, labels: &'a [String]) -> Option<&'a String> {
    let predicted = predicted.trim().trim_matches(['"', '\'', '`', '*']).trim();
    if let Some(exact) = labels.iter().find(|l| *l == predicted) {
        return Some(exact);
    }
    let mut folded = labels.iter().filter(|l| l.to_lowercase() == predicted.to_lowercase());
    match (folded.next(), folded.next()) {
        (Some(only), None) => Some(only),
        _ => None,
    }
}

/// Asks for a label given the retrieved rows and the summary. Responses
/// without a known label in a `<prediction>` tag are retried per the step
/// policy; the `<reason>` tag is optional.
#[allow(clippy::too_many_arguments)]
pub fn predict_row(
    index: usize,
    test_row: &TestRow,
    retrieval: &Retrieval,
    retrieve_time: Duration,
    summary: &PatternSummary,
    table: &Table,
    backend: &dyn StepBackend,
    config: &RunConfig,
) -> Result<PredictionRecord, PipelineError> {
    let started = std::time::Instant::now();
    let labels = table.labels();
    let summary_text = summary.render_csv(MeanPrecision::TwoDecimals);
    let test_row_csv = test_row.feature_csv(table.schema());
    let sample_rows_csv = table.rows_to_csv_text(&retrieval.rows);
    let request = PredictRequest {
        table,
        retrieved: &retrieval.rows,
        sample_rows_csv: &sample_rows_csv,
        summary,
        summary_text: &summary_text,
        test_row,
        test_row_csv: &test_row_csv,
        labels: &labels,
    };
    let (label, reason) = with_step_retry(&config.step_retry, "predict", || {
        let raw = backend.predict(&request)?;
        let predicted = extract_tagged(&raw, "prediction").map_err(unreadable)?;
        let label = match_label(&predicted, &labels)
            .ok_or_else(|| StepFailure::Unreadable(format!("`{predicted}` is not a known label")))?;
        Ok((label.clone(), extract_tagged(&raw, "reason").unwrap_or_default()))
    })
    .map_err(PipelineError::PredictFailed)?;
    Ok(PredictionRecord {
        test_index: index,
        test_row: test_row.values.iter().map(|c| c.text.clone()).collect(),
        truth: test_row.label.clone(),
        sources: test_row.sources,
        generated_query: retrieval.query.clone(),
        retrieval_attempts: retrieval.attempts,
        retrieved_row_indices: retrieval.rows.clone(),
        retrieval_failed: retrieval.failed,
        correct: label == test_row.label,
        predicted_label: label,
        reason,
        error: None,
        timings: Timings {
            retrieve_ms: retrieve_time.as_millis() as u64,
            predict_ms: started.elapsed().as_millis() as u64,
        },
    })
}
