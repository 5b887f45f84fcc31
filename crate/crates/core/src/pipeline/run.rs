use std::time::Instant;

use super::predict::predict_row;
use super::retrieve::retrieve_rows;
use super::summarize::summarize_dataset;
use super::synth::{synthesize_test_set, TestRow};
use super::{parallel_map, PipelineError, RunConfig};
use crate::backend::StepBackend;
use crate::eval::{PredictionRecord, RunReport, Timings, FAILED_LABEL};
use crate::table::Table;

/// Synthesizes a test set from `table`, then runs [`run_on_test_set`].
pub fn run(
    table: &Table,
    dataset: &str,
    backend: &dyn StepBackend,
    config: &RunConfig,
) -> Result<RunReport, PipelineError> {
    config.validate().map_err(PipelineError::Config)?;
    let test_set = synthesize_test_set(table, config)?;
    run_on_test_set(table, dataset, &test_set, backend, config)
}

/// Summarizes `table` and classifies every test row. A row whose retrieval
/// or prediction fails is recorded as incorrect with the error attached;
/// only summarization failures abort the run.
pub fn run_on_test_set(
    table: &Table,
    dataset: &str,
    test_set: &[TestRow],
    backend: &dyn StepBackend,
    config: &RunConfig,
) -> Result<RunReport, PipelineError> {
    config.validate().map_err(PipelineError::Config)?;
    let summary = summarize_dataset(table, backend, config)?;
    log::info!("classifying {} test rows", test_set.len());
    let records = parallel_map(test_set, config.parallelism, |index, row| {
        let started = Instant::now();
        let outcome = retrieve_rows(row, &summary, table, backend, config)
            .map_err(PipelineError::from)
            .and_then(|retrieval| {
                predict_row(
                    index,
                    row,
                    &retrieval,
                    started.elapsed(),
                    &summary,
                    table,
                    backend,
                    config,
                )
            });
        outcome.unwrap_or_else(|err| {
            log::warn!("test row {index} failed: {err}");
            failed_record(index, row, &err, started.elapsed().as_millis() as u64)
        })
    });
    Ok(RunReport::new(dataset, config.clone(), &summary, records))
}

fn failed_record(index: usize, row: &TestRow, err: &PipelineError, elapsed_ms: u64) -> PredictionRecord {
    PredictionRecord {
        test_index: index,
        test_row: row.values.iter().map(|c| c.text.clone()).collect(),
        truth: row.label.clone(),
        sources: row.sources,
        generated_query: String::new(),
        retrieval_attempts: 0,
        retrieved_row_indices: Vec::new(),
        retrieval_failed: true,
        predicted_label: FAILED_LABEL.to_string(),
        reason: String::new(),
        correct: false,
        error: Some(err.to_string()),
        timings: Timings {
            retrieve_ms: elapsed_ms,
            predict_ms: 0,
        },
    }
}
