use super::summary::{parse_pattern_table, MeanPrecision, PatternSummary};
use super::tags::extract_tagged;
use super::{parallel_map, unreadable, with_step_retry, PipelineError, RunConfig, StepFailure};
use crate::backend::{MergeRequest, StepBackend, SummarizeRequest};
use crate::chunker::{count_tokens, pack_chunks};
use crate::table::Table;

fn read_summary(raw: &str, label_column: &str, labels: &[String]) -> Result<PatternSummary, StepFailure> {
    let payload = extract_tagged(raw, "patterns").map_err(unreadable)?;
    parse_pattern_table(&payload, label_column, labels).map_err(unreadable)
}

/// Chunks the table, summarizes every chunk, and merges the results into
/// one pattern table.
pub fn summarize_dataset(
    table: &Table,
    backend: &dyn StepBackend,
    config: &RunConfig,
) -> Result<PatternSummary, PipelineError> {
    config.validate().map_err(PipelineError::Config)?;
    let chunks = pack_chunks(table, config.chunk_budget, config.counter.as_ref())?;
    let labels = table.labels();
    let label_column = table.schema().label_column();
    log::info!("summarizing {} rows in {} chunks", table.row_count(), chunks.len());
    let results = parallel_map(&chunks, config.parallelism, |_, chunk| {
        let csv = chunk.csv_text(table);
        let request = SummarizeRequest {
            table,
            rows: chunk.rows.clone(),
            chunk_csv: &csv,
            labels: &labels,
        };
        with_step_retry(&config.step_retry, "summarize", || {
            let raw = backend.summarize_chunk(&request)?;
            read_summary(&raw, label_column, &labels)
        })
    });
    let mut parts = Vec::with_capacity(results.len());
    for (chunk, result) in results.into_iter().enumerate() {
        parts.push(result.map_err(|last| PipelineError::SummarizeFailed { chunk, last })?);
    }
    merge_hierarchically(parts, backend, config, label_column, &labels)
}

fn merge_once(
    parts: &[PatternSummary],
    texts: &[String],
    backend: &dyn StepBackend,
    config: &RunConfig,
    label_column: &str,
    labels: &[String],
) -> Result<PatternSummary, PipelineError> {
    let request = MergeRequest {
        parts,
        part_texts: texts,
        label_column,
        labels,
    };
    with_step_retry(&config.step_retry, "merge", || {
        let raw = backend.merge_summaries(&request)?;
        read_summary(&raw, label_column, labels)
    })
    .map_err(PipelineError::MergeFailed)
}

/// Groups consecutive parts into batches whose joined text fits `budget`.
/// A part that fits nowhere still travels with its neighbour, so every
/// round strictly reduces the number of parts.
fn batch(sizes: &[usize], budget: usize) -> Vec<std::ops::Range<usize>> {
    let mut batches = Vec::new();
    let mut start = 0;
    while start < sizes.len() {
        let mut end = start + 1;
        let mut used = sizes[start];
        while end < sizes.len() && used + 1 + sizes[end] <= budget {
            used += 1 + sizes[end];
            end += 1;
        }
        if end == start + 1 && end < sizes.len() {
            // over budget, but a batch of one would never shrink the list
            end += 1;
        }
        batches.push(start..end);
        start = end;
    }
    batches
}

/// Merges with a single call when all summaries fit the chunk budget
/// together, and otherwise merges budget-sized batches first and repeats.
/// Even a single summary goes through one merge call.
pub fn merge_hierarchically(
    mut parts: Vec<PatternSummary>,
    backend: &dyn StepBackend,
    config: &RunConfig,
    label_column: &str,
    labels: &[String],
) -> Result<PatternSummary, PipelineError> {
    let counter = config.counter.as_ref();
    loop {
        let texts: Vec<String> = parts.iter().map(|p| p.render_csv(MeanPrecision::TwoDecimals)).collect();
        if parts.len() <= 1 || count_tokens(&texts.join("\n\n"), counter) <= config.chunk_budget {
            return merge_once(&parts, &texts, backend, config, label_column, labels);
        }
        let sizes: Vec<usize> = texts.iter().map(|t| count_tokens(t, counter)).collect();
        let batches = batch(&sizes, config.chunk_budget);
        log::info!("merging {} summaries in {} batches", parts.len(), batches.len());
        let merged = parallel_map(&batches, config.parallelism, |_, range| {
            merge_once(
                &parts[range.clone()],
                &texts[range.clone()],
                backend,
                config,
                label_column,
                labels,
            )
        });
        parts = merged.into_iter().collect::<Result<_, _>>()?;
    }
}
