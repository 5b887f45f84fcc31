use serde::{Deserialize, Serialize};

use super::summary::{MeanPrecision, PatternSummary};
use super::synth::TestRow;
use super::tags::extract_tagged;
use super::{query_failure, RunConfig};
use crate::backend::{BackendError, QueryRequest, StepBackend};
use crate::chunker::count_tokens;
use crate::query::{evaluate_query, parse_query};
use crate::table::Table;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Retrieval {
    /// The last query the model wrote.
    pub query: String,
    pub attempts: u32,
    /// Selected training rows, ascending, cut to fit the result budget.
    pub rows: Vec<usize>,
    /// No attempt produced a usable, non-empty selection.
    pub failed: bool,
    /// Why each rejected attempt was rejected.
    pub rejections: Vec<String>,
}

/// Asks for a query, runs it, and retries with the failed query shown to
/// the model when it is too long, does not parse, or selects nothing.
/// Transport errors are returned as they are.
pub fn retrieve_rows(
    test_row: &TestRow,
    summary: &PatternSummary,
    table: &Table,
    backend: &dyn StepBackend,
    config: &RunConfig,
) -> Result<Retrieval, BackendError> {
    let schema = table.schema();
    let summary_text = summary.render_csv(MeanPrecision::TwoDecimals);
    let test_row_csv = test_row.feature_csv(schema);
    let mut prior: Option<String> = None;
    let mut rejections = Vec::new();
    for attempt in 1..=config.retrieval_max_attempts {
        let request = QueryRequest {
            schema,
            summary,
            summary_text: &summary_text,
            test_row,
            test_row_csv: &test_row_csv,
            prior_failed_query: prior.as_deref(),
        };
        let raw = backend.generate_query(&request)?;
        let query = match extract_tagged(&raw, "dfquery") {
            Ok(q) => q,
            Err(e) => {
                rejections.push(e.to_string());
                prior = Some(raw.trim().to_string());
                continue;
            }
        };
        let length = query.chars().count();
        let rejection = if length > config.query_max_chars {
            Some(format!(
                "query has {length} characters, limit {}",
                config.query_max_chars
            ))
        } else {
            match parse_query(&query, schema) {
                Err(e) => Some(query_failure(&query, &e)),
                Ok(expr) => {
                    let hits = evaluate_query(&expr, table);
                    if hits.is_empty() {
                        Some(format!("query `{query}` selected no rows"))
                    } else {
                        let rows = fit_rows(table, hits, config);
                        return Ok(Retrieval {
                            query,
                            attempts: attempt,
                            rows,
                            failed: false,
                            rejections,
                        });
                    }
                }
            }
        };
        rejections.extend(rejection);
        prior = Some(query);
    }
    Ok(Retrieval {
        query: prior.unwrap_or_default(),
        attempts: config.retrieval_max_attempts,
        rows: Vec::new(),
        failed: true,
        rejections,
    })
}

/// The longest prefix of `hits` whose CSV fits the result budget.
fn fit_rows(table: &Table, mut hits: Vec<usize>, config: &RunConfig) -> Vec<usize> {
    let fits =
        |k: usize| count_tokens(&table.rows_to_csv_text(&hits[..k]), config.counter.as_ref()) <= config.result_budget;
    if fits(hits.len()) {
        return hits;
    }
    // fits() is monotone in k, so bisect for the largest fitting prefix
    let (mut lo, mut hi) = (0, hits.len());
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hits.truncate(lo);
    hits
}
