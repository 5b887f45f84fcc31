//! Summarize, retrieve, predict: the stages of a classification run.

mod config;
mod predict;
pub mod prompts;
mod retrieve;
mod run;
mod summarize;
pub mod summary;
pub mod synth;
pub mod tags;

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::backend::{BackendError, RetryPolicy};
use crate::chunker::ChunkError;
use crate::query::ParseError;
use crate::table::TableError;

pub use config::RunConfig;
pub use predict::{match_label, predict_row};
pub use retrieve::{retrieve_rows, Retrieval};
pub use run::{run, run_on_test_set};
pub use summarize::{merge_hierarchically, summarize_dataset};
pub use summary::{MeanPrecision, PatternSummary};
pub use synth::{synthesize_test_set, TestRow};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Chunk(#[from] ChunkError),
    #[error("the training table has no rows")]
    EmptyClass,
    #[error("cannot average rows labelled `{0}` and `{1}`")]
    LabelMismatch(String, String),
    #[error("summarizing chunk {chunk} failed: {last}")]
    SummarizeFailed { chunk: usize, last: StepFailure },
    #[error("merging summaries failed: {0}")]
    MergeFailed(StepFailure),
    #[error("prediction failed: {0}")]
    PredictFailed(StepFailure),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// Why one attempt at a model step produced nothing usable.
#[derive(Debug, Clone, PartialEq)]
pub enum StepFailure {
    Backend(BackendError),
    /// The response could not be read: missing tag, malformed table,
    /// unknown label and so on.
    Unreadable(String),
}

impl fmt::Display for StepFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepFailure::Backend(e) => write!(f, "{e}"),
            StepFailure::Unreadable(msg) => write!(f, "unusable response: {msg}"),
        }
    }
}

impl From<BackendError> for StepFailure {
    fn from(e: BackendError) -> Self {
        StepFailure::Backend(e)
    }
}

/// Runs `step` up to `policy.max_attempts` times, sleeping between failures.
fn with_step_retry<T>(
    policy: &RetryPolicy,
    what: &str,
    mut step: impl FnMut() -> Result<T, StepFailure>,
) -> Result<T, StepFailure> {
    let mut attempt = 0;
    loop {
        match step() {
            Ok(value) => return Ok(value),
            Err(err) => {
                attempt += 1;
                if attempt >= policy.max_attempts {
                    return Err(err);
                }
                log::warn!("{what} attempt {attempt} failed: {err}");
                std::thread::sleep(policy.delay(attempt - 1));
            }
        }
    }
}

/// Maps `f` over `items` on up to `parallelism` scoped threads, keeping order.
fn parallel_map<T: Sync, R: Send>(items: &[T], parallelism: usize, f: impl Fn(usize, &T) -> R + Sync) -> Vec<R> {
    let workers = parallelism.min(items.len());
    if workers <= 1 {
        return items.iter().enumerate().map(|(i, item)| f(i, item)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new(items.iter().map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                let out = f(i, item);
                slots.lock().unwrap()[i] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every slot is filled"))
        .collect()
}

fn unreadable(e: impl fmt::Display) -> StepFailure {
    StepFailure::Unreadable(e.to_string())
}

fn query_failure(query: &str, e: &ParseError) -> String {
    format!("query `{query}` rejected: {e}")
}
