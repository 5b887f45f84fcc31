//! The four model-facing steps of the pipeline and their implementations.
//!
//! [`StepBackend`] works at the level of pipeline steps rather than raw
//! prompts. Each request carries both the text a chat model needs and the
//! typed values it was rendered from, so [`OracleBackend`] can compute its
//! answers directly while [`PromptedBackend`] renders templates and calls a
//! chat-completions endpoint. Both return raw response text; tag extraction
//! and parsing happen in the pipeline.

pub mod http;
pub mod oracle;
pub mod prompted;
mod retry;

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pipeline::summary::PatternSummary;
use crate::pipeline::synth::TestRow;
use crate::table::{Schema, Table};

pub use http::{ChatClient, ChatTransport, EndpointConfig, HttpResponse, HttpTransport};
pub use oracle::{
    centroid_distances, oracle_merge, oracle_predict, oracle_query, oracle_summarize, OracleBackend, OracleError,
    OraclePrediction,
};
pub use prompted::{ChatCompleter, PromptedBackend};
pub use retry::{RetryPolicy, RetryableKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_output_tokens: Option<u32>,
}

impl ChatRequest {
    /// A request holding a single user message.
    pub fn user(model: impl Into<String>, content: impl Into<String>) -> Self {
        Self {
            model: model.into(),
            messages: vec![ChatMessage {
                role: Role::User,
                content: content.into(),
            }],
            temperature: 0.0,
            max_output_tokens: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    #[error("network error: {0}")]
    Network(String),
    #[error("endpoint returned HTTP {0}")]
    HttpStatus(u16),
    #[error("rate limited (retry after {retry_after:?}s)")]
    RateLimited { retry_after: Option<f64> },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("gave up after {attempts} attempts: {last}")]
    ExhaustedRetries { attempts: u32, last: Box<BackendError> },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl BackendError {
    pub fn kind(&self) -> Option<RetryableKind> {
        match self {
            BackendError::Network(_) => Some(RetryableKind::Network),
            BackendError::HttpStatus(code) if *code >= 500 => Some(RetryableKind::ServerError),
            BackendError::HttpStatus(_) => Some(RetryableKind::ClientError),
            BackendError::RateLimited { .. } => Some(RetryableKind::RateLimited),
            BackendError::Protocol(_) => Some(RetryableKind::Protocol),
            BackendError::ExhaustedRetries { .. } | BackendError::Oracle(_) => None,
        }
    }
}

/// Summarize one contiguous chunk of the training table.
#[derive(Debug, Clone)]
pub struct SummarizeRequest<'a> {
    pub table: &'a Table,
    pub rows: Range<usize>,
    pub chunk_csv: &'a str,
    pub labels: &'a [String],
}

/// Combine several summaries into one.
#[derive(Debug, Clone)]
pub struct MergeRequest<'a> {
    pub parts: &'a [PatternSummary],
    pub part_texts: &'a [String],
    pub label_column: &'a str,
    pub labels: &'a [String],
}

/// Write a retrieval query for one test row.
#[derive(Debug, Clone)]
pub struct QueryRequest<'a> {
    pub schema: &'a Schema,
    pub summary: &'a PatternSummary,
    pub summary_text: &'a str,
    pub test_row: &'a TestRow,
    pub test_row_csv: &'a str,
    /// The previous query, when it selected no rows.
    pub prior_failed_query: Option<&'a str>,
}

/// Predict a label from retrieved rows and the summary.
#[derive(Debug, Clone)]
pub struct PredictRequest<'a> {
    pub table: &'a Table,
    pub retrieved: &'a [usize],
    pub sample_rows_csv: &'a str,
    pub summary: &'a PatternSummary,
    pub summary_text: &'a str,
    pub test_row: &'a TestRow,
    pub test_row_csv: &'a str,
    pub labels: &'a [String],
}

pub trait StepBackend: Send + Sync {
    fn summarize_chunk(&self, req: &SummarizeRequest<'_>) -> Result<String, BackendError>;
    fn merge_summaries(&self, req: &MergeRequest<'_>) -> Result<String, BackendError>;
    fn generate_query(&self, req: &QueryRequest<'_>) -> Result<String, BackendError>;
    fn predict(&self, req: &PredictRequest<'_>) -> Result<String, BackendError>;
}

impl<T: StepBackend + ?Sized> StepBackend for &T {
    fn summarize_chunk(&self, req: &SummarizeRequest<'_>) -> Result<String, BackendError> {
        (**self).summarize_chunk(req)
    }
    fn merge_summaries(&self, req: &MergeRequest<'_>) -> Result<String, BackendError> {
        (**self).merge_summaries(req)
    }
    fn generate_query(&self, req: &QueryRequest<'_>) -> Result<String, BackendError> {
        (**self).generate_query(req)
    }
    fn predict(&self, req: &PredictRequest<'_>) -> Result<String, BackendError> {
        (**self).predict(req)
    }
}
