//! Backends and chat completers that replay canned responses and record
//! what they were asked.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use lmldap::backend::{
    oracle_merge, BackendError, ChatCompleter, ChatRequest, MergeRequest, OracleBackend, PredictRequest, QueryRequest,
    StepBackend, SummarizeRequest,
};
use lmldap::pipeline::MeanPrecision;

/// Returns the scripted responses in order and keeps every prompt.
pub struct ScriptedCompleter {
    responses: Mutex<VecDeque<String>>,
    pub prompts: Mutex<Vec<String>>,
}

impl ScriptedCompleter {
    pub fn new<S: Into<String>>(responses: impl IntoIterator<Item = S>) -> Self {
        Self {
            responses: Mutex::new(responses.into_iter().map(Into::into).collect()),
            prompts: Mutex::new(Vec::new()),
        }
    }

    pub fn prompts(&self) -> Vec<String> {
        self.prompts.lock().unwrap().clone()
    }
}

impl ChatCompleter for ScriptedCompleter {
    fn complete(&self, request: &ChatRequest) -> Result<String, BackendError> {
        self.prompts.lock().unwrap().push(request.messages[0].content.clone());
        self.responses
            .lock()
            .unwrap()
            .pop_front()
            .ok_or_else(|| BackendError::Protocol("script exhausted".into()))
    }
}

/// The oracle, counting calls and recording the size of every merge.
#[derive(Default)]
pub struct CountingOracle {
    pub inner: OracleBackend,
    pub summarize_calls: AtomicUsize,
    pub merge_sizes: Mutex<Vec<usize>>,
    pub query_calls: AtomicUsize,
    pub predict_calls: AtomicUsize,
}

impl CountingOracle {
    pub fn merges(&self) -> Vec<usize> {
        self.merge_sizes.lock().unwrap().clone()
    }
}

impl StepBackend for CountingOracle {
    fn summarize_chunk(&self, req: &SummarizeRequest<'_>) -> Result<String, BackendError> {
        self.summarize_calls.fetch_add(1, Ordering::SeqCst);
        self.inner.summarize_chunk(req)
    }

    fn merge_summaries(&self, req: &MergeRequest<'_>) -> Result<String, BackendError> {
        self.merge_sizes.lock().unwrap().push(req.parts.len());
        let merged = oracle_merge(req.parts)?;
        Ok(format!(
            "<patterns>\n{}</patterns>",
            merged.render_csv(MeanPrecision::Exact)
        ))
    }

    fn generate_query(&self, req: &QueryRequest<'_>) -> Result<String, BackendError> {
        self.query_calls.fetch_add(1, Ordering::SeqCst);
        self.inner.generate_query(req)
    }

    fn predict(&self, req: &PredictRequest<'_>) -> Result<String, BackendError> {
        self.predict_calls.fetch_add(1, Ordering::SeqCst);
        self.inner.predict(req)
    }
}
