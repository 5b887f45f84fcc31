use std::collections::HashMap;
use std::sync::Arc;

use super::{BackendError, ChatRequest, MergeRequest, PredictRequest, QueryRequest, StepBackend, SummarizeRequest};
use crate::pipeline::prompts::{PromptSet, Template};

/// Anything that turns a chat request into response text.
pub trait ChatCompleter: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, BackendError>;
}

/// Renders the prompt templates and sends each as a single user message.
pub struct PromptedBackend {
    completer: Arc<dyn ChatCompleter>,
    model: String,
    prompts: PromptSet,
    pub temperature: f64,
    pub max_output_tokens: Option<u32>,
}

impl PromptedBackend {
    pub fn new(completer: Arc<dyn ChatCompleter>, model: impl Into<String>) -> Self {
        Self {
            completer,
            model: model.into(),
            prompts: PromptSet::default(),
            temperature: 0.0,
            max_output_tokens: None,
        }
    }

    pub fn with_prompts(mut self, prompts: PromptSet) -> Self {
        self.prompts = prompts;
        self
    }

    fn ask(&self, template: Template, context: &HashMap<&str, &str>) -> Result<String, BackendError> {
        let prompt = self
            .prompts
            .render(template, context)
            .map_err(|e| BackendError::Protocol(e.to_string()))?;
        let mut request = ChatRequest::user(&self.model, prompt);
        request.temperature = self.temperature;
        request.max_output_tokens = self.max_output_tokens;
        self.completer.complete(&request)
    }
}

impl StepBackend for PromptedBackend {
    fn summarize_chunk(&self, req: &SummarizeRequest<'_>) -> Result<String, BackendError> {
        let labels = req.labels.join(", ");
        let context = HashMap::from([
            ("train data chunk", req.chunk_csv.trim_end()),
            ("label column", req.table.schema().label_column()),
            ("available labels", labels.as_str()),
        ]);
        self.ask(Template::SummarizeChunk, &context)
    }

    fn merge_summaries(&self, req: &MergeRequest<'_>) -> Result<String, BackendError> {
        let labels = req.labels.join(", ");
        let summaries = req
            .part_texts
            .iter()
            .map(|t| t.trim_end())
            .collect::<Vec<_>>()
            .join("\n\n");
        let context = HashMap::from([
            ("all summaries", summaries.as_str()),
            ("label column", req.label_column),
            ("available labels", labels.as_str()),
        ]);
        self.ask(Template::MergeSummaries, &context)
    }

    fn generate_query(&self, req: &QueryRequest<'_>) -> Result<String, BackendError> {
        let dtypes = req.schema.dtypes_text();
        let columns = req.schema.feature_names().join(", ");
        let mut context = HashMap::from([
            ("dtypes data", dtypes.trim_end()),
            ("summary data", req.summary_text.trim_end()),
            ("test df", req.test_row_csv.trim_end()),
            ("available columns", columns.as_str()),
        ]);
        let template = match req.prior_failed_query {
            Some(prior) => {
                context.insert("df_query", prior);
                Template::GenerateQueryRetry
            }
            None => Template::GenerateQuery,
        };
        self.ask(template, &context)
    }

    fn predict(&self, req: &PredictRequest<'_>) -> Result<String, BackendError> {
        let labels = req.labels.join(", ");
        let context = HashMap::from([
            ("query result", req.sample_rows_csv.trim_end()),
            ("summary data", req.summary_text.trim_end()),
            ("test data", req.test_row_csv.trim_end()),
            ("available labels", labels.as_str()),
        ]);
        self.ask(Template::Predict, &context)
    }
}
