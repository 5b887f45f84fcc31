//! Prints every prompt a chat model would receive while classifying one
//! Iris row. The answers come from the oracle, so no model is needed.
//!
//!     cargo run --example prompt_rendering

use std::sync::{Arc, Mutex};

use lmldap::backend::{
    BackendError, ChatCompleter, ChatRequest, MergeRequest, OracleBackend, PredictRequest, PromptedBackend,
    QueryRequest, StepBackend, SummarizeRequest,
};
use lmldap::pipeline::{run_on_test_set, synthesize_test_set, RunConfig};
use lmldap::table::load_csv;

/// Keeps the prompt and returns nothing useful.
#[derive(Default)]
struct Capture(Mutex<Option<String>>);

impl ChatCompleter for Capture {
    fn complete(&self, request: &ChatRequest) -> Result<String, BackendError> {
        *self.0.lock().unwrap() = Some(request.messages[0].content.clone());
        Ok(String::new())
    }
}

/// Renders each prompt through the prompted backend, prints it, and
/// answers with the oracle.
struct Narrated {
    capture: Arc<Capture>,
    prompted: PromptedBackend,
    oracle: OracleBackend,
}

impl Narrated {
    fn show(&self, step: &str, ask: impl FnOnce(&PromptedBackend) -> Result<String, BackendError>) {
        ask(&self.prompted).expect("capturing never fails");
        let prompt = self.capture.0.lock().unwrap().take().unwrap_or_default();
        println!("===== {step} =====\n{prompt}\n");
    }
}

impl StepBackend for Narrated {
    fn summarize_chunk(&self, req: &SummarizeRequest<'_>) -> Result<String, BackendError> {
        self.show("summarize chunk", |p| p.summarize_chunk(req));
        self.oracle.summarize_chunk(req)
    }
    fn merge_summaries(&self, req: &MergeRequest<'_>) -> Result<String, BackendError> {
        self.show("merge summaries", |p| p.merge_summaries(req));
        self.oracle.merge_summaries(req)
    }
    fn generate_query(&self, req: &QueryRequest<'_>) -> Result<String, BackendError> {
        self.show("generate query", |p| p.generate_query(req));
        self.oracle.generate_query(req)
    }
    fn predict(&self, req: &PredictRequest<'_>) -> Result<String, BackendError> {
        self.show("predict", |p| p.predict(req));
        self.oracle.predict(req)
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = load_csv(
        std::fs::File::open(concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv"))?,
        "species",
    )?;
    let capture = Arc::new(Capture::default());
    let backend = Narrated {
        prompted: PromptedBackend::new(capture.clone(), "unused"),
        capture,
        oracle: OracleBackend::default(),
    };
    let config = RunConfig {
        parallelism: 1,
        ..RunConfig::default()
    };
    let test_set = synthesize_test_set(&table, &config)?;
    let report = run_on_test_set(&table, "iris", &test_set[..1], &backend, &config)?;
    println!(
        "predicted {} for a row labelled {}",
        report.records[0].predicted_label, report.records[0].truth
    );
    Ok(())
}
