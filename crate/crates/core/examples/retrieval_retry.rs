//! Retrieval retries: a backend whose first query selects nothing is asked
//! again with that query shown as the one that came back empty.
//!
//!     cargo run --example retrieval_retry

use std::sync::Mutex;

use lmldap::backend::{
    BackendError, MergeRequest, OracleBackend, PredictRequest, QueryRequest, StepBackend, SummarizeRequest,
};
use lmldap::pipeline::{retrieve_rows, summarize_dataset, synthesize_test_set, RunConfig};
use lmldap::table::load_csv;

/// The oracle, except that its first query asks for impossibly long petals.
struct Stubborn {
    oracle: OracleBackend,
    priors: Mutex<Vec<Option<String>>>,
}

impl StepBackend for Stubborn {
    fn summarize_chunk(&self, req: &SummarizeRequest<'_>) -> Result<String, BackendError> {
        self.oracle.summarize_chunk(req)
    }
    fn merge_summaries(&self, req: &MergeRequest<'_>) -> Result<String, BackendError> {
        self.oracle.merge_summaries(req)
    }
    fn generate_query(&self, req: &QueryRequest<'_>) -> Result<String, BackendError> {
        let mut priors = self.priors.lock().unwrap();
        priors.push(req.prior_failed_query.map(String::from));
        if priors.len() == 1 {
            return Ok("<dfquery>petal_length > 100</dfquery>".into());
        }
        self.oracle.generate_query(req)
    }
    fn predict(&self, req: &PredictRequest<'_>) -> Result<String, BackendError> {
        self.oracle.predict(req)
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = load_csv(
        std::fs::File::open(concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv"))?,
        "species",
    )?;
    let config = RunConfig::default();
    let backend = Stubborn {
        oracle: OracleBackend::default(),
        priors: Mutex::new(Vec::new()),
    };
    let summary = summarize_dataset(&table, &backend, &config)?;
    let row = &synthesize_test_set(&table, &config)?[0];

    let retrieval = retrieve_rows(row, &summary, &table, &backend, &config)?;
    for (i, prior) in backend.priors.lock().unwrap().iter().enumerate() {
        println!("attempt {}: shown prior query {:?}", i + 1, prior);
    }
    for rejection in &retrieval.rejections {
        println!("rejected: {rejection}");
    }
    println!(
        "accepted after {} attempts, selecting {} rows: {}",
        retrieval.attempts,
        retrieval.rows.len(),
        retrieval.query
    );
    Ok(())
}
