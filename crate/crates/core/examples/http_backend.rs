//! Classifies a few Iris rows with a chat-completions endpoint. Needs
//! `LMLDAP_API_KEY`; `LMLDAP_BASE_URL` and `LMLDAP_MODEL` are optional.
//!
//!     LMLDAP_API_KEY=... cargo run --example http_backend -- 3

use std::sync::Arc;

use lmldap::backend::{ChatClient, EndpointConfig, HttpTransport, PromptedBackend, RetryPolicy};
use lmldap::cli::{DEFAULT_BASE_URL, DEFAULT_MODEL};
use lmldap::pipeline::{run_on_test_set, synthesize_test_set, RunConfig};
use lmldap::table::load_csv;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let Ok(key) = std::env::var("LMLDAP_API_KEY") else {
        eprintln!("set LMLDAP_API_KEY to run this example against a live endpoint");
        return Ok(());
    };
    let rows: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(3);
    let base_url = std::env::var("LMLDAP_BASE_URL").unwrap_or_else(|_| DEFAULT_BASE_URL.into());
    let model = std::env::var("LMLDAP_MODEL").unwrap_or_else(|_| DEFAULT_MODEL.into());

    let config = RunConfig::default();
    let transport = HttpTransport::new(EndpointConfig::new(&base_url, key))?;
    let client = ChatClient::new(Box::new(transport), RetryPolicy::default(), config.parallelism);
    let backend = PromptedBackend::new(Arc::new(client), model);

    let table = load_csv(
        std::fs::File::open(concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv"))?,
        "species",
    )?;
    let test_set = synthesize_test_set(&table, &config)?;
    let step = (test_set.len() / rows.max(1)).max(1);
    let picked: Vec<_> = test_set.iter().step_by(step).take(rows).cloned().collect();
    let report = run_on_test_set(&table, "iris", &picked, &backend, &config)?;
    for r in &report.records {
        println!("truth {:<16} predicted {:<16} {}", r.truth, r.predicted_label, r.reason);
    }
    println!("accuracy: {}", report.accuracy);
    Ok(())
}
