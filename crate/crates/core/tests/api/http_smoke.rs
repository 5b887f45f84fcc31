//! Live check against a real chat-completions endpoint. Opt-in only:
//!
//!     LMLDAP_API_KEY=... [LMLDAP_BASE_URL=...] [LMLDAP_MODEL=...] \
//!         cargo test --test a_integration http_smoke -- --ignored
//!
//! Classifies a single Iris test row; the answer depends on the hosted
//! model, so only the shape of the result is checked.

use std::sync::Arc;

use lmldap::backend::http::{API_KEY_ENV, BASE_URL_ENV};
use lmldap::backend::{ChatClient, EndpointConfig, HttpTransport, PromptedBackend, RetryPolicy};
use lmldap::cli::{DEFAULT_BASE_URL, DEFAULT_MODEL};
use lmldap::eval::FAILED_LABEL;
use lmldap::pipeline::{run_on_test_set, synthesize_test_set, RunConfig};

use crate::common;

#[test]
#[ignore = "needs network access and LMLDAP_API_KEY"]
fn one_row_through_a_live_model() {
    let key = std::env::var(API_KEY_ENV).expect("set LMLDAP_API_KEY");
    let base = std::env::var(BASE_URL_ENV).unwrap_or_else(|_| DEFAULT_BASE_URL.into());
    let model = std::env::var("LMLDAP_MODEL").unwrap_or_else(|_| DEFAULT_MODEL.into());
    let transport = HttpTransport::new(EndpointConfig::new(&base, key)).unwrap();
    let client = ChatClient::new(Box::new(transport), RetryPolicy::default(), 1);
    let backend = PromptedBackend::new(Arc::new(client), model);

    let iris = common::iris();
    let config = RunConfig {
        parallelism: 1,
        ..RunConfig::default()
    };
    let test_set = synthesize_test_set(&iris, &config).unwrap();
    let report = run_on_test_set(&iris, "iris", &test_set[..1], &backend, &config).unwrap();
    let record = &report.records[0];
    assert_eq!(report.records.len(), 1);
    assert!(record.error.is_none(), "{:?}", record.error);
    assert_ne!(record.predicted_label, FAILED_LABEL);
    assert!(iris.labels().contains(&record.predicted_label));
}
