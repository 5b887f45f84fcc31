use std::sync::Arc;

use lmldap::backend::{oracle_summarize, BackendError};
use lmldap::backend::{
    ChatClient, ChatCompleter, ChatRequest, EndpointConfig, HttpTransport, PromptedBackend, RetryPolicy,
};
use lmldap::pipeline::{run_on_test_set, synthesize_test_set, MeanPrecision, RunConfig};
use serde_json::Value;

use crate::common::endpoint::{chat_body, start};
use crate::common::iris;

fn client(url: &str, attempts: u32) -> ChatClient {
    let transport = HttpTransport::new(EndpointConfig::new(url, "test-key")).unwrap();
    ChatClient::new(Box::new(transport), RetryPolicy::immediate(attempts), 2)
}

#[test]
fn requests_carry_the_model_prompt_and_key() {
    let server = start(vec![(200, chat_body("hello"))]);
    let reply = client(&server.url, 1)
        .complete(&ChatRequest::user("some-model", "Say hello"))
        .unwrap();
    assert_eq!(reply, "hello");
    let body: Value = serde_json::from_str(&server.bodies.lock().unwrap()[0]).unwrap();
    assert_eq!(body["model"], "some-model");
    assert_eq!(body["temperature"], 0.0);
    assert_eq!(body["messages"].as_array().unwrap().len(), 1);
    assert_eq!(body["messages"][0]["role"], "user");
    assert_eq!(body["messages"][0]["content"], "Say hello");
    assert_eq!(server.authorizations.lock().unwrap()[0], "Bearer test-key");
}

#[test]
fn server_errors_are_retried_and_client_errors_are_not() {
    let server = start(vec![(503, "{}".into()), (429, "{}".into()), (200, chat_body("ok"))]);
    assert_eq!(
        client(&server.url, 3).complete(&ChatRequest::user("m", "x")).unwrap(),
        "ok"
    );
    assert_eq!(server.requests(), 3);

    let server = start(vec![(401, "{}".into()), (200, chat_body("ok"))]);
    let err = client(&server.url, 3)
        .complete(&ChatRequest::user("m", "x"))
        .unwrap_err();
    assert_eq!(err, BackendError::HttpStatus(401));
    assert_eq!(server.requests(), 1);
}

#[test]
fn malformed_bodies_are_protocol_errors() {
    let server = start(vec![(200, "{\"choices\": []}".into())]);
    let err = client(&server.url, 1)
        .complete(&ChatRequest::user("m", "x"))
        .unwrap_err();
    assert!(matches!(err, BackendError::Protocol(_)), "{err}");
}

#[test]
fn one_row_over_http() {
    let table = iris();
    let summary = oracle_summarize(&table, 0..150);
    let patterns = format!("<patterns>\n{}</patterns>", summary.render_csv(MeanPrecision::Exact));
    let server = start(vec![
        (200, chat_body(&patterns)),
        (200, chat_body(&patterns)),
        (
            200,
            chat_body("<dfquery>petal_length > 4.5 and petal_width > 1.6</dfquery>"),
        ),
        (
            200,
            chat_body("<prediction>Iris-virginica</prediction><reason>long petals</reason>"),
        ),
    ]);
    let config = RunConfig {
        parallelism: 1,
        step_retry: RetryPolicy::immediate(1),
        ..RunConfig::default()
    };
    let backend = PromptedBackend::new(Arc::new(client(&server.url, 1)), "m");
    let test_set = synthesize_test_set(&table, &config).unwrap();
    let virginica = test_set.iter().position(|r| r.label == "Iris-virginica").unwrap();
    let report = run_on_test_set(&table, "iris", &test_set[virginica..=virginica], &backend, &config).unwrap();
    assert_eq!(server.requests(), 4);
    let record = &report.records[0];
    assert!(record.correct, "{record:?}");
    assert_eq!(record.reason, "long petals");
    let expected: Vec<usize> = std::fs::read_to_string(crate::common::manifest_path("data/iris.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .enumerate()
        .filter(|(_, line)| {
            let v: Vec<f64> = line.split(',').take(4).map(|x| x.parse().unwrap()).collect();
            v[2] > 4.5 && v[3] > 1.6
        })
        .map(|(i, _)| i)
        .collect();
    assert_eq!(record.retrieved_row_indices, expected);
}
