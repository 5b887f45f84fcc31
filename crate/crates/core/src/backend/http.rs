//! Chat-completions transport with retry and a concurrency bound.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde_json::{json, Value};

use super::{BackendError, ChatCompleter, ChatRequest, RetryPolicy};

pub const API_KEY_ENV: &str = "LMLDAP_API_KEY";
pub const BASE_URL_ENV: &str = "LMLDAP_BASE_URL";

#[derive(Debug, Clone, PartialEq)]
pub struct HttpResponse {
    pub status: u16,
    /// Parsed `retry-after` header, in seconds.
    pub retry_after: Option<f64>,
    pub body: String,
}

/// Sends one JSON request body and returns the raw response.
pub trait ChatTransport: Send + Sync {
    fn post(&self, body: &str) -> Result<HttpResponse, BackendError>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndpointConfig {
    pub url: String,
    pub api_key: String,
    pub timeout: Duration,
}

impl EndpointConfig {
    /// `base_url` may be the full completions URL or the API root; in the
    /// latter case `/chat/completions` is appended.
    pub fn new(base_url: &str, api_key: impl Into<String>) -> Self {
        let trimmed = base_url.trim_end_matches('/');
        let url = if trimmed.ends_with("/chat/completions") {
            trimmed.to_string()
        } else {
            format!("{trimmed}/chat/completions")
        };
        Self {
            url,
            api_key: api_key.into(),
            timeout: Duration::from_secs(120),
        }
    }
}

/// Blocking HTTP transport with bearer authorization.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
    endpoint: EndpointConfig,
}

impl HttpTransport {
    pub fn new(endpoint: EndpointConfig) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(endpoint.timeout)
            .build()
            .map_err(|e| BackendError::Network(e.to_string()))?;
        Ok(Self { client, endpoint })
    }
}

impl ChatTransport for HttpTransport {
    fn post(&self, body: &str) -> Result<HttpResponse, BackendError> {
        let response = self
            .client
            .post(&self.endpoint.url)
            .bearer_auth(&self.endpoint.api_key)
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(body.to_string())
            .send()
            .map_err(|e| BackendError::Network(e.to_string()))?;
        let status = response.status().as_u16();
        let retry_after = response
            .headers()
            .get(reqwest::header::RETRY_AFTER)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<f64>().ok())
            .filter(|s| s.is_finite() && *s >= 0.0);
        let body = response.text().map_err(|e| BackendError::Network(e.to_string()))?;
        Ok(HttpResponse {
            status,
            retry_after,
            body,
        })
    }
}

pub fn request_body(request: &ChatRequest) -> Value {
    let mut body = json!({
        "model": request.model,
        "messages": request.messages,
        "temperature": request.temperature,
    });
    if let Some(max) = request.max_output_tokens {
        body["max_tokens"] = json!(max);
    }
    body
}

fn response_content(body: &str) -> Result<String, BackendError> {
    let value: Value =
        serde_json::from_str(body).map_err(|e| BackendError::Protocol(format!("response is not JSON: {e}")))?;
    value
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| BackendError::Protocol("missing choices[0].message.content".into()))
}

fn attempt(transport: &dyn ChatTransport, body: &str) -> Result<String, BackendError> {
    let response = transport.post(body)?;
    match response.status {
        200..=299 => response_content(&response.body),
        429 => Err(BackendError::RateLimited {
            retry_after: response.retry_after,
        }),
        code => Err(BackendError::HttpStatus(code)),
    }
}

/// Sends `request`, retrying retryable failures with exponential backoff.
/// A server-provided retry-after replaces the computed delay.
pub fn complete(
    request: &ChatRequest,
    transport: &dyn ChatTransport,
    policy: &RetryPolicy,
) -> Result<String, BackendError> {
    let body = request_body(request).to_string();
    let mut n = 0;
    loop {
        let err = match attempt(transport, &body) {
            Ok(text) => return Ok(text),
            Err(err) => err,
        };
        if !policy.is_retryable(&err) {
            return Err(err);
        }
        n += 1;
        if n >= policy.max_attempts {
            return Err(BackendError::ExhaustedRetries {
                attempts: n,
                last: Box::new(err),
            });
        }
        let delay = match &err {
            BackendError::RateLimited {
                retry_after: Some(secs),
            } => Duration::from_secs_f64(*secs),
            _ => policy.delay(n - 1),
        };
        log::warn!("chat request failed ({err}); retrying in {delay:?}");
        std::thread::sleep(delay);
    }
}

struct Semaphore {
    permits: Mutex<usize>,
    freed: Condvar,
}

impl Semaphore {
    fn new(permits: usize) -> Self {
        Self {
            permits: Mutex::new(permits.max(1)),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.permits.lock().unwrap();
        while *free == 0 {
            free = self.freed.wait(free).unwrap();
        }
        *free -= 1;
        Permit(self)
    }
}

struct Permit<'a>(&'a Semaphore);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.permits.lock().unwrap() += 1;
        self.0.freed.notify_one();
    }
}

/// A transport plus retry policy, allowing at most `parallelism` requests in flight.
pub struct ChatClient {
    transport: Box<dyn ChatTransport>,
    policy: RetryPolicy,
    limiter: Semaphore,
}

impl ChatClient {
    pub fn new(transport: Box<dyn ChatTransport>, policy: RetryPolicy, parallelism: usize) -> Self {
        Self {
            transport,
            policy,
            limiter: Semaphore::new(parallelism),
        }
    }

    pub fn policy(&self) -> &RetryPolicy {
        &self.policy
    }
}

impl ChatCompleter for ChatClient {
    fn complete(&self, request: &ChatRequest) -> Result<String, BackendError> {
        let _permit = self.limiter.acquire();
        complete(request, self.transport.as_ref(), &self.policy)
    }
}
