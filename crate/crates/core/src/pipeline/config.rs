use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::backend::RetryPolicy;
use crate::chunker::{CharHeuristic, TokenCounter, DEFAULT_CHUNK_BUDGET};

fn default_counter() -> Arc<dyn TokenCounter> {
    Arc::new(CharHeuristic)
}

#[derive(Clone, Serialize, Deserialize)]
pub struct RunConfig {
    /// Token budget for one rendered data chunk.
    pub chunk_budget: usize,
    /// Token budget for the retrieved rows shown to the predictor.
    pub result_budget: usize,
    pub query_max_chars: usize,
    pub test_fraction: f64,
    pub per_class_cap: usize,
    pub retrieval_max_attempts: u32,
    pub step_retry: RetryPolicy,
    pub rng_seed: u64,
    pub parallelism: usize,
    #[serde(skip, default = "default_counter")]
    pub counter: Arc<dyn TokenCounter>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            chunk_budget: DEFAULT_CHUNK_BUDGET,
            result_budget: 2 * DEFAULT_CHUNK_BUDGET,
            query_max_chars: 350,
            test_fraction: 0.20,
            per_class_cap: 10,
            retrieval_max_attempts: 3,
            step_retry: RetryPolicy::default(),
            rng_seed: 42,
            parallelism: 4,
            counter: default_counter(),
        }
    }
}

impl fmt::Debug for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RunConfig")
            .field("chunk_budget", &self.chunk_budget)
            .field("result_budget", &self.result_budget)
            .field("query_max_chars", &self.query_max_chars)
            .field("test_fraction", &self.test_fraction)
            .field("per_class_cap", &self.per_class_cap)
            .field("retrieval_max_attempts", &self.retrieval_max_attempts)
            .field("step_retry", &self.step_retry)
            .field("rng_seed", &self.rng_seed)
            .field("parallelism", &self.parallelism)
            .field("counter", &self.counter.name())
            .finish()
    }
}

impl PartialEq for RunConfig {
    fn eq(&self, other: &Self) -> bool {
        self.chunk_budget == other.chunk_budget
            && self.result_budget == other.result_budget
            && self.query_max_chars == other.query_max_chars
            && self.test_fraction == other.test_fraction
            && self.per_class_cap == other.per_class_cap
            && self.retrieval_max_attempts == other.retrieval_max_attempts
            && self.step_retry == other.step_retry
            && self.rng_seed == other.rng_seed
            && self.parallelism == other.parallelism
            && self.counter.name() == other.counter.name()
    }
}

impl RunConfig {
    /// Sets the chunk budget and keeps the result budget at twice that.
    pub fn with_chunk_budget(mut self, budget: usize) -> Self {
        self.chunk_budget = budget;
        self.result_budget = 2 * budget;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        let counts = [
            ("chunk_budget", self.chunk_budget),
            ("result_budget", self.result_budget),
            ("query_max_chars", self.query_max_chars),
            ("per_class_cap", self.per_class_cap),
            ("retrieval_max_attempts", self.retrieval_max_attempts as usize),
            ("parallelism", self.parallelism),
        ];
        for (name, value) in counts {
            if value < 1 {
                return Err(format!("{name} must be at least 1"));
            }
        }
        if !(self.test_fraction > 0.0 && self.test_fraction <= 1.0) {
            return Err(format!("test_fraction must be in (0, 1], got {}", self.test_fraction));
        }
        self.step_retry.validate()
    }
}
