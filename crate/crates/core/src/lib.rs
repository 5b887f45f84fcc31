//! Classify rows of a tabular dataset with a language model: summarize the
//! training table into per-label patterns, then for each test row have the
//! model write a retrieval query, run it, and predict a label from the
//! retrieved rows and the patterns.
//!
//! The [`backend::OracleBackend`] answers every model step deterministically
//! from the data, so the whole pipeline runs offline.

pub mod backend;
pub mod chunker;
pub mod cli;

pub mod eval;
pub mod pipeline;
pub mod query;
pub mod table;
