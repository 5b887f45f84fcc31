//! Prompt templates with `{name}` placeholders.
//!
//! The shipped templates are embedded at compile time; a directory holding
//! files with the same names can replace any of them.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Template {
    /// Summarize one data chunk.
    SummarizeChunk,
    /// Merge several chunk summaries into one.
    MergeSummaries,
    /// Generate a retrieval query for a test row.
    GenerateQuery,
    /// Query generation after a query returned no rows.
    GenerateQueryRetry,
    /// Predict a label from retrieved rows plus the summary.
    Predict,
}

impl Template {
    pub const ALL: [Template; 5] = [
        Template::SummarizeChunk,
        Template::MergeSummaries,
        Template::GenerateQuery,
        Template::GenerateQueryRetry,
        Template::Predict,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            Template::SummarizeChunk => "summarize_chunk.txt",
            Template::MergeSummaries => "merge_summaries.txt",
            Template::GenerateQuery => "generate_query.txt",
            Template::GenerateQueryRetry => "generate_query_retry.txt",
            Template::Predict => "predict.txt",
        }
    }

    fn builtin(self) -> &'static str {
        match self {
            Template::SummarizeChunk => include_str!("../../prompts/summarize_chunk.txt"),
            Template::MergeSummaries => include_str!("../../prompts/merge_summaries.txt"),
            Template::GenerateQuery => include_str!("../../prompts/generate_query.txt"),
            Template::GenerateQueryRetry => include_str!("../../prompts/generate_query_retry.txt"),
            Template::Predict => include_str!("../../prompts/predict.txt"),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("placeholder `{{{0}}}` has no value")]
    MissingPlaceholder(String),
}

#[derive(Debug, Clone)]
pub struct PromptSet {
    templates: HashMap<Template, String>,
}

impl Default for PromptSet {
    fn default() -> Self {
        Self {
            templates: Template::ALL.iter().map(|&t| (t, t.builtin().to_string())).collect(),
        }
    }
}

impl PromptSet {
    /// Shipped templates, with any file present in `dir` taking precedence.
    pub fn with_overrides(dir: &Path) -> io::Result<Self> {
        let mut set = Self::default();
        for t in Template::ALL {
            let path = dir.join(t.file_name());
            if path.exists() {
                set.templates.insert(t, fs::read_to_string(path)?);
            }
        }
        Ok(set)
    }

    pub fn text(&self, template: Template) -> &str {
        &self.templates[&template]
    }

    pub fn render(&self, template: Template, context: &HashMap<&str, &str>) -> Result<String, PromptError> {
        render_template(self.text(template), context)
    }
}

/// Renders one of the shipped templates.
pub fn render_prompt(template: Template, context: &HashMap<&str, &str>) -> Result<String, PromptError> {
    render_template(template.builtin(), context)
}

fn is_placeholder_name(name: &str) -> bool {
    !name.is_empty()
        && name.chars().all(|c| c.is_ascii_lowercase() || c == ' ' || c == '_')
        && !name.starts_with(' ')
        && !name.ends_with(' ')
}

/// Substitutes every `{name}` in a single pass; substituted values are not rescanned.
pub fn render_template(text: &str, context: &HashMap<&str, &str>) -> Result<String, PromptError> {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) if is_placeholder_name(&after[..close]) => {
                let name = &after[..close];
                let value = context
                    .get(name)
                    .ok_or_else(|| PromptError::MissingPlaceholder(name.to_string()))?;
                out.push_str(value);
                rest = &after[close + 1..];
            }
            _ => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    Ok(out)
}
