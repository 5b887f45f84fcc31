use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TagError {
    #[error("no <{0}> tag in response")]
    TagMissing(String),
    #[error("<{0}> tag is never closed")]
    TagUnclosed(String),
}

/// Content between the first `<tag>` and the next `</tag>`, trimmed, with
/// any code fences inside the tags removed.
pub fn extract_tagged(text: &str, tag: &str) -> Result<String, TagError> {
    let open = format!("<{tag}>");
    let close = format!("</{tag}>");
    let start = text.find(&open).ok_or_else(|| TagError::TagMissing(tag.to_string()))? + open.len();
    let len = text[start..]
        .find(&close)
        .ok_or_else(|| TagError::TagUnclosed(tag.to_string()))?;
    Ok(strip_fences(text[start..start + len].trim()))
}

fn strip_fences(inner: &str) -> String {
    let mut body = inner;
    if let Some(rest) = body.strip_prefix("```") {
        // drop the info string (```csv, ```python) along with the fence
        body = rest.split_once('\n').map_or(rest, |(_, after)| after);
    }
    if let Some(rest) = body.trim_end().strip_suffix("```") {
        body = rest;
    }
    body.trim().to_string()
}
