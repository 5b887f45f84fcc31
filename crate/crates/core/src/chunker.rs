//! Token counting and greedy packing of a table into budget-sized chunks.

use std::ops::Range;

use thiserror::Error;

use crate::table::Table;

/// Default per-request budget for a rendered data chunk.
pub const DEFAULT_CHUNK_BUDGET: usize = 15_000;

/// Counts tokens in text. Implementations must return 0 for the empty string
/// and be monotone under concatenation.
pub trait TokenCounter: Send + Sync {
    fn name(&self) -> &str;
    fn count(&self, text: &str) -> usize;
}

/// `ceil(chars / 4)`, a model-agnostic approximation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CharHeuristic;

impl TokenCounter for CharHeuristic {
    fn name(&self) -> &str {
        "chars/4"
    }

    fn count(&self, text: &str) -> usize {
        text.chars().count().div_ceil(4)
    }
}

pub fn count_tokens(text: &str, counter: &dyn TokenCounter) -> usize {
    counter.count(text)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub rows: Range<usize>,
    /// Tokens in the chunk's CSV rendering, header included.
    pub token_count: usize,
}

impl Chunk {
    pub fn csv_text(&self, table: &Table) -> String {
        table
            .to_csv_text(self.rows.clone())
            .expect("chunk ranges come from the same table")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChunkError {
    #[error("table has no rows")]
    EmptyTable,
    #[error("header plus row {0} alone exceeds the token budget")]
    RowExceedsBudget(usize),
}

/// Greedy forward packing: each chunk takes rows while the header plus its
/// rows stays within `budget` tokens.
pub fn pack_chunks(table: &Table, budget: usize, counter: &dyn TokenCounter) -> Result<Vec<Chunk>, ChunkError> {
    if table.is_empty() {
        return Err(ChunkError::EmptyTable);
    }
    let header = table.header_line();
    let lines: Vec<String> = (0..table.row_count()).map(|i| table.row_line(i)).collect();
    let mut buf = String::new();
    let mut measure = |range: Range<usize>| {
        buf.clear();
        buf.push_str(&header);
        for line in &lines[range] {
            buf.push_str(line);
        }
        counter.count(&buf)
    };

    let mut chunks = Vec::new();
    let mut start = 0;
    while start < lines.len() {
        let first = measure(start..start + 1);
        if first > budget {
            return Err(ChunkError::RowExceedsBudget(start));
        }
        // Prefix counts are monotone, so the greedy stopping point is the
        // largest fitting end; find it by galloping then bisecting.
        let (mut fit, mut fit_tokens) = (start + 1, first);
        let mut step = 1;
        let mut over = None;
        while fit < lines.len() {
            let probe = (fit + step).min(lines.len());
            let tokens = measure(start..probe);
            if tokens <= budget {
                fit = probe;
                fit_tokens = tokens;
                step *= 2;
            } else {
                over = Some(probe);
                break;
            }
        }
        if let Some(mut hi) = over {
            while hi - fit > 1 {
                let mid = fit + (hi - fit) / 2;
                let tokens = measure(start..mid);
                if tokens <= budget {
                    fit = mid;
                    fit_tokens = tokens;
                } else {
                    hi = mid;
                }
            }
        }
        chunks.push(Chunk {
            rows: start..fit,
            token_count: fit_tokens,
        });
        start = fit;
    }
    Ok(chunks)
}
