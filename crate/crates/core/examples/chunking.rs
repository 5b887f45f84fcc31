//! Splits a CSV into chunks that fit a token budget, the unit of work for
//! summarization.
//!
//!     cargo run --example chunking -- data/wine.csv class 1500

use lmldap::chunker::{pack_chunks, CharHeuristic};
use lmldap::table::load_csv;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv").into());
    let label = args.next().unwrap_or_else(|| "species".into());
    let budget: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(600);

    let table = load_csv(std::fs::File::open(&path)?, &label)?;
    let chunks = pack_chunks(&table, budget, &CharHeuristic)?;
    println!(
        "{} rows, budget {budget} tokens, {} chunks",
        table.row_count(),
        chunks.len()
    );
    for (i, chunk) in chunks.iter().enumerate() {
        println!(
            "chunk {i:>3}: rows {:>4}..{:<4} {:>5} tokens",
            chunk.rows.start, chunk.rows.end, chunk.token_count
        );
    }
    Ok(())
}
