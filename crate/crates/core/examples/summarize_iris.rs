//! Summarizes a training table into a per-label pattern table with the
//! deterministic oracle backend. A small chunk budget forces several chunk
//! summaries and a hierarchical merge; the result does not change.
//!
//!     cargo run --example summarize_iris -- 300

use lmldap::backend::OracleBackend;
use lmldap::pipeline::{summarize_dataset, MeanPrecision, RunConfig};
use lmldap::table::load_csv;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let budget: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(15_000);
    let table = load_csv(
        std::fs::File::open(concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv"))?,
        "species",
    )?;
    let config = RunConfig::default().with_chunk_budget(budget);
    let summary = summarize_dataset(&table, &OracleBackend::default(), &config)?;
    print!("{}", summary.render_csv(MeanPrecision::TwoDecimals));
    Ok(())
}
