//! Builds the averaged-pair test set for a CSV and prints it as CSV, with
//! the two source row indices appended.
//!
//!     cargo run --example synthesize_test_set -- data/iris.csv species 42

use lmldap::pipeline::{synthesize_test_set, RunConfig};
use lmldap::table::load_csv;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv").into());
    let label = args.next().unwrap_or_else(|| "species".into());
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(42);

    let table = load_csv(std::fs::File::open(&path)?, &label)?;
    let config = RunConfig {
        rng_seed: seed,
        ..RunConfig::default()
    };
    let rows = synthesize_test_set(&table, &config)?;

    let mut out = csv::Writer::from_writer(std::io::stdout());
    let mut header: Vec<String> = table.schema().columns().iter().map(|c| c.name.clone()).collect();
    header.extend(["source_a".into(), "source_b".into()]);
    out.write_record(&header)?;
    for row in &rows {
        let mut record: Vec<String> = row.values.iter().map(|c| c.text.clone()).collect();
        record.extend([row.sources.0.to_string(), row.sources.1.to_string()]);
        out.write_record(&record)?;
    }
    out.flush()?;
    eprintln!("{} test rows from {} training rows", rows.len(), table.row_count());
    Ok(())
}
