//! A complete classification run with the oracle backend: synthesize a test
//! set, summarize, retrieve and predict, then save the run and load it back.
//!
//!     cargo run --example oracle_run -- data/wine.csv class

use lmldap::backend::OracleBackend;
use lmldap::eval::{load_report, persist_report};
use lmldap::pipeline::{run, RunConfig};
use lmldap::table::load_csv;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv").into());
    let label = args.next().unwrap_or_else(|| "species".into());

    let table = load_csv(std::fs::File::open(&path)?, &label)?;
    let config = RunConfig::default();
    let report = run(&table, &path, &OracleBackend::default(), &config)?;

    for record in report.records.iter().take(5) {
        println!(
            "row {:>2}: truth {:<16} predicted {:<16} {} rows from: {}",
            record.test_index,
            record.truth,
            record.predicted_label,
            record.retrieved_row_indices.len(),
            record.generated_query
        );
    }
    println!("accuracy: {}", report.accuracy);

    let dir = std::env::temp_dir().join("lmldap-oracle-run");
    let (header, records) = persist_report(&report, &dir, "example")?;
    let loaded = load_report(&dir, "example")?;
    assert_eq!(loaded, report);
    println!("saved to {} and {}", header.display(), records.display());
    Ok(())
}
