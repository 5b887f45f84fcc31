//! Parses queries in the dataframe-query dialect against the Iris table and
//! shows the canonical form of each and how many rows it selects.
//!
//!     cargo run --example query_dialect
//!     cargo run --example query_dialect -- "petal length > 5 and species == 'Iris-virginica'"

use lmldap::query::{evaluate_query, parse_query};
use lmldap::table::load_csv;

const SAMPLES: [&str; 7] = [
    "petal_length < 2",
    "`sepal_width` >= 3.5 & ~(petal_width > 0.3)",
    "4.5 < petal_length and petal_length <= 5.1",
    "petal width > 1.7 OR sepal length >= 7",
    "species == \"Iris-versicolor\" and not petal_length < 4",
    "species != 'Iris-setosa' | sepal_width == 3",
    "petal_length > > 3",
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = load_csv(
        std::fs::File::open(concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv"))?,
        "species",
    )?;
    let given: Vec<String> = std::env::args().skip(1).collect();
    let queries: Vec<&str> = if given.is_empty() {
        SAMPLES.to_vec()
    } else {
        given.iter().map(String::as_str).collect()
    };
    for text in queries {
        println!("query:     {text}");
        match parse_query(text, table.schema()) {
            Ok(expr) => {
                let rows = evaluate_query(&expr, &table);
                println!("canonical: {expr}");
                println!("selects:   {} rows {:?}\n", rows.len(), &rows[..rows.len().min(8)]);
            }
            Err(e) => println!("error:     {e}\n"),
        }
    }
    Ok(())
}
