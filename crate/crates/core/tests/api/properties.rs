use lmldap::backend::{centroid_distances, oracle_predict, oracle_summarize};
use lmldap::chunker::{count_tokens, pack_chunks, CharHeuristic};
use lmldap::eval::{compute_accuracy, load_report, persist_report, Accuracy};
use lmldap::pipeline::summary::parse_pattern_table;
use lmldap::pipeline::synth::desired_test_rows;
use lmldap::pipeline::{run, synthesize_test_set, MeanPrecision, RunConfig, TestRow};
use lmldap::query::{evaluate_query, parse_query, Expr};
use lmldap::table::{load_csv, parse_decimal, Table};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::common::naive::{random_ast, render};
use crate::common::{class_count_table, random_table, RandomTable};

fn table_from_seed(seed: u64, missing: f64) -> (ChaCha8Rng, RandomTable) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = random_table(&mut rng, 25, 5, missing);
    (rng, t)
}

fn random_expr(rng: &mut ChaCha8Rng, t: &RandomTable, table: &Table) -> Expr {
    let ast = random_ast(rng, t, 3);
    let text = render(rng, &ast, &t.names);
    parse_query(&text, table.schema()).unwrap_or_else(|e| panic!("`{text}`: {e}"))
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn csv_text_reloads_to_the_same_table(seed: u64) {
        let (_, t) = table_from_seed(seed, 0.2);
        let table = t.load();
        let text = table.to_csv_text(0..table.row_count()).unwrap();
        let again = load_csv(text.as_bytes(), "label").unwrap();
        prop_assert_eq!(again.schema(), table.schema());
        prop_assert_eq!(again.rows().collect::<Vec<_>>(), table.rows().collect::<Vec<_>>());
    }

    #[test]
    fn canonical_rendering_parses_back(seed: u64) {
        let (mut rng, t) = table_from_seed(seed, 0.2);
        let table = t.load();
        let expr = random_expr(&mut rng, &t, &table);
        let canonical = expr.to_string();
        let reparsed = parse_query(&canonical, table.schema()).unwrap_or_else(|e| panic!("`{canonical}`: {e}"));
        prop_assert_eq!(&reparsed, &expr);
        prop_assert_eq!(reparsed.to_string(), canonical);
    }

    #[test]
    fn de_morgan_holds_with_missing_cells(seed: u64) {
        let (mut rng, t) = table_from_seed(seed, 0.3);
        let table = t.load();
        let a = random_expr(&mut rng, &t, &table);
        let b = random_expr(&mut rng, &t, &table);
        let lhs = Expr::not(Expr::and(a.clone(), b.clone()));
        let rhs = Expr::or(Expr::not(a.clone()), Expr::not(b.clone()));
        prop_assert_eq!(evaluate_query(&lhs, &table), evaluate_query(&rhs, &table));
        let lhs = Expr::not(Expr::or(a.clone(), b.clone()));
        let rhs = Expr::and(Expr::not(a), Expr::not(b));
        prop_assert_eq!(evaluate_query(&lhs, &table), evaluate_query(&rhs, &table));
    }

    #[test]
    fn conjunction_narrows_and_disjunction_widens(seed: u64) {
        let (mut rng, t) = table_from_seed(seed, 0.3);
        let table = t.load();
        let a = random_expr(&mut rng, &t, &table);
        let b = random_expr(&mut rng, &t, &table);
        let only_a = evaluate_query(&a, &table);
        let both = evaluate_query(&Expr::and(a.clone(), b.clone()), &table);
        let either = evaluate_query(&Expr::or(a.clone(), b.clone()), &table);
        prop_assert!(is_subset(&both, &only_a));
        prop_assert!(is_subset(&only_a, &either));
        // a row and its negation are never both selected
        let not_a = evaluate_query(&Expr::not(a), &table);
        prop_assert!(only_a.iter().all(|r| not_a.binary_search(r).is_err()));
    }

    #[test]
    fn chunks_tile_the_table_within_budget(seed: u64, budget in 8usize..200) {
        let (_, t) = table_from_seed(seed, 0.1);
        let table = t.load();
        let Ok(chunks) = pack_chunks(&table, budget, &CharHeuristic) else {
            // only acceptable when some single row cannot fit
            let too_big = (0..table.row_count()).any(|i| {
                count_tokens(&table.rows_to_csv_text(&[i]), &CharHeuristic) > budget
            });
            prop_assert!(too_big);
            return Ok(());
        };
        let mut next = 0;
        for chunk in &chunks {
            prop_assert_eq!(chunk.rows.start, next);
            prop_assert!(!chunk.rows.is_empty());
            let tokens = count_tokens(&chunk.csv_text(&table), &CharHeuristic);
            prop_assert_eq!(tokens, chunk.token_count);
            prop_assert!(tokens <= budget);
            next = chunk.rows.end;
        }
        prop_assert_eq!(next, table.row_count());
    }

    #[test]
    fn exact_summaries_survive_rendering(seed: u64) {
        let (_, t) = table_from_seed(seed, 0.2);
        let table = t.load();
        let summary = oracle_summarize(&table, 0..table.row_count());
        let text = summary.render_csv(MeanPrecision::Exact);
        let parsed = parse_pattern_table(&text, "label", &table.labels()).unwrap();
        prop_assert_eq!(parsed, summary);
    }

    #[test]
    fn predictions_ignore_positive_affine_rescaling(
        seed: u64,
        scale_exp in -3i32..4,
        shift in -5i32..6,
    ) {
        let (_, t) = table_from_seed(seed, 0.0);
        let scale = 2f64.powi(scale_exp);
        let transform = |text: &str| match parse_decimal(text) {
            Some(v) => format!("{:?}", v * scale + shift as f64),
            None => text.to_string(),
        };
        let mut csv = t.names.iter().map(|n| format!("\"{n}\"")).collect::<Vec<_>>().join(",") + "\n";
        for row in &t.rows {
            let cells: Vec<String> = row
                .iter()
                .zip(&t.numeric)
                .map(|(cell, &numeric)| if numeric { transform(cell) } else { cell.clone() })
                .collect();
            csv.push_str(&(cells.join(",") + "\n"));
        }
        let original = t.load();
        let moved = load_csv(csv.as_bytes(), "label").unwrap();
        let before = oracle_summarize(&original, 0..original.row_count());
        let after = oracle_summarize(&moved, 0..moved.row_count());
        for i in 0..original.row_count() {
            let row = TestRow::from_texts(original.schema(), t.rows[i].clone(), (i, i));
            // skip near-ties, whose order may flip under rounding
            let mut d: Vec<f64> = centroid_distances(&before, original.schema(), &row)
                .into_iter()
                .filter_map(|(_, d)| d)
                .collect();
            d.sort_by(f64::total_cmp);
            if d.len() >= 2 && (d[1] - d[0]).abs() < 1e-9 {
                continue;
            }
            let moved_row = TestRow::from_texts(moved.schema(), moved.row(i).iter().map(|c| c.text.clone()).collect(), (i, i));
            let a = oracle_predict(&before, original.schema(), &row, &original, &[]).unwrap();
            let b = oracle_predict(&after, moved.schema(), &moved_row, &moved, &[]).unwrap();
            prop_assert_eq!(a.label, b.label);
        }
    }

    #[test]
    fn synthesized_rows_average_two_rows_of_their_class(
        counts in prop::collection::vec(1usize..40, 1..5),
        seed: u64,
        cap in 1usize..15,
    ) {
        let table = class_count_table(&counts);
        let config = RunConfig { rng_seed: seed, per_class_cap: cap, ..RunConfig::default() };
        let rows = synthesize_test_set(&table, &config).unwrap();
        let mut at = 0;
        for (class, &n) in counts.iter().enumerate() {
            let want = desired_test_rows(n, config.test_fraction, cap);
            prop_assert!(want >= 1 && want <= cap);
            let label = format!("c{class}");
            for row in &rows[at..at + want] {
                prop_assert_eq!(&row.label, &label);
                let (a, b) = row.sources;
                prop_assert_eq!(table.label(a), label.as_str());
                prop_assert_eq!(table.label(b), label.as_str());
                let mean = (parse_decimal(&table.cell(a, 0).text).unwrap() + parse_decimal(&table.cell(b, 0).text).unwrap()) / 2.0;
                prop_assert!((row.number(0).unwrap() - mean).abs() < 1e-9);
            }
            at += want;
        }
        prop_assert_eq!(at, rows.len());
    }

    #[test]
    fn accuracy_percent_rounds_half_up(total in 1usize..500, frac in 0.0f64..=1.0) {
        let correct = ((total as f64) * frac).floor() as usize;
        let acc = Accuracy { correct, total };
        let p = 100 * correct;
        let expected = p / total + usize::from(2 * (p % total) >= total);
        prop_assert_eq!(acc.percent() as usize, expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn saved_runs_load_back(seed in 0u64..1000) {
        let (_, t) = table_from_seed(seed, 0.1);
        let table = t.load();
        let config = RunConfig { rng_seed: seed, ..RunConfig::default() };
        let report = run(&table, "random", &lmldap::backend::OracleBackend::default(), &config).unwrap();
        prop_assert_eq!(compute_accuracy(&report.records), report.accuracy);
        let dir = tempfile::tempdir().unwrap();
        persist_report(&report, dir.path(), "r").unwrap();
        prop_assert_eq!(load_report(dir.path(), "r").unwrap(), report);
    }
}
