use lmldap::backend::OracleBackend;
use lmldap::eval::RunReport;
use lmldap::eval::{header_path, load_report, persist_report, records_path, StoreError};
use lmldap::pipeline::{run, RunConfig};

use crate::common::iris;

fn saved_run() -> (tempfile::TempDir, RunReport) {
    let report = run(&iris(), "iris", &OracleBackend::default(), &RunConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    persist_report(&report, dir.path(), "iris-seed42").unwrap();
    (dir, report)
}

#[test]
fn a_saved_run_loads_back_unchanged() {
    let (dir, report) = saved_run();
    assert_eq!(load_report(dir.path(), "iris-seed42").unwrap(), report);
    let records = std::fs::read_to_string(records_path(dir.path(), "iris-seed42")).unwrap();
    assert_eq!(records.lines().count(), 30);
}

#[test]
fn other_schema_versions_are_refused() {
    let (dir, _) = saved_run();
    let path = header_path(dir.path(), "iris-seed42");
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, text.replace("\"schema_version\": 1", "\"schema_version\": 2")).unwrap();
    let err = load_report(dir.path(), "iris-seed42").unwrap_err();
    assert!(
        matches!(err, StoreError::SchemaVersionMismatch { found: 2, .. }),
        "{err}"
    );
}

#[test]
fn a_corrupt_record_is_reported_with_its_line() {
    let (dir, _) = saved_run();
    let path = records_path(dir.path(), "iris-seed42");
    let mut lines: Vec<String> = std::fs::read_to_string(&path)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    lines[6] = lines[6][..20].to_string();
    std::fs::write(&path, lines.join("\n")).unwrap();
    match load_report(dir.path(), "iris-seed42").unwrap_err() {
        StoreError::Parse { line, path: p, .. } => {
            assert_eq!(line, 7);
            assert_eq!(p, path);
        }
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn missing_records_are_detected() {
    let (dir, _) = saved_run();
    let path = records_path(dir.path(), "iris-seed42");
    let text = std::fs::read_to_string(&path).unwrap();
    let kept: Vec<&str> = text.lines().take(29).collect();
    std::fs::write(&path, kept.join("\n")).unwrap();
    let err = load_report(dir.path(), "iris-seed42").unwrap_err();
    assert!(
        matches!(
            err,
            StoreError::RecordCount {
                expected: 30,
                found: 29,
                ..
            }
        ),
        "{err}"
    );
}

#[test]
fn a_missing_run_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        load_report(dir.path(), "nothing").unwrap_err(),
        StoreError::Io { .. }
    ));
}
