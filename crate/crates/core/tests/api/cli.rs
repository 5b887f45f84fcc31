use std::path::Path;
use std::process::{Command, Output};

use lmldap::eval::load_report;

use crate::common::manifest_path;

fn lmldap(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lmldap"));
    for (key, _) in std::env::vars() {
        if key.starts_with("LMLDAP_") {
            cmd.env_remove(key);
        }
    }
    cmd.args(args).envs(env.iter().copied()).output().unwrap()
}

fn iris() -> String {
    manifest_path("data/iris.csv").display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_prints_accuracy_and_tables() {
    let o = lmldap(&["run", "--data", &iris()], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "accuracy: 100%\n");
    assert!(stderr(&o).contains("truth \\ predicted"));

    let quiet = lmldap(&["run", "--data", &iris(), "--quiet"], &[]);
    assert_eq!(stdout(&quiet), "accuracy: 100%\n");
    assert!(stderr(&quiet).is_empty(), "{}", stderr(&quiet));
}

#[test]
fn label_defaults_to_last_column() {
    let explicit = lmldap(&["summarize", "--data", &iris(), "--label", "species"], &[]);
    let implicit = lmldap(&["summarize", "--data", &iris()], &[]);
    assert_eq!(stdout(&explicit), stdout(&implicit));
    assert!(stdout(&implicit).starts_with("Label (species),sepal_length,"));
    assert!(stdout(&implicit).contains("Iris-setosa,4.3-5.8 (avg: 5.01),2.3-4.4 (avg: 3.42)"));
}

#[test]
fn summarize_then_predict_from_the_saved_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let o = lmldap(&["summarize", "--data", &iris(), "--out", &out, "--quiet"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = dir.path().join("iris.summary.csv");
    assert!(summary.exists());

    let row = "sepal_length=6.9,sepal_width=3.1,petal_length=5.6,petal_width=2.2";
    let fresh = lmldap(&["predict", "--data", &iris(), "--row", row], &[]);
    let saved = lmldap(
        &[
            "predict",
            "--data",
            &iris(),
            "--row",
            row,
            "--summary",
            &summary.display().to_string(),
        ],
        &[],
    );
    assert_eq!(stdout(&fresh), "prediction: Iris-virginica\n", "{}", stderr(&fresh));
    assert_eq!(stdout(&saved), stdout(&fresh));
    assert!(stderr(&fresh).contains("reason: nearest centroid Iris-virginica"));
}

#[test]
fn predict_from_a_row_file() {
    let dir = tempfile::tempdir().unwrap();
    let rows = dir.path().join("rows.csv");
    std::fs::write(&rows, "petal_width,petal_length,species\n0.2,1.4,\n1.3,4.1,\n").unwrap();
    let o = lmldap(
        &[
            "predict",
            "--data",
            &iris(),
            "--row-file",
            &rows.display().to_string(),
            "-q",
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "prediction: Iris-setosa\nprediction: Iris-versicolor\n");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let ragged = dir.path().join("ragged.csv");
    std::fs::write(&ragged, "a,b,label\n1,2,x\n3,y\n").unwrap();
    let bad_config = dir.path().join("bad.toml");
    std::fs::write(&bad_config, "no-such-key = 1\n").unwrap();

    let code = |args: &[&str], env: &[(&str, &str)]| lmldap(args, env).status.code();
    assert_eq!(code(&["run"], &[]), Some(2), "no data");
    assert_eq!(code(&["run", "--data", &iris(), "--label", "colour"], &[]), Some(2));
    assert_eq!(code(&["run", "--data", &iris(), "--per-class-cap", "0"], &[]), Some(2));
    assert_eq!(
        code(
            &["run", "--data", &iris(), "--config", &bad_config.display().to_string()],
            &[]
        ),
        Some(2)
    );
    assert_eq!(code(&["run", "--data", &iris(), "--backend", "http"], &[]), Some(2));
    assert_eq!(code(&["run", "--bogus-flag"], &[]), Some(2));
    assert_eq!(
        code(&["summarize", "--data", &empty.display().to_string()], &[]),
        Some(3)
    );
    assert_eq!(
        code(&["summarize", "--data", &iris(), "--chunk-budget", "3"], &[]),
        Some(3)
    );
    assert_eq!(code(&["run", "--data", "/nonexistent/iris.csv"], &[]), Some(4));
    assert_eq!(code(&["run", "--data", &ragged.display().to_string()], &[]), Some(4));
    assert_eq!(code(&["predict", "--data", &iris(), "--row", "petals=3"], &[]), Some(2));

    let http = lmldap(&["run", "--data", &iris(), "--backend", "http"], &[]);
    assert!(stderr(&http).contains("LMLDAP_API_KEY"));
}

fn cap_used(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> usize {
    let out = dir.display().to_string();
    let mut all = vec!["run", "--quiet", "--out", &out];
    all.extend_from_slice(args);
    let o = lmldap(&all, env);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = load_report(dir, "iris-seed42").unwrap();
    assert_eq!(report.records.len(), 3 * report.config.per_class_cap);
    report.config.per_class_cap
}

#[test]
fn flags_beat_environment_beat_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("lmldap.toml");
    std::fs::write(
        &config,
        format!("data = {:?}\nper-class-cap = 4\nchunk-budget = 2000\n", iris()),
    )
    .unwrap();
    let config = config.display().to_string();
    let env = [("LMLDAP_PER_CLASS_CAP", "3")];

    assert_eq!(
        cap_used(dir.path(), &["--config", &config, "--per-class-cap", "2"], &env),
        2
    );
    assert_eq!(cap_used(dir.path(), &["--config", &config], &env), 3);
    assert_eq!(cap_used(dir.path(), &["--config", &config], &[]), 4);
    assert_eq!(cap_used(dir.path(), &["--data", &iris()], &[]), 10);

    // the config file is also found through the environment
    assert_eq!(cap_used(dir.path(), &[], &[("LMLDAP_CONFIG", &config)]), 4);
    let report = load_report(dir.path(), "iris-seed42").unwrap();
    assert_eq!(report.config.chunk_budget, 2000);
    assert_eq!(report.config.result_budget, 4000);
}

#[test]
fn relative_paths_in_config_resolve_against_the_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(manifest_path("data/iris.csv"), dir.path().join("flowers.csv")).unwrap();
    let config = dir.path().join("c.toml");
    std::fs::write(&config, "data = \"flowers.csv\"\nlabel = \"species\"\n").unwrap();
    let o = lmldap(&["summarize", "--config", &config.display().to_string()], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("Iris-virginica"));
}
