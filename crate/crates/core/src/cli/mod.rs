//! The `lmldap` command: `run`, `summarize` and `predict`.

mod config;

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::{BackendKind, CommonArgs, Settings, DEFAULT_BASE_URL, DEFAULT_MODEL};

use crate::backend::{
    ChatClient, EndpointConfig, HttpTransport, OracleBackend, PromptedBackend, RetryPolicy, StepBackend,
};
use crate::eval::{persist_report, StoreError};
use crate::pipeline::prompts::PromptSet;
use crate::pipeline::summary::parse_pattern_table;
use crate::pipeline::{
    predict_row, retrieve_rows, run, summarize_dataset, MeanPrecision, PatternSummary, PipelineError, TestRow,
};
use crate::table::{load_csv, Table, TableError};

#[derive(Debug, Parser)]
#[command(name = "lmldap", version, about = "Classify tabular data with a language model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a test set, summarize, classify and score.
    Run(CommonArgs),
    /// Print the per-label pattern table of the training data.
    Summarize(CommonArgs),
    /// Classify given rows against the training data.
    Predict(PredictArgs),
}

#[derive(Debug, clap::Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// One row as `column=value,column=value`.
    #[arg(long, conflicts_with = "row_file", required_unless_present = "row_file")]
    pub row: Option<String>,
    /// CSV of rows with a header; the label column may be present.
    #[arg(long)]
    pub row_file: Option<std::path::PathBuf>,
    /// A pattern table written by `summarize`; skips summarization.
    #[arg(long)]
    pub summary: Option<std::path::PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl CliError {
    /// 2 for configuration problems, 3 when the pipeline fails (an empty
    /// training file included), 4 for unreadable or unwritable files.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) | CliError::Store(_) => 4,
            CliError::Pipeline(PipelineError::Config(_) | PipelineError::Table(TableError::MissingLabelColumn(_))) => 2,
            CliError::Pipeline(PipelineError::Table(
                TableError::RaggedRow { .. } | TableError::Csv(_) | TableError::DuplicateColumn(_),
            )) => 4,
            CliError::Pipeline(_) => 3,
        }
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = match &cli.command {
        Command::Run(c) | Command::Summarize(c) => c.quiet,
        Command::Predict(p) => p.common.quiet,
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if quiet { "error" } else { "warn" }))
        .init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => cmd_run(&Settings::resolve(&args)?),
        Command::Summarize(args) => cmd_summarize(&Settings::resolve(&args)?),
        Command::Predict(args) => cmd_predict(&Settings::resolve(&args.common)?, &args),
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Loads the training table; without an explicit label the last column is used.
pub fn load_table(settings: &Settings) -> Result<Table, CliError> {
    let path = &settings.data;
    let open = || File::open(path).map(BufReader::new).map_err(|e| io_error(path, e));
    let label = match &settings.label {
        Some(label) => label.clone(),
        None => {
            let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(open()?);
            let mut header = csv::StringRecord::new();
            match reader.read_record(&mut header) {
                Ok(true) => header.iter().next_back().unwrap_or_default().trim().to_string(),
                Ok(false) => return Err(PipelineError::Table(TableError::EmptyInput).into()),
                Err(e) => return Err(io_error(path, e)),
            }
        }
    };
    Ok(load_csv(open()?, &label).map_err(PipelineError::from)?)
}

pub fn build_backend(settings: &Settings) -> Result<Box<dyn StepBackend>, CliError> {
    match settings.backend {
        BackendKind::Oracle => Ok(Box::new(OracleBackend {
            query_max_chars: settings.run.query_max_chars,
        })),
        BackendKind::Http => {
            let key = Settings::api_key()?;
            let transport = HttpTransport::new(EndpointConfig::new(&settings.base_url, key))
                .map_err(|e| CliError::Config(e.to_string()))?;
            let client = ChatClient::new(Box::new(transport), RetryPolicy::default(), settings.run.parallelism);
            let prompts = match &settings.prompts_dir {
                Some(dir) => PromptSet::with_overrides(dir).map_err(|e| io_error(dir, e))?,
                None => PromptSet::default(),
            };
            Ok(Box::new(
                PromptedBackend::new(Arc::new(client), &settings.model).with_prompts(prompts),
            ))
        }
    }
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned())
}

fn cmd_run(settings: &Settings) -> Result<(), CliError> {
    let table = load_table(settings)?;
    let backend = build_backend(settings)?;
    let dataset = dataset_name(&settings.data);
    let started = Instant::now();
    let report = run(&table, &dataset, backend.as_ref(), &settings.run)?;
    if !settings.quiet {
        let mut err = std::io::stderr().lock();
        let _ = writeln!(
            err,
            "{:>4}  {:<20} {:<20} {:>8}  query",
            "row", "truth", "predicted", "attempts"
        );
        for r in &report.records {
            let _ = writeln!(
                err,
                "{:>4}  {:<20} {:<20} {:>8}  {}",
                r.test_index, r.truth, r.predicted_label, r.retrieval_attempts, r.generated_query
            );
        }
        let _ = writeln!(err, "\n{}", report.confusion);
        let _ = writeln!(err, "{} rows in {:.1?}", report.records.len(), started.elapsed());
    }
    if let Some(dir) = &settings.out {
        let run_name = format!("{dataset}-seed{}", settings.run.rng_seed);
        let (header, records) = persist_report(&report, dir, &run_name)?;
        log::info!("wrote {} and {}", header.display(), records.display());
        if !settings.quiet {
            eprintln!("wrote {} and {}", header.display(), records.display());
        }
    }
    println!("accuracy: {}%", report.accuracy.percent());
    Ok(())
}

fn cmd_summarize(settings: &Settings) -> Result<(), CliError> {
    let table = load_table(settings)?;
    let backend = build_backend(settings)?;
    let summary = summarize_dataset(&table, backend.as_ref(), &settings.run)?;
    print!("{}", summary.render_csv(MeanPrecision::TwoDecimals));
    if let Some(dir) = &settings.out {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        let path = dir.join(format!("{}.summary.csv", dataset_name(&settings.data)));
        std::fs::write(&path, summary.render_csv(MeanPrecision::Exact)).map_err(|e| io_error(&path, e))?;
        if !settings.quiet {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

/// Parses `column=value,column=value` into a schema-aligned row.
pub fn parse_row_spec(spec: &str, table: &Table) -> Result<TestRow, CliError> {
    let schema = table.schema();
    let mut texts = vec![String::new(); schema.len()];
    for pair in spec.split(',').filter(|p| !p.trim().is_empty()) {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("`{pair}` is not column=value")))?;
        let index = schema
            .index_of(key.trim())
            .ok_or_else(|| CliError::Config(format!("unknown column `{}`", key.trim())))?;
        texts[index] = value.trim().to_string();
    }
    Ok(TestRow::from_texts(schema, texts, (0, 0)))
}

fn read_row_file(path: &Path, table: &Table) -> Result<Vec<TestRow>, CliError> {
    let schema = table.schema();
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(File::open(path).map_err(|e| io_error(path, e))?);
    let header = reader.headers().map_err(|e| io_error(path, e))?.clone();
    let mut positions = Vec::new();
    for name in header.iter() {
        let index = schema
            .index_of(name.trim())
            .ok_or_else(|| CliError::Config(format!("{}: unknown column `{}`", path.display(), name.trim())))?;
        positions.push(index);
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| io_error(path, e))?;
        let mut texts = vec![String::new(); schema.len()];
        for (value, &index) in record.iter().zip(&positions) {
            texts[index] = value.trim().to_string();
        }
        rows.push(TestRow::from_texts(schema, texts, (0, 0)));
    }
    Ok(rows)
}

fn load_summary(path: &Path, table: &Table) -> Result<PatternSummary, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_pattern_table(&text, table.schema().label_column(), &table.labels())
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn cmd_predict(settings: &Settings, args: &PredictArgs) -> Result<(), CliError> {
    let table = load_table(settings)?;
    let backend = build_backend(settings)?;
    let rows = match (&args.row, &args.row_file) {
        (Some(spec), _) => vec![parse_row_spec(spec, &table)?],
        (None, Some(path)) => read_row_file(path, &table)?,
        (None, None) => return Err(CliError::Config("pass --row or --row-file".into())),
    };
    let summary = match &args.summary {
        Some(path) => load_summary(path, &table)?,
        None => summarize_dataset(&table, backend.as_ref(), &settings.run)?,
    };
    for (index, row) in rows.iter().enumerate() {
        let started = Instant::now();
        let retrieval =
            retrieve_rows(row, &summary, &table, backend.as_ref(), &settings.run).map_err(PipelineError::from)?;
        let record = predict_row(
            index,
            row,
            &retrieval,
            started.elapsed(),
            &summary,
            &table,
            backend.as_ref(),
            &settings.run,
        )?;
        println!("prediction: {}", record.predicted_label);
        if !settings.quiet {
            eprintln!("  query: {}", record.generated_query);
            eprintln!("  retrieved rows: {}", record.retrieved_row_indices.len());
            eprintln!("  reason: {}", record.reason);
        }
    }
    Ok(())
}
