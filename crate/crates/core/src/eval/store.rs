//! A run on disk: `<run>.header.json` with the configuration and scores,
//! and `<run>.records.jsonl` with one prediction record per line.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{compute_accuracy, Accuracy, ConfusionMatrix, PredictionRecord, RunReport};
use crate::pipeline::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: unsupported schema version {found} (expected {SCHEMA_VERSION})")]
    SchemaVersionMismatch { path: PathBuf, found: u32 },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: header announces {expected} records but {found} were read")]
    RecordCount {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
}

#[derive(Serialize, Deserialize)]
struct Header {
    schema_version: u32,
    dataset: String,
    config: RunConfig,
    summary: String,
    accuracy: Accuracy,
    confusion: ConfusionMatrix,
    created_at: DateTime<Utc>,
    record_count: usize,
}

pub fn header_path(dir: &Path, run: &str) -> PathBuf {
    dir.join(format!("{run}.header.json"))
}

pub fn records_path(dir: &Path, run: &str) -> PathBuf {
    dir.join(format!("{run}.records.jsonl"))
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes both files, creating `dir` if needed.
pub fn persist_report(report: &RunReport, dir: &Path, run: &str) -> Result<(PathBuf, PathBuf), StoreError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let header = Header {
        schema_version: SCHEMA_VERSION,
        dataset: report.dataset.clone(),
        config: report.config.clone(),
        summary: report.summary.clone(),
        accuracy: report.accuracy,
        confusion: report.confusion.clone(),
        created_at: report.created_at,
        record_count: report.records.len(),
    };
    let hpath = header_path(dir, run);
    let text = serde_json::to_string_pretty(&header).expect("header serializes");
    std::fs::write(&hpath, text + "\n").map_err(io_err(&hpath))?;

    let rpath = records_path(dir, run);
    let file = File::create(&rpath).map_err(io_err(&rpath))?;
    let mut out = BufWriter::new(file);
    for record in &report.records {
        let line = serde_json::to_string(record).expect("record serializes");
        writeln!(out, "{line}").map_err(io_err(&rpath))?;
    }
    out.flush().map_err(io_err(&rpath))?;
    Ok((hpath, rpath))
}

pub fn load_report(dir: &Path, run: &str) -> Result<RunReport, StoreError> {
    let hpath = header_path(dir, run);
    let text = std::fs::read_to_string(&hpath).map_err(io_err(&hpath))?;
    let version: serde_json::Value = serde_json::from_str(&text).map_err(|e| StoreError::Parse {
        path: hpath.clone(),
        line: e.line(),
        message: e.to_string(),
    })?;
    let found = version["schema_version"].as_u64().unwrap_or(0) as u32;
    if found != SCHEMA_VERSION {
        return Err(StoreError::SchemaVersionMismatch { path: hpath, found });
    }
    let header: Header = serde_json::from_str(&text).map_err(|e| StoreError::Parse {
        path: hpath.clone(),
        line: e.line(),
        message: e.to_string(),
    })?;

    let rpath = records_path(dir, run);
    let reader = BufReader::new(File::open(&rpath).map_err(io_err(&rpath))?);
    let mut records = Vec::with_capacity(header.record_count);
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(&rpath))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: PredictionRecord = serde_json::from_str(&line).map_err(|e| StoreError::Parse {
            path: rpath.clone(),
            line: n + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    if records.len() != header.record_count {
        return Err(StoreError::RecordCount {
            path: rpath,
            expected: header.record_count,
            found: records.len(),
        });
    }
    debug_assert_eq!(compute_accuracy(&records), header.accuracy);
    Ok(RunReport {
        dataset: header.dataset,
        config: header.config,
        summary: header.summary,
        records,
        accuracy: header.accuracy,
        confusion: header.confusion,
        created_at: header.created_at,
    })
}
