//! Settings resolution: command-line flags, then `LMLDAP_*` environment
//! variables, then a flat TOML file, then built-in defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use super::CliError;
use crate::backend::http::{API_KEY_ENV, BASE_URL_ENV};
use crate::pipeline::RunConfig;

pub const DEFAULT_MODEL: &str = "gpt-4o";
pub const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    /// Deterministic, offline.
    Oracle,
    /// An OpenAI-compatible chat-completions endpoint.
    Http,
}

/// Flags shared by every subcommand. Each may also come from the
/// environment or the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Training CSV.
    #[arg(long, env = "LMLDAP_DATA")]
    pub data: Option<PathBuf>,
    /// Label column; defaults to the last CSV column.
    #[arg(long, env = "LMLDAP_LABEL")]
    pub label: Option<String>,
    #[arg(long, value_enum, env = "LMLDAP_BACKEND")]
    pub backend: Option<BackendKind>,
    #[arg(long, env = "LMLDAP_MODEL")]
    pub model: Option<String>,
    /// Root or full chat-completions URL for the http backend.
    #[arg(long, env = BASE_URL_ENV)]
    pub base_url: Option<String>,
    #[arg(long, env = "LMLDAP_SEED")]
    pub seed: Option<u64>,
    #[arg(long, env = "LMLDAP_CHUNK_BUDGET")]
    pub chunk_budget: Option<usize>,
    /// Defaults to twice the chunk budget.
    #[arg(long, env = "LMLDAP_RESULT_BUDGET")]
    pub result_budget: Option<usize>,
    #[arg(long, env = "LMLDAP_QUERY_MAX_CHARS")]
    pub query_max_chars: Option<usize>,
    #[arg(long, env = "LMLDAP_TEST_FRACTION")]
    pub test_fraction: Option<f64>,
    #[arg(long, env = "LMLDAP_PER_CLASS_CAP")]
    pub per_class_cap: Option<usize>,
    #[arg(long, env = "LMLDAP_PARALLELISM")]
    pub parallelism: Option<usize>,
    /// Directory for output files.
    #[arg(long, env = "LMLDAP_OUT")]
    pub out: Option<PathBuf>,
    /// Directory whose `<step>.txt` files replace the built-in prompts.
    #[arg(long, env = "LMLDAP_PROMPTS_DIR")]
    pub prompts_dir: Option<PathBuf>,
    /// Flat TOML file whose keys are the long flag names.
    #[arg(long, env = "LMLDAP_CONFIG")]
    pub config: Option<PathBuf>,
    /// Keep human-readable tables off stderr.
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    data: Option<PathBuf>,
    label: Option<String>,
    backend: Option<BackendKind>,
    model: Option<String>,
    base_url: Option<String>,
    seed: Option<u64>,
    chunk_budget: Option<usize>,
    result_budget: Option<usize>,
    query_max_chars: Option<usize>,
    test_fraction: Option<f64>,
    per_class_cap: Option<usize>,
    parallelism: Option<usize>,
    out: Option<PathBuf>,
    prompts_dir: Option<PathBuf>,
    quiet: Option<bool>,
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let config: FileConfig = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    // relative paths in the file are relative to the file
    let base = path.parent().unwrap_or(Path::new(""));
    let rebase = |p: Option<PathBuf>| p.map(|p| if p.is_relative() { base.join(p) } else { p });
    Ok(FileConfig {
        data: rebase(config.data),
        out: rebase(config.out),
        prompts_dir: rebase(config.prompts_dir),
        ..config
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub data: PathBuf,
    pub label: Option<String>,
    pub backend: BackendKind,
    pub model: String,
    pub base_url: String,
    pub out: Option<PathBuf>,
    pub prompts_dir: Option<PathBuf>,
    pub quiet: bool,
    pub run: RunConfig,
}

impl Settings {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => read_file_config(path)?,
            None => FileConfig::default(),
        };
        let defaults = RunConfig::default();
        let chunk_budget = args.chunk_budget.or(file.chunk_budget).unwrap_or(defaults.chunk_budget);
        let run = RunConfig {
            chunk_budget,
            result_budget: args.result_budget.or(file.result_budget).unwrap_or(2 * chunk_budget),
            query_max_chars: args
                .query_max_chars
                .or(file.query_max_chars)
                .unwrap_or(defaults.query_max_chars),
            test_fraction: args
                .test_fraction
                .or(file.test_fraction)
                .unwrap_or(defaults.test_fraction),
            per_class_cap: args
                .per_class_cap
                .or(file.per_class_cap)
                .unwrap_or(defaults.per_class_cap),
            rng_seed: args.seed.or(file.seed).unwrap_or(defaults.rng_seed),
            parallelism: args.parallelism.or(file.parallelism).unwrap_or(defaults.parallelism),
            ..defaults
        };
        run.validate().map_err(CliError::Config)?;
        let data = args
            .data
            .clone()
            .or(file.data)
            .ok_or_else(|| CliError::Config("no training data: pass --data or set LMLDAP_DATA".into()))?;
        Ok(Self {
            data,
            label: args.label.clone().or(file.label),
            backend: args.backend.or(file.backend).unwrap_or(BackendKind::Oracle),
            model: args
                .model
                .clone()
                .or(file.model)
                .unwrap_or_else(|| DEFAULT_MODEL.into()),
            base_url: args
                .base_url
                .clone()
                .or(file.base_url)
                .unwrap_or_else(|| DEFAULT_BASE_URL.into()),
            out: args.out.clone().or(file.out),
            prompts_dir: args.prompts_dir.clone().or(file.prompts_dir),
            quiet: args.quiet || file.quiet.unwrap_or(false),
            run,
        })
    }

    /// The API key for the http backend, which is only read from the environment.
    pub fn api_key() -> Result<String, CliError> {
        match std::env::var(API_KEY_ENV) {
            Ok(key) if !key.trim().is_empty() => Ok(key),
            _ => Err(CliError::Config(format!(
                "the http backend needs an API key in {API_KEY_ENV}"
            ))),
        }
    }
}
