//! Reading scenarios, lexicons and run logs from disk, plus the files that
//! ship with the crate.

use std::fs;
use std::path::{Path, PathBuf};

use gridsoc_core::agent::{Lexicon, LexiconError};
use gridsoc_core::engine::runlog::{LogLine, RunLog};
use gridsoc_core::session::{Scenario, ScenarioError};
use serde::de::DeserializeOwned;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: at `{at}`: {message}")]
    Json { path: PathBuf, at: String, message: String },
    #[error("{path}: {source}")]
    Scenario { path: PathBuf, source: ScenarioError },
    #[error("{path}: {source}")]
    Lexicon { path: PathBuf, source: LexiconError },
    #[error("{path}, line {line}: {message}")]
    LogLine { path: PathBuf, line: usize, message: String },
    #[error("no shipped scenario named `{0}`")]
    UnknownShipped(String),
}

pub const SAMPLE_LEXICON: &str = include_str!("../assets/vad_sample.tsv");

/// Scenario files bundled with the crate, by name.
pub const SHIPPED: [(&str, &str); 4] = [
    ("study1_low", include_str!("../assets/scenarios/study1_low.json")),
    ("study1_high", include_str!("../assets/scenarios/study1_high.json")),
    ("study2_incinerator", include_str!("../assets/scenarios/study2_incinerator.json")),
    ("study3_cafe", include_str!("../assets/scenarios/study3_cafe.json")),
];

fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.into(), source })
}

/// Deserializes JSON, reporting the field path of the first error.
pub fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T, LoadError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| LoadError::Json {
        path: path.into(),
        at: e.path().to_string(),
        message: e.into_inner().to_string(),
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, LoadError> {
    parse_json(path, &read(path)?)
}

/// Parses and validates a scenario document.
pub fn parse_scenario(path: &Path, text: &str) -> Result<Scenario, LoadError> {
    let s: Scenario = parse_json(path, text)?;
    s.check().map_err(|source| LoadError::Scenario { path: path.into(), source })?;
    Ok(s)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, LoadError> {
    parse_scenario(path, &read(path)?)
}

pub fn shipped_scenario(name: &str) -> Result<Scenario, LoadError> {
    let (_, text) = SHIPPED.iter().find(|(n, _)| *n == name).ok_or_else(|| LoadError::UnknownShipped(name.into()))?;
    parse_scenario(Path::new(name), text)
}

pub fn sample_lexicon() -> Lexicon {
    Lexicon::from_tsv(SAMPLE_LEXICON).expect("bundled lexicon parses")
}

pub fn load_lexicon(path: &Path) -> Result<Lexicon, LoadError> {
    Lexicon::from_tsv(&read(path)?).map_err(|source| LoadError::Lexicon { path: path.into(), source })
}

/// Reads a JSON-lines run log. The hash chain is not checked here.
pub fn load_runlog(path: &Path) -> Result<RunLog, LoadError> {
    let text = read(path)?;
    let mut lines = Vec::new();
    for (i, l) in text.lines().enumerate() {
        if l.trim().is_empty() {
            continue;
        }
        let line: LogLine = serde_json::from_str(l)
            .map_err(|e| LoadError::LogLine { path: path.into(), line: i + 1, message: e.to_string() })?;
        lines.push(line);
    }
    Ok(RunLog::from_lines(lines))
}

/// One JSON object per line, in log order.
pub fn runlog_jsonl(log: &RunLog) -> String {
    let mut out = String::new();
    for l in log.lines() {
        out.push_str(&serde_json::to_string(l).expect("log lines serialize"));
        out.push('\n');
    }
    out
}

pub fn write_runlog(path: &Path, log: &RunLog) -> Result<(), LoadError> {
    fs::write(path, runlog_jsonl(log)).map_err(|source| LoadError::Io { path: path.into(), source })
}
