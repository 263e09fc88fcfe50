//! Run configuration files and statement files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::challenges::Challenge1Config;
use crate::dsl::EvalContext;
use crate::gestalt::GestaltConfig;
use crate::model::UniverseConfig;
use crate::render::RenderStyle;
use crate::sampler::SamplerConfig;
use crate::splits::SplitConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid config {path}: {message}")]
    Invalid { path: String, message: String },
    #[error("statement file {path}: {message}")]
    StatementFile { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateConfig {
    pub n_true: usize,
    pub n_false: usize,
    pub n_cf: usize,
    pub max_edits: usize,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self { n_true: 100, n_false: 100, n_cf: 20, max_edits: 1 }
    }
}

/// Everything a run depends on. `universe.seed` is the run seed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub generate: GenerateConfig,
    pub universe: UniverseConfig,
    pub gestalt: GestaltConfig,
    pub sampler: SamplerConfig,
    pub challenge1: Challenge1Config,
    pub split: SplitConfig,
    pub render: RenderStyle,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_toml(&text).map_err(|message| ConfigError::Invalid { path: path.display().to_string(), message })
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config is always representable as TOML")
    }

    pub fn eval_context(&self, universe: &UniverseConfig) -> EvalContext {
        EvalContext { small_big_threshold: universe.small_big_threshold, gestalt: self.gestalt.clone() }
    }
}

/// One statement from a statement file, with the line it starts on.
#[derive(Debug, Clone, PartialEq)]
pub struct StatementEntry {
    pub id: String,
    pub text: String,
    pub line: usize,
}

fn entry_header(line: &str) -> Option<(&str, &str)> {
    let (name, rest) = line.split_once(':')?;
    let name_ok = !name.is_empty()
        && name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    name_ok.then_some((name, rest))
}

/// Parses a statement file.
///
/// A file is either one statement (id `default_id`) or a list of entries
/// `name: statement` where indented lines continue the previous entry.
/// `#` starts a comment line.
pub fn parse_statement_file(text: &str, default_id: &str) -> Vec<StatementEntry> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim_start().starts_with('#') && !l.trim().is_empty())
        .collect();
    let named = lines
        .first()
        .is_some_and(|(_, l)| !l.starts_with(char::is_whitespace) && entry_header(l).is_some());
    if !named {
        let text = lines.iter().map(|(_, l)| l.trim()).collect::<Vec<_>>().join(" ");
        let line = lines.first().map_or(1, |(n, _)| *n);
        return if text.is_empty() { Vec::new() } else { vec![StatementEntry { id: default_id.into(), text, line }] };
    }
    let mut out: Vec<StatementEntry> = Vec::new();
    for (n, l) in lines {
        match (l.starts_with(char::is_whitespace), entry_header(l), out.last_mut()) {
            (false, Some((name, rest)), _) => {
                out.push(StatementEntry { id: name.to_string(), text: rest.trim().to_string(), line: n })
            }
            (_, _, Some(last)) => {
                last.text.push(' ');
                last.text.push_str(l.trim());
            }
            (_, _, None) => {}
        }
    }
    out
}

/// Reads a statement file and picks one entry: the one named `id`, or the
/// only one when no id is given.
pub fn load_statement(path: &Path, id: Option<&str>) -> Result<StatementEntry, ConfigError> {
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| ConfigError::Io { path: shown.clone(), message: e.to_string() })?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("statement");
    let entries = parse_statement_file(&text, id.unwrap_or(stem));
    let err = |message: String| ConfigError::StatementFile { path: shown.clone(), message };
    match (id, entries.len()) {
        (_, 0) => Err(err("no statement found".into())),
        (None, 1) => Ok(entries.into_iter().next().expect("one entry")),
        (None, n) => Err(err(format!("{n} statements found; choose one with --statement-id"))),
        (Some(want), _) => {
            let names: Vec<String> = entries.iter().map(|e| e.id.clone()).collect();
            entries
                .into_iter()
                .find(|e| e.id == want)
                .ok_or_else(|| err(format!("no statement named `{want}` (have {})", names.join(", "))))
        }
    }
}
