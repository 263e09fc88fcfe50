//! On-disk datasets.
//!
//! ```text
//! <root>/dataset.json        statements by id and the evaluation context
//! <root>/manifest.jsonl      one DatasetRecord per line, in record order
//! <root>/edits.jsonl         edit trails of counterfactual records
//! <root>/{true,false,counterfactual}/<id>.svg
//! ```
//!
//! Every record's label is re-derived from its statement when a dataset is
//! written and when it is read; a mismatch is a hard error.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Component, Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::challenges::{validate_challenge1, ChallengeId, LatentRegion};
use crate::dsl::{EvalContext, ParseError, Statement};
use crate::model::{Figure, ObjectSpec};
use crate::render::{render_svg, RenderError, RenderStyle};
use crate::sampler::EditOp;

pub const MANIFEST: &str = "manifest.jsonl";
pub const METADATA: &str = "dataset.json";
pub const EDITS: &str = "edits.jsonl";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o failure on {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}:{line}: {message}")]
    ParseFailure { path: PathBuf, line: usize, message: String },
    #[error("label inconsistency: record `{id}` is labeled {stored} but its statement evaluates to {evaluated}")]
    LabelInconsistency { id: String, stored: Label, evaluated: bool },
    #[error("unknown statement id `{0}`")]
    UnknownStatementId(String),
    #[error("statement `{id}` does not parse: {source}")]
    BadStatement { id: String, source: ParseError },
    #[error("record `{id}` has image path `{path}`, expected a relative path inside the dataset")]
    BadImagePath { id: String, path: String },
    #[error("duplicate record id `{0}`")]
    DuplicateId(String),
    #[error(transparent)]
    Render(#[from] RenderError),
}

fn io_err(path: &Path, e: impl fmt::Display) -> DatasetError {
    DatasetError::Io { path: path.to_path_buf(), message: e.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    True,
    False,
    Counterfactual,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::True, Label::False, Label::Counterfactual];

    pub fn name(self) -> &'static str {
        match self {
            Label::True => "true",
            Label::False => "false",
            Label::Counterfactual => "counterfactual",
        }
    }

    /// Truth value the ground truth must have on a record with this label.
    pub fn expected_truth(self) -> bool {
        self == Label::True
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Challenge metadata that is not part of the figure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Latent {
    pub regions: Vec<LatentRegion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub label: Label,
    pub statement_id: String,
    pub seed: u64,
    pub objects: Vec<ObjectSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latent: Option<Latent>,
    pub image_path: String,
}

/// `{statement_id}-{label}-{index:06}`.
pub fn record_id(statement_id: &str, label: Label, index: usize) -> String {
    format!("{statement_id}-{label}-{index:06}")
}

impl DatasetRecord {
    /// A record with the conventional id and image path.
    pub fn new(statement_id: &str, label: Label, index: usize, seed: u64, figure: &Figure) -> Self {
        let id = record_id(statement_id, label, index);
        let image_path = format!("{label}/{id}.svg");
        Self { id, label, statement_id: statement_id.into(), seed, objects: figure.objects.clone(), latent: None, image_path }
    }

    pub fn with_latent(mut self, regions: Vec<LatentRegion>) -> Self {
        self.latent = Some(Latent { regions });
        self
    }

    pub fn figure(&self) -> Figure {
        Figure::new(self.objects.clone())
    }
}

/// How a counterfactual record was derived from a positive one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditTrail {
    pub id: String,
    pub source_id: String,
    pub edits: Vec<EditOp>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Metadata {
    statements: BTreeMap<String, String>,
    context: EvalContext,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    /// Statement source text by id.
    pub statements: BTreeMap<String, String>,
    pub context: EvalContext,
    pub records: Vec<DatasetRecord>,
    pub edits: Vec<EditTrail>,
}

/// Resolves statement ids to truth values on records.
pub struct LabelOracle<'a> {
    parsed: BTreeMap<&'a str, Statement>,
    context: &'a EvalContext,
}

impl<'a> LabelOracle<'a> {
    pub fn new(statements: &'a BTreeMap<String, String>, context: &'a EvalContext) -> Result<Self, DatasetError> {
        let parsed = statements
            .iter()
            .map(|(id, src)| {
                Statement::parse(src)
                    .map(|s| (id.as_str(), s))
                    .map_err(|source| DatasetError::BadStatement { id: id.clone(), source })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { parsed, context })
    }

    pub fn statement(&self, id: &str) -> Option<&Statement> {
        self.parsed.get(id)
    }

    /// Ground-truth value of the record's statement on its objects.
    pub fn truth(&self, r: &DatasetRecord) -> Result<bool, DatasetError> {
        if let Some(s) = self.parsed.get(r.statement_id.as_str()) {
            return Ok(s.evaluate(&r.figure(), self.context));
        }
        match &r.latent {
            Some(l) if r.statement_id == ChallengeId::Challenge1.name() => {
                Ok(validate_challenge1(&r.figure(), &l.regions).is_ok())
            }
            _ => Err(DatasetError::UnknownStatementId(r.statement_id.clone())),
        }
    }

    pub fn check(&self, r: &DatasetRecord) -> Result<(), DatasetError> {
        let evaluated = self.truth(r)?;
        if evaluated != r.label.expected_truth() {
            return Err(DatasetError::LabelInconsistency { id: r.id.clone(), stored: r.label, evaluated });
        }
        Ok(())
    }
}

impl Dataset {
    /// Checks every label, record ids and image paths.
    pub fn verify(&self) -> Result<(), DatasetError> {
        let oracle = LabelOracle::new(&self.statements, &self.context)?;
        let mut seen = std::collections::BTreeSet::new();
        for r in &self.records {
            if !seen.insert(r.id.as_str()) {
                return Err(DatasetError::DuplicateId(r.id.clone()));
            }
            let p = Path::new(&r.image_path);
            if r.image_path.is_empty() || !p.components().all(|c| matches!(c, Component::Normal(_))) {
                return Err(DatasetError::BadImagePath { id: r.id.clone(), path: r.image_path.clone() });
            }
        }
        self.records.par_iter().try_for_each(|r| oracle.check(r))
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), DatasetError> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

/// Writes the dataset under `out_dir`. Labels are verified before anything
/// touches the disk.
pub fn write_dataset(ds: &Dataset, out_dir: &Path, style: &RenderStyle) -> Result<(), DatasetError> {
    style.validate()?;
    ds.verify()?;
    for label in Label::ALL {
        let dir = out_dir.join(label.name());
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    }
    ds.records.par_iter().try_for_each(|r| {
        let svg = render_svg(&r.figure(), style)?;
        let path = out_dir.join(&r.image_path);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
        write_file(&path, &svg)
    })?;

    let mut manifest = String::new();
    for r in &ds.records {
        manifest.push_str(&serde_json::to_string(r).map_err(|e| io_err(Path::new(MANIFEST), e))?);
        manifest.push('\n');
    }
    write_file(&out_dir.join(MANIFEST), &manifest)?;

    let meta = Metadata { statements: ds.statements.clone(), context: ds.context.clone() };
    let mut meta_text = serde_json::to_string_pretty(&meta).map_err(|e| io_err(Path::new(METADATA), e))?;
    meta_text.push('\n');
    write_file(&out_dir.join(METADATA), &meta_text)?;

    let edits_path = out_dir.join(EDITS);
    if ds.edits.is_empty() {
        if edits_path.exists() {
            fs::remove_file(&edits_path).map_err(|e| io_err(&edits_path, e))?;
        }
    } else {
        let mut text = String::new();
        for t in &ds.edits {
            text.push_str(&serde_json::to_string(t).map_err(|e| io_err(&edits_path, e))?);
            text.push('\n');
        }
        write_file(&edits_path, &text)?;
    }
    Ok(())
}

fn read_lines<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, DatasetError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| DatasetError::ParseFailure {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(item);
    }
    Ok(out)
}

/// Inverse of [`write_dataset`]; labels are verified on load.
pub fn read_dataset(dir: &Path) -> Result<Dataset, DatasetError> {
    let meta_path = dir.join(METADATA);
    let meta_text = fs::read_to_string(&meta_path).map_err(|e| io_err(&meta_path, e))?;
    let meta: Metadata = serde_json::from_str(&meta_text).map_err(|e| DatasetError::ParseFailure {
        path: meta_path.clone(),
        line: e.line(),
        message: e.to_string(),
    })?;
    let records = read_lines(&dir.join(MANIFEST))?;
    let edits_path = dir.join(EDITS);
    let edits = if edits_path.exists() { read_lines(&edits_path)? } else { Vec::new() };
    let ds = Dataset { statements: meta.statements, context: meta.context, records, edits };
    ds.verify()?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Color, Shape};

    fn dataset() -> Dataset {
        let mut statements = BTreeMap::new();
        statements.insert("two".to_string(), "COUNT(objects) = 2".to_string());
        let a = ObjectSpec::new(Shape::Circle, Color::Red, 0.1, 0.2, 0.2);
        let b = ObjectSpec::new(Shape::Square, Color::Blue, 0.1, 0.7, 0.7);
        let c = ObjectSpec::new(Shape::Triangle, Color::Yellow, 0.1, 0.2, 0.7);
        let records = vec![
            DatasetRecord::new("two", Label::True, 0, 7, &Figure::new(vec![a, b])),
            DatasetRecord::new("two", Label::False, 0, 7, &Figure::new(vec![a])),
            DatasetRecord::new("two", Label::Counterfactual, 0, 7, &Figure::new(vec![a, b, c])),
        ];
        let edits = vec![EditTrail {
            id: records[2].id.clone(),
            source_id: records[0].id.clone(),
            edits: vec![EditOp::Add { object: c }],
        }];
        Dataset { statements, context: EvalContext::default(), records, edits }
    }

    #[test]
    fn three_labels_three_folders() {
        let dir = tempfile::tempdir().unwrap();
        let ds = dataset();
        write_dataset(&ds, dir.path(), &RenderStyle::default()).unwrap();
        for label in Label::ALL {
            let n = fs::read_dir(dir.path().join(label.name())).unwrap().count();
            assert_eq!(n, 1, "{label}");
        }
        let manifest = fs::read_to_string(dir.path().join(MANIFEST)).unwrap();
        assert_eq!(manifest.lines().count(), 3);
        assert!(manifest.starts_with(
            r#"{"id":"two-true-000000","label":"true","statement_id":"two","seed":7,"objects":[{"shape":"circle""#
        ));
        assert_eq!(read_dataset(dir.path()).unwrap(), ds);
    }

    #[test]
    fn contradicted_label_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let mut ds = dataset();
        ds.records[1].label = Label::True;
        let err = write_dataset(&ds, dir.path(), &RenderStyle::default()).unwrap_err();
        assert!(matches!(err, DatasetError::LabelInconsistency { .. }), "{err}");
        assert!(!dir.path().join(MANIFEST).exists());
    }

    #[test]
    fn tampered_manifest_fails_on_read() {
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&dataset(), dir.path(), &RenderStyle::default()).unwrap();
        let path = dir.path().join(MANIFEST);
        let text = fs::read_to_string(&path).unwrap().replacen(r#""label":"false""#, r#""label":"true""#, 1);
        fs::write(&path, text).unwrap();
        assert!(matches!(read_dataset(dir.path()), Err(DatasetError::LabelInconsistency { .. })));
        let broken = fs::read_to_string(&path).unwrap().replacen("}\n", "\n", 2);
        fs::write(&path, broken).unwrap();
        match read_dataset(dir.path()) {
            Err(DatasetError::ParseFailure { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_statement_id() {
        let mut ds = dataset();
        ds.records[0].statement_id = "missing".into();
        assert!(matches!(ds.verify(), Err(DatasetError::UnknownStatementId(id)) if id == "missing"));
    }

    #[test]
    fn writing_twice_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let ds = dataset();
        write_dataset(&ds, dir.path(), &RenderStyle::default()).unwrap();
        let first = fs::read(dir.path().join(MANIFEST)).unwrap();
        write_dataset(&ds, dir.path(), &RenderStyle::default()).unwrap();
        assert_eq!(first, fs::read(dir.path().join(MANIFEST)).unwrap());
    }
}
