//! Command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | internal error |
//! | 2 | usage or configuration error |
//! | 3 | statement parse failure or unreadable dataset |
//! | 4 | yield too low |
//! | 5 | placement exhausted |
//! | 6 | i/o failure |
//! | 7 | label inconsistency |
//! | 8 | infeasible split |
//! | 9 | missing statement for a challenge that needs one |
//! | 10 | unknown statement id |
//! | 11 | no near miss found |
//! | 12 | invalid figure |
//!
//! Diagnostics go to stderr; machine-readable summaries go to stdout.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::challenges::{
    builtin_registry, challenge_spec, generate_challenge1, generate_challenge1_near_misses,
    generate_challenge1_negatives, ChallengeId, GroundTruth, MemberPlacement, GT, H2_PATTERN_ID,
};
use crate::config::{load_statement, ConfigError, RunConfig};
use crate::dataset::{read_dataset, record_id, write_dataset, Dataset, DatasetError, DatasetRecord, EditTrail, Label};
use crate::dsl::{ParseError, Statement};
use crate::model::{validate_figure, Color, Figure, FigureRecord, Shape, UniverseConfig};
use crate::render::render_svg;
use crate::sampler::{
    generate_near_misses, generate_negatives, generate_positives, GenerationReport, Pattern, SampleError,
};
use crate::splits::{design_split, SplitError};

pub const RUN_CONFIG_FILE: &str = "run_config.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Ok = 0,
    Internal = 1,
    Usage = 2,
    Parse = 3,
    YieldTooLow = 4,
    PlacementExhausted = 5,
    Io = 6,
    LabelInconsistency = 7,
    Infeasible = 8,
    MissingStatement = 9,
    UnknownStatementId = 10,
    NoNearMissFound = 11,
    InvalidFigure = 12,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("statement `{id}`: {source}")]
    Parse { id: String, source: ParseError },
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error("{0} needs a ground-truth statement; pass --statement")]
    MissingStatement(ChallengeId),
    #[error("unknown statement id `{0}`")]
    UnknownStatementId(String),
    #[error("i/o failure on {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid figure: {0}")]
    InvalidFigure(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::Usage,
            CliError::Config(ConfigError::Io { .. }) => ExitCode::Io,
            CliError::Config(ConfigError::Invalid { .. }) => ExitCode::Usage,
            CliError::Config(ConfigError::StatementFile { .. }) => ExitCode::Parse,
            CliError::Parse { .. } => ExitCode::Parse,
            CliError::Sample(SampleError::YieldTooLow { .. }) => ExitCode::YieldTooLow,
            CliError::Sample(SampleError::PlacementExhausted { .. }) => ExitCode::PlacementExhausted,
            CliError::Sample(SampleError::NoNearMissFound { .. }) => ExitCode::NoNearMissFound,
            CliError::Sample(SampleError::InvalidUniverse(_)) => ExitCode::Usage,
            CliError::Sample(SampleError::SourceNotPositive { .. }) => ExitCode::Internal,
            CliError::Dataset(DatasetError::Io { .. }) => ExitCode::Io,
            CliError::Dataset(DatasetError::ParseFailure { .. } | DatasetError::BadStatement { .. }) => ExitCode::Parse,
            CliError::Dataset(DatasetError::LabelInconsistency { .. }) => ExitCode::LabelInconsistency,
            CliError::Dataset(DatasetError::UnknownStatementId(_)) => ExitCode::UnknownStatementId,
            CliError::Dataset(DatasetError::Render(_)) => ExitCode::Usage,
            CliError::Dataset(DatasetError::BadImagePath { .. } | DatasetError::DuplicateId(_)) => ExitCode::Parse,
            CliError::Split(SplitError::Infeasible(_)) => ExitCode::Infeasible,
            CliError::Split(SplitError::UnknownStatementId(_)) => ExitCode::UnknownStatementId,
            CliError::Split(_) => ExitCode::Usage,
            CliError::MissingStatement(_) => ExitCode::MissingStatement,
            CliError::UnknownStatementId(_) => ExitCode::UnknownStatementId,
            CliError::Io { .. } => ExitCode::Io,
            CliError::InvalidFigure(_) => ExitCode::InvalidFigure,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io { path: path.display().to_string(), message: e.to_string() }
}

#[derive(Debug, Parser)]
#[command(name = "kandinsky", version, about = "Generate and adjudicate Kandinsky pattern datasets")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for generation and rendering (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate true, false and counterfactual figures for a statement.
    Generate(GenerateArgs),
    /// Generate a dataset for a built-in challenge.
    Challenge(ChallengeArgs),
    /// Evaluate a statement over every record of a dataset.
    Evaluate(EvaluateArgs),
    /// Design a compositional train/test split of a dataset.
    Split(SplitArgs),
    /// Render one figure to SVG.
    Render(RenderArgs),
    /// Print the resolved configuration.
    PrintConfig,
}

#[derive(Debug, Args, Clone)]
pub struct Counts {
    /// Figures for which the statement holds.
    #[arg(long)]
    pub n_true: Option<usize>,
    /// Figures for which the statement fails.
    #[arg(long)]
    pub n_false: Option<usize>,
    /// Counterfactuals: false figures a few edits away from a true one.
    #[arg(long)]
    pub n_cf: Option<usize>,
    /// Largest number of atomic edits between a counterfactual and its source.
    #[arg(long)]
    pub max_edits: Option<usize>,
    /// Run seed; same seed and configuration give byte-identical output.
    #[arg(long, env = "KANDINSKY_SEED", value_parser = clap::value_parser!(u64).range(..=i64::MAX as u64))]
    pub seed: Option<u64>,
    /// Dataset directory.
    #[arg(long, env = "KANDINSKY_OUT")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Statement file: one statement, or `name: statement` entries.
    #[arg(long)]
    pub statement: PathBuf,
    /// Entry name in a multi-entry statement file.
    #[arg(long)]
    pub statement_id: Option<String>,
    #[command(flatten)]
    pub counts: Counts,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PlacementArg {
    Interior,
    Outline,
}

#[derive(Debug, Args)]
pub struct ChallengeArgs {
    /// definitions-example, challenge-1, challenge-2 or challenge-3.
    pub id: String,
    /// Ground truth; required for challenges 2 and 3.
    #[arg(long)]
    pub statement: Option<PathBuf>,
    /// Entry name in a multi-entry statement file.
    #[arg(long)]
    pub statement_id: Option<String>,
    /// Challenge 1: where members sit on their big shape.
    #[arg(long, value_enum)]
    pub placement: Option<PlacementArg>,
    #[command(flatten)]
    pub counts: Counts,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Dataset directory written by `generate` or `challenge`.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Statement file with the hypothesis; without it `--statement-id`
    /// names a statement stored in the dataset.
    #[arg(long)]
    pub statement: Option<PathBuf>,
    /// Entry name in a multi-entry statement file.
    #[arg(long)]
    pub statement_id: Option<String>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Dataset directory written by `generate` or `challenge`.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Output directory for train.txt, test.txt and split_metrics.json
    /// (default: the dataset directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Compound divergence to reach.
    #[arg(long)]
    pub target: Option<f64>,
    /// Largest atom divergence allowed.
    #[arg(long)]
    pub max_atom_div: Option<f64>,
    /// Chernoff alpha for the atom divergence.
    #[arg(long)]
    pub alpha_atoms: Option<f64>,
    /// Chernoff alpha for the compound divergence.
    #[arg(long)]
    pub alpha_compounds: Option<f64>,
    /// Largest subtree depth counted as a compound.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Seed for search restarts.
    #[arg(long, env = "KANDINSKY_SEED", value_parser = clap::value_parser!(u64).range(..=i64::MAX as u64))]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// JSON with an `objects` array (a manifest line works too).
    #[arg(long)]
    pub figure: PathBuf,
    /// SVG file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Canvas side in pixels.
    #[arg(long)]
    pub px: Option<u32>,
}

struct Io<'a> {
    stdout: &'a mut (dyn Write + Send),
    stderr: &'a mut (dyn Write + Send),
}

impl Io<'_> {
    fn emit(&mut self, v: &serde_json::Value) {
        let _ = writeln!(self.stdout, "{}", serde_json::to_string_pretty(v).unwrap_or_default());
    }

    fn note(&mut self, msg: &str) {
        let _ = writeln!(self.stderr, "{msg}");
    }
}

/// Runs the CLI with the process's stdout and stderr; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (mut out, mut err) = (std::io::stdout(), std::io::stderr());
    run_with_io(args, &mut out, &mut err)
}

pub fn run_with_io<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { ExitCode::Usage as i32 } else { ExitCode::Ok as i32 };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return code;
        }
    };
    let mut io = Io { stdout, stderr };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &mut io)),
            Err(e) => Err(CliError::Usage(format!("cannot start {n} threads: {e}"))),
        },
        None => dispatch(&cli, &mut io),
    };
    match result {
        Ok(()) => ExitCode::Ok as i32,
        Err(e) => {
            io.note(&format!("error: {e}"));
            e.exit_code() as i32
        }
    }
}

fn dispatch(cli: &Cli, io: &mut Io<'_>) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match &cli.command {
        Command::Generate(a) => cmd_generate(cfg, a, io),
        Command::Challenge(a) => cmd_challenge(cfg, a, io),
        Command::Evaluate(a) => cmd_evaluate(a, io),
        Command::Split(a) => cmd_split(cfg, a, io),
        Command::Render(a) => cmd_render(cfg, a, io),
        Command::PrintConfig => {
            let _ = write!(io.stdout, "{}", cfg.to_toml());
            Ok(())
        }
    }
}

fn apply_counts(cfg: &mut RunConfig, c: &Counts) {
    if let Some(n) = c.n_true {
        cfg.generate.n_true = n;
    }
    if let Some(n) = c.n_false {
        cfg.generate.n_false = n;
    }
    if let Some(n) = c.n_cf {
        cfg.generate.n_cf = n;
    }
    if let Some(n) = c.max_edits {
        cfg.generate.max_edits = n;
    }
    if let Some(s) = c.seed {
        cfg.universe.seed = s;
    }
}

fn parse_in(id: &str, text: &str, u: &UniverseConfig) -> Result<Statement, CliError> {
    Statement::parse_in(text, u).map_err(|source| CliError::Parse { id: id.into(), source })
}

/// Writes the resolved configuration next to the dataset and echoes it to
/// the run log.
fn write_run_config(out: &Path, cfg: &RunConfig, run: &BTreeMap<&str, String>, io: &mut Io<'_>) -> Result<(), CliError> {
    let mut text = String::from("# resolved configuration of this run\n[run]\n");
    for (k, v) in run {
        text.push_str(&format!("{k} = {}\n", toml::Value::String(v.clone())));
    }
    text.push('\n');
    text.push_str(&cfg.to_toml());
    let path = out.join(RUN_CONFIG_FILE);
    fs::write(&path, &text).map_err(|e| io_err(&path, e))?;
    io.note(&text);
    Ok(())
}

#[derive(Serialize)]
struct Summary<'a> {
    out: String,
    records: usize,
    by_label: BTreeMap<&'static str, usize>,
    positives: Option<&'a GenerationReport>,
    negatives: Option<&'a GenerationReport>,
}

fn summarize(io: &mut Io<'_>, out: &Path, ds: &Dataset, pos: Option<&GenerationReport>, neg: Option<&GenerationReport>) {
    let mut by_label = BTreeMap::new();
    for l in Label::ALL {
        by_label.insert(l.name(), ds.records.iter().filter(|r| r.label == l).count());
    }
    let s = Summary { out: out.display().to_string(), records: ds.records.len(), by_label, positives: pos, negatives: neg };
    io.emit(&serde_json::to_value(&s).unwrap_or_default());
}

/// Positive, negative and near-miss records for one statement-defined pattern.
fn statement_dataset(
    cfg: &RunConfig,
    pattern: &Pattern,
    extra_statements: &[(String, String)],
) -> Result<(Dataset, GenerationReport, GenerationReport), CliError> {
    let g = &cfg.generate;
    if g.n_cf > 0 && g.n_true == 0 {
        return Err(CliError::Usage("--n-cf needs --n-true > 0: counterfactuals are edits of positives".into()));
    }
    let seed = cfg.universe.seed;
    let registry = builtin_registry();
    let pos = generate_positives(pattern, g.n_true, seed, &cfg.sampler, Some(&registry))?;
    let neg = generate_negatives(pattern, g.n_false, seed, &cfg.sampler, Some(&pos.figures))?;
    let cf = generate_near_misses(pattern, &pos.figures, g.n_cf, seed, &cfg.sampler, g.max_edits)?;

    let sid = pattern.id.as_str();
    let mut records = Vec::with_capacity(pos.figures.len() + neg.figures.len() + cf.len());
    records.extend(pos.figures.iter().enumerate().map(|(i, f)| DatasetRecord::new(sid, Label::True, i, seed, f)));
    records.extend(neg.figures.iter().enumerate().map(|(i, f)| DatasetRecord::new(sid, Label::False, i, seed, f)));
    let mut edits = Vec::with_capacity(cf.len());
    for (i, nm) in cf.iter().enumerate() {
        let r = DatasetRecord::new(sid, Label::Counterfactual, i, seed, &nm.figure);
        edits.push(EditTrail {
            id: r.id.clone(),
            source_id: record_id(sid, Label::True, nm.source),
            edits: nm.edits.clone(),
        });
        records.push(r);
    }
    let mut statements: BTreeMap<String, String> = extra_statements.iter().cloned().collect();
    statements.insert(sid.to_string(), pattern.statement.source().to_string());
    let ds = Dataset { statements, context: pattern.context.clone(), records, edits };
    Ok((ds, pos.report, neg.report))
}

fn cmd_generate(mut cfg: RunConfig, a: &GenerateArgs, io: &mut Io<'_>) -> Result<(), CliError> {
    apply_counts(&mut cfg, &a.counts);
    let entry = load_statement(&a.statement, a.statement_id.as_deref())?;
    let statement = parse_in(&entry.id, &entry.text, &cfg.universe)?;
    let mut pattern = Pattern::with_statement(entry.id.clone(), statement, cfg.universe.clone());
    pattern.context = cfg.eval_context(&cfg.universe);
    let (ds, pos, neg) = statement_dataset(&cfg, &pattern, &[])?;
    let out = &a.counts.out;
    write_dataset(&ds, out, &cfg.render)?;
    let run = BTreeMap::from([
        ("command", "generate".to_string()),
        ("statement_file", a.statement.display().to_string()),
        ("statement_id", entry.id.clone()),
        ("statement", entry.text.clone()),
        ("out", out.display().to_string()),
    ]);
    write_run_config(out, &cfg, &run, io)?;
    summarize(io, out, &ds, Some(&pos), Some(&neg));
    Ok(())
}

fn cmd_challenge(mut cfg: RunConfig, a: &ChallengeArgs, io: &mut Io<'_>) -> Result<(), CliError> {
    let id: ChallengeId = a.id.parse().map_err(CliError::Usage)?;
    let spec = challenge_spec(id);
    let seed = a.counts.seed.unwrap_or(cfg.universe.seed);
    cfg.universe = UniverseConfig { seed, ..spec.universe.clone() };
    apply_counts(&mut cfg, &a.counts);
    if let Some(p) = a.placement {
        cfg.challenge1.placement = match p {
            PlacementArg::Interior => MemberPlacement::Interior,
            PlacementArg::Outline => MemberPlacement::Outline,
        };
    }
    let hypotheses: Vec<(String, String)> =
        spec.hypotheses.iter().map(|(n, s)| (n.clone(), s.source().to_string())).collect();
    let mut run = BTreeMap::from([
        ("command", "challenge".to_string()),
        ("challenge", id.name().to_string()),
        ("out", a.counts.out.display().to_string()),
    ]);

    let (ds, pos, neg) = match (&spec.gt, &a.statement) {
        (GroundTruth::LatentRegions, _) => (challenge1_dataset(&cfg, &hypotheses)?, None, None),
        (GroundTruth::Statement(gt), None) => {
            let mut p = Pattern::with_statement(id.name(), gt.clone(), cfg.universe.clone());
            p.context = cfg.eval_context(&cfg.universe);
            run.insert("statement", GT.to_string());
            let (ds, pos, neg) = statement_dataset(&cfg, &p, &hypotheses)?;
            (ds, Some(pos), Some(neg))
        }
        (GroundTruth::PlugIn, None) => return Err(CliError::MissingStatement(id)),
        (_, Some(path)) => {
            let entry = load_statement(path, a.statement_id.as_deref())?;
            let s = parse_in(&entry.id, &entry.text, &cfg.universe)?;
            let mut p = Pattern::with_statement(entry.id.clone(), s, cfg.universe.clone());
            p.context = cfg.eval_context(&cfg.universe);
            run.insert("statement_file", path.display().to_string());
            run.insert("statement_id", entry.id.clone());
            run.insert("statement", entry.text.clone());
            let (ds, pos, neg) = statement_dataset(&cfg, &p, &hypotheses)?;
            (ds, Some(pos), Some(neg))
        }
    };
    let out = &a.counts.out;
    write_dataset(&ds, out, &cfg.render)?;
    write_run_config(out, &cfg, &run, io)?;
    summarize(io, out, &ds, pos.as_ref(), neg.as_ref());
    Ok(())
}

fn challenge1_dataset(cfg: &RunConfig, hypotheses: &[(String, String)]) -> Result<Dataset, CliError> {
    let g = &cfg.generate;
    let seed = cfg.universe.seed;
    let c1 = &cfg.challenge1;
    let sid = ChallengeId::Challenge1.name();
    let pos = generate_challenge1(g.n_true, seed, c1)?;
    let neg = generate_challenge1_negatives(g.n_false, seed, c1, &cfg.sampler)?;
    let cf = generate_challenge1_near_misses(&pos, g.n_cf, seed)?;
    let mut records = Vec::new();
    for (i, inst) in pos.iter().enumerate() {
        records.push(DatasetRecord::new(sid, Label::True, i, seed, &inst.figure).with_latent(inst.regions.clone()));
    }
    for (i, inst) in neg.iter().enumerate() {
        records.push(DatasetRecord::new(sid, Label::False, i, seed, &inst.figure).with_latent(inst.regions.clone()));
    }
    let mut edits = Vec::new();
    for (i, nm) in cf.iter().enumerate() {
        let r = DatasetRecord::new(sid, Label::Counterfactual, i, seed, &nm.instance.figure)
            .with_latent(nm.instance.regions.clone());
        edits.push(EditTrail { id: r.id.clone(), source_id: record_id(sid, Label::True, nm.source), edits: nm.edits.clone() });
        records.push(r);
    }
    Ok(Dataset {
        statements: hypotheses.iter().cloned().collect(),
        context: cfg.eval_context(&cfg.universe),
        records,
        edits,
    })
}

fn cmd_evaluate(a: &EvaluateArgs, io: &mut Io<'_>) -> Result<(), CliError> {
    let ds = read_dataset(&a.dataset)?;
    let (id, statement) = match (&a.statement, &a.statement_id) {
        (Some(path), id) => {
            let entry = load_statement(path, id.as_deref())?;
            let s = Statement::parse(&entry.text).map_err(|source| CliError::Parse { id: entry.id.clone(), source })?;
            (entry.id, s)
        }
        (None, Some(id)) => {
            let text = ds.statements.get(id).ok_or_else(|| CliError::UnknownStatementId(id.clone()))?;
            let s = Statement::parse(text).map_err(|source| CliError::Parse { id: id.clone(), source })?;
            (id.clone(), s)
        }
        (None, None) => return Err(CliError::Usage("evaluate needs --statement or --statement-id".into())),
    };
    let mut confusion: BTreeMap<&str, BTreeMap<&str, usize>> = BTreeMap::new();
    for l in Label::ALL {
        confusion.insert(l.name(), BTreeMap::from([("true", 0), ("false", 0)]));
    }
    let mut hypothesis_true = 0;
    for r in &ds.records {
        let v = statement.evaluate(&r.figure(), &ds.context);
        hypothesis_true += usize::from(v);
        *confusion.get_mut(r.label.name()).expect("all labels present").get_mut(if v { "true" } else { "false" }).expect("both keys") += 1;
    }
    let ground_truth_true = ds.records.iter().filter(|r| r.label == Label::True).count();
    let agreement = ds.records.iter().filter(|r| statement.evaluate(&r.figure(), &ds.context) == r.label.expected_truth()).count();
    io.emit(&json!({
        "statement_id": id,
        "statement": statement.source(),
        "records": ds.records.len(),
        "ground_truth_true": ground_truth_true,
        "hypothesis_true": hypothesis_true,
        "agreement": agreement,
        "confusion": confusion,
    }));
    Ok(())
}

fn cmd_split(mut cfg: RunConfig, a: &SplitArgs, io: &mut Io<'_>) -> Result<(), CliError> {
    let ds = read_dataset(&a.dataset)?;
    let s = &mut cfg.split;
    if let Some(v) = a.target {
        s.target_compound_div = v;
    }
    if let Some(v) = a.max_atom_div {
        s.max_atom_div = v;
    }
    if let Some(v) = a.alpha_atoms {
        s.alpha_atoms = v;
    }
    if let Some(v) = a.alpha_compounds {
        s.alpha_compounds = v;
    }
    if let Some(v) = a.depth {
        s.compounds.depth = v;
    }
    if let Some(v) = a.seed {
        s.seed = v;
    }
    s.compounds.small_big_threshold = ds.context.small_big_threshold;
    let statements: BTreeMap<String, Statement> = ds
        .statements
        .iter()
        .map(|(id, text)| {
            Statement::parse(text).map(|st| (id.clone(), st)).map_err(|source| CliError::Parse { id: id.clone(), source })
        })
        .collect::<Result<_, _>>()?;
    let result = design_split(&ds.records, &statements, &cfg.split)?;
    let out = a.out.clone().unwrap_or_else(|| a.dataset.clone());
    fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;
    let write_ids = |name: &str, ids: &[String]| -> Result<(), CliError> {
        let path = out.join(name);
        let mut text = ids.join("\n");
        if !ids.is_empty() {
            text.push('\n');
        }
        fs::write(&path, text).map_err(|e| io_err(&path, e))
    };
    write_ids("train.txt", &result.train)?;
    write_ids("test.txt", &result.test)?;
    let metrics = json!({
        "train": result.train.len(),
        "test": result.test.len(),
        "atom_divergence": result.atom_divergence,
        "compound_divergence": result.compound_divergence,
        "target_compound_div": cfg.split.target_compound_div,
        "max_atom_div": cfg.split.max_atom_div,
        "target_reached": result.target_reached,
        "steps": result.steps,
        "config": cfg.split,
    });
    let path = out.join("split_metrics.json");
    let mut text = serde_json::to_string_pretty(&metrics).unwrap_or_default();
    text.push('\n');
    fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    io.emit(&metrics);
    Ok(())
}

fn cmd_render(mut cfg: RunConfig, a: &RenderArgs, io: &mut Io<'_>) -> Result<(), CliError> {
    if let Some(px) = a.px {
        cfg.render.canvas_px = px;
    }
    let text = fs::read_to_string(&a.figure).map_err(|e| io_err(&a.figure, e))?;
    let figure: Figure = serde_json::from_str::<FigureRecord>(&text)
        .map(|r| r.figure())
        .or_else(|_| serde_json::from_str::<Figure>(&text))
        .or_else(|_| serde_json::from_str::<DatasetRecord>(&text).map(|r| r.figure()))
        .map_err(|e| CliError::InvalidFigure(format!("{}: {e}", a.figure.display())))?;
    let canvas = UniverseConfig {
        n_min: 1,
        n_max: usize::MAX,
        allowed_shapes: Shape::ALL.to_vec(),
        allowed_colors: Color::ALL.to_vec(),
        size_min: f64::MIN_POSITIVE,
        size_max: 1.0,
        min_gap: 0.0,
        ..UniverseConfig::default()
    };
    let report = validate_figure(&figure, &canvas);
    if !report.is_ok() {
        let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(CliError::InvalidFigure(msgs.join("; ")));
    }
    let svg = render_svg(&figure, &cfg.render).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    fs::write(&a.out, svg).map_err(|e| io_err(&a.out, e))?;
    io.emit(&json!({ "out": a.out.display().to_string(), "objects": figure.len() }));
    Ok(())
}

/// Pattern id under which [`crate::challenges::H2`] gets its constructive
/// generator; exposed so statement files can opt in by naming an entry so.
pub const CONSTRUCTIVE_H2_ID: &str = H2_PATTERN_ID;
