//! The `linloop` command line.
//!
//! Exit codes: `0` success, `2` partial run or provider failure, `3`
//! configuration or usage error.

mod config;
mod report;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use config::{load_corpus, EmbeddingSection, RunConfig, TransformSection};
pub use report::{
    read_records, render_table, write_records, ErrorRecord, IngestRecord, ReportRecord, RunHeader,
};

use crate::embedding::{
    read_trajectory, write_trajectory, CachedEmbedder, EmbedError, Embedder, HttpEmbedder, MockEmbedder,
};
use crate::engine::{
    analyze, classify_loop, AuditMode, CorpusElement, EngineError, Pipeline, SequenceSpec, Thresholds,
    Trajectory,
};
use crate::synthetic::{generate_chain, GroundTruth, SyntheticSpec};
use crate::transform::{inverse_step, ChatTransformer, EchoTransformer, TransformError, Transformer};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Provider(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Provider(_) => EXIT_PARTIAL,
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match &e {
            EngineError::Transform(_)
            | EngineError::InvalidThreshold(_)
            | EngineError::InvalidSequence(_)
            | EngineError::EmptyCorpus
            | EngineError::Embedding(EmbedError::Config(_)) => CliError::Config(e.to_string()),
            _ => CliError::Provider(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "linloop",
    version,
    about = "Semantic deficits of text transformation chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build trajectories for a corpus (or read trajectory files) and report deficits.
    Analyze(AnalyzeArgs),
    /// Check reversibility or coherence of one transformation step.
    Audit(AuditArgs),
    /// Generate a synthetic trajectory and its ground-truth sidecar.
    Simulate(SimulateArgs),
    /// Embed the corpus into the cache ahead of an analysis.
    Ingest(IngestArgs),
    /// Pretty-print a report file as tables.
    Report(ReportArgs),
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Report destination; standard output when neither this nor the config sets one.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Use the mock embedder and echo provider steps instead of configured providers.
    #[arg(long)]
    pub mock: bool,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Sequence to analyze; every configured sequence when omitted.
    #[arg(long, value_name = "ID")]
    pub sequence: Option<String>,
    /// Analyze existing trajectory files instead of building from a corpus.
    #[arg(long, value_name = "PATH", num_args = 1..)]
    pub trajectory: Vec<PathBuf>,
    #[arg(long)]
    pub xi: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Reversibility,
    Coherence,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_name = "ID")]
    pub step: String,
    #[arg(long, value_enum, default_value = "reversibility")]
    pub mode: ModeArg,
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_name = "PATH")]
    pub spec: PathBuf,
    /// Trajectory file to write; the sidecar goes next to it as `*.truth.json`.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Also embed every intermediate text of this sequence.
    #[arg(long, value_name = "ID")]
    pub sequence: Option<String>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(value_name = "PATH")]
    pub path: PathBuf,
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            tracing::error!(exit_code = e.exit_code(), "{e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> Result<i32, CliError> {
    match command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Audit(a) => cmd_audit(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Ingest(a) => cmd_ingest(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn load_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    match &common.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    }
}

fn require_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    if common.config.is_none() {
        return Err(CliError::Config("--config is required".into()));
    }
    load_config(common)
}

struct Providers {
    embedder: Box<dyn Embedder>,
    transformer: Box<dyn Transformer>,
}

fn providers(config: &RunConfig, common: &CommonArgs, seed: u64) -> Result<Providers, CliError> {
    let section = config.embedding()?;
    let embed_err = |e: EmbedError| CliError::Config(format!("embedding: {e}"));
    let base: Box<dyn Embedder> = match (common.mock, section) {
        (true, s) | (false, s @ EmbeddingSection::Mock { .. }) => {
            Box::new(MockEmbedder::new(s.dim(), seed).map_err(embed_err)?)
        }
        (false, EmbeddingSection::Http(c)) => Box::new(HttpEmbedder::new(c.clone()).map_err(embed_err)?),
    };
    let embedder: Box<dyn Embedder> = match &config.cache_dir {
        Some(dir) => Box::new(CachedEmbedder::new(base, dir).map_err(embed_err)?),
        None => base,
    };
    let transformer: Box<dyn Transformer> = match (common.mock, &config.transform) {
        (false, Some(TransformSection::Http(c))) => Box::new(
            ChatTransformer::new(c.clone())
                .map_err(|e: TransformError| CliError::Config(format!("transform: {e}")))?,
        ),
        (false, None) if config.uses_provider_steps() => {
            return Err(CliError::Config(
                "sequences contain provider_prompt steps but there is no [transform] section".into(),
            ))
        }
        _ => Box::new(EchoTransformer),
    };
    Ok(Providers {
        embedder,
        transformer,
    })
}

fn thresholds(config: &RunConfig, xi: Option<f64>, epsilon: Option<f64>) -> Result<Thresholds, CliError> {
    let mut t = config.thresholds;
    if let Some(xi) = xi {
        t.xi = xi;
    }
    if let Some(eps) = epsilon {
        t.epsilon = eps;
    }
    t.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(t)
}

fn output_path(config: &RunConfig, common: &CommonArgs) -> Option<PathBuf> {
    common.out.clone().or_else(|| config.out.clone())
}

fn emit(records: &[ReportRecord], out: Option<&Path>) -> Result<(), CliError> {
    let result = match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)
                    .map_err(|e| CliError::Config(format!("cannot create {}: {e}", parent.display())))?;
            }
            let file = File::create(path)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
            write_records(records, BufWriter::new(file))
        }
        None => write_records(records, std::io::stdout().lock()),
    };
    result.map_err(|e| CliError::Config(format!("cannot write report: {e}")))
}

fn header(
    command: &str,
    t: Thresholds,
    p: Option<&Providers>,
    seed: Option<u64>,
    mock: bool,
) -> ReportRecord {
    ReportRecord::Run(RunHeader {
        command: command.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        thresholds: t,
        embedder: p.map(|p| p.embedder.fingerprint()),
        transformer: p.map(|p| p.transformer.fingerprint()),
        seed,
        mock,
    })
}

/// Deficit reports (or error records) for `trajectories` followed by the
/// verdict. Returns the number of failures.
fn analyze_group(
    sequence_ref: &str,
    ids: &[String],
    trajectories: Vec<Result<Trajectory, EngineError>>,
    t: &Thresholds,
    records: &mut Vec<ReportRecord>,
) -> usize {
    let options = t.analysis_options();
    let mut reports = Vec::new();
    let mut failed = 0;
    for (id, traj) in ids.iter().zip(trajectories) {
        match traj.and_then(|traj| analyze(&traj, &options)) {
            Ok(r) => {
                records.push(ReportRecord::DeficitReport(r.clone()));
                reports.push(r);
            }
            Err(e) => {
                tracing::error!(element_id = %id, sequence_ref, error = %e, "element failed");
                failed += 1;
                records.push(ReportRecord::Error(ErrorRecord {
                    element_id: Some(id.clone()),
                    sequence_ref: Some(sequence_ref.into()),
                    message: e.to_string(),
                }));
            }
        }
    }
    match classify_loop(&reports, t.xi) {
        Ok(v) => records.push(ReportRecord::LoopVerdict(v.with_failures(failed))),
        Err(e) => records.push(ReportRecord::Error(ErrorRecord {
            element_id: None,
            sequence_ref: Some(sequence_ref.into()),
            message: e.to_string(),
        })),
    }
    failed
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<i32, CliError> {
    let config = load_config(&args.common)?;
    let t = thresholds(&config, args.xi, None)?;
    let out = output_path(&config, &args.common);

    if !args.trajectory.is_empty() {
        let mut trajectories = Vec::new();
        for path in &args.trajectory {
            let traj =
                read_trajectory(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            trajectories.push(traj);
        }
        let mut records = vec![ReportRecord::Run(RunHeader {
            command: "analyze".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            thresholds: t,
            embedder: Some(trajectories[0].embedder().clone()),
            transformer: None,
            seed: None,
            mock: args.common.mock,
        })];
        let mut groups: Vec<(String, Vec<Trajectory>)> = Vec::new();
        for traj in trajectories {
            match groups.iter_mut().find(|(s, _)| s == traj.sequence_ref()) {
                Some((_, g)) => g.push(traj),
                None => groups.push((traj.sequence_ref().to_string(), vec![traj])),
            }
        }
        let mut failed = 0;
        for (seq, group) in groups {
            let ids: Vec<String> = group.iter().map(|t| t.element_id().to_string()).collect();
            failed += analyze_group(&seq, &ids, group.into_iter().map(Ok).collect(), &t, &mut records);
        }
        emit(&records, out.as_deref())?;
        return Ok(if failed > 0 { EXIT_PARTIAL } else { EXIT_OK });
    }

    if args.common.config.is_none() {
        return Err(CliError::Config("analyze needs --config or --trajectory".into()));
    }
    let corpus = config.load_corpus()?;
    let sequences: Vec<&SequenceSpec> = match &args.sequence {
        Some(id) => vec![config.sequence(id)?],
        None if config.sequences.is_empty() => {
            return Err(CliError::Config("config defines no sequences".into()))
        }
        None => config.sequences.iter().collect(),
    };
    let seed = args.common.seed.unwrap_or(config.seed);
    let p = providers(&config, &args.common, seed)?;
    let pipeline = Pipeline::new(&*p.transformer, &*p.embedder).with_parallelism(config.parallelism);

    let mut records = vec![header("analyze", t, Some(&p), Some(seed), args.common.mock)];
    let ids: Vec<String> = corpus.iter().map(|e| e.id.clone()).collect();
    let mut failed = 0;
    for spec in sequences {
        let trajectories = pipeline.build_trajectories(&corpus, spec);
        failed += analyze_group(&spec.id, &ids, trajectories, &t, &mut records);
    }
    emit(&records, out.as_deref())?;
    Ok(if failed > 0 { EXIT_PARTIAL } else { EXIT_OK })
}

pub fn cmd_audit(args: &AuditArgs) -> Result<i32, CliError> {
    let config = require_config(&args.common)?;
    let t = thresholds(&config, None, args.epsilon)?;
    let step = config
        .sequences
        .iter()
        .flat_map(|s| &s.steps)
        .find(|s| s.id == args.step)
        .ok_or_else(|| CliError::Config(format!("no step with id {:?} in any sequence", args.step)))?;
    inverse_step(step).map_err(|e| CliError::Config(e.to_string()))?;
    let corpus: Vec<CorpusElement> = config.load_corpus()?;
    let seed = args.common.seed.unwrap_or(config.seed);
    let p = providers(&config, &args.common, seed)?;
    let pipeline = Pipeline::new(&*p.transformer, &*p.embedder).with_parallelism(config.parallelism);

    let record = match args.mode {
        ModeArg::Reversibility => pipeline.audit_reversibility(step, &corpus, t.epsilon),
        ModeArg::Coherence => pipeline.audit_coherence(step, &corpus, t.epsilon, t.f_scale),
    }?;
    if record.mode == AuditMode::Coherence && record.reversible == Some(false) {
        tracing::warn!(step = %record.step_id, "step is not reversible at this epsilon");
    }
    let records = vec![
        header("audit", t, Some(&p), Some(seed), args.common.mock),
        ReportRecord::Audit(record),
    ];
    emit(&records, output_path(&config, &args.common).as_deref())?;
    Ok(EXIT_OK)
}

/// `chain.jsonl` → `chain.truth.json`.
pub fn sidecar_path(trajectory_path: &Path) -> PathBuf {
    trajectory_path.with_extension("truth.json")
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| CliError::Config(format!("cannot read spec {}: {e}", args.spec.display())))?;
    let mut spec = SyntheticSpec::from_toml_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.spec.display())))?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let chain = generate_chain(&spec).map_err(|e| CliError::Config(e.to_string()))?;
    let truth = GroundTruth::new(&spec, &chain).map_err(|e| CliError::Config(e.to_string()))?;
    let traj = chain.to_trajectory(&spec, "synthetic-0");

    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", parent.display())))?;
    }
    write_trajectory(&traj, &args.out)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.out.display())))?;
    let sidecar = sidecar_path(&args.out);
    let write_sidecar = || -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(&sidecar)?);
        serde_json::to_writer_pretty(&mut w, &truth)?;
        w.write_all(b"\n")?;
        w.flush()
    };
    write_sidecar().map_err(|e| CliError::Config(format!("{}: {e}", sidecar.display())))?;
    tracing::info!(
        trajectory = %args.out.display(),
        sidecar = %sidecar.display(),
        "wrote synthetic trajectory"
    );
    Ok(EXIT_OK)
}

pub fn cmd_ingest(args: &IngestArgs) -> Result<i32, CliError> {
    let config = require_config(&args.common)?;
    let corpus = config.load_corpus()?;
    let sequence = args
        .sequence
        .as_deref()
        .map(|id| config.sequence(id))
        .transpose()?;
    if config.cache_dir.is_none() {
        tracing::warn!("no cache_dir configured; embeddings will not be kept");
    }
    let seed = args.common.seed.unwrap_or(config.seed);
    let p = providers(&config, &args.common, seed)?;

    let mut texts: Vec<String> = corpus.iter().map(|e| e.text.clone()).collect();
    let mut failed = 0;
    if let Some(spec) = sequence {
        let pipeline = Pipeline::new(&*p.transformer, &*p.embedder).with_parallelism(config.parallelism);
        for (e, traj) in corpus.iter().zip(pipeline.build_trajectories(&corpus, spec)) {
            match traj {
                Ok(traj) => texts.extend(traj.texts()[1..].iter().cloned()),
                Err(err) => {
                    failed += 1;
                    tracing::error!(element_id = %e.id, error = %err, "element failed");
                }
            }
        }
    }
    texts.sort();
    texts.dedup();
    p.embedder
        .embed_batch(&texts)
        .map_err(|e| CliError::from(EngineError::Embedding(e)))?;

    let fp = p.embedder.fingerprint();
    let records = vec![
        header(
            "ingest",
            config.thresholds,
            Some(&p),
            Some(seed),
            args.common.mock,
        ),
        ReportRecord::Ingest(IngestRecord {
            model: fp.model,
            dim: fp.dim,
            n_texts: texts.len(),
        }),
    ];
    emit(&records, output_path(&config, &args.common).as_deref())?;
    Ok(if failed > 0 { EXIT_PARTIAL } else { EXIT_OK })
}

pub fn cmd_report(args: &ReportArgs) -> Result<i32, CliError> {
    let file = File::open(&args.path)
        .map_err(|e| CliError::Config(format!("cannot open {}: {e}", args.path.display())))?;
    let records = read_records(BufReader::new(file))?;
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(render_table(&records).as_bytes())
        .map_err(|e| CliError::Config(format!("cannot write table: {e}")))?;
    Ok(EXIT_OK)
}
