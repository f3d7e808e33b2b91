//! Command-line front end: one binary, one subcommand per pipeline stage.
//!
//! Exit codes: 0 success, 1 runtime or data failure, 2 usage or
//! configuration error. Data goes to files or stdout, diagnostics to stderr.
//! Every command that writes a file also writes `<file>.manifest.json`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::baselines::{
    bow_predict, dense_predict, dictionary_classify, load_dictionary, train_bow_logreg,
    train_logreg, BowIndex, Sentiment, SparseVector,
};
use crate::corpus::{
    load_corpus, save_corpus, to_mil_dataset, Document, Polarity, SentenceInstance,
};
use crate::embed::{
    embed_corpus, load_embeddings, load_sentence_vectors, sentence_key, EmbeddingStore, DEFAULT_DIM,
};
use crate::error::Error;
use crate::eval::{
    align, gold_labels, label_distribution, predicted_labels, read_labels, render_json,
    render_table, score_predictions, temporal_split, write_labels, EvalMode, LabelSet,
};
use crate::eventstudy::{label_documents, load_price_dir, load_price_series, EventLabelConfig};
use crate::mil::{
    generate_synthetic, grid_search, load_model, predict_document, predict_sentence, save_model,
    train, DocumentRule, GridSpec, MilModel, TrainConfig,
};
use crate::preprocess::{preprocess_documents, tokenize, PreprocessConfig};

pub const CONFIG_ENV: &str = "MILSENT_CONFIG";

#[derive(Debug, Parser)]
#[command(
    name = "milsent",
    version,
    about = "Sentence-level sentiment from document-level labels"
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Seed for every random choice; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Clean, split, tokenize and filter a raw corpus.
    Preprocess(IoArgs),
    /// Attach event-day abnormal returns and sign labels.
    Label(LabelArgs),
    /// Temporal train/test split.
    Split(SplitArgs),
    /// Train a model on labeled documents.
    Train(TrainArgs),
    /// Score sentences and documents with a trained model.
    Predict(PredictArgs),
    /// Compare predicted labels against reference labels.
    Evaluate(EvaluateArgs),
    /// Market reaction by sentence polarity table.
    Distribution(InputArgs),
    /// Print one document with sentences highlighted by polarity.
    Render(RenderArgs),
    /// Dictionary and logistic-regression comparison methods.
    Baseline(BaselineArgs),
    /// Write a synthetic corpus with known sentence labels.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct IoArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct InputArgs {
    #[arg(short, long)]
    input: PathBuf,
}

#[derive(Debug, Args)]
struct LabelArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Directory of `<TICKER>.csv` price files.
    #[arg(long)]
    prices: PathBuf,
    /// Price file of the market index.
    #[arg(long)]
    index: PathBuf,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Training share; defaults to the config value or 0.8.
    #[arg(long)]
    ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum EmbeddingKind {
    /// Word-vector file, averaged per sentence.
    Word,
    /// Precomputed sentence vectors keyed `<doc id>#<index>`.
    Sentence,
    /// Seeded pseudo-random token vectors.
    Hash,
    /// Vectors already stored in the corpus.
    Stored,
}

#[derive(Debug, Clone, Args)]
struct EmbedArgs {
    /// Embedding file (word or sentence vectors).
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Defaults to `word` with a file, else `stored` if the corpus carries
    /// vectors, else `hash`.
    #[arg(long, value_enum)]
    embedding_kind: Option<EmbeddingKind>,
    /// Embedding dimension; must agree with the embedding file.
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Model file to write.
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    embed: EmbedArgs,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Kernel width of the similarity term.
    #[arg(long)]
    gamma: Option<f64>,
    /// Hyperparameter grid, e.g. `lambda=1,10;learning_rate=0.05;momentum=0.8`.
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RuleArg {
    Majority,
    MeanScore,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(short, long)]
    model: PathBuf,
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    embed: EmbedArgs,
    #[arg(long, value_enum, default_value = "majority")]
    rule: RuleArg,
    /// Keep sentence vectors in the output corpus.
    #[arg(long)]
    keep_embeddings: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ModeArg {
    Sentence,
    Document,
}

impl From<ModeArg> for EvalMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Sentence => EvalMode::Sentence,
            ModeArg::Document => EvalMode::Document,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Reference labels: a corpus (`.jsonl`) or a label file.
    #[arg(long)]
    gold: PathBuf,
    /// Predictions as `NAME=PATH`; repeat for one table row per method.
    #[arg(long = "pred", required = true)]
    predictions: Vec<String>,
    #[arg(long, value_enum, default_value = "sentence")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RenderFormat {
    Ansi,
    Html,
}

#[derive(Debug, Args)]
struct RenderArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Document id.
    #[arg(long)]
    doc: String,
    #[arg(long, value_enum, default_value = "ansi")]
    format: RenderFormat,
    /// Write to a file instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Method {
    Dictionary,
    BowLogreg,
    EmbeddingLogreg,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    #[arg(long, value_enum)]
    method: Method,
    /// Corpus to classify.
    #[arg(short, long)]
    input: PathBuf,
    /// Label file to write.
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "sentence")]
    mode: ModeArg,
    /// Positive word list (dictionary).
    #[arg(long)]
    positive: Option<PathBuf>,
    /// Negative word list (dictionary).
    #[arg(long)]
    negative: Option<PathBuf>,
    /// Labeled training corpus (logistic regression).
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    l2: f64,
    #[command(flatten)]
    embed: EmbedArgs,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Corpus file to write.
    #[arg(short, long)]
    output: PathBuf,
    /// Sentence-vector file to write.
    #[arg(long)]
    vectors: PathBuf,
    #[arg(long, default_value_t = 200)]
    groups: usize,
    #[arg(long, default_value_t = 5)]
    per_group: usize,
    #[arg(long, default_value_t = 16)]
    dim: usize,
    #[arg(long, default_value_t = 3.0)]
    separation: f64,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
}

/// Settings read from `--config`. Every section is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    split_ratio: Option<f64>,
    preprocess: PreprocessConfig,
    label: EventLabelConfig,
    train: TrainConfig,
    grid: Option<GridSpec>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidPattern { .. } | Error::Model(_) => {
                Failure::Usage(e.to_string())
            }
            e => Failure::Runtime(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

fn require_file(path: &Path) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        usage(format!("input not found: {}", path.display()))
    }
}

#[derive(Debug, Serialize)]
struct RunManifest {
    command: String,
    version: &'static str,
    seed: u64,
    threads: usize,
    config: serde_json::Value,
    inputs: BTreeMap<String, PathBuf>,
    outputs: BTreeMap<String, PathBuf>,
    summary: serde_json::Value,
    started_at: String,
    finished_at: String,
}

struct Run {
    command: &'static str,
    seed: u64,
    threads: usize,
    config: serde_json::Value,
    inputs: BTreeMap<String, PathBuf>,
    outputs: BTreeMap<String, PathBuf>,
    summary: serde_json::Value,
    started_at: String,
}

impl Run {
    fn new(command: &'static str, seed: u64, threads: usize) -> Self {
        Self {
            command,
            seed,
            threads,
            config: serde_json::Value::Null,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            summary: serde_json::Value::Null,
            started_at: Utc::now().to_rfc3339(),
        }
    }

    fn input(&mut self, name: &str, path: &Path) -> &mut Self {
        self.inputs.insert(name.into(), path.to_path_buf());
        self
    }

    fn output(&mut self, name: &str, path: &Path) -> &mut Self {
        self.outputs.insert(name.into(), path.to_path_buf());
        self
    }

    fn config(&mut self, value: impl Serialize) -> &mut Self {
        self.config = serde_json::to_value(value).expect("config serializes");
        self
    }

    fn summary(&mut self, value: impl Serialize) -> &mut Self {
        self.summary = serde_json::to_value(value).expect("summary serializes");
        self
    }

    /// Writes `<primary>.manifest.json`.
    fn finish(self, primary: &Path) -> CliResult<()> {
        let manifest = RunManifest {
            command: self.command.into(),
            version: env!("CARGO_PKG_VERSION"),
            seed: self.seed,
            threads: self.threads,
            config: self.config,
            inputs: self.inputs,
            outputs: self.outputs,
            summary: self.summary,
            started_at: self.started_at,
            finished_at: Utc::now().to_rfc3339(),
        };
        let mut path = primary.as_os_str().to_owned();
        path.push(".manifest.json");
        let path = PathBuf::from(path);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, text + "\n")
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
    }
}

struct Context {
    config: FileConfig,
    seed: u64,
    threads: usize,
}

fn load_config(path: Option<&Path>) -> CliResult<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))
}

/// Parses and runs the process arguments, returning the exit code.
pub fn main() -> i32 {
    run(std::env::args_os())
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();

    match dispatch(cli) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `milsent --help` for usage");
            2
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    if cli.threads == 0 {
        return usage("--threads must be at least 1");
    }
    // a second initialization (in-process callers) keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global();
    if let Some(path) = &cli.config {
        require_file(path)?;
    }
    let config = load_config(cli.config.as_deref())?;
    let seed = cli.seed.or(config.seed).unwrap_or(config.train.seed);
    let ctx = Context {
        config,
        seed,
        threads: cli.threads,
    };
    match cli.command {
        Command::Preprocess(a) => cmd_preprocess(&ctx, a),
        Command::Label(a) => cmd_label(&ctx, a),
        Command::Split(a) => cmd_split(&ctx, a),
        Command::Train(a) => cmd_train(&ctx, a),
        Command::Predict(a) => cmd_predict(&ctx, a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Distribution(a) => cmd_distribution(a),
        Command::Render(a) => cmd_render(a),
        Command::Baseline(a) => cmd_baseline(&ctx, a),
        Command::Synth(a) => cmd_synth(&ctx, a),
    }
}

fn read_corpus_arg(path: &Path) -> CliResult<Vec<Document>> {
    require_file(path)?;
    Ok(load_corpus(path)?)
}

fn percent(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

fn cmd_preprocess(ctx: &Context, a: IoArgs) -> CliResult<()> {
    let corpus = read_corpus_arg(&a.input)?;
    let cfg = &ctx.config.preprocess;
    let (docs, stats) = preprocess_documents(corpus, cfg)?;
    if docs.is_empty() {
        log::warn!(
            "no documents survived preprocessing (minimum {} words per document)",
            cfg.min_doc_words
        );
    }
    save_corpus(&a.output, &docs)?;
    println!("documents in:     {}", stats.documents_in);
    println!("documents out:    {}", stats.documents_out);
    println!("sentences out:    {}", stats.sentences_out);
    println!("distinct tokens:  {}", stats.distinct_tokens);
    println!("vocabulary kept:  {}", stats.vocabulary);
    let mut run = Run::new("preprocess", ctx.seed, ctx.threads);
    run.input("corpus", &a.input)
        .output("corpus", &a.output)
        .config(cfg)
        .summary(&stats);
    run.finish(&a.output)
}

fn cmd_label(ctx: &Context, a: LabelArgs) -> CliResult<()> {
    let corpus = read_corpus_arg(&a.io.input)?;
    require_file(&a.prices)?;
    require_file(&a.index)?;
    let stocks = load_price_dir(&a.prices)?;
    let index = load_price_series(&a.index, "index")?;
    let cfg = &ctx.config.label;
    let (docs, report) = label_documents(corpus, &stocks, &index, cfg)?;
    if docs.is_empty() {
        log::warn!("no document received a label");
    }
    save_corpus(&a.io.output, &docs)?;
    let n = report.labeled();
    println!("documents:  {}", report.input);
    println!("labeled:    {n}");
    println!(
        "positive:   {} ({:.2}%)",
        report.positive,
        percent(report.positive, n)
    );
    println!(
        "negative:   {} ({:.2}%)",
        report.negative,
        percent(report.negative, n)
    );
    println!("dropped:    {}", report.dropped.len());
    for (id, reason) in &report.dropped {
        println!("  {id}: {reason}");
    }
    let mut run = Run::new("label", ctx.seed, ctx.threads);
    run.input("corpus", &a.io.input)
        .input("prices", &a.prices)
        .input("index", &a.index)
        .output("corpus", &a.io.output)
        .config(cfg)
        .summary(&report);
    run.finish(&a.io.output)
}

fn cmd_split(ctx: &Context, a: SplitArgs) -> CliResult<()> {
    let corpus = read_corpus_arg(&a.input)?;
    let ratio = a.ratio.or(ctx.config.split_ratio).unwrap_or(0.8);
    let (train, test) = temporal_split(corpus, ratio)?;
    save_corpus(&a.train, &train)?;
    save_corpus(&a.test, &test)?;
    println!("train: {} documents", train.len());
    println!("test:  {} documents", test.len());
    let mut run = Run::new("split", ctx.seed, ctx.threads);
    run.input("corpus", &a.input)
        .output("train", &a.train)
        .output("test", &a.test)
        .config(serde_json::json!({ "ratio": ratio }))
        .summary(serde_json::json!({ "train": train.len(), "test": test.len() }));
    run.finish(&a.train)
}

#[derive(Debug, Serialize)]
struct EmbeddingSetup {
    kind: EmbeddingKind,
    path: Option<PathBuf>,
    dim: usize,
    seed: u64,
}

/// Resolves the embedding flags and fills sentence vectors in `corpus`.
fn embed_documents(
    args: &EmbedArgs,
    corpus: &mut [Document],
    seed: u64,
) -> CliResult<EmbeddingSetup> {
    let all_stored = corpus
        .iter()
        .all(|d| d.sentences.iter().all(|s| s.embedding.is_some()));
    let kind = match (args.embedding_kind, &args.embeddings) {
        (Some(k), _) => k,
        (None, Some(_)) => EmbeddingKind::Word,
        (None, None) if all_stored && corpus.iter().any(|d| !d.sentences.is_empty()) => {
            EmbeddingKind::Stored
        }
        (None, None) => EmbeddingKind::Hash,
    };
    let store = match (kind, &args.embeddings) {
        (EmbeddingKind::Hash | EmbeddingKind::Stored, Some(p)) => {
            return usage(format!(
                "--embeddings {} given with --embedding-kind {kind:?}",
                p.display()
            ))
        }
        (EmbeddingKind::Word | EmbeddingKind::Sentence, None) => {
            return usage("--embeddings is required for word and sentence vectors")
        }
        (EmbeddingKind::Word, Some(p)) => {
            require_file(p)?;
            Some(load_embeddings(p)?)
        }
        (EmbeddingKind::Sentence, Some(p)) => {
            require_file(p)?;
            Some(load_sentence_vectors(p)?)
        }
        (EmbeddingKind::Hash, None) => Some(EmbeddingStore::hash_fallback(
            args.dim.unwrap_or(DEFAULT_DIM),
            seed,
        )?),
        (EmbeddingKind::Stored, None) => None,
    };
    let dim = match &store {
        Some(s) => s.dim(),
        None => corpus
            .iter()
            .flat_map(|d| d.sentences.iter())
            .find_map(|s| s.embedding.as_ref().map(Vec::len))
            .unwrap_or(args.dim.unwrap_or(0)),
    };
    if let Some(d) = args.dim {
        if d != dim {
            return usage(format!(
                "--dim {d} conflicts with the embedding dimension {dim}{}",
                args.embeddings
                    .as_ref()
                    .map(|p| format!(" of {}", p.display()))
                    .unwrap_or_default()
            ));
        }
    }
    if let Some(store) = &store {
        log::info!(
            "embedding sentences with {} vectors (dim {})",
            store.provider(),
            store.dim()
        );
        embed_corpus(corpus, store)?;
    }
    Ok(EmbeddingSetup {
        kind,
        path: args.embeddings.clone(),
        dim,
        seed,
    })
}

fn parse_list(axis: &str, values: &str) -> CliResult<Vec<f64>> {
    values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("--grid: bad {axis} value `{v}`")))
        })
        .collect()
}

/// `lambda=1,10;learning_rate=0.05;momentum=0.8`; omitted axes keep the
/// base value.
fn parse_grid(spec: &str, base: &TrainConfig) -> CliResult<GridSpec> {
    let mut grid = GridSpec::singleton(base);
    for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let Some((axis, values)) = part.split_once('=') else {
            return usage(format!("--grid: expected `axis=v1,v2`, got `{part}`"));
        };
        let values = parse_list(axis, values)?;
        match axis.trim() {
            "lambda" => grid.lambda = values,
            "learning_rate" | "lr" => grid.learning_rate = values,
            "momentum" => grid.momentum = values,
            other => return usage(format!("--grid: unknown axis `{other}`")),
        }
    }
    Ok(grid)
}

#[derive(Serialize)]
struct TrainSummary {
    documents: usize,
    sentences: usize,
    initial_loss: f64,
    epoch_losses: Vec<f64>,
    in_sample_accuracy: f64,
    grid: Option<crate::mil::GridReport>,
}

fn labeled_only(corpus: Vec<Document>) -> Vec<Document> {
    let before = corpus.len();
    let docs: Vec<Document> = corpus.into_iter().filter(|d| d.label.is_some()).collect();
    if docs.len() < before {
        log::warn!("ignoring {} unlabeled documents", before - docs.len());
    }
    docs
}

fn cmd_train(ctx: &Context, a: TrainArgs) -> CliResult<()> {
    let mut corpus = labeled_only(read_corpus_arg(&a.input)?);
    if corpus.is_empty() {
        return Err(Failure::Runtime("no labeled documents to train on".into()));
    }
    let mut cfg = ctx.config.train.clone();
    cfg.seed = ctx.seed;
    if let Some(v) = a.lambda {
        cfg.lambda = v;
    }
    if let Some(v) = a.learning_rate {
        cfg.learning_rate = v;
    }
    if let Some(v) = a.momentum {
        cfg.momentum = v;
    }
    if let Some(v) = a.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = a.gamma {
        cfg.kernel_gamma = v;
    }
    cfg.validate()?;
    let grid = match (&a.grid, &ctx.config.grid) {
        (Some(spec), _) => Some(parse_grid(spec, &cfg)?),
        (None, Some(g)) => Some(g.clone()),
        (None, None) => None,
    };

    let setup = embed_documents(&a.embed, &mut corpus, ctx.seed)?;
    let dataset = to_mil_dataset(&corpus)?;
    let grid_report = match &grid {
        Some(g) => {
            let (best, report) = grid_search(&dataset, g, &cfg)?;
            cfg = best;
            Some(report)
        }
        None => None,
    };
    let outcome = train(&dataset, &cfg)?;
    save_model(&a.output, &outcome.model)?;

    let mut trace_path = a.output.as_os_str().to_owned();
    trace_path.push(".trace.tsv");
    let trace_path = PathBuf::from(trace_path);
    let mut trace = String::from("epoch\tloss\n");
    for (epoch, loss) in std::iter::once(outcome.initial_loss)
        .chain(outcome.epoch_losses.iter().copied())
        .enumerate()
    {
        let _ = writeln!(trace, "{epoch}\t{loss}");
    }
    fs::write(&trace_path, trace)
        .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", trace_path.display())))?;

    let accuracy = document_accuracy(&outcome.model, &dataset)?;
    if let Some(report) = &grid_report {
        println!(
            "{:>10}{:>15}{:>10}{:>10}",
            "lambda", "learning_rate", "momentum", "accuracy"
        );
        for (i, c) in report.cells.iter().enumerate() {
            let acc = c
                .accuracy
                .map_or("failed".to_string(), |a| format!("{:.2}%", 100.0 * a));
            let mark = if i == report.best { "  *" } else { "" };
            println!(
                "{:>10}{:>15}{:>10}{:>10}{mark}",
                c.lambda, c.learning_rate, c.momentum, acc
            );
        }
    }
    println!("documents:  {}", dataset.n_groups());
    println!("sentences:  {}", dataset.n_instances());
    println!(
        "loss:       {:.6} -> {:.6}",
        outcome.initial_loss,
        outcome
            .epoch_losses
            .last()
            .copied()
            .unwrap_or(outcome.initial_loss)
    );
    println!("{}", loss_trend(&outcome.epoch_losses));
    println!("in-sample document accuracy: {:.2}%", 100.0 * accuracy);

    let summary = TrainSummary {
        documents: dataset.n_groups(),
        sentences: dataset.n_instances(),
        initial_loss: outcome.initial_loss,
        epoch_losses: outcome.epoch_losses.clone(),
        in_sample_accuracy: accuracy,
        grid: grid_report,
    };
    let mut run = Run::new("train", ctx.seed, ctx.threads);
    run.input("corpus", &a.input)
        .output("model", &a.output)
        .output("trace", &trace_path)
        .config(serde_json::json!({ "train": cfg, "grid": grid, "embedding": setup }))
        .summary(&summary);
    if let Some(p) = &a.embed.embeddings {
        run.input("embeddings", p);
    }
    run.finish(&a.output)
}

fn document_accuracy(model: &MilModel, dataset: &crate::corpus::MilDataset) -> CliResult<f64> {
    let mut hits = 0usize;
    for g in dataset.groups() {
        if predict_document(model, &g.instances, DocumentRule::Majority)?.label == g.label {
            hits += 1;
        }
    }
    Ok(hits as f64 / dataset.n_groups().max(1) as f64)
}

/// Compares the mean loss of the first and second half of the epochs.
fn loss_trend(losses: &[f64]) -> String {
    if losses.len() < 2 {
        return "loss trend: too few epochs to judge".into();
    }
    let half = losses.len() / 2;
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let (early, late) = (mean(&losses[..half]), mean(&losses[half..]));
    let verdict = if late <= early {
        "non-increasing on average"
    } else {
        "INCREASING on average"
    };
    format!("loss trend: {verdict} (first half mean {early:.6}, second half mean {late:.6})")
}

fn cmd_predict(ctx: &Context, a: PredictArgs) -> CliResult<()> {
    require_file(&a.model)?;
    let model = load_model(&a.model)?;
    let mut corpus = read_corpus_arg(&a.io.input)?;
    let rule = match a.rule {
        RuleArg::Majority => DocumentRule::Majority,
        RuleArg::MeanScore => DocumentRule::MeanScore,
    };
    let setup = if corpus.iter().all(|d| d.sentences.is_empty()) {
        None
    } else {
        let setup = embed_documents(&a.embed, &mut corpus, ctx.seed)?;
        if setup.dim != model.dim() {
            return usage(format!(
                "embedding dimension {} does not match model dimension {}",
                setup.dim,
                model.dim()
            ));
        }
        Some(setup)
    };

    let (mut n_sent, mut n_pos, mut agree, mut n_gold) = (0usize, 0usize, 0usize, 0usize);
    for doc in &mut corpus {
        let mut instances = Vec::with_capacity(doc.sentences.len());
        for s in &mut doc.sentences {
            let x = s.embedding.as_ref().expect("embedded above");
            let p = predict_sentence(&model, x)?;
            n_sent += 1;
            if p.label() == Polarity::Positive {
                n_pos += 1;
            }
            if let Some(g) = s.gold {
                n_gold += 1;
                if g == p.label() {
                    agree += 1;
                }
            }
            s.prediction = Some(p);
            instances.push(if a.keep_embeddings {
                x.clone()
            } else {
                s.embedding.take().unwrap()
            });
        }
        doc.prediction = if instances.is_empty() {
            None
        } else {
            Some(predict_document(&model, &instances, rule)?)
        };
    }
    save_corpus(&a.io.output, &corpus)?;
    let n_docs = corpus.iter().filter(|d| d.prediction.is_some()).count();
    let docs_pos = corpus
        .iter()
        .filter(|d| d.prediction.is_some_and(|p| p.label == Polarity::Positive))
        .count();
    println!(
        "sentences:  {n_sent} ({:.2}% positive)",
        percent(n_pos, n_sent)
    );
    println!(
        "documents:  {n_docs} ({:.2}% positive)",
        percent(docs_pos, n_docs)
    );
    if n_gold > 0 {
        println!(
            "agreement with sentence gold labels: {:.2}% of {n_gold}",
            percent(agree, n_gold)
        );
    }
    let mut run = Run::new("predict", ctx.seed, ctx.threads);
    run.input("model", &a.model)
        .input("corpus", &a.io.input)
        .output("corpus", &a.io.output)
        .config(serde_json::json!({ "rule": rule, "embedding": setup }))
        .summary(serde_json::json!({
            "sentences": n_sent,
            "positive_sentences": n_pos,
            "documents": n_docs,
            "gold_sentences": n_gold,
            "gold_agreement": agree,
        }));
    if let Some(p) = &a.embed.embeddings {
        run.input("embeddings", p);
    }
    run.finish(&a.io.output)
}

fn is_corpus_file(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("jsonl" | "json")
    )
}

fn read_label_source(path: &Path, mode: EvalMode, gold: bool) -> CliResult<LabelSet> {
    require_file(path)?;
    if is_corpus_file(path) {
        let corpus = load_corpus(path)?;
        Ok(if gold {
            gold_labels(&corpus, mode)
        } else {
            predicted_labels(&corpus, mode)
        })
    } else {
        Ok(read_labels(path)?)
    }
}

fn cmd_evaluate(a: EvaluateArgs) -> CliResult<()> {
    let mode = EvalMode::from(a.mode);
    let gold = read_label_source(&a.gold, mode, true)?;
    if gold.is_empty() {
        return Err(Failure::Runtime(format!(
            "no reference labels in {}",
            a.gold.display()
        )));
    }
    let mut rows = Vec::new();
    for spec in &a.predictions {
        let (name, path) = match spec.split_once('=') {
            Some((n, p)) => (n.to_string(), PathBuf::from(p)),
            None => {
                let p = PathBuf::from(spec);
                let name = p
                    .file_stem()
                    .map_or(spec.clone(), |s| s.to_string_lossy().into_owned());
                (name, p)
            }
        };
        let predicted = read_label_source(&path, mode, false)?;
        let (p, g) = align(&predicted, &gold)
            .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
        rows.push((name, score_predictions(&p, &g)?));
    }
    let level = match a.mode {
        ModeArg::Sentence => "sentence-level",
        ModeArg::Document => "document-level",
    };
    match a.format {
        ReportFormat::Text => print!("{}", render_table(&format!("Evaluation: {level}"), &rows)),
        ReportFormat::Json => println!("{}", render_json(&rows)),
    }
    Ok(())
}

fn cmd_distribution(a: InputArgs) -> CliResult<()> {
    let corpus = read_corpus_arg(&a.input)?;
    let dist = label_distribution(&corpus);
    if dist.documents == 0 {
        log::warn!("no labeled documents with sentence predictions");
    }
    print!("{}", dist.render());
    Ok(())
}

fn html_escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

const ANSI_POSITIVE: &str = "\x1b[30;48;5;252m";
const ANSI_NEGATIVE: &str = "\x1b[97;48;5;240m";
const ANSI_RESET: &str = "\x1b[0m";

/// Positive sentences on light gray, negative on dark gray.
pub fn render_document(doc: &Document, html: bool) -> String {
    let mut out = String::new();
    if html {
        let _ = writeln!(
            out,
            "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">"
        );
        let _ = writeln!(out, "<title>{}</title>", html_escape(&doc.id));
        let _ = writeln!(
            out,
            "<style>.pos {{ background: #d9d9d9; }} .neg {{ background: #595959; color: #fff; }}</style>"
        );
        let _ = writeln!(out, "</head>\n<body>\n<p>");
    }
    let parts: Vec<String> = doc
        .sentences
        .iter()
        .map(|s| {
            let label = s.prediction.map(|p| p.label());
            if html {
                let class = match label {
                    Some(Polarity::Positive) => "pos",
                    Some(Polarity::Negative) => "neg",
                    None => "none",
                };
                format!("<span class=\"{class}\">{}</span>", html_escape(&s.text))
            } else {
                match label {
                    Some(Polarity::Positive) => format!("{ANSI_POSITIVE}{}{ANSI_RESET}", s.text),
                    Some(Polarity::Negative) => format!("{ANSI_NEGATIVE}{}{ANSI_RESET}", s.text),
                    None => s.text.clone(),
                }
            }
        })
        .collect();
    out.push_str(&parts.join(if html { "\n" } else { " " }));
    out.push('\n');
    if html {
        out.push_str("</p>\n</body>\n</html>\n");
    }
    out
}

fn cmd_render(a: RenderArgs) -> CliResult<()> {
    let corpus = read_corpus_arg(&a.input)?;
    let Some(doc) = corpus.iter().find(|d| d.id == a.doc) else {
        return usage(format!("no document `{}` in {}", a.doc, a.input.display()));
    };
    if doc.sentences.iter().all(|s| s.prediction.is_none()) {
        return usage(format!(
            "document `{}` has no sentence predictions; run `milsent predict` first",
            a.doc
        ));
    }
    let text = render_document(doc, matches!(a.format, RenderFormat::Html));
    match &a.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sentence_tokens(s: &SentenceInstance) -> Vec<String> {
    if s.tokens.is_empty() {
        tokenize(&s.text)
    } else {
        s.tokens.clone()
    }
}

fn document_tokens(d: &Document) -> Vec<String> {
    d.sentences.iter().flat_map(sentence_tokens).collect()
}

fn mean_embedding(d: &Document, dim: usize) -> Vec<f64> {
    let mut acc = vec![0.0; dim];
    for s in &d.sentences {
        for (a, x) in acc.iter_mut().zip(s.embedding.iter().flatten()) {
            *a += x;
        }
    }
    let n = d.sentences.len().max(1) as f64;
    acc.iter().map(|a| a / n).collect()
}

fn cmd_baseline(ctx: &Context, a: BaselineArgs) -> CliResult<()> {
    let mut corpus = read_corpus_arg(&a.input)?;
    let mode = EvalMode::from(a.mode);
    let mut labels = LabelSet::new();
    let mut run = Run::new("baseline", ctx.seed, ctx.threads);
    run.input("corpus", &a.input).output("labels", &a.output);

    let mut emit = |doc: &Document,
                    f: &mut dyn FnMut(Option<usize>) -> CliResult<Sentiment>|
     -> CliResult<()> {
        match mode {
            EvalMode::Document => {
                labels.insert(doc.id.clone(), f(None)?);
            }
            EvalMode::Sentence => {
                for i in 0..doc.sentences.len() {
                    labels.insert(sentence_key(&doc.id, i), f(Some(i))?);
                }
            }
        }
        Ok(())
    };

    match a.method {
        Method::Dictionary => {
            let (Some(pos), Some(neg)) = (&a.positive, &a.negative) else {
                return usage("the dictionary method needs --positive and --negative");
            };
            require_file(pos)?;
            require_file(neg)?;
            let name = pos
                .file_stem()
                .map_or("dictionary".into(), |s| s.to_string_lossy().into_owned());
            let dict = load_dictionary(name, pos, neg)?;
            for doc in &corpus {
                emit(doc, &mut |i| {
                    Ok(match i {
                        Some(i) => dictionary_classify(&sentence_tokens(&doc.sentences[i]), &dict),
                        None => dictionary_classify(&document_tokens(doc), &dict),
                    })
                })?;
            }
            run.input("positive", pos).input("negative", neg);
            run.config(serde_json::json!({ "method": a.method, "mode": a.mode }));
        }
        Method::BowLogreg => {
            let Some(train_path) = &a.train else {
                return usage("the bow-logreg method needs --train");
            };
            let train_docs = labeled_only(read_corpus_arg(train_path)?);
            let docs_tokens: Vec<Vec<String>> = train_docs.iter().map(document_tokens).collect();
            let targets: Vec<Polarity> = train_docs
                .iter()
                .map(|d| d.label.expect("filtered"))
                .collect();
            let index = BowIndex::new(docs_tokens.iter().flatten());
            let model = train_bow_logreg(&docs_tokens, &targets, index, a.l2, ctx.seed)?;
            log::info!(
                "logistic regression stopped after {} iterations",
                model.iterations
            );
            for doc in &corpus {
                emit(doc, &mut |i| {
                    let tokens = match i {
                        Some(i) => sentence_tokens(&doc.sentences[i]),
                        None => document_tokens(doc),
                    };
                    Ok(bow_predict(&model, &tokens)?.label().into())
                })?;
            }
            run.input("train", train_path);
            run.config(serde_json::json!({ "method": a.method, "mode": a.mode, "l2": a.l2 }));
        }
        Method::EmbeddingLogreg => {
            let Some(train_path) = &a.train else {
                return usage("the embedding-logreg method needs --train");
            };
            let mut train_docs = labeled_only(read_corpus_arg(train_path)?);
            let setup = embed_documents(&a.embed, &mut train_docs, ctx.seed)?;
            let test_setup = embed_documents(&a.embed, &mut corpus, ctx.seed)?;
            if test_setup.dim != setup.dim {
                return usage(format!(
                    "embedding dimension {} of the input differs from {} of the training corpus",
                    test_setup.dim, setup.dim
                ));
            }
            let features: Vec<SparseVector> = train_docs
                .iter()
                .map(|d| SparseVector::from_dense(&mean_embedding(d, setup.dim)))
                .collect();
            let targets: Vec<Polarity> = train_docs
                .iter()
                .map(|d| d.label.expect("filtered"))
                .collect();
            let model = train_logreg(&features, &targets, setup.dim, a.l2, ctx.seed)?;
            for doc in &corpus {
                emit(doc, &mut |i| {
                    let x = match i {
                        Some(i) => doc.sentences[i].embedding.clone().expect("embedded above"),
                        None => mean_embedding(doc, setup.dim),
                    };
                    Ok(dense_predict(&model, &x)?.label().into())
                })?;
            }
            run.input("train", train_path);
            if let Some(p) = &a.embed.embeddings {
                run.input("embeddings", p);
            }
            run.config(serde_json::json!({
                "method": a.method, "mode": a.mode, "l2": a.l2, "embedding": setup,
            }));
        }
    }

    write_labels(&a.output, &labels)?;
    let count = |s: Sentiment| labels.values().filter(|&&v| v == s).count();
    let (p, n, z) = (
        count(Sentiment::Positive),
        count(Sentiment::Negative),
        count(Sentiment::Neutral),
    );
    println!(
        "labels: {} (positive {p}, negative {n}, neutral {z})",
        labels.len()
    );
    run.summary(serde_json::json!({ "positive": p, "negative": n, "neutral": z }));
    run.finish(&a.output)
}

fn cmd_synth(ctx: &Context, a: SynthArgs) -> CliResult<()> {
    let data = generate_synthetic(
        a.groups,
        a.per_group,
        a.dim,
        a.separation,
        a.noise,
        ctx.seed,
    )?;
    let start = NaiveDate::from_ymd_opt(2020, 1, 1).expect("valid date");
    let width = a.groups.saturating_sub(1).to_string().len();
    let mut docs = Vec::with_capacity(a.groups);
    let mut vectors = String::new();
    for (k, (group, truth)) in data.dataset.groups().iter().zip(&data.labels).enumerate() {
        let id = format!("syn{k:0width$}");
        let texts: Vec<String> = (0..group.len())
            .map(|i| format!("synthetic sentence {i}."))
            .collect();
        let mut doc = Document::new(
            &id,
            "SYN",
            start + Duration::days(k as i64),
            texts.join(" "),
        );
        doc.label = Some(group.label);
        doc.sentences = texts
            .into_iter()
            .zip(truth)
            .map(|(t, &g)| {
                let mut s = SentenceInstance::new(t);
                s.gold = Some(g);
                s
            })
            .collect();
        for (i, x) in group.instances.iter().enumerate() {
            let values: Vec<String> = x.iter().map(f64::to_string).collect();
            let _ = writeln!(vectors, "{}\t{}", sentence_key(&id, i), values.join(" "));
        }
        docs.push(doc);
    }
    save_corpus(&a.output, &docs)?;
    fs::write(&a.vectors, vectors)
        .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", a.vectors.display())))?;
    println!("documents: {}", docs.len());
    println!("sentences: {}", data.dataset.n_instances());
    let mut run = Run::new("synth", ctx.seed, ctx.threads);
    run.output("corpus", &a.output)
        .output("vectors", &a.vectors)
        .config(serde_json::json!({
            "groups": a.groups,
            "per_group": a.per_group,
            "dim": a.dim,
            "separation": a.separation,
            "noise": a.noise,
        }));
    run.finish(&a.output)
}
