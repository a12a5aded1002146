//! The `zorbalik` command line.

use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use zorbalik_core::corpus::{corpus_stats, load_corpus, DEFAULT_LABEL_COLUMN, DEFAULT_TEXT_COLUMN};
use zorbalik_core::eval::{
    confusion_matrix, default_grid, grid_search, render_report, reproduce_paper_tables, run_benchmark,
    summarize_metrics, BenchmarkConfig, ColumnReading, ConfusionMatrix, EvalReport, ReportFormat, DEFAULT_FOLDS,
};
use zorbalik_core::model::{fit_model, label_of, load_model, model_to_json, save_model, ClassifierSpec, ModelKind, TrainedModel};
use zorbalik_core::normalize::{normalize_corpus, normalize_document, NormalizerConfig};
use zorbalik_core::{Error, LabeledCorpus, TfidfFeaturizer};

mod render;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Md,
    Csv,
    Json,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Md => ReportFormat::Markdown,
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "zorbalik", version, about = "Cyberbullying detection for Turkish short texts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Input CSV with a header row [default: none]
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true, default_value = DEFAULT_TEXT_COLUMN)]
    pub text_col: String,
    #[arg(long, global = true, default_value = DEFAULT_LABEL_COLUMN)]
    pub label_col: String,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 0.3)]
    pub test_fraction: f64,
    #[arg(long, global = true, default_value_t = 2)]
    pub min_df: usize,
    /// Model kind for `train`, saved model path for `evaluate` and `predict` [default: none]
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Pick hyperparameters by stratified cross-validation on the training split [default: false]
    #[arg(long, global = true, default_value_t = false)]
    pub grid_search: bool,
    /// Stopword list, one word per line [default: bundled list]
    #[arg(long, global = true)]
    pub stopwords: Option<PathBuf>,
    /// Slang lexicon, `variant<TAB>canonical` per line [default: bundled lexicon]
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    /// Output file, the model file for `train` [default: standard output]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "md")]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Corpus statistics per label
    Stats,
    /// Normalized tokens for every row
    Preprocess,
    /// Fit one model on the whole input and write it as JSON
    Train,
    /// Score a labeled CSV with a saved model
    Evaluate,
    /// Fit and score all nineteen models on a stratified split
    Benchmark,
    /// Score raw messages from standard input, one per line
    Predict,
    /// Recompute the published metric table from the published confusion counts
    PaperCheck,
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Usage(String),
    Io(String),
    /// Already reported; only the exit code matters.
    Quiet,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Parses `args` (program name first) and runs the subcommand.
pub fn run_cli<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{text}");
            return EXIT_OK;
        }
    };
    match run(&cli, stdin, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Core(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_DATA
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_DATA
        }
        Err(Failure::Quiet) => EXIT_DATA,
    }
}

fn run(cli: &Cli, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    match cli.command {
        Command::Stats => {
            let corpus = corpus(cli)?;
            emit(cli, stdout, &render::stats(&corpus_stats(&corpus), cli.format)?)
        }
        Command::Preprocess => {
            let corpus = corpus(cli)?;
            let tokens = normalize_corpus(corpus.texts(), &normalizer(cli)?);
            emit(cli, stdout, &render::tokens(&corpus, &tokens, cli.format)?)
        }
        Command::Train => train(cli, stdout, stderr),
        Command::Evaluate => {
            let model = saved_model(cli)?;
            let corpus = corpus(cli)?;
            let featurizer = TfidfFeaturizer::from_space(model.space.clone())?;
            let x = featurizer.transform(&normalize_corpus(corpus.texts(), &normalizer(cli)?));
            let pred = model.predict_labels(&x)?;
            let confusion = confusion_matrix(&corpus.labels(), &pred)?;
            let report = Evaluation {
                model: model.kind(),
                documents: corpus.len(),
                confusion,
                metrics: summarize_metrics(&confusion),
            };
            emit(cli, stdout, &render::evaluation(&report, cli.format)?)
        }
        Command::Benchmark => {
            let corpus = corpus(cli)?;
            let config = BenchmarkConfig {
                test_fraction: cli.test_fraction,
                seed: cli.seed,
                min_df: cli.min_df,
                grid_search: cli.grid_search,
                folds: DEFAULT_FOLDS,
                normalizer: normalizer(cli)?,
            };
            let report = run_benchmark(&corpus, &config)?;
            emit(cli, stdout, &render_report(&report, cli.format.into())?)
        }
        Command::Predict => {
            let model = saved_model(cli)?;
            let config = normalizer(cli)?;
            let featurizer = TfidfFeaturizer::from_space(model.space.clone())?;
            let mut tokens = Vec::new();
            for (i, line) in stdin.lines().enumerate() {
                let line = line.map_err(|e| Failure::Io(format!("standard input line {}: {e}", i + 1)))?;
                tokens.push(normalize_document(&line, &config));
            }
            let probs = model.predict_proba(&featurizer.transform(&tokens))?;
            let rows: Vec<Prediction> = probs
                .into_iter()
                .map(|p| Prediction {
                    probability: p,
                    label: label_of(p),
                })
                .collect();
            emit(cli, stdout, &render::predictions(&rows, cli.format)?)
        }
        Command::PaperCheck => {
            let check = reproduce_paper_tables(ColumnReading::Swapped)?;
            emit(cli, stdout, &check.render())?;
            if check.all_match() {
                Ok(())
            } else {
                let _ = writeln!(
                    stderr,
                    "error: {}/{} rows reproduced",
                    check.n_matched(),
                    check.rows.len()
                );
                Err(Failure::Quiet)
            }
        }
    }
}

fn train(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let kind: ModelKind = cli
        .model
        .as_deref()
        .ok_or_else(|| Failure::Usage("`train` needs --model <kind>".into()))?
        .parse()
        .map_err(|e: Error| Failure::Usage(e.to_string()))?;
    let corpus = corpus(cli)?;
    let tokens = normalize_corpus(corpus.texts(), &normalizer(cli)?);
    let featurizer = TfidfFeaturizer::fit(&tokens, cli.min_df);
    let x = featurizer.transform(&tokens);
    let y = corpus.labels();
    let spec = if cli.grid_search {
        grid_search(&default_grid(kind), &x, &y, DEFAULT_FOLDS, cli.seed)?.best
    } else {
        ClassifierSpec::new(kind)
    };
    let model = fit_model(&spec, &x, &y, cli.seed)?;
    match &cli.out {
        Some(out) => save_model(&model, out)?,
        None => {
            let text = model_to_json(&model)? + "\n";
            stdout.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string()))?;
        }
    }
    writeln!(
        stderr,
        "trained {} on {} documents, vocabulary {}: {}",
        kind,
        corpus.len(),
        featurizer.vocabulary().len(),
        spec.describe()
    )
    .map_err(|e| Failure::Io(e.to_string()))
}

#[derive(Debug, Serialize)]
struct Evaluation {
    model: ModelKind,
    documents: usize,
    confusion: ConfusionMatrix,
    metrics: EvalReport,
}

#[derive(Debug, Serialize)]
struct Prediction {
    probability: f64,
    label: u8,
}

fn corpus(cli: &Cli) -> std::result::Result<LabeledCorpus, Failure> {
    let input = cli
        .input
        .as_ref()
        .ok_or_else(|| Failure::Usage(format!("`{}` needs --input <csv>", name(cli.command))))?;
    Ok(load_corpus(input, &cli.text_col, &cli.label_col)?)
}

fn saved_model(cli: &Cli) -> std::result::Result<TrainedModel, Failure> {
    let path = cli
        .model
        .as_ref()
        .ok_or_else(|| Failure::Usage(format!("`{}` needs --model <model file>", name(cli.command))))?;
    Ok(load_model(path)?)
}

fn normalizer(cli: &Cli) -> std::result::Result<NormalizerConfig, Failure> {
    let mut config = NormalizerConfig::bundled();
    if let Some(p) = &cli.stopwords {
        config.load_stopwords(p)?;
    }
    if let Some(p) = &cli.lexicon {
        config.load_lexicon(p)?;
    }
    Ok(config)
}

fn name(command: Command) -> &'static str {
    match command {
        Command::Stats => "stats",
        Command::Preprocess => "preprocess",
        Command::Train => "train",
        Command::Evaluate => "evaluate",
        Command::Benchmark => "benchmark",
        Command::Predict => "predict",
        Command::PaperCheck => "paper-check",
    }
}

fn emit(cli: &Cli, stdout: &mut dyn Write, text: &str) -> Outcome {
    match &cli.out {
        Some(path) if cli.command != Command::Train => write_file(path, text),
        _ => stdout.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string())),
    }
}

fn write_file(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Core(Error::io(path, e)))
}
