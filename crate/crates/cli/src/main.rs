use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

use ctxpolarity::{Error, FeatureMode, ScoreMode};

/// Context-dependent sentiment polarity: every pipeline stage as a subcommand.
#[derive(Parser, Debug)]
#[command(name = "ctxpolarity", version, about)]
struct Cli {
    /// JSON pipeline configuration; command-line flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalize, tokenize and lemmatize a labeled corpus.
    Preprocess(PreprocessArgs),
    /// Extract bags of concepts from preprocessed sentences.
    Extract(ExtractArgs),
    /// Convert a lexicon table into its JSON form.
    BuildLexicon(BuildLexiconArgs),
    /// Compute per-concept polarity statistics and the ambiguous set.
    DetectAmbiguous(DetectArgs),
    /// Collect and filter positive/negative contextual concepts.
    ProfileContext(ProfileArgs),
    /// Add knowledge-graph neighbors to context profiles.
    Augment(AugmentArgs),
    /// Train a sentence classifier (and its disambiguation models).
    Train(TrainArgs),
    /// Resolve the polarity of one concept inside one sentence.
    Classify(ClassifyArgs),
    /// Predict sentence polarity for a JSONL file of texts.
    Predict(PredictArgs),
    /// Cross-validate the feature schemes and write a report.
    Evaluate(EvaluateArgs),
    /// Run every stage in order, writing all artifacts.
    RunAll(RunAllArgs),
}

#[derive(Args, Debug)]
struct PreprocessArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    /// Raw corpus or preprocessed sentences.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Lexicon, edge and embedding files whose keys form the concept vocabulary.
    #[arg(long, num_args = 1..)]
    vocab: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BuildLexiconArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DetectArgs {
    /// Concept records from `extract`.
    #[arg(long)]
    concepts: PathBuf,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, value_parser = parse_score_mode)]
    score_mode: Option<ScoreMode>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    /// Output of `detect-ambiguous`.
    #[arg(long)]
    ambiguous: PathBuf,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Concept records from `extract`.
    #[arg(long)]
    concepts: PathBuf,
    #[arg(long)]
    pmi_min: Option<f64>,
    #[arg(long)]
    top_k: Option<usize>,
    /// Route contextual concepts by the sentence label even under negation.
    #[arg(long)]
    no_negation_flip: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AugmentArgs {
    #[arg(long)]
    profiles: PathBuf,
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    top_m: Option<usize>,
    #[arg(long)]
    neighbor_limit: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Feature scheme: bow, boc or boc_cs.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<FeatureMode>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Lexicon, edge and embedding files (kinds are detected from content).
    #[arg(long, num_args = 1..)]
    resources: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    sentence: String,
    #[arg(long)]
    concept: String,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// JSONL with `id` and `text` fields.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, num_args = 1..)]
    resources: Vec<PathBuf>,
    /// Comma-separated feature schemes.
    #[arg(long, value_delimiter = ',', value_parser = parse_mode)]
    configs: Vec<FeatureMode>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunAllArgs {
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threshold: Option<f64>,
}

fn parse_mode(s: &str) -> Result<FeatureMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_score_mode(s: &str) -> Result<ScoreMode, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown score mode {s:?} (unit, sentence_score, lexicon_intensity)"))
}

/// Process exit status for a failed run.
fn exit_code(err: &Error) -> u8 {
    match err.root() {
        Error::MissingFile(_) => 2,
        Error::Schema { .. } | Error::Config(_) | Error::UnknownLabel(_) | Error::Json(_) => 3,
        Error::Invariant(_) => 4,
        _ => 1,
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
}

fn load_config(path: Option<&Path>) -> ctxpolarity::Result<ctxpolarity::PipelineConfig> {
    match path {
        Some(p) => ctxpolarity::PipelineConfig::load(p),
        None => Ok(ctxpolarity::PipelineConfig::default()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    let result = load_config(cli.config.as_deref()).and_then(|config| commands::run(cli.command, config));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
