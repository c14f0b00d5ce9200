use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Errors caused by the invocation rather than by the computation.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(UsageError(msg.into()).into())
}

#[derive(Parser)]
#[command(
    name = "sparsetag",
    version,
    about = "Sparse-coded word features for CRF sequence labeling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a sparse-coding dictionary and codes for an embedding table.
    LearnDict(LearnDictArgs),
    /// Encode an embedding table against an existing dictionary.
    Encode(EncodeArgs),
    /// Train a CRF tagger.
    Train(TrainArgs),
    /// Tag a corpus with a trained model.
    Tag(TagArgs),
    /// Score predictions against gold labels.
    Eval(EvalArgs),
    /// Token and type coverage of a corpus by an embedding table.
    Coverage(CoverageArgs),
    /// Per-basis norms and usage frequencies of a learned dictionary.
    AnalyzeBasis(AnalyzeBasisArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum VariantArg {
    Sc1,
    Sc3,
    Sc4,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Pos,
    Ner,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Sc,
    Dense,
    Brown,
    #[value(name = "fr_w")]
    FrW,
    #[value(name = "fr_wc")]
    FrWc,
    Wi,
    #[value(name = "wi_sc")]
    WiSc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataFormat {
    Conllx,
    Conllu,
    Ner2002,
    Ner2003,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum EmbeddingFormatArg {
    Text,
    #[value(name = "word2vec-text")]
    Word2VecText,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum PosColumnArg {
    Fine,
    Coarse,
}

#[derive(Args)]
pub struct EmbeddingInput {
    /// Embedding table, one `word v1 .. vk` record per line.
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub embedding_format: EmbeddingFormatArg,
}

#[derive(Args)]
pub struct LearnDictArgs {
    #[command(flatten)]
    pub input: EmbeddingInput,
    /// Number of basis vectors.
    #[arg(long, default_value_t = 1024)]
    pub m: usize,
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value = "sc1")]
    pub variant: VariantArg,
    #[arg(long, default_value_t = 1e-5)]
    pub tau: f64,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 256)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out_dict: PathBuf,
    #[arg(long)]
    pub out_codes: PathBuf,
}

#[derive(Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub input: EmbeddingInput,
    #[arg(long)]
    pub dict: PathBuf,
    #[arg(long)]
    pub out_codes: PathBuf,
}

#[derive(Args)]
pub struct Resources {
    /// Sparse codes (`sc`, `wi_sc`).
    #[arg(long)]
    pub codes: Option<PathBuf>,
    /// Dense embeddings (`dense`).
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub embedding_format: EmbeddingFormatArg,
    /// Brown clusters, `bits<TAB>word<TAB>count` (`brown`).
    #[arg(long)]
    pub clusters: Option<PathBuf>,
}

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long, value_enum)]
    pub format: DataFormat,
    #[arg(long, value_enum, default_value = "fine")]
    pub pos_column: PosColumnArg,
    #[command(flatten)]
    pub resources: Resources,
    /// Fine-to-universal POS tag map, `fine<TAB>universal` per line.
    #[arg(long)]
    pub tagmap: Option<PathBuf>,
    /// Train on IOBES tags (NER only).
    #[arg(long)]
    pub iobes: bool,
    /// Use only the first N training sentences.
    #[arg(long)]
    pub first_n: Option<usize>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub window: u8,
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    #[arg(long, default_value_t = 0.001)]
    pub c2: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct TagArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub format: DataFormat,
    #[command(flatten)]
    pub resources: Resources,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long, value_enum)]
    pub format: DataFormat,
    #[arg(long, value_enum, default_value = "fine")]
    pub pos_column: PosColumnArg,
    /// Applied to the gold labels only.
    #[arg(long)]
    pub tagmap: Option<PathBuf>,
    /// Report TSV to add a row to.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value = "-")]
    pub treebank: String,
    #[arg(long, default_value = "-")]
    pub scheme: String,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Codes whose sparsity and `m` go into the report row.
    #[arg(long)]
    pub codes: Option<PathBuf>,
}

#[derive(Args)]
pub struct CoverageArgs {
    #[command(flatten)]
    pub input: EmbeddingInput,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub format: DataFormat,
}

#[derive(Args)]
pub struct AnalyzeBasisArgs {
    #[arg(long)]
    pub dict: PathBuf,
    #[arg(long)]
    pub codes: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn require_file(path: &Path, what: &str) -> anyhow::Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        usage(format!("{what} `{}` does not exist", path.display()))
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use sparsetag_core::Error as E;
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<E>() {
        Some(E::MissingResource(_) | E::InvalidArgument(_) | E::DimensionMismatch { .. }) => 2,
        _ => 1,
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("SPARSETAG_THREADS") {
        let n: usize = match v.parse() {
            Ok(n) if n > 0 => n,
            _ => {
                return usage(format!(
                    "SPARSETAG_THREADS must be a positive integer, got `{v}`"
                ))
            }
        };
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::LearnDict(a) => commands::learn_dict(a),
        Command::Encode(a) => commands::encode(a),
        Command::Train(a) => commands::train(a),
        Command::Tag(a) => commands::tag(a),
        Command::Eval(a) => commands::eval(a),
        Command::Coverage(a) => commands::coverage(a),
        Command::AnalyzeBasis(a) => commands::analyze_basis(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
