//! `insight`: ingest a Stack Exchange dump and mine insightful comments.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use insight_core::Error;

use crate::config::AppConfig;

#[derive(Debug, Parser)]
#[command(
    name = "insight",
    version,
    about = "Mine insightful Stack Overflow comments for code"
)]
pub struct Cli {
    /// Index directory.
    #[arg(long, global = true, env = "INSIGHT_INDEX")]
    index: Option<PathBuf>,

    /// Flat `key = value` configuration file.
    #[arg(long, global = true, env = "INSIGHT_CONFIG")]
    config: Option<PathBuf>,

    /// Directory with data files that override the built-in lists.
    #[arg(long, global = true, env = "INSIGHT_DATA_DIR")]
    data_dir: Option<PathBuf>,

    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// `lexicon` or `neutral`.
    #[arg(long, global = true)]
    sentiment_provider: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a dump and write the index.
    Ingest(IngestArgs),
    /// Rank the comments of one indexed answer.
    Rank(RankArgs),
    /// Recommend refined comments for a code snippet.
    Recommend(RecommendArgs),
    /// Evaluate recall and MRR against gold labels.
    Eval(EvalArgs),
    /// LDA topic analysis of the indexed code.
    Topics(TopicsArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Directory holding Posts.xml and Comments.xml (or posts.jsonl and comments.jsonl).
    #[arg(long, env = "INSIGHT_INPUT")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub posts: Option<PathBuf>,
    #[arg(long)]
    pub comments: Option<PathBuf>,
    #[arg(long)]
    pub users: Option<PathBuf>,
    /// `none`, `api-study` or `gold-style`.
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub answer_id: u64,
    /// Segment ordinal; the first segment by default.
    #[arg(long)]
    pub segment: Option<u32>,
    /// Print the per-comment score table as TSV.
    #[arg(long)]
    pub explain: bool,
    /// Heuristic subset such as `P,R,CR`.
    #[arg(long)]
    pub heuristics: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Write the interaction network in DOT format.
    #[arg(long)]
    pub dump_graph: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    /// File with the query code.
    #[arg(long)]
    pub code: PathBuf,
    /// `java`, `android` or `c#`.
    #[arg(long)]
    pub domain: Option<String>,
    #[arg(long)]
    pub top_n: Option<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// CSV with `comment_id,category,domain` rows.
    #[arg(long)]
    pub gold: PathBuf,
    /// `ablation`, `all`, or heuristic sets separated by `;` (e.g. `P;P,R`).
    #[arg(long, default_value = "ablation")]
    pub sets: String,
    /// Write the TSV report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct TopicsArgs {
    #[arg(long)]
    pub domain: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the TSV report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

impl Cli {
    /// Defaults, then the config file, then flags and environment.
    fn app_config(&self) -> Result<AppConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => AppConfig::load(path)?,
            None => AppConfig::default(),
        };
        if let Some(dir) = &self.index {
            cfg.index_dir.clone_from(dir);
        }
        if let Some(dir) = &self.data_dir {
            cfg.data_dir = Some(dir.clone());
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        if let Some(p) = &self.sentiment_provider {
            cfg.sentiment_provider = p.parse()?;
        }
        Ok(cfg)
    }
}

/// 2 for bad input, 3 for a missing or stale index, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Index(_)) => 3,
        Some(
            Error::InputNotFound(_)
            | Error::Xml(_)
            | Error::Json { .. }
            | Error::Parse { .. }
            | Error::Config(_)
            | Error::InvalidInput(_)
            | Error::NotFound(_)
            | Error::InvalidTarget(_),
        ) => 2,
        Some(Error::Io { .. }) | None => 1,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = cli.app_config()?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot size the worker pool: {e}")))?;
    }
    match cli.command {
        Command::Ingest(args) => commands::ingest(&mut cfg, &args),
        Command::Rank(args) => commands::rank(&mut cfg, &args),
        Command::Recommend(args) => commands::recommend(&mut cfg, &args),
        Command::Eval(args) => commands::eval(&mut cfg, &args),
        Command::Topics(args) => commands::topics(&mut cfg, &args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
