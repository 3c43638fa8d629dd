use std::io::BufReader;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use wat_cli::commands::classify::{self, ClassifyArgs, InputFormat};
use wat_cli::commands::cluster::{self, ClusterArgs};
use wat_cli::commands::convert;
use wat_cli::commands::report::{self, ReportArgs};
use wat_cli::commands::validate_corpus::{self, ValidateCorpusArgs};
use wat_cli::config::{Config, OutputFormat};
use wat_cli::EXIT_CONFIG;

/// Web attack taxonomy toolkit: classify HTTP requests and access-log
/// entries into nine-axis attack vectors, store them compactly, and
/// analyze the encoded vectors.
#[derive(Parser)]
#[command(name = "wat", version, about)]
struct Cli {
    /// Config file in key = value sections; WAT_* variables override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify requests from a file; emit a record per detected attack.
    Classify {
        /// Input file: raw requests separated by %%% lines, or log lines.
        input: PathBuf,
        /// Input flavor.
        #[arg(long, value_enum, default_value_t = InputFormat::Raw)]
        format: InputFormat,
        /// Rules file (defaults to the bundled rules).
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Append detected vectors to this store.
        #[arg(long)]
        store: Option<PathBuf>,
        /// Write records here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record format: text or jsonl.
        #[arg(long)]
        output: Option<String>,
    },
    /// Encode text vectors from stdin into hex records on stdout.
    Encode,
    /// Decode hex records from stdin into text vectors on stdout.
    Decode,
    /// Classify the corpus and compare against the published vectors.
    ValidateCorpus {
        /// Corpus file (defaults to the bundled corpus).
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Rules file (defaults to the bundled rules).
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Cluster stored vectors at a distance threshold.
    Cluster {
        /// Vector store to read.
        #[arg(long)]
        store: Option<PathBuf>,
        /// Link threshold in [0, 1].
        #[arg(long, allow_hyphen_values = true)]
        threshold: String,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Severity histogram and per-threat counts for a store.
    Report {
        /// Vector store to read.
        #[arg(long)]
        store: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<i32> {
    let config = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Classify { input, format, rules, store, out, output } => {
            let output = output.as_deref().map(parse_output).transpose()?;
            let args = ClassifyArgs { input, format, rules, store, out, output };
            classify::run(&args, &config)
        }
        Command::Encode => convert::run_encode(
            BufReader::new(std::io::stdin().lock()),
            std::io::stdout().lock(),
        ),
        Command::Decode => convert::run_decode(
            BufReader::new(std::io::stdin().lock()),
            std::io::stdout().lock(),
        ),
        Command::ValidateCorpus { corpus, rules } => {
            validate_corpus::run(&ValidateCorpusArgs { corpus, rules }, &config)
        }
        Command::Cluster { store, threshold, out } => {
            cluster::run(&ClusterArgs { store, threshold, out }, &config)
        }
        Command::Report { store } => report::run(&ReportArgs { store }, &config),
    }
}

fn parse_output(s: &str) -> Result<OutputFormat> {
    match s.to_ascii_lowercase().as_str() {
        "text" => Ok(OutputFormat::Text),
        "jsonl" | "jsonlines" => Ok(OutputFormat::JsonLines),
        other => anyhow::bail!("unknown output format {other:?} (want text or jsonl)"),
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("wat: {e:#}");
            EXIT_CONFIG
        }
    };
    std::process::exit(code);
}
