//! Command-line surface: graph building, encoding, discrimination,
//! gradient checking, and the self-test suite.

mod cmd_build_graph;
mod cmd_discriminate;
mod cmd_encode;
mod cmd_gradcheck;
mod cmd_selftest;
mod config;
mod io;

use clap::{Parser, Subcommand, ValueEnum};
use config::ConfigFlags;
use prosograph::graph::Language;
use std::path::PathBuf;
use std::process::ExitCode;

/// Exit code 1: bad input or failed validation. Exit code 2: an
/// internal invariant did not hold.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Internal(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<prosograph::GraphError> for CliError {
    fn from(e: prosograph::GraphError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<prosograph::EncoderError> for CliError {
    fn from(e: prosograph::EncoderError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<prosograph::DiscError> for CliError {
    fn from(e: prosograph::DiscError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<prosograph::NumError> for CliError {
    fn from(e: prosograph::NumError) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LangArg {
    En,
    Zh,
}

impl From<LangArg> for Language {
    fn from(l: LangArg) -> Language {
        match l {
            LangArg::En => Language::English,
            LangArg::Zh => Language::Chinese,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExpandLevel {
    Phoneme,
    Frame,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Component {
    Encoder,
    Discriminator,
}

#[derive(Parser)]
#[command(
    name = "prosograph",
    about = "Syntactic graphs, graph-convolution prosody encoding, and \
             multi-length mel discrimination with verified gradients",
    version
)]
struct Cli {
    #[command(flatten)]
    config: ConfigFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse CoNLL-U sentences and build syntactic graphs
    BuildGraph {
        /// Graph construction rules to apply
        #[arg(long, value_enum)]
        lang: LangArg,
        /// CoNLL-U input file
        #[arg(long)]
        conllu: PathBuf,
        /// Boundary map JSON (one object, or an array per sentence)
        #[arg(long)]
        boundary: PathBuf,
        /// Output graph file
        #[arg(long)]
        out: PathBuf,
        /// Optional DOT rendering of every graph
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Encode phoneme encodings over built graphs
    Encode {
        /// Graph file produced by build-graph
        #[arg(long)]
        graph: PathBuf,
        /// Phoneme-encoding tensor file
        #[arg(long, conflicts_with = "random")]
        phoneme_enc: Option<PathBuf>,
        /// Draw P random phoneme rows instead of reading a file
        #[arg(long, value_name = "P")]
        random: Option<usize>,
        /// Encoder parameter bundle
        #[arg(long, conflicts_with = "init_seed")]
        params: Option<PathBuf>,
        /// Initialize parameters from this seed
        #[arg(long, value_name = "N")]
        init_seed: Option<u64>,
        /// Output tensor file
        #[arg(long)]
        out: PathBuf,
        /// Expand the word-level output by durations
        #[arg(long, value_enum, requires = "durations")]
        expand: Option<ExpandLevel>,
        /// Duration table JSON (one object, or an array per sentence)
        #[arg(long)]
        durations: Option<PathBuf>,
    },
    /// Finite-difference verification of the backward passes
    Gradcheck {
        #[arg(long, value_enum)]
        component: Component,
    },
    /// Score a real/fake mel-spectrogram pair
    Discriminate {
        #[arg(long)]
        real: PathBuf,
        #[arg(long)]
        fake: PathBuf,
        /// Discriminator parameter bundle
        #[arg(long, conflicts_with = "init_seed")]
        params: Option<PathBuf>,
        /// Initialize parameters from this seed
        #[arg(long, value_name = "N")]
        init_seed: Option<u64>,
    },
    /// Run every invariant suite and report
    Selftest {
        /// Emit the report as JSON
        #[arg(long)]
        json: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::BuildGraph {
            lang,
            conllu,
            boundary,
            out,
            dot,
        } => cmd_build_graph::run(&cli.config, lang, &conllu, &boundary, &out, dot.as_deref()),
        Command::Encode {
            graph,
            phoneme_enc,
            random,
            params,
            init_seed,
            out,
            expand,
            durations,
        } => cmd_encode::run(
            &cli.config,
            &graph,
            phoneme_enc.as_deref(),
            random,
            params.as_deref(),
            init_seed,
            &out,
            expand,
            durations.as_deref(),
        ),
        Command::Gradcheck { component } => cmd_gradcheck::run(&cli.config, component),
        Command::Discriminate {
            real,
            fake,
            params,
            init_seed,
        } => cmd_discriminate::run(&cli.config, &real, &fake, params.as_deref(), init_seed),
        Command::Selftest { json } => cmd_selftest::run(&cli.config, json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ CliError::Input(_)) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
        Err(e @ CliError::Internal(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
