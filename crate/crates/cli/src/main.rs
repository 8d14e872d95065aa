//! `epb`: exclusivity-principle bounds from the command line.

mod commands;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "epb",
    version,
    about = "Exclusivity-graph bounds and the two-copy CHSH derivation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphFormat {
    Dot,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Lr,
    Fp,
    Theta,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NamedGraph {
    Chsh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Symmetric,
    General,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Independence number, fractional packing and Lovász theta of a graph.
    Bounds {
        #[arg(
            long,
            value_enum,
            conflicts_with = "graph_file",
            required_unless_present = "graph_file"
        )]
        graph: Option<NamedGraph>,
        /// Graph in the JSON form written by `epb graph --format json`.
        #[arg(long, value_name = "JSON")]
        graph_file: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "all")]
        method: Method,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// The four hand-built nine-event sets.
    Table1 {
        /// Check exclusivity, membership pattern and probabilities.
        #[arg(long)]
        verify: bool,
        /// Evaluate the probabilities at this p in [0, 1/2].
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// All nine-event sets around a two-parity event.
    Enumerate {
        /// e.g. "A0A'0- A1A'1-"
        #[arg(long, allow_hyphen_values = true)]
        ninth: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Derive the bound on the CHSH sum.
    Prove {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Export the exclusivity graph of a scenario.
    Graph {
        #[arg(long, value_enum)]
        scenario: NamedGraph,
        #[arg(long, value_enum, default_value = "json")]
        format: GraphFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the sixteen-set sum identity on random behaviors.
    IdentityCheck {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Overridden by the EPB_SEED environment variable.
        #[arg(long, default_value_t = commands::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

/// Bad input from the user; exit status 2.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// A check did not pass; exit status 1. The report has already been written.
#[derive(Debug)]
struct VerificationFailed(String);

impl fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for VerificationFailed {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    std::panic::set_hook(Box::new(|info| eprintln!("epb: internal error: {info}")));
    let mut stdout = std::io::stdout().lock();
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        commands::run(cli.command, &mut stdout)
    }));
    let _ = stdout.flush();
    match result {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("epb: {e:#}");
            if e.chain().any(|c| c.is::<UsageError>()) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
        Err(_) => ExitCode::from(1),
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<std::io::Error>()
            .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}
