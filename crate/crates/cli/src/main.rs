//! Command-line front end.
//!
//! Exit codes are part of the interface: 0 success, 1 usage error, 2
//! incomplete or inconsistent data, 3 baseline or fingerprint failure,
//! 4 interrupted (resumable).

mod commands;
mod config;
mod util;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use mutent::entropy::LogBase;

pub mod exit_codes {
    pub const USAGE: i32 = 1;
    pub const INCOMPLETE: i32 = 2;
    pub const BASELINE: i32 = 3;
    pub const INTERRUPTED: i32 = 4;
}

/// A command failure carrying its exit code.
#[derive(Debug)]
pub struct CmdError {
    pub code: i32,
    pub message: Option<String>,
}

impl CmdError {
    pub fn new(code: i32, message: String) -> CmdError {
        CmdError {
            code,
            message: Some(message),
        }
    }

    /// Exit with a code but no message (the command already printed output).
    pub fn silent(code: i32) -> CmdError {
        CmdError {
            code,
            message: None,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "mutent",
    version,
    about = "Mutation-driven test-suite analytics: kill matrices, survivor entropy, information weights"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SessionSource {
    /// Session database file.
    #[arg(long)]
    db: Option<PathBuf>,
    /// Analyze an interchange JSON document instead of a session db.
    #[arg(long)]
    from: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the mutation analysis, resuming any pending cells.
    Run {
        /// Project root containing the sources and test suite.
        #[arg(long, default_value = ".")]
        project: PathBuf,
        /// Session database file (created on first run).
        #[arg(long)]
        db: PathBuf,
        /// Settings file (default: <project>/mutent.conf when present).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Operator registry JSON (default: built-in operator set).
        #[arg(long)]
        operators: Option<PathBuf>,
        /// matrix: one cell per (mutant, test); group: the two per-test
        /// configurations (only t / all except t).
        #[arg(long)]
        mode: Option<String>,
        /// Worker count.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        timeout_factor: Option<f64>,
        /// Highest mutation order to compose.
        #[arg(long)]
        order: Option<usize>,
        /// Mutant count cap.
        #[arg(long)]
        cap: Option<usize>,
        /// Sampling seed for higher-order composition.
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated source files to mutate (relative to project).
        #[arg(long)]
        sources: Option<String>,
        /// Language tag selecting the matching mode.
        #[arg(long)]
        language: Option<String>,
    },
    /// Emit the metrics report as canonical JSON.
    Metrics {
        #[command(flatten)]
        source: SessionSource,
        #[arg(long, default_value = "e", value_parser = config::parse_log_base)]
        log_base: LogBase,
        /// Also report graph stats with timeout-uncertain survivors included.
        #[arg(long)]
        include_uncertain: bool,
        /// Override the source character count used for entropy density.
        #[arg(long)]
        l_code: Option<u64>,
        /// json (full report) | csv (the weight-profile table)
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Emit the entropy curve over nested test prefixes.
    Curve {
        #[command(flatten)]
        source: SessionSource,
        /// declaration | reverse | impact | file:PATH
        #[arg(long, default_value = "declaration")]
        ordering: String,
        #[arg(long, default_value = "e", value_parser = config::parse_log_base)]
        log_base: LogBase,
        /// csv | json
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Export a session as a canonical interchange document.
    Export {
        #[arg(long)]
        db: PathBuf,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include wall-clock durations (breaks export determinism).
        #[arg(long)]
        durations: bool,
        /// Stamp the provenance with the current time (breaks determinism).
        #[arg(long)]
        timestamp: bool,
    },
    /// Import an interchange document into a session db.
    Import {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        db: PathBuf,
    },
    /// Export the mutation graph as an adjacency list (one edge per line).
    Graph {
        #[command(flatten)]
        source: SessionSource,
        /// Emit the full sampled neighborhood instead of the surviving
        /// induced subgraph.
        #[arg(long)]
        full: bool,
        /// Keep timeout-uncertain survivors in the induced subgraph.
        #[arg(long)]
        include_uncertain: bool,
        /// Drop the implemented-program node.
        #[arg(long)]
        exclude_impl: bool,
    },
    /// Exact small-space trajectory plus estimation-path cross-validation.
    Lab {
        /// Declarative space config (alphabet, length, predicate rules).
        #[arg(long)]
        space: PathBuf,
        #[arg(long, default_value = "e", value_parser = config::parse_log_base)]
        log_base: LogBase,
        /// csv | json
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Toy-language test runner used by the bundled fixture project.
    Toy {
        #[command(subcommand)]
        command: ToyCommand,
    },
}

#[derive(Subcommand)]
enum ToyCommand {
    /// Print one test id per line, in declaration order.
    Discover {
        #[arg(long)]
        tests: PathBuf,
    },
    /// Run tests; exit 0 iff every selected test passes.
    Test {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        tests: PathBuf,
        /// Comma-separated test ids to run (default: all).
        #[arg(long)]
        only: Option<String>,
        /// Comma-separated test ids to exclude.
        #[arg(long)]
        skip: Option<String>,
        /// Statement budget; unlimited when absent.
        #[arg(long)]
        fuel: Option<u64>,
    },
    /// Emit a coverage-only interchange document for the suite.
    Cover {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        tests: PathBuf,
    },
}

fn dispatch(cli: Cli) -> Result<(), CmdError> {
    match cli.command {
        Command::Run {
            project,
            db,
            config: config_path,
            operators,
            mode,
            jobs,
            timeout_factor,
            order,
            cap,
            seed,
            sources,
            language,
        } => {
            let mut overrides: BTreeMap<String, String> = BTreeMap::new();
            let mut set = |k: &str, v: Option<String>| {
                if let Some(v) = v {
                    overrides.insert(k.to_string(), v);
                }
            };
            set("mode", mode);
            set("jobs", jobs.map(|v| v.to_string()));
            set("timeout_factor", timeout_factor.map(|v| v.to_string()));
            set("order", order.map(|v| v.to_string()));
            set("cap", cap.map(|v| v.to_string()));
            set("seed", seed.map(|v| v.to_string()));
            set("sources", sources);
            set("language", language);
            commands::run::cmd_run(&commands::run::RunArgs {
                project,
                db,
                config: config_path,
                operators,
                overrides,
            })
        }
        Command::Metrics {
            source,
            log_base,
            include_uncertain,
            l_code,
            format,
        } => commands::analyze::cmd_metrics(
            &source.db,
            &source.from,
            log_base,
            include_uncertain,
            l_code,
            &format,
        ),
        Command::Curve {
            source,
            ordering,
            log_base,
            format,
        } => commands::analyze::cmd_curve(&source.db, &source.from, &ordering, log_base, &format),
        Command::Export {
            db,
            out,
            durations,
            timestamp,
        } => commands::transfer::cmd_export(&db, &out, durations, timestamp),
        Command::Import { file, db } => commands::transfer::cmd_import(&file, &db),
        Command::Graph {
            source,
            full,
            include_uncertain,
            exclude_impl,
        } => commands::graph::cmd_graph(
            &source.db,
            &source.from,
            full,
            include_uncertain,
            exclude_impl,
        ),
        Command::Lab {
            space,
            log_base,
            format,
        } => commands::lab::cmd_lab(&space, log_base, &format),
        Command::Toy { command } => match command {
            ToyCommand::Discover { tests } => commands::toy::discover(&tests),
            ToyCommand::Test {
                src,
                tests,
                only,
                skip,
                fuel,
            } => commands::toy::run_tests(&src, &tests, &only, &skip, fuel),
            ToyCommand::Cover { src, tests } => commands::toy::cover(&src, &tests),
        },
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // keep clap's help/version on stdout with success, everything
            // else is a usage error with our exit-code contract
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    std::process::exit(0);
                }
                _ => {
                    eprint!("{e}");
                    std::process::exit(exit_codes::USAGE);
                }
            }
        }
    };
    match dispatch(cli) {
        Ok(()) => {}
        Err(CmdError { code, message }) => {
            if let Some(message) = message {
                eprintln!("error: {message}");
            }
            std::process::exit(code);
        }
    }
}
