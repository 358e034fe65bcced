use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use blogsv::corpus::{evaluate_corpus, load_corpus};
use blogsv::lexicon::{self, load_versioned, save_lexicon, LexiconFiles, LexiconStore};
use blogsv::repro::{bundled_lexicon, repro};
use blogsv::service::{self, ServiceConfig};
use blogsv::simulate::{simulate, simulation_lexicon, SimulationConfig};
use blogsv_core::{LexiconSnapshot, Thresholds};
use clap::{Parser, Subcommand, ValueEnum};

/// Exit code for operational failures (unreadable input, bad flags, IO).
const EXIT_OPERATIONAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "blogsv",
    version,
    about = "Blog post supervision: batch checks, table reproduction, lexicon management and the moderation service"
)]
struct Cli {
    /// Directory holding slang.txt, demand.txt, stopwords.txt and blocked_links.txt.
    /// Without it, check and simulate use the bundled lexicon.
    #[arg(long, global = true, env = "BLOGSV_LEXICON_DIR")]
    lexicon_dir: Option<PathBuf>,

    /// Directory for the queue and lexicon journals. Defaults to the lexicon directory.
    #[arg(long, global = true, env = "BLOGSV_JOURNAL_DIR")]
    journal_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a directory of post files. Exits 0 when all publish, 1 when any
    /// is pending, 2 when any is rejected.
    Check {
        corpus: PathBuf,
        #[arg(long, default_value_t = Thresholds::default())]
        thresholds: Thresholds,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Also write the JSON report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run a bundled table fixture and compare with the published outcome.
    Repro {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        table: u8,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Estimate the detection rate on a synthetic corpus.
    Simulate {
        #[arg(long, default_value_t = 1000)]
        posts: usize,
        #[arg(long, default_value_t = 0.5)]
        offensive_fraction: f64,
        #[arg(long, default_value_t = 0.1)]
        evasive_fraction: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = Thresholds::default())]
        thresholds: Thresholds,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Inspect or change the lexicon files.
    Lexicon {
        #[command(subcommand)]
        command: LexiconCommand,
    },
    /// Run the HTTP service until interrupted.
    Serve {
        #[arg(long, default_value_t = 8080, env = "BLOGSV_PORT")]
        port: u16,
        /// File of `<key> <role> <actor>` lines.
        #[arg(long, env = "BLOGSV_API_KEYS")]
        api_keys: PathBuf,
        #[arg(long, default_value_t = Thresholds::default())]
        thresholds: Thresholds,
    },
}

#[derive(Debug, Subcommand)]
enum LexiconCommand {
    /// Write the bundled lexicon into the lexicon directory.
    Init {
        /// Overwrite existing list files.
        #[arg(long)]
        force: bool,
    },
    AddDemand {
        term: String,
        #[arg(long, default_value = "")]
        note: String,
        #[arg(long, default_value = "cli")]
        actor: String,
    },
    RemoveDemand {
        term: String,
        #[arg(long, default_value = "")]
        note: String,
        #[arg(long, default_value = "cli")]
        actor: String,
    },
    /// Print the version and list sizes, then the demand terms.
    List,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_OPERATIONAL)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            // Library errors already carry their causes in their messages.
            eprintln!("error: {e}");
            ExitCode::from(EXIT_OPERATIONAL)
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn lexicon_or_bundled(dir: Option<&Path>, journal_dir: Option<&Path>) -> anyhow::Result<LexiconSnapshot> {
    match dir {
        Some(dir) => {
            let journal = journal_dir.unwrap_or(dir).join(lexicon::JOURNAL_FILE);
            Ok(load_versioned(&LexiconFiles::in_dir(dir), &journal)?)
        }
        None => Ok(bundled_lexicon()),
    }
}

fn require_lexicon_dir(dir: Option<PathBuf>) -> anyhow::Result<PathBuf> {
    match dir {
        Some(dir) => Ok(dir),
        None => bail!("--lexicon-dir (or BLOGSV_LEXICON_DIR) is required for this command"),
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Check {
            corpus,
            thresholds,
            format,
            report,
        } => {
            let snapshot = lexicon_or_bundled(cli.lexicon_dir.as_deref(), cli.journal_dir.as_deref())?;
            let posts = load_corpus(&corpus)?;
            let result = evaluate_corpus(&posts, &snapshot, &thresholds);
            match format {
                Format::Table => print!("{}", result.render_table()),
                Format::Json => print_json(&result)?,
            }
            if let Some(path) = report {
                let json = serde_json::to_vec_pretty(&result)?;
                std::fs::write(&path, json).map_err(|e| anyhow!("cannot write report {}: {e}", path.display()))?;
            }
            Ok(result.exit_code() as u8)
        }
        Command::Repro { table, format } => {
            let comparison = repro(table, &Thresholds::default()).context("unknown table")?;
            match format {
                Format::Table => print!("{}", comparison.render_table()),
                Format::Json => print_json(&comparison)?,
            }
            Ok(u8::from(!comparison.ok))
        }
        Command::Simulate {
            posts,
            offensive_fraction,
            evasive_fraction,
            seed,
            thresholds,
            format,
        } => {
            let base = lexicon_or_bundled(cli.lexicon_dir.as_deref(), cli.journal_dir.as_deref())?;
            let config = SimulationConfig {
                posts,
                offensive_fraction,
                evasive_fraction,
                seed,
            };
            let report = simulate(&config, &simulation_lexicon(&base), &thresholds)?;
            match format {
                Format::Table => print!("{}", report.render_table()),
                Format::Json => print_json(&report)?,
            }
            Ok(0)
        }
        Command::Lexicon { command } => {
            let dir = require_lexicon_dir(cli.lexicon_dir)?;
            let journal_dir = cli.journal_dir.unwrap_or_else(|| dir.clone());
            run_lexicon(command, &dir, &journal_dir)
        }
        Command::Serve {
            port,
            api_keys,
            thresholds,
        } => {
            let lexicon_dir = require_lexicon_dir(cli.lexicon_dir)?;
            let config = ServiceConfig {
                port,
                journal_dir: cli.journal_dir.unwrap_or_else(|| lexicon_dir.clone()),
                lexicon_dir,
                api_keys,
                thresholds,
            };
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(service::serve(&config))?;
            Ok(0)
        }
    }
}

fn run_lexicon(command: LexiconCommand, dir: &Path, journal_dir: &Path) -> anyhow::Result<u8> {
    let files = LexiconFiles::in_dir(dir);
    let open = || LexiconStore::open(&files, journal_dir.join(lexicon::JOURNAL_FILE));
    match command {
        LexiconCommand::Init { force } => {
            let existing: Vec<&Path> = [&files.slang, &files.demand, &files.stop, &files.links]
                .into_iter()
                .map(PathBuf::as_path)
                .filter(|p| p.exists())
                .collect();
            if !force && !existing.is_empty() {
                bail!("{} already exists; pass --force to overwrite", existing[0].display());
            }
            std::fs::create_dir_all(dir)?;
            save_lexicon(&files, &bundled_lexicon())?;
            println!("wrote bundled lexicon to {}", dir.display());
        }
        LexiconCommand::AddDemand { term, note, actor } => {
            let m = open()?.add_demand_term(&term, &note, &actor)?;
            if m.changed {
                println!("added {term:?}; lexicon version {}", m.snapshot.version());
            } else {
                eprintln!("warning: {term:?} is already a demand term");
                println!("lexicon version {}", m.snapshot.version());
            }
        }
        LexiconCommand::RemoveDemand { term, note, actor } => {
            let m = open()?.remove_demand_term(&term, &note, &actor)?;
            if m.changed {
                println!("removed {term:?}; lexicon version {}", m.snapshot.version());
            } else {
                eprintln!("warning: {term:?} is not a demand term");
                println!("lexicon version {}", m.snapshot.version());
            }
        }
        LexiconCommand::List => {
            let s = load_versioned(&files, &journal_dir.join(lexicon::JOURNAL_FILE))?;
            println!("version {}", s.version());
            println!("slang {}", s.slang().len());
            println!("demand {}", s.demand().len());
            println!("stop {}", s.stop_len());
            println!("links {}", s.blocked_links().len());
            for term in s.demand() {
                println!("  {}", term.as_str());
            }
        }
    }
    Ok(0)
}
