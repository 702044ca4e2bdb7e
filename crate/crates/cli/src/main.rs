use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use reflectpos_cli::export::{scenario_window, write_window, Format};
use reflectpos_cli::{load_scenario, run_scenario, RunOptions, Status, OUT_DIR_VAR, SUITES};

#[derive(Parser)]
#[command(name = "reflectpos", version, about = "Run reflection positivity checks on scenario files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a scenario and build its structures.
    Validate { scenario: PathBuf },
    /// Run the scenario's suites and write a JSON report.
    Run {
        scenario: PathBuf,
        /// Restrict to suites of this kind (repeatable).
        #[arg(long = "suite")]
        suites: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Report path; defaults to `<name>.json` in $REFLECTPOS_OUT_DIR or the working directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the cylinder window of a block.
    ExportWindow {
        scenario: PathBuf,
        #[arg(long)]
        block: String,
        /// Comma-separated increasing times.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        times: Vec<i64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutFormat,
        /// Pin conv-semigroup paths at the identity at time 0.
        #[arg(long)]
        pinned: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the available suites.
    ListSuites,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

fn default_out(name: &str) -> PathBuf {
    let dir = std::env::var_os(OUT_DIR_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    dir.join(format!("{name}.json"))
}

fn load(path: &Path) -> Result<reflectpos_cli::Scenario> {
    load_scenario(path).with_context(|| format!("loading {}", path.display()))
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { scenario } => {
            let s = load(&scenario)?;
            s.build()?;
            println!("{}: ok ({} structures, {} suites)", s.name, s.structures.len(), s.suites.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            scenario,
            suites,
            seed,
            out,
        } => {
            let s = load(&scenario)?;
            let report = run_scenario(&s, &RunOptions { suites, seed })?;
            let path = out.unwrap_or_else(|| default_out(&s.name));
            report.write(&path)?;
            for c in &report.checks {
                let tag = match c.status {
                    Status::Pass => "pass",
                    Status::Fail => "FAIL",
                    Status::Skip => "skip",
                };
                match &c.witness {
                    Some(w) if c.status == Status::Fail => println!("{tag} {}  {w}", c.id),
                    _ => println!("{tag} {}", c.id),
                }
            }
            println!("report written to {}", path.display());
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::ExportWindow {
            scenario,
            block,
            times,
            format,
            pinned,
            out,
        } => {
            let s = load(&scenario)?;
            let w = scenario_window(&s, &block, &times, pinned)?;
            let format = match format {
                OutFormat::Csv => Format::Csv,
                OutFormat::Json => Format::Json,
            };
            write_window(&w, format, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::ListSuites => {
            for (name, about) in SUITES {
                println!("{name:<20} {about}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
