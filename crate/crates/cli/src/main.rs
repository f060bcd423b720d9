use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use hyperlab::harness::{self, ReportFormat};
use hyperlab::Error;

/// Scenario runner for hyperspace and cluster-set experiments.
#[derive(Parser)]
#[command(name = "hyperlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario in a config and write its record and exports.
    Run {
        config: PathBuf,
        /// Parent directory for per-scenario output.
        #[arg(long, env = harness::OUT_DIR_ENV)]
        out_dir: Option<PathBuf>,
        /// Run only the named scenario.
        #[arg(long)]
        only: Option<String>,
    },
    /// Check a config against the schema without running it.
    Validate { config: PathBuf },
    /// Render a stored record.
    Report {
        record: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// List the shipped scenarios, or print one of their configs.
    ListScenarios {
        #[arg(long)]
        show: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Machine,
}

fn run(config: PathBuf, out_dir: Option<PathBuf>, only: Option<String>) -> Result<()> {
    let mut scenarios =
        harness::load_scenarios(&config).with_context(|| format!("loading {}", config.display()))?;
    if let Some(name) = &only {
        scenarios.retain(|s| &s.name == name);
        anyhow::ensure!(!scenarios.is_empty(), "no scenario named {name} in {}", config.display());
    }
    for s in &scenarios {
        let record = harness::run_scenario(s).with_context(|| format!("running {}", s.name))?;
        let dir = match &out_dir {
            Some(d) => d.join(&s.name),
            None => harness::output_dir(&s.name),
        };
        harness::emit_report(&record, &dir)?;
        print!("{}", harness::render_table(&record));
        println!("wrote {}\n", dir.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out_dir, only } => run(config, out_dir, only),
        Command::Validate { config } => harness::load_scenarios(&config)
            .map(|s| {
                for s in s {
                    println!("ok  {}  ({})", s.name, s.operation.name());
                }
            })
            .map_err(Into::into),
        Command::Report { record, format } => harness::load_record(&record)
            .and_then(|r| {
                let format = match format {
                    Format::Table => ReportFormat::Table,
                    Format::Machine => ReportFormat::Machine,
                };
                harness::render(&r, format)
            })
            .map(|text| print!("{text}"))
            .map_err(Into::into),
        Command::ListScenarios { show: Some(name) } => match harness::shipped_config(&name) {
            Some(text) => {
                print!("{text}");
                Ok(())
            }
            None => Err(anyhow::anyhow!("no shipped scenario named {name}")),
        },
        Command::ListScenarios { show: None } => harness::shipped_scenarios()
            .map(|all| {
                for s in all {
                    println!("{:<26} {:<20} {}", s.name, s.operation.name(), s.description.unwrap_or_default());
                }
            })
            .map_err(Into::into),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match e.downcast_ref::<Error>() {
                Some(Error::Validation(errors)) => {
                    eprintln!("validation failed:");
                    for line in errors {
                        eprintln!("  {line}");
                    }
                }
                _ => eprintln!("error: {e:#}"),
            }
            ExitCode::FAILURE
        }
    }
}
