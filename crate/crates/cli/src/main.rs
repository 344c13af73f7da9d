//! `everwill`: run, validate, audit and summarize society histories.
//!
//! Exit status is 0 on success, 1 when a check finds violations and 2 for
//! usage, config or IO errors. Set `EVERWILL_LOG_LEVEL` for diagnostics.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use everwill::harness::{check_invariants, load_config, prepare, run_history, HistoryLog, MetricsReport};
use everwill::{Error, Society};

const HISTORY_FILE: &str = "history.jsonl";

#[derive(Parser)]
#[command(name = "everwill", version, about = "Simulate and audit everlasting-will societies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config and write its history log.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; the log goes to DIR/history.jsonl.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config, including its initial state, or a society file.
    Validate {
        #[arg(long, required_unless_present = "society", conflicts_with = "society")]
        config: Option<PathBuf>,
        #[arg(long)]
        society: Option<PathBuf>,
    },
    /// Check every invariant of a history log.
    Audit {
        #[arg(long)]
        log: PathBuf,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Per-state metrics of a history log.
    Stats {
        #[arg(long)]
        log: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

enum Outcome {
    Ok,
    Violations,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EVERWILL_LOG_LEVEL", "warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violations) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command) -> Result<Outcome, Error> {
    match command {
        Command::Run { config, out } => run(&config, out.as_deref()),
        Command::Validate { config, society } => match (config, society) {
            (Some(config), _) => {
                let c = load_config(&config)?;
                let setup = prepare(&c)?;
                println!(
                    "ok: {} model, {} persons, {} goods, {} steps",
                    c.model,
                    setup.society.person_count(),
                    setup.society.good_count(),
                    c.steps
                );
                Ok(Outcome::Ok)
            }
            (None, Some(society)) => validate_society(&society),
            (None, None) => unreachable!("clap requires one of --config and --society"),
        },
        Command::Audit { log, json } => {
            let history = HistoryLog::read(&log)?;
            let report = check_invariants(&history)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                for (name, tally) in &report.tallies {
                    println!("{name}: {} checked, {} failed", tally.checked, tally.failed);
                }
                for v in &report.violations {
                    println!("violation at state {}: {}: {}", v.state, v.check, v.detail);
                }
                if let Some(r) = &report.reciprocity {
                    println!(
                        "reciprocity: {} events, {} resolved, {} pending",
                        r.events, r.resolved, r.pending
                    );
                }
                println!("{}", if report.is_clean() { "clean" } else { "violations found" });
            }
            Ok(if report.is_clean() { Outcome::Ok } else { Outcome::Violations })
        }
        Command::Stats { log, format } => {
            let metrics = MetricsReport::from_log(&HistoryLog::read(&log)?);
            match format {
                Format::Csv => print!("{}", metrics.to_csv()),
                Format::Json => println!("{}", serde_json::to_string_pretty(&metrics)?),
            }
            Ok(Outcome::Ok)
        }
    }
}

fn run(config_path: &Path, out: Option<&Path>) -> Result<Outcome, Error> {
    let config = load_config(config_path)?;
    let path = match (out, &config.log.path) {
        (Some(dir), _) => {
            std::fs::create_dir_all(dir)?;
            dir.join(HISTORY_FILE)
        }
        (None, Some(p)) => config.resolve(p),
        (None, None) => PathBuf::from(HISTORY_FILE),
    };
    let (history, metrics) = run_history(&config)?;
    history.write(&path)?;
    let summary = metrics.summary();
    println!(
        "wrote {} ({} steps); total power {} -> {}, gini {:.4}",
        path.display(),
        history.steps.len(),
        summary.initial_total_power,
        summary.final_total_power,
        summary.final_gini
    );
    Ok(Outcome::Ok)
}

fn validate_society(path: &Path) -> Result<Outcome, Error> {
    match Society::from_json(&std::fs::read_to_string(path)?) {
        Ok(s) => {
            println!("ok: {} persons, {} goods", s.person_count(), s.good_count());
            Ok(Outcome::Ok)
        }
        Err(Error::Axioms(report)) => {
            println!("{report}");
            Ok(Outcome::Violations)
        }
        Err(e) => Err(e),
    }
}
