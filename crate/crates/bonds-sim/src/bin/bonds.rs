//! Command-line front end: run scenario scripts, inspect the resulting
//! world, compare traces, and generate benchmark scenarios.
//!
//! Exit codes: 0 success, 1 a run or check failed (or traces differ),
//! 2 usage, unreadable input or a broken script.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bonds_core::liquidity::{ratios, LiquidityConfig};
use bonds_core::Verdict;
use bonds_sim::render::{table_header, write_rendered, OutputFormat};
use bonds_sim::runner::{run_scenario, world_report, CheckMode, RunFailure, RunOptions};
use bonds_sim::scenario::{generate_mutual_credit, parse_scenario, Scenario};
use bonds_sim::trace::{diff_traces, read_trace, TraceDiff};

#[derive(Parser)]
#[command(
    name = "bonds",
    version,
    about = "Peer-issued bond economies: run, inspect, compare"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario script and stream its trace to stdout or a file.
    Run {
        /// Scenario file, or "-" for stdin.
        script: String,
        /// Write the trace here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for shuffled message delivery.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Extra checking: none, conservation, correct-run or all.
        #[arg(long, default_value = "none", value_parser = parse_check)]
        check: CheckMode,
        /// Trace format: jsonl, table or narrative.
        #[arg(long, default_value = "jsonl")]
        format: OutputFormat,
    },
    /// Run a scenario and print the final (or intermediate) world as JSON.
    Report {
        /// Scenario file, or "-" for stdin.
        script: String,
        /// Stop after this trace record and report that world.
        #[arg(long)]
        at_seq: Option<u64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Run a scenario and print liquidity ratios per agent.
    Ratios {
        /// Scenario file, or "-" for stdin.
        script: String,
        /// Only this agent.
        #[arg(long)]
        agent: Option<String>,
        /// Cash horizon in days (defaults to the scenario's).
        #[arg(long)]
        delta: Option<u64>,
        /// Current horizon in days (defaults to the scenario's).
        #[arg(long = "Delta")]
        big_delta: Option<u64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Compare two JSONL traces; exit 1 if they differ.
    DiffTrace { left: PathBuf, right: PathBuf },
    /// Generate the all-pairs mutual-credit scenario for n agents.
    GenMutualCredit {
        #[arg(long, default_value_t = 11)]
        n: u64,
        /// Bonds each side of every pair issues.
        #[arg(long, default_value_t = 100)]
        k: u64,
        /// Write the scenario here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_check(s: &str) -> Result<CheckMode, String> {
    match s {
        "none" => Ok(CheckMode::None),
        "conservation" => Ok(CheckMode::Conservation),
        "correct-run" => Ok(CheckMode::CorrectRun),
        "all" => Ok(CheckMode::All),
        other => Err(format!(
            "unknown check mode: {other} (expected none, conservation, correct-run or all)"
        )),
    }
}

/// A failure that already knows its exit code.
struct Fail {
    code: u8,
    message: String,
}

impl Fail {
    fn usage(message: impl ToString) -> Fail {
        Fail {
            code: 2,
            message: message.to_string(),
        }
    }

    fn run(message: impl ToString) -> Fail {
        Fail {
            code: 1,
            message: message.to_string(),
        }
    }
}

impl From<RunFailure> for Fail {
    fn from(e: RunFailure) -> Fail {
        match e {
            RunFailure::Setup(_) | RunFailure::Io(_) => Fail::usage(e),
            _ => Fail::run(e),
        }
    }
}

fn load_scenario(script: &str) -> Result<Scenario, Fail> {
    let text = if script == "-" {
        let mut text = String::new();
        io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Fail::usage(format!("reading stdin: {e}")))?;
        text
    } else {
        std::fs::read_to_string(script)
            .map_err(|e| Fail::usage(format!("reading {script}: {e}")))?
    };
    parse_scenario(&text).map_err(|e| Fail::usage(format!("bad scenario {script}: {e}")))
}

fn out_writer(out: Option<&Path>) -> Result<Box<dyn Write>, Fail> {
    match out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| Fail::usage(format!("creating {}: {e}", path.display())))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

fn cmd_run(
    script: &str,
    out: Option<&Path>,
    seed: u64,
    check: CheckMode,
    format: OutputFormat,
) -> Result<(), Fail> {
    let scenario = load_scenario(script)?;
    let mut writer = out_writer(out)?;
    if format == OutputFormat::Table {
        table_header(&mut writer).map_err(|e| Fail::usage(format!("writing trace: {e}")))?;
    }
    let options = RunOptions {
        seed,
        check,
        stop_after: None,
    };
    let outcome = run_scenario(&scenario, options, &mut |record| {
        write_rendered(&mut writer, record, format)
    })?;
    writer
        .flush()
        .map_err(|e| Fail::usage(format!("writing trace: {e}")))?;
    eprintln!("ok: {} records, conservation verified", outcome.records);
    match outcome.verdict {
        Some(Verdict::Correct) => eprintln!("ok: run is correct"),
        Some(Verdict::Violation {
            class,
            suffix_start,
        }) => {
            return Err(Fail::run(format!(
                "incorrect run: class {class:?} left hanging from snapshot {suffix_start}"
            )));
        }
        None => {}
    }
    Ok(())
}

fn cmd_report(script: &str, at_seq: Option<u64>, seed: u64) -> Result<(), Fail> {
    let scenario = load_scenario(script)?;
    let options = RunOptions {
        seed,
        check: CheckMode::None,
        stop_after: at_seq,
    };
    let outcome = run_scenario(&scenario, options, &mut |_| Ok(()))?;
    if at_seq.is_some() && !outcome.stopped_early {
        eprintln!("note: the run ended before the requested record; reporting the final world");
    }
    let report = world_report(&outcome.world, at_seq.filter(|_| outcome.stopped_early));
    let mut stdout = io::stdout();
    serde_json::to_writer_pretty(&mut stdout, &report)
        .map_err(|e| Fail::usage(format!("writing report: {e}")))?;
    writeln!(stdout).map_err(|e| Fail::usage(format!("writing report: {e}")))
}

fn cmd_ratios(
    script: &str,
    agent: Option<&str>,
    delta: Option<u64>,
    big_delta: Option<u64>,
    seed: u64,
) -> Result<(), Fail> {
    let scenario = load_scenario(script)?;
    let options = RunOptions {
        seed,
        check: CheckMode::None,
        stop_after: None,
    };
    let outcome = run_scenario(&scenario, options, &mut |_| Ok(()))?;
    let config = LiquidityConfig {
        delta: delta.unwrap_or(outcome.config.delta),
        big_delta: big_delta.unwrap_or(outcome.config.big_delta),
    };
    let snap = outcome.world.snapshot();
    let agents: Vec<bonds_core::AgentId> = match agent {
        Some(name) => vec![bonds_core::AgentId::new(name)],
        None => snap.agent_ids().cloned().collect(),
    };
    println!(
        "{:<12} {:>6}  {:>14}  {:>14}  {:>14}",
        "agent", "owes", "cash", "quick", "current"
    );
    for agent in agents {
        let report = ratios(&snap, &agent, &config)
            .map_err(|e| Fail::usage(format!("ratios for {agent}: {e}")))?;
        println!(
            "{:<12} {:>6}  {:>14}  {:>14}  {:>14}",
            agent.as_str(),
            report.current_liabilities,
            show_ratio(report.cash_assets, report.current_liabilities),
            show_ratio(report.quick_assets, report.current_liabilities),
            show_ratio(report.current_assets, report.current_liabilities),
        );
    }
    Ok(())
}

fn show_ratio(assets: u64, liabilities: u64) -> String {
    if liabilities == 0 {
        return "\u{2014}".to_string();
    }
    format!(
        "{assets}/{liabilities} ({:.2})",
        assets as f64 / liabilities as f64
    )
}

fn cmd_diff(left: &Path, right: &Path) -> Result<(), Fail> {
    let read = |path: &Path| -> Result<Vec<bonds_sim::trace::TraceRecord>, Fail> {
        let file = File::open(path)
            .map_err(|e| Fail::usage(format!("opening {}: {e}", path.display())))?;
        read_trace(io::BufReader::new(file))
            .map_err(|e| Fail::usage(format!("reading {}: {e}", path.display())))
    };
    let (a, b) = (read(left)?, read(right)?);
    match diff_traces(&a, &b) {
        TraceDiff::Identical => {
            println!("traces are identical ({} records)", a.len());
            Ok(())
        }
        TraceDiff::LengthMismatch { left, right } => Err(Fail::run(format!(
            "traces differ in length: {left} vs {right} records"
        ))),
        TraceDiff::DiffersAt {
            index,
            fields,
            left,
            right,
        } => Err(Fail::run(format!(
            "traces diverge at record {index} (fields: {})\n  left:  {}\n  right: {}",
            fields.join(", "),
            serde_json::to_string(&left).unwrap_or_default(),
            serde_json::to_string(&right).unwrap_or_default(),
        ))),
    }
}

fn cmd_gen(n: u64, k: u64, out: Option<&Path>) -> Result<(), Fail> {
    if n < 2 {
        return Err(Fail::usage("--n must be at least 2"));
    }
    let scenario = generate_mutual_credit(n, k);
    let mut writer = out_writer(out)?;
    serde_json::to_writer_pretty(&mut writer, &scenario)
        .map_err(|e| Fail::usage(format!("writing scenario: {e}")))?;
    writeln!(writer)
        .and_then(|()| writer.flush())
        .map_err(|e| Fail::usage(format!("writing scenario: {e}")))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            script,
            out,
            seed,
            check,
            format,
        } => cmd_run(script, out.as_deref(), *seed, *check, *format),
        Command::Report {
            script,
            at_seq,
            seed,
        } => cmd_report(script, *at_seq, *seed),
        Command::Ratios {
            script,
            agent,
            delta,
            big_delta,
            seed,
        } => cmd_ratios(script, agent.as_deref(), *delta, *big_delta, *seed),
        Command::DiffTrace { left, right } => cmd_diff(left, right),
        Command::GenMutualCredit { n, k, out } => cmd_gen(*n, *k, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(fail) => {
            eprintln!("error: {}", fail.message);
            ExitCode::from(fail.code)
        }
    }
}
