use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use qsum_cli::commands::{cmd_demo, cmd_estimate, cmd_oracle, cmd_run, Overrides};
use qsum_cli::CliError;

/// Simulator for multi-party quantum summation, its participant attacks and
/// their detection.
#[derive(Parser)]
#[command(name = "qsum", version)]
struct Cli {
    /// Master seed (overrides the scenario file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of trials (overrides the scenario file).
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Output path for the report or estimate.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario file and write a JSONL report.
    Run { file: PathBuf },
    /// Print an exact probability: escape N q [count] | conditional_pass n d r [model] | eve_detection d [decoys].
    Oracle {
        kind: String,
        params: Vec<String>,
    },
    /// Print one seeded run step by step: yy2018 | improved | attack1 | attack2 | fake_state, with key=value parameters.
    Demo {
        protocol: String,
        params: Vec<String>,
    },
    /// Monte Carlo estimate of a named scenario against its oracle, with key=value parameters.
    Estimate {
        scenario: String,
        params: Vec<String>,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let overrides = Overrides {
        seed: cli.seed,
        trials: cli.trials,
        out: cli.out,
    };
    match cli.command {
        Command::Run { file } => {
            let start = Instant::now();
            let (report, out) = cmd_run(&file, &overrides)?;
            let a = &report.aggregate;
            println!(
                "{} runs, {} completed, success rate {}, detection rate {}",
                a.runs, a.completed, a.success_rate, a.detection_rate
            );
            for c in &a.comparisons {
                println!(
                    "{}: {} vs oracle {} ({:.2} sigma)",
                    c.quantity, c.estimate.point, c.oracle, c.deviation_sigmas
                );
            }
            for r in &a.reference_checks {
                if !r.matches_oracle {
                    println!("note: closed form {} = {} differs from the exact pass probability", r.expression, r.value);
                }
            }
            println!("report written to {}", out.display());
            eprintln!("wall time {:.3} s", start.elapsed().as_secs_f64());
        }
        Command::Oracle { kind, params } => println!("{}", cmd_oracle(&kind, &params)?),
        Command::Demo { protocol, params } => print!("{}", cmd_demo(&protocol, &params, overrides.seed)?),
        Command::Estimate { scenario, params } => {
            let record = cmd_estimate(&scenario, &params, &overrides)?;
            let json = serde_json::to_string_pretty(&record).expect("records serialize");
            match &overrides.out {
                Some(path) => std::fs::write(path, json + "\n").map_err(|source| CliError::Write {
                    path: path.clone(),
                    source,
                })?,
                None => println!("{json}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
