use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ris_satcom::checks::{self, OracleCheck};
use ris_satcom::harness::{self, OutputFormat, ResultRecord, SweepAxis, SweepSpec};
use ris_satcom::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_IO: u8 = 3;

/// RIS-assisted GEO satellite downlink: Monte Carlo capacity experiments with
/// joint power and phase optimization.
#[derive(Debug, Parser)]
#[command(name = "ris-satcom", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo experiment for one configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
    },
    /// One Monte Carlo experiment per value of a swept parameter.
    Sweep {
        #[arg(long, value_enum)]
        axis: SweepAxis,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
    },
    /// Oracle-equivalence suite; exits nonzero if any case fails.
    Oracle {
        #[arg(long, value_enum)]
        check: OracleCheck,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

fn write_records(records: &[ResultRecord], format: OutputFormat, out: &Path) -> Result<u8, Error> {
    harness::emit_results(records, format, out)?;
    let infeasible: usize = records.iter().map(|r| r.infeasible_runs).sum();
    let runs: usize = records.iter().map(|r| r.runs).sum();
    eprintln!("wrote {} record(s) to {}", records.len(), out.display());
    if infeasible > 0 {
        eprintln!("{infeasible} of {runs} runs found no feasible point");
        return Ok(EXIT_INFEASIBLE);
    }
    Ok(0)
}

fn execute(command: Command) -> Result<u8, Error> {
    match command {
        Command::Run {
            config,
            seed,
            out,
            format,
        } => {
            let cfg = harness::load_config(&config)?;
            let record = harness::run_monte_carlo(&cfg, seed)?;
            write_records(&[record], format, &out)
        }
        Command::Sweep {
            axis,
            values,
            config,
            seed,
            out,
            format,
        } => {
            let cfg = harness::load_config(&config)?;
            let sweep = SweepSpec::new(axis, values)?;
            let records = harness::run_sweep(&cfg, &sweep, seed)?;
            write_records(&records, format, &out)
        }
        Command::Oracle { check, seed } => {
            let report = checks::run_check(check, seed)?;
            let verdict = if report.passed() { "PASS" } else { "FAIL" };
            println!(
                "{}: {verdict} ({} cases, worst {:e}, tolerance {:e})",
                format!("{check:?}").to_lowercase(),
                report.cases, report.worst, report.tolerance
            );
            for f in &report.failures {
                println!("  {f}");
            }
            Ok(if report.passed() { 0 } else { EXIT_VALIDATION })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_VALIDATION } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
