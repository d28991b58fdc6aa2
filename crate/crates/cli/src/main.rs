use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use log::warn;
use serde_json::json;

use dqprep_core::fuzz::{fuzz, FuzzBounds};
use dqprep_core::oracle::solve_brute;
use dqprep_core::pipeline::parse_passes;
use dqprep_core::{
    emit_dqdimacs, parse_reader, run_pipeline, OracleBudget, Parsed, PipelineConfig, PipelineOutcome, Verdict,
};

const EXIT_UNKNOWN: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;

/// Preprocess a DQBF in DQDIMACS format.
///
/// Exit status: 0 preprocessed, 10 SAT, 20 UNSAT, 1 usage or parse error,
/// 2 verification failure.
#[derive(Debug, Parser)]
#[command(name = "dqprep", version)]
struct Cli {
    /// Input file; standard input when omitted.
    input: Option<PathBuf>,

    /// Comma-separated passes out of ur, up, vivify, upla, dqrat.
    #[arg(long, default_value = "ur,up,upla,vivify,dqrat")]
    passes: String,

    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    max_rounds: u64,

    /// Propagation steps allowed per vivified clause.
    #[arg(long, default_value_t = 10_000)]
    vivify_budget: u64,

    /// Check every pass against the brute-force oracle.
    #[arg(long)]
    verify: bool,

    /// Oracle limit as a power of two on the Skolem candidate space.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..=40))]
    oracle_budget: u32,

    /// Run on N random formulas instead of an input file.
    #[arg(long, value_name = "N", conflicts_with = "input")]
    fuzz: Option<usize>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Write the preprocessed formula here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Write statistics as JSON here instead of text on standard error.
    #[arg(long, value_name = "PATH")]
    stats_json: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Verification(String),
}

impl Cli {
    fn config(&self) -> Result<PipelineConfig, Failure> {
        let passes = parse_passes(&self.passes).map_err(|e| Failure::Usage(e.to_string()))?;
        if passes.is_empty() {
            return Err(Failure::Usage("--passes must name at least one pass".into()));
        }
        Ok(PipelineConfig {
            passes,
            max_rounds: self.max_rounds as usize,
            vivify_budget: self.vivify_budget,
            verify: self.verify,
            budget: OracleBudget {
                skolem_log2: self.oracle_budget,
                expansion_log2: self.oracle_budget,
            },
            ..PipelineConfig::default()
        })
    }
}

fn read_input(path: Option<&Path>) -> Result<Parsed, Failure> {
    let parsed = match path {
        Some(path) => {
            let file = File::open(path).map_err(|e| Failure::Usage(format!("cannot open {}: {e}", path.display())))?;
            parse_reader(BufReader::new(file))
        }
        None => parse_reader(io::stdin().lock()),
    };
    let parsed = parsed.map_err(|e| Failure::Usage(format!("parse error: {e}")))?;
    for d in &parsed.diagnostics {
        warn!("{d}");
    }
    Ok(parsed)
}

fn write_stats(cli: &Cli, outcome: &PipelineOutcome) -> io::Result<()> {
    let formula = &outcome.formula;
    match &cli.stats_json {
        Some(path) => {
            let stats = json!({
                "verdict": outcome.verdict.to_string(),
                "rounds": outcome.rounds,
                "converged": outcome.converged,
                "fixed_units": outcome.fixed_units.iter().map(|l| l.to_dimacs()).collect::<Vec<_>>(),
                "skipped_checks": outcome.skipped_checks,
                "clauses": formula.num_clauses(),
                "literals": formula.num_literals(),
                "passes": outcome.reports,
            });
            fs::write(path, serde_json::to_string_pretty(&stats)? + "\n")
        }
        None => {
            let mut err = io::stderr().lock();
            for report in &outcome.reports {
                writeln!(err, "{report}")?;
            }
            writeln!(
                err,
                "verdict={} rounds={} converged={} fixed_units={} skipped_checks={} clauses={} literals={}",
                outcome.verdict,
                outcome.rounds,
                outcome.converged,
                outcome.fixed_units.len(),
                outcome.skipped_checks,
                formula.num_clauses(),
                formula.num_literals()
            )
        }
    }
}

fn preprocess(cli: &Cli) -> Result<u8, Failure> {
    let config = cli.config()?;
    let parsed = read_input(cli.input.as_deref())?;
    let outcome = run_pipeline(&config, &parsed.formula).map_err(|e| Failure::Verification(e.to_string()))?;

    let text = emit_dqdimacs(&outcome.formula);
    let written = match &cli.out {
        Some(path) => fs::write(path, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    };
    written
        .and_then(|_| write_stats(cli, &outcome))
        .map_err(|e| Failure::Usage(format!("cannot write output: {e}")))?;

    Ok(match outcome.verdict {
        Verdict::Sat => EXIT_SAT,
        Verdict::Unsat => EXIT_UNSAT,
        Verdict::Unknown => EXIT_UNKNOWN,
    })
}

/// Runs the pipeline on random formulas and compares every decided
/// verdict with the oracle.
fn fuzz_mode(cli: &Cli, count: usize) -> Result<u8, Failure> {
    let config = cli.config()?;
    let (mut sat, mut unsat, mut unknown, mut skipped) = (0, 0, 0, 0);
    for (i, formula) in fuzz(cli.seed, count, FuzzBounds::default()).enumerate() {
        let outcome = run_pipeline(&config, &formula)
            .map_err(|e| Failure::Verification(format!("instance {i} (seed {}): {e}", cli.seed)))?;
        skipped += outcome.skipped_checks;
        match outcome.verdict {
            Verdict::Sat => sat += 1,
            Verdict::Unsat => unsat += 1,
            Verdict::Unknown => unknown += 1,
        }
        if outcome.verdict == Verdict::Unknown {
            continue;
        }
        match solve_brute(&formula, &config.budget) {
            Ok(truth) if truth.is_sat() != (outcome.verdict == Verdict::Sat) => {
                return Err(Failure::Verification(format!(
                    "instance {i} (seed {}): pipeline says {} but the oracle disagrees\n{}",
                    cli.seed,
                    outcome.verdict,
                    emit_dqdimacs(&formula)
                )));
            }
            Ok(_) => {}
            Err(e) => {
                warn!("instance {i}: verdict not checked: {e}");
                skipped += 1;
            }
        }
    }
    eprintln!(
        "fuzz_instances={count} seed={} sat={sat} unsat={unsat} unknown={unknown} skipped_checks={skipped}",
        cli.seed
    );
    Ok(EXIT_UNKNOWN)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let result = match cli.fuzz {
        Some(count) => fuzz_mode(&cli, count),
        None => preprocess(&cli),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("dqprep: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("dqprep: verification failed: {msg}");
            ExitCode::from(EXIT_VERIFY)
        }
    }
}
