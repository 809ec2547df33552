//! `hardy`: check, evolve and analyze interferometer circuit files.
//!
//! Exit status is 0 on success, 1 when the circuit or its analysis fails,
//! and 2 on usage errors.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hardy_core::circuit::{self, Circuit};
use hardy_core::engine;
use hardy_core::montecarlo::{self, DEFAULT_SEED};
use hardy_core::paradox::{paradox_report, RuleSet};

#[derive(Parser)]
#[command(
    name = "hardy",
    version,
    about = "Exact simulator for two-photon interferometer circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output rendering.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Args)]
struct CircuitArg {
    /// Path to a `.circ` file.
    circuit: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a circuit.
    Check(CircuitArg),
    /// Print the state after the last stage.
    Evolve {
        #[command(flatten)]
        file: CircuitArg,
        /// Drop discarded modes and renormalize.
        #[arg(long)]
        postselect: bool,
    },
    /// Print detection probabilities and the post-selection weight.
    Probs(CircuitArg),
    /// Enumerate full-wave trajectories and compare with the Born weights.
    Paradox {
        #[command(flatten)]
        file: CircuitArg,
        #[arg(long, value_enum)]
        rules: Rules,
    },
    /// Draw detection events and run a chi-square test.
    Sample {
        #[command(flatten)]
        file: CircuitArg,
        #[arg(long, default_value_t = 12000)]
        n: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Rules {
    Local,
    Contextual,
}

impl From<Rules> for RuleSet {
    fn from(r: Rules) -> Self {
        match r {
            Rules::Local => RuleSet::LocalCounterfactual,
            Rules::Contextual => RuleSet::Contextual,
        }
    }
}

fn load(arg: &CircuitArg) -> Result<Circuit, String> {
    let shown = arg.circuit.display().to_string();
    let text = std::fs::read_to_string(&arg.circuit).map_err(|e| format!("{shown}: {e}"))?;
    circuit::parse(&text).map_err(|d| d.with_file(&shown))
}

fn run(cli: &Cli) -> Result<String, String> {
    let format = cli.format;
    match &cli.command {
        Command::Check(file) => {
            let c = load(file)?;
            Ok(output::check(&c, format))
        }
        Command::Evolve { file, postselect } => {
            let c = load(file)?;
            let state = if *postselect {
                engine::detected_state(&c).map(|(s, _)| s)
            } else {
                engine::evolve(&c)
            }
            .map_err(|e| e.to_string())?;
            Ok(output::state(&state, format))
        }
        Command::Probs(file) => {
            let c = load(file)?;
            let table = engine::outcome_table(&c).map_err(|e| e.to_string())?;
            Ok(output::table(&table, format))
        }
        Command::Paradox { file, rules } => {
            let c = load(file)?;
            let report = paradox_report(&c, (*rules).into()).map_err(|e| e.to_string())?;
            Ok(output::paradox(&report, format))
        }
        Command::Sample {
            file,
            n,
            seed,
            stream,
        } => {
            let c = load(file)?;
            let table = engine::outcome_table(&c).map_err(|e| e.to_string())?;
            let record =
                montecarlo::sample_stream(&table, *n, *seed, *stream).map_err(|e| e.to_string())?;
            Ok(output::record(&record, format))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(message) => {
            eprintln!("{message}");
            ExitCode::from(1)
        }
    }
}
