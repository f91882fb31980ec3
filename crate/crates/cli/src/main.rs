//! `treeshift`: exact verification and entropy computations for shifts over free groups.
//!
//! Exit status: 0 computed with nothing to flag, 1 computed and found a violation or gap,
//! 2 invalid input, 3 enumeration budget exceeded.

mod commands;
mod config;
mod error;
mod inputs;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use treeshift::{Budget, Unit, DEFAULT_BUDGET};

use crate::config::{group_spec, read_json, RawConfig, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::Report;

#[derive(Debug, Parser)]
#[command(name = "treeshift", version, about = "Ball codings, tree-Markov supports and exact entropy over free groups")]
struct Cli {
    /// Print JSON instead of TSV.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the ball B(e,n) with its geodesic parents.
    Ball {
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value = "group")]
        mode: String,
        #[arg(long)]
        n: usize,
    },
    /// Check stochasticity, stationarity and reversibility of the configured measure.
    ValidateTs {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the Markovized transition system over the ball super-alphabet.
    Markovize {
        #[arg(long)]
        config: PathBuf,
    },
    /// List, or count, admissible super-alphabet patterns on B(e,m).
    Admissible {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to `m` from the config, then to `n`.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        count: bool,
    },
    /// Check z(f)(e) = z(e)(f) over every admissible pattern on B(e,n).
    VerifyLemma {
        #[arg(long)]
        config: PathBuf,
        /// auto, exhaustive or reduced.
        #[arg(long, default_value = "auto")]
        strategy: String,
    },
    /// Compare admissible patterns on B(e,m) with images of positive patterns.
    OracleCompare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value = "auto")]
        strategy: String,
    },
    /// Search for admissible patterns of a code's Markovization outside the code's image.
    SupportGap {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        m_max: usize,
        /// Longest word tried by the rank-one brute-force preimage search.
        #[arg(long, default_value_t = 6)]
        brute_len: usize,
    },
    /// Entropy of a partition, optionally conditioned on a second one.
    Entropy {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        conditional: Option<PathBuf>,
    },
    /// F(α^m) for m = 0..=n-max.
    FSeq {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n_max: usize,
    },
    /// H(P_n | T⁻¹P_n) against f(α) for the fair coin shift over ℤ.
    Counterexample {
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value = "bits")]
        unit: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
}

fn run(cmd: Command) -> CliResult<Report> {
    use commands::*;
    match cmd {
        Command::Ball { rank, mode, n } => ball_cmd(group_spec(rank, &mode)?, n),
        Command::ValidateTs { config } => validate_cmd(&read_json::<RawConfig>(&config)?),
        Command::Markovize { config } => markovize_cmd(&RunConfig::load(&config)?),
        Command::Admissible { config, m, count } => {
            let cfg = RunConfig::load(&config)?;
            let m = m.or(cfg.m).unwrap_or(cfg.n);
            admissible_cmd(&cfg, m, count)
        }
        Command::VerifyLemma { config, strategy } => {
            verify_lemma_cmd(&RunConfig::load(&config)?, parse_strategy(&strategy)?)
        }
        Command::OracleCompare { config, m, strategy } => {
            let cfg = RunConfig::load(&config)?;
            let m = m.or(cfg.m).unwrap_or(cfg.n);
            oracle_compare_cmd(&cfg, m, parse_strategy(&strategy)?)
        }
        Command::SupportGap { config, code, m_max, brute_len } => {
            support_gap_cmd(&RunConfig::load(&config)?, &read_json(&code)?, m_max, brute_len)
        }
        Command::Entropy { config, partition, conditional } => {
            let cfg = RunConfig::load(&config)?;
            let p = read_json(&partition)?;
            let q = conditional.map(|c| read_json(&c)).transpose()?;
            entropy_cmd(&cfg, &p, q.as_ref())
        }
        Command::FSeq { config, n_max } => f_seq_cmd(&RunConfig::load(&config)?, n_max),
        Command::Counterexample { n_max, unit, budget } => {
            let unit: Unit = unit.parse()?;
            counterexample_cmd(n_max, Budget::new(budget)?, unit)
        }
    }
}

fn report_error(e: &CliError) {
    eprintln!("error: {e}");
    if let CliError::Core(treeshift::Error::BudgetExceeded { completed: Some(c), .. }) = e {
        eprintln!("completed before the cap: {c}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(report) => {
            print!("{}", report.render(cli.json));
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            report_error(&e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
