//! `plp`: consistency checks, z-partitions, tight answers and oracle
//! cross-checks for probabilistic logic programs.
//!
//! Exit codes: 0 for success or a Yes answer, 1 for an inconsistent program,
//! a No answer or an oracle disagreement, 2 for usage and input errors.

mod commands;
mod report;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use plp_core::defaults::Semantics;

#[derive(Debug, Parser)]
#[command(name = "plp", version, about = "Probabilistic logic programs under 0-, 1-, z- and lex-entailment")]
struct Cli {
    /// Largest Herbrand base to enumerate worlds for.
    #[arg(long, global = true, env = "PLP_MAX_ATOMS", default_value_t = 20,
          value_parser = clap::value_parser!(u64).range(1..=30))]
    max_atoms: u64,

    /// Largest default set the brute-force oracle will handle.
    #[arg(long, global = true, default_value_t = plp_core::oracle::DEFAULT_ORACLE_CAP as u64,
          value_parser = clap::value_parser!(u64).range(1..=63))]
    oracle_cap: u64,

    /// Extra constant for the Herbrand universe; repeatable.
    #[arg(long = "constant", global = true, value_name = "NAME")]
    constants: Vec<String>,

    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,

    /// Evaluate ground instances on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether the program is consistent.
    Check { file: PathBuf },
    /// Print the z-partition of the defaults.
    Partition { file: PathBuf },
    /// Answer a query under one semantics.
    Query {
        file: PathBuf,
        query: String,
        #[arg(long, short, default_value = "lex")]
        semantics: Semantics,
        /// Also print distributions attaining each bound.
        #[arg(long)]
        witness: bool,
    },
    /// Compare the engine against the brute-force oracle.
    Oracle {
        file: PathBuf,
        query: String,
        #[arg(long, short, default_value = "lex", value_parser = default_semantics)]
        semantics: Semantics,
    },
    /// Run the bundled examples under all four semantics.
    Selftest,
}

fn default_semantics(s: &str) -> Result<Semantics, String> {
    let parsed: Semantics = s.parse()?;
    if parsed.is_default_semantics() {
        Ok(parsed)
    } else {
        Err("the oracle covers z and lex only".into())
    }
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub max_atoms: usize,
    pub oracle_cap: usize,
    pub constants: BTreeSet<String>,
    pub json: bool,
    pub parallel: bool,
}

impl RunConfig {
    pub fn engine(&self) -> plp_core::defaults::EngineConfig {
        plp_core::defaults::EngineConfig { max_atoms: self.max_atoms, parallel: self.parallel }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = RunConfig {
        max_atoms: cli.max_atoms as usize,
        oracle_cap: cli.oracle_cap as usize,
        constants: cli.constants.into_iter().collect(),
        json: cli.json,
        parallel: plp_core::par::AVAILABLE && !cli.sequential,
    };
    let result = match cli.command {
        Command::Check { file } => commands::check(&config, &file),
        Command::Partition { file } => commands::partition(&config, &file),
        Command::Query { file, query, semantics, witness } => {
            commands::query(&config, &file, &query, semantics, witness)
        }
        Command::Oracle { file, query, semantics } => commands::oracle(&config, &file, &query, semantics),
        Command::Selftest => commands::selftest(&config),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("plp: {e}");
            ExitCode::from(2)
        }
    }
}
