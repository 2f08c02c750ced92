//! `eci`: derive, check and search conditional independence statements.
//!
//! Exit status is 0 when the answer is positive (derived, holds, sound, no
//! counterexample), 1 when it is negative, and 2 on usage or input errors.

mod commands;
mod error;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eci_core::deduction::{Flag, RuleSetName};
use eci_core::search::Semantics;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "eci", version, about = "Conditional independence calculus: deduction, exact checking, search")]
pub struct Cli {
    #[command(flatten)]
    pub opts: Options,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Options {
    /// Session file with declarations and `premise` lines.
    #[arg(long, global = true)]
    pub session: Option<PathBuf>,
    /// Inline declarations, e.g. `stochastic X, Y; decision Theta;`.
    #[arg(long, global = true)]
    pub universe: Option<String>,
    /// Premise statement; repeatable.
    #[arg(long = "premise", short = 'p', global = true)]
    pub premises: Vec<String>,
    /// Rule set: SEPAROID_FULL, VCI_STRONG, ECI_RESTRICTED or GENERAL.
    #[arg(long, global = true)]
    pub rules: Option<RuleSetName>,
    /// Licensing flag: discrete_regime_space, discrete_variables or dominating_regime; repeatable.
    #[arg(long = "flag", global = true)]
    pub flags: Vec<Flag>,
    /// Largest proof depth explored.
    #[arg(long, global = true, default_value_t = 64)]
    pub max_steps: usize,
    /// Largest number of statements kept.
    #[arg(long, global = true, default_value_t = 500_000)]
    pub max_stmts: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1000)]
    pub trials: usize,
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for a derivation of a goal from the premises.
    Derive { goal: String },
    /// Every statement derivable from the premises.
    Close,
    /// Evaluate a statement on a model file.
    Check { model: PathBuf, statement: String },
    /// Look for a model satisfying the premises and violating the goal.
    SearchCx {
        goal: String,
        /// SCI, VCI or ECI; inferred from the variables when omitted.
        #[arg(long)]
        semantics: Option<Semantics>,
        /// Values per stochastic variable.
        #[arg(long, default_value_t = 2)]
        card: usize,
        #[arg(long, default_value_t = 2)]
        regimes: usize,
        /// Probability masses are multiples of 1/GRID.
        #[arg(long, default_value_t = 4)]
        grid: u64,
        /// Write the counterexample model here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Joint distribution over regimes and variables under a prior on regimes.
    Product {
        model: PathBuf,
        /// Prior as a JSON object mapping regime to probability, or a path to one.
        prior: String,
    },
    /// Average causal effect from regimes `obs`, `do0` and `do1`.
    Ace {
        model: PathBuf,
        #[arg(long, default_value = "T")]
        treatment: String,
        #[arg(long, default_value = "Y")]
        response: String,
    },
    /// Expected utility of a strategy from observational kernels.
    Gformula {
        /// Model file with an `info_base` entry.
        model: PathBuf,
        strategy: PathBuf,
        /// Utility per response value, e.g. `0=0,1=5/2`; defaults to the numeric value.
        #[arg(long)]
        utility: Option<String>,
    },
    /// Check a rule set against its semantics on random or exhaustive models.
    ScanAxioms {
        /// Number of binary stochastic variables.
        #[arg(long, default_value_t = 3)]
        vars: usize,
        /// Random binary decision variables besides the identity `Sigma`.
        #[arg(long, default_value_t = 1)]
        decisions: usize,
        #[arg(long, default_value_t = 2)]
        regimes: usize,
        #[arg(long, default_value_t = 4)]
        grid: u64,
        /// For VCI_STRONG: every decision map up to `--regimes` regimes instead of random ones.
        #[arg(long)]
        exhaustive: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let json = cli.opts.json;
    match commands::run(&cli) {
        Ok(out) => {
            if json {
                emit(&format!("{}\n", serde_json::to_string_pretty(&out.json).expect("json output")));
            } else {
                emit(&out.text);
            }
            ExitCode::from(if out.positive { 0 } else { 1 })
        }
        Err(e) => report_error(&e, json),
    }
}

/// Write to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn report_error(e: &CliError, json: bool) -> ExitCode {
    if json {
        emit(&format!("{}\n", serde_json::to_string_pretty(&e.to_json()).expect("json output")));
    } else {
        eprintln!("error[{}]: {e}", e.code());
    }
    ExitCode::from(2)
}
