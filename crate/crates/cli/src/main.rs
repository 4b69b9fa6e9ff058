//! `achlioptas`: command-line front end for bounded-size Achlioptas
//! process experiments.

mod commands;
mod error;
mod rule_args;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rule_args::RuleArgs;
use settings::ExperimentArgs;

#[derive(Debug, Parser)]
#[command(name = "achlioptas", version, about = "Bounded-size Achlioptas processes: rules, ODE limits, simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print extinction rates, slow/fast sizes and the applicability check.
    RuleInfo {
        #[command(flatten)]
        rule: RuleArgs,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Compute the limit constants c_k, d_k, c_0 (extending the rule if required).
    Constants {
        #[command(flatten)]
        rule: RuleArgs,
        #[command(flatten)]
        integ: IntegrationArgs,
        /// Write the JSON document here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the ODE and dump the trajectory as CSV.
    Ode {
        #[command(flatten)]
        rule: RuleArgs,
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = achlioptas_core::dynamics::DEFAULT_DT)]
        dt: f64,
        /// Keep every N-th grid point.
        #[arg(long, default_value_t = 100)]
        every: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one process and print its record.
    Simulate(SimulateArgs),
    /// Run a batch of processes and compare with the theory.
    Experiment(ExperimentArgs),
    /// Check that the lexicographic rule dominates another rule in isolated vertices.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct IntegrationArgs {
    #[arg(long, default_value_t = achlioptas_core::dynamics::DEFAULT_DT)]
    dt: f64,
    /// Give up (unconverged) at this time.
    #[arg(long, default_value_t = 80.0)]
    t_cap: f64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    rule: RuleArgs,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Snapshot at rounds round(t·n) for these t.
    #[arg(long, value_delimiter = ',')]
    snapshot_times: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    snapshot_rounds: Vec<u64>,
    #[arg(long)]
    round_cap: Option<u64>,
    #[arg(long)]
    stop_after: Option<u64>,
    #[arg(long, default_value_t = achlioptas_core::simulator::DEFAULT_GIANT_EPSILON)]
    giant_epsilon: f64,
    /// Also write runs.csv and snapshots.csv here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// ell shared by both rules.
    #[arg(long, default_value_t = 4)]
    ell: usize,
    /// K of the lexicographic rule (default ell/2).
    #[arg(long = "lex-K")]
    lex_k: Option<u32>,
    /// Rule to compare against: a built-in name or a JSON rule file.
    #[arg(long, default_value = "bf")]
    against: String,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 500)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Checkpoints as multiples of n.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 1.0, 2.0])]
    checkpoints: Vec<f64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::RuleInfo { rule, json } => commands::rule_info(&rule, json),
        Command::Constants { rule, integ, out } => commands::constants(&rule, integ.dt, integ.t_cap, out.as_deref()),
        Command::Ode {
            rule,
            t_max,
            dt,
            every,
            out,
        } => commands::ode(&rule, t_max, dt, every, out.as_deref()),
        Command::Simulate(a) => commands::simulate(a),
        Command::Experiment(a) => commands::experiment(a),
        Command::Compare(a) => commands::compare(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
