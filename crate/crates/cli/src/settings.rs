use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::rule_args::RuleArgs;

/// Flags of `experiment`. Every key can also come from the TOML file given
/// with `--config`; flags win.
#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    /// TOML file with any of the keys below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub rule: RuleArgs,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Run i uses seed + i.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Snapshot multipliers t (rounds round(t·n)); also validated against the ODE.
    #[arg(long, value_delimiter = ',')]
    pub snapshot_times: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub snapshot_rounds: Option<Vec<u64>>,
    #[arg(long)]
    pub giant_epsilon: Option<f64>,
    #[arg(long)]
    pub round_cap: Option<u64>,
    /// ODE step for constants and trajectory validation.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Directory for runs.csv, snapshots.csv and report.json.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Contents of an experiment TOML file.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
pub struct ExperimentFile {
    #[serde(flatten)]
    pub rule: RuleArgs,
    pub n: Option<u64>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub snapshot_times: Option<Vec<f64>>,
    pub snapshot_rounds: Option<Vec<u64>>,
    pub giant_epsilon: Option<f64>,
    pub round_cap: Option<u64>,
    pub dt: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl ExperimentFile {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved experiment settings; embedded verbatim in reports.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Settings {
    pub rule: RuleArgs,
    pub n: u64,
    pub runs: usize,
    pub seed: u64,
    pub snapshot_times: Vec<f64>,
    pub snapshot_rounds: Vec<u64>,
    pub giant_epsilon: f64,
    pub round_cap: Option<u64>,
    pub dt: f64,
    pub out_dir: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl ExperimentArgs {
    pub fn resolve(self) -> Result<Settings, CliError> {
        let file = match &self.config {
            Some(p) => ExperimentFile::load(p)?,
            None => ExperimentFile::default(),
        };
        let n = self
            .n
            .or(file.n)
            .ok_or_else(|| CliError::Config("n is required".into()))?;
        let runs = self.runs.or(file.runs).unwrap_or(100);
        if runs == 0 {
            return Err(CliError::Config("runs must be at least 1".into()));
        }
        Ok(Settings {
            rule: self.rule.or(&file.rule),
            n,
            runs,
            seed: self.seed.or(file.seed).unwrap_or(0),
            snapshot_times: self.snapshot_times.or(file.snapshot_times).unwrap_or_default(),
            snapshot_rounds: self.snapshot_rounds.or(file.snapshot_rounds).unwrap_or_default(),
            giant_epsilon: self
                .giant_epsilon
                .or(file.giant_epsilon)
                .unwrap_or(achlioptas_core::simulator::DEFAULT_GIANT_EPSILON),
            round_cap: self.round_cap.or(file.round_cap),
            dt: self.dt.or(file.dt).unwrap_or(achlioptas_core::dynamics::DEFAULT_DT),
            out_dir: self.out_dir.or(file.out_dir),
            workers: self.workers.or(file.workers),
        })
    }
}
