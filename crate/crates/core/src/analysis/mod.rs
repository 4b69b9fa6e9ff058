//! Monte Carlo experiments and their comparison with the limiting theory.

mod compare;
mod experiment;
pub mod stats;

use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::simulator::SimError;

pub use compare::{
    degenerate_scaling, domination_check, extinction_probability, gumbel_comparison, last_species_analysis, rescale,
    trajectory_validation, unrescale, ComparisonReport, DegenerateScaling, DominationPoint, DominationReport,
    GumbelReport, ScalingRow, SpeciesFrequency, SpeciesReport, TrajectoryPoint, MIN_GUMBEL_SAMPLES,
};
pub use experiment::{run_experiment, run_parallel, run_sequential, ExperimentConfig};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("need at least {need} connected runs, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("runs mix different values of n")]
    MixedN,
    #[error("rule `{0}` is not degenerate")]
    NotDegenerate(String),
    #[error("rule `{0}` is degenerate; it has no Gumbel limit")]
    Degenerate(String),
    #[error("no snapshot at round {round} (t = {t}) in run with seed {seed}")]
    MissingSnapshot { t: f64, round: u64, seed: u64 },
    #[error("t = {0} is not on the trajectory grid")]
    OffGrid(f64),
    #[error("rules have different ell ({0} vs {1})")]
    EllMismatch(usize, usize),
    #[error("worker pool: {0}")]
    Pool(String),
}
