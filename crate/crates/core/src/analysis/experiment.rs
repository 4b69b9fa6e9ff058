use super::AnalysisError;
use crate::rules::RuleSpec;
use crate::simulator::{ProcessState, RunOptions, RunRecord, DEFAULT_GIANT_EPSILON};

/// A batch of independent runs of one rule. Run `i` uses seed `base_seed + i`.
#[derive(Clone)]
pub struct ExperimentConfig {
    pub rule: RuleSpec,
    pub n: u64,
    pub runs: usize,
    pub base_seed: u64,
    /// Time multipliers `t`; a snapshot is taken at round `round(t·n)`.
    pub snapshot_times: Vec<f64>,
    /// Extra snapshot rounds, as given.
    pub snapshot_rounds: Vec<u64>,
    pub giant_epsilon: f64,
    pub round_cap: Option<u64>,
    pub stop_after: Option<u64>,
}

impl ExperimentConfig {
    pub fn new(rule: RuleSpec, n: u64, runs: usize, base_seed: u64) -> Self {
        ExperimentConfig {
            rule,
            n,
            runs,
            base_seed,
            snapshot_times: Vec::new(),
            snapshot_rounds: Vec::new(),
            giant_epsilon: DEFAULT_GIANT_EPSILON,
            round_cap: None,
            stop_after: None,
        }
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.runs == 0 {
            return Err(AnalysisError::Config("runs must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(AnalysisError::Config("n must be at least 1".into()));
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
            return Err(AnalysisError::Config(format!("snapshot time {t} is not positive")));
        }
        if !(0.0..1.0).contains(&self.giant_epsilon) {
            return Err(AnalysisError::Config(format!("giant epsilon {} not in [0, 1)", self.giant_epsilon)));
        }
        Ok(())
    }

    /// Round at which multiplier `t` is observed.
    pub fn round_for_time(&self, t: f64) -> u64 {
        (t * self.n as f64).round() as u64
    }

    pub fn run_options(&self) -> RunOptions {
        let mut snapshots: Vec<u64> = self.snapshot_times.iter().map(|&t| self.round_for_time(t)).collect();
        snapshots.extend(&self.snapshot_rounds);
        RunOptions {
            snapshots,
            round_cap: self.round_cap,
            stop_after: self.stop_after,
            giant_epsilon: self.giant_epsilon,
        }
    }

    fn one(&self, i: usize, opts: &RunOptions) -> Result<RunRecord, AnalysisError> {
        let seed = self.base_seed.wrapping_add(i as u64);
        Ok(ProcessState::new(&self.rule, self.n, seed)?.run(opts))
    }
}

/// Runs every replicate on the calling thread.
pub fn run_sequential(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>, AnalysisError> {
    cfg.validate()?;
    let opts = cfg.run_options();
    (0..cfg.runs).map(|i| cfg.one(i, &opts)).collect()
}

/// Runs replicates on a rayon pool of `workers` threads (all cores if
/// `None`). Output order and content match [`run_sequential`].
#[cfg(feature = "parallel")]
pub fn run_parallel(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<Vec<RunRecord>, AnalysisError> {
    use rayon::prelude::*;

    cfg.validate()?;
    let opts = cfg.run_options();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().map_err(|e| AnalysisError::Pool(e.to_string()))?;
    pool.install(|| (0..cfg.runs).into_par_iter().map(|i| cfg.one(i, &opts)).collect())
}

/// Without the `parallel` feature this is [`run_sequential`].
#[cfg(not(feature = "parallel"))]
pub fn run_parallel(cfg: &ExperimentConfig, _workers: Option<usize>) -> Result<Vec<RunRecord>, AnalysisError> {
    run_sequential(cfg)
}

/// Executes the experiment. `workers = Some(1)` forces the sequential path.
pub fn run_experiment(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<Vec<RunRecord>, AnalysisError> {
    if workers == Some(1) {
        run_sequential(cfg)
    } else {
        run_parallel(cfg, workers)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::bohman_frieze;

    #[test]
    fn single_run_matches_direct_simulation() {
        let cfg = ExperimentConfig::new(bohman_frieze(), 500, 1, 42);
        let recs = run_experiment(&cfg, None).unwrap();
        let direct = ProcessState::new(&bohman_frieze(), 500, 42).unwrap().run_until_connected(&[]);
        assert_eq!(recs, vec![direct]);
    }

    #[test]
    fn parallel_equals_sequential() {
        let mut cfg = ExperimentConfig::new(bohman_frieze(), 300, 12, 7);
        cfg.snapshot_times = vec![0.5, 1.0];
        assert_eq!(run_sequential(&cfg).unwrap(), run_parallel(&cfg, Some(3)).unwrap());
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = ExperimentConfig::new(bohman_frieze(), 10, 0, 0);
        assert!(run_experiment(&cfg, None).is_err());
        cfg.runs = 1;
        cfg.snapshot_times = vec![-1.0];
        assert!(run_experiment(&cfg, None).is_err());
    }
}
