use serde::{Deserialize, Serialize};

use super::experiment::{run_experiment, ExperimentConfig};
use super::stats::{
    binomial_se, ks_critical_5pct, ks_statistic, ks_two_sample_critical_1pct, linear_fit, mean, median,
    one_sided_margin, wilson_interval,
};
use super::AnalysisError;
use crate::dynamics::{expected_tcon, last_species_probs, theoretical_cdf, LimitConstants, Trajectory};
use crate::rules::RuleSpec;
use crate::simulator::{RunRecord, RunStatus};

pub const MIN_GUMBEL_SAMPLES: usize = 100;

/// Wilson intervals are reported at this many standard errors.
const WILSON_Z: f64 = 3.0;

/// `T' = ext·t_con/n - log n`.
pub fn rescale(t_con: u64, n: u64, ext: u64) -> f64 {
    ext as f64 * t_con as f64 / n as f64 - (n as f64).ln()
}

/// Inverse of [`rescale`] on integer rounds.
pub fn unrescale(t: f64, n: u64, ext: u64) -> u64 {
    ((t + (n as f64).ln()) * n as f64 / ext as f64).round() as u64
}

fn common_n(records: &[RunRecord]) -> Result<u64, AnalysisError> {
    let n = records.first().map_or(0, |r| r.n);
    if records.iter().any(|r| r.n != n) {
        return Err(AnalysisError::MixedN);
    }
    Ok(n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GumbelReport {
    pub n: u64,
    pub samples: usize,
    pub timeouts: usize,
    pub rescaled_samples: Vec<f64>,
    pub ks_statistic: f64,
    /// Asymptotic 5% one-sample critical value, for reference.
    pub ks_critical_5pct: f64,
    pub mean_tcon: f64,
    pub predicted_mean: f64,
    pub relative_error: f64,
    /// Empirical `P[T' <= 0]`, i.e. `P[T_con <= n log n / ext]`.
    pub p_at_zero: f64,
    pub p_at_zero_predicted: f64,
    pub p_at_zero_se: f64,
}

/// Compares connection times with the limiting Gumbel law and mean.
pub fn gumbel_comparison(records: &[RunRecord], consts: &LimitConstants) -> Result<GumbelReport, AnalysisError> {
    if consts.ext == 0 {
        return Err(AnalysisError::Degenerate(consts.rule.clone()));
    }
    let n = common_n(records)?;
    let t: Vec<u64> = records.iter().filter_map(|r| r.t_con).collect();
    if t.len() < MIN_GUMBEL_SAMPLES {
        return Err(AnalysisError::TooFewSamples {
            need: MIN_GUMBEL_SAMPLES,
            got: t.len(),
        });
    }
    let m = t.len();
    let rescaled: Vec<f64> = t.iter().map(|&x| rescale(x, n, consts.ext)).collect();
    let mut sorted = rescaled.clone();
    sorted.sort_by(f64::total_cmp);
    let ks = ks_statistic(&sorted, |c| theoretical_cdf(consts, c));
    let mean_tcon = t.iter().map(|&x| x as f64).sum::<f64>() / m as f64;
    let predicted_mean = expected_tcon(consts, n);
    let below = sorted.partition_point(|&x| x <= 0.0) as f64 / m as f64;
    let p0 = theoretical_cdf(consts, 0.0);
    Ok(GumbelReport {
        n,
        samples: m,
        timeouts: records.len() - m,
        rescaled_samples: rescaled,
        ks_statistic: ks,
        ks_critical_5pct: ks_critical_5pct(m),
        mean_tcon,
        predicted_mean,
        relative_error: (mean_tcon - predicted_mean) / predicted_mean,
        p_at_zero: below,
        p_at_zero_predicted: p0,
        p_at_zero_se: binomial_se(p0, m as f64),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesFrequency {
    pub k: u32,
    /// Tie-weighted number of runs where `k` vanished last.
    pub count: f64,
    pub frequency: f64,
    /// `d_k / Σ d` for slow sizes, 0 for fast ones.
    pub predicted: f64,
    pub se: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesReport {
    pub runs: usize,
    pub sizes: Vec<SpeciesFrequency>,
    /// Runs where no small component was left to vanish at `T_con`.
    pub none_frequency: f64,
}

impl SpeciesReport {
    pub fn get(&self, k: u32) -> Option<&SpeciesFrequency> {
        self.sizes.iter().find(|s| s.k == k)
    }
}

/// Frequency of each size being the last to vanish, over connected runs.
/// Intervals are Wilson at three standard errors.
pub fn last_species_analysis(records: &[RunRecord], consts: &LimitConstants) -> SpeciesReport {
    let connected: Vec<&RunRecord> = records.iter().filter(|r| r.is_connected()).collect();
    let m = connected.len() as f64;
    let k_max = records.first().map_or(0, |r| r.k);
    let probs = last_species_probs(consts);
    let mut none = 0.0;
    for r in &connected {
        if r.last_size.is_empty() {
            none += 1.0;
        }
    }
    let sizes = (1..=k_max)
        .map(|k| {
            let count: f64 = connected.iter().map(|r| r.last_size_weight(k)).sum();
            let frequency = if m > 0.0 { count / m } else { 0.0 };
            let (wilson_low, wilson_high) = wilson_interval(count, m, WILSON_Z);
            SpeciesFrequency {
                k,
                count,
                frequency,
                predicted: probs.iter().find(|p| p.0 == k).map_or(0.0, |p| p.1),
                se: binomial_se(frequency, m),
                wilson_low,
                wilson_high,
            }
        })
        .collect();
    SpeciesReport {
        runs: connected.len(),
        sizes,
        none_frequency: if m > 0.0 { none / m } else { 0.0 },
    }
}

/// Fraction of runs with `Y_k = 0` at a snapshot round, and its standard error.
pub fn extinction_probability(records: &[RunRecord], round: u64, k: u32) -> Result<(f64, f64), AnalysisError> {
    let mut zero = 0usize;
    for r in records {
        let s = r.snapshot_at(round).ok_or(AnalysisError::MissingSnapshot {
            t: round as f64 / r.n as f64,
            round,
            seed: r.seed,
        })?;
        if s.y[k as usize - 1] == 0 {
            zero += 1;
        }
    }
    let m = records.len() as f64;
    let p = zero as f64 / m;
    Ok((p, binomial_se(p, m)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub round: u64,
    /// Mean over runs of `max_k |Y_k/n - z_k(t)|`.
    pub mean_error: f64,
    pub max_error: f64,
}

/// Compares snapshots at rounds `round(t·n)` with the ODE solution at `t`.
pub fn trajectory_validation(
    records: &[RunRecord],
    trajectory: &Trajectory,
    times: &[f64],
) -> Result<Vec<TrajectoryPoint>, AnalysisError> {
    let n = common_n(records)?;
    times
        .iter()
        .map(|&t| {
            let z = trajectory.state_at(t).ok_or(AnalysisError::OffGrid(t))?;
            let round = (t * n as f64).round() as u64;
            let mut errors = Vec::with_capacity(records.len());
            for r in records {
                let s = r.snapshot_at(round).ok_or(AnalysisError::MissingSnapshot { t, round, seed: r.seed })?;
                let e = s
                    .y
                    .iter()
                    .zip(z)
                    .map(|(&y, &zk)| (y as f64 / n as f64 - zk).abs())
                    .fold(0.0, f64::max);
                errors.push(e);
            }
            Ok(TrajectoryPoint {
                t,
                round,
                mean_error: mean(&errors),
                max_error: errors.iter().copied().fold(0.0, f64::max),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: u64,
    pub runs: usize,
    pub timeouts: usize,
    /// Median connection time, counting timeouts as infinite. `None` when
    /// at least half the runs timed out.
    pub median_tcon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateScaling {
    pub rule: String,
    pub rows: Vec<ScalingRow>,
    /// Log-log slope of median `T_con` against `n`, over rows with a median.
    pub exponent: Option<f64>,
}

/// Median connection time of a degenerate rule over several `n`.
pub fn degenerate_scaling(
    rule: &RuleSpec,
    ns: &[u64],
    runs: usize,
    base_seed: u64,
    workers: Option<usize>,
) -> Result<DegenerateScaling, AnalysisError> {
    if !rule.signature().degenerate {
        return Err(AnalysisError::NotDegenerate(rule.name().to_string()));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let cfg = ExperimentConfig::new(rule.clone(), n, runs, base_seed);
        let recs = run_experiment(&cfg, workers)?;
        let times: Vec<f64> = recs
            .iter()
            .map(|r| r.t_con.map_or(f64::INFINITY, |t| t as f64))
            .collect();
        let med = median(&times);
        rows.push(ScalingRow {
            n,
            runs,
            timeouts: recs.iter().filter(|r| r.status == RunStatus::TimedOut).count(),
            median_tcon: med.is_finite().then_some(med),
        });
    }
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| r.median_tcon.map(|m| ((r.n as f64).ln(), m.ln())))
        .unzip();
    let exponent = (x.len() >= 2).then(|| linear_fit(&x, &y).0);
    Ok(DegenerateScaling {
        rule: rule.name().to_string(),
        rows,
        exponent,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationPoint {
    pub round: u64,
    /// `max_μ (F_other(μ) - F_lex(μ))` for the isolated-vertex counts.
    pub margin: f64,
    /// Two-sample KS critical value at 1%.
    pub critical: f64,
    pub mean_lex: f64,
    pub mean_other: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub lex: String,
    pub other: String,
    pub n: u64,
    pub runs: usize,
    pub points: Vec<DominationPoint>,
}

impl DominationReport {
    pub fn holds(&self) -> bool {
        self.points.iter().all(|p| p.margin < p.critical)
    }
}

/// Checks that `Y_1` under `lex` is stochastically smaller than under
/// `other` at each checkpoint. The two batches use disjoint seed ranges.
pub fn domination_check(
    lex: &RuleSpec,
    other: &RuleSpec,
    n: u64,
    checkpoints: &[u64],
    runs: usize,
    base_seed: u64,
    workers: Option<usize>,
) -> Result<DominationReport, AnalysisError> {
    if lex.ell() != other.ell() {
        return Err(AnalysisError::EllMismatch(lex.ell(), other.ell()));
    }
    let batch = |rule: &RuleSpec, seed: u64| {
        let mut cfg = ExperimentConfig::new(rule.clone(), n, runs, seed);
        cfg.snapshot_rounds = checkpoints.to_vec();
        cfg.stop_after = checkpoints.iter().copied().max();
        run_experiment(&cfg, workers)
    };
    let a = batch(lex, base_seed)?;
    let b = batch(other, base_seed.wrapping_add(runs as u64))?;
    let isolated = |recs: &[RunRecord], round: u64| -> Result<Vec<f64>, AnalysisError> {
        let mut v = recs
            .iter()
            .map(|r| {
                r.snapshot_at(round).map(|s| s.y[0] as f64).ok_or(AnalysisError::MissingSnapshot {
                    t: round as f64 / n as f64,
                    round,
                    seed: r.seed,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        v.sort_by(f64::total_cmp);
        Ok(v)
    };
    let points = checkpoints
        .iter()
        .map(|&round| {
            let ylex = isolated(&a, round)?;
            let yother = isolated(&b, round)?;
            Ok(DominationPoint {
                round,
                margin: one_sided_margin(&yother, &ylex),
                critical: ks_two_sample_critical_1pct(ylex.len(), yother.len()),
                mean_lex: mean(&ylex),
                mean_other: mean(&yother),
            })
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    Ok(DominationReport {
        lex: lex.name().to_string(),
        other: other.name().to_string(),
        n,
        runs,
        points,
    })
}

/// Everything the theory predicts about one batch of runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rule: String,
    pub n: u64,
    pub runs: usize,
    pub timeouts: usize,
    pub constants: LimitConstants,
    pub gumbel: Option<GumbelReport>,
    /// Why `gumbel` is missing, if it is.
    pub gumbel_skipped: Option<String>,
    pub last_species: SpeciesReport,
    pub trajectory_errors: Vec<TrajectoryPoint>,
}

impl ComparisonReport {
    pub fn build(
        records: &[RunRecord],
        consts: &LimitConstants,
        trajectory: Option<(&Trajectory, &[f64])>,
    ) -> Result<Self, AnalysisError> {
        let n = common_n(records)?;
        let (gumbel, gumbel_skipped) = match gumbel_comparison(records, consts) {
            Ok(g) => (Some(g), None),
            Err(e @ AnalysisError::TooFewSamples { .. }) => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        };
        let trajectory_errors = match trajectory {
            Some((traj, times)) => trajectory_validation(records, traj, times)?,
            None => Vec::new(),
        };
        Ok(ComparisonReport {
            rule: records.first().map(|r| r.rule.clone()).unwrap_or_default(),
            n,
            runs: records.len(),
            timeouts: records.iter().filter(|r| r.status == RunStatus::TimedOut).count(),
            constants: consts.clone(),
            gumbel,
            gumbel_skipped,
            last_species: last_species_analysis(records, consts),
            trajectory_errors,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{bohman_frieze, lexicographic, omega_avoider};
    use crate::simulator::Snapshot;

    fn rec(n: u64, t_con: Option<u64>, last: Vec<u32>) -> RunRecord {
        RunRecord {
            rule: "x".into(),
            k: 2,
            n,
            seed: 0,
            status: if t_con.is_some() { RunStatus::Connected } else { RunStatus::TimedOut },
            t_con,
            rounds: t_con.unwrap_or(0),
            t_k: vec![t_con, Some(0)],
            last_size: last,
            giant_time: None,
            snapshots: vec![Snapshot {
                round: 0,
                y: vec![n, 0],
                omega_components: 0,
            }],
            rng: String::new(),
        }
    }

    #[test]
    fn rescale_inverts() {
        for t in [0, 1, 12345, 9_999_999] {
            assert_eq!(unrescale(rescale(t, 100_000, 4), 100_000, 4), t);
        }
    }

    #[test]
    fn too_few_samples_is_an_error() {
        let consts = LimitConstants::from_weights("x", 2, vec![1], vec![0.65]);
        let recs: Vec<_> = (0..50).map(|i| rec(100, Some(200 + i), vec![1])).collect();
        assert!(matches!(
            gumbel_comparison(&recs, &consts),
            Err(AnalysisError::TooFewSamples { need: 100, got: 50 })
        ));
        let mut mixed = recs.clone();
        mixed[0].n = 7;
        assert!(matches!(gumbel_comparison(&mixed, &consts), Err(AnalysisError::MixedN)));
    }

    #[test]
    fn single_run_species_is_indicator() {
        let consts = LimitConstants::from_weights("x", 4, vec![1, 2], vec![3.1, 1.37]);
        let r = last_species_analysis(&[rec(10, Some(40), vec![2])], &consts);
        assert_eq!(r.get(1).unwrap().frequency, 0.0);
        assert_eq!(r.get(2).unwrap().frequency, 1.0);
        assert!((r.get(1).unwrap().predicted - 3.1 / 4.47).abs() < 1e-12);
    }

    #[test]
    fn species_ties_split() {
        let consts = LimitConstants::from_weights("x", 4, vec![1, 2], vec![1.0, 1.0]);
        let recs = [rec(10, Some(40), vec![1, 2]), rec(10, Some(40), vec![1]), rec(10, None, vec![])];
        let r = last_species_analysis(&recs, &consts);
        assert_eq!(r.runs, 2);
        assert_eq!(r.get(1).unwrap().frequency, 0.75);
        assert_eq!(r.get(2).unwrap().frequency, 0.25);
    }

    #[test]
    fn trajectory_error_is_zero_at_t0() {
        let sys = crate::dynamics::build_ode(&crate::rules::kp().extend(2).unwrap()).unwrap();
        let traj = crate::dynamics::integrate(&sys, 1.0, 1e-3).unwrap();
        let pts = trajectory_validation(&[rec(100, Some(5), vec![])], &traj, &[0.0]).unwrap();
        assert_eq!(pts[0].mean_error, 0.0);
        assert!(matches!(
            trajectory_validation(&[rec(100, Some(5), vec![])], &traj, &[0.5]),
            Err(AnalysisError::MissingSnapshot { .. })
        ));
        assert!(matches!(
            trajectory_validation(&[rec(100, Some(5), vec![])], &traj, &[0.00037]),
            Err(AnalysisError::OffGrid(_))
        ));
    }

    #[test]
    fn scaling_requires_degenerate_rule() {
        assert!(matches!(
            degenerate_scaling(&bohman_frieze(), &[10, 20], 3, 0, Some(1)),
            Err(AnalysisError::NotDegenerate(_))
        ));
    }

    #[test]
    fn domination_requires_equal_ell() {
        let lex = lexicographic(3, 6).unwrap();
        assert!(matches!(
            domination_check(&lex, &bohman_frieze(), 100, &[50], 5, 0, Some(1)),
            Err(AnalysisError::EllMismatch(6, 4))
        ));
    }

    #[test]
    fn lex_keeps_fewer_isolated_than_avoider() {
        let lex = lexicographic(2, 4).unwrap();
        let avoider = omega_avoider(1, 4).unwrap();
        let rep = domination_check(&lex, &avoider, 2000, &[4000], 30, 1, Some(1)).unwrap();
        assert!(rep.points[0].mean_lex < rep.points[0].mean_other);
        assert!(rep.holds());
    }
}
