//! Pilot for the KS thresholds used by the acceptance suite.
//!
//! Runs 1000 processes at n = 1e5 for BF and the extended KP rule on seeds
//! disjoint from the acceptance runs and prints the KS distance to the
//! limiting law. The acceptance threshold is `pilot + 3·0.26/sqrt(m)`,
//! capped at 0.06.
//!
//!     cargo run --release --example ks_pilot

use achlioptas_core::analysis::{gumbel_comparison, run_experiment, ExperimentConfig};
use achlioptas_core::dynamics::{limit_constants, system_for};
use achlioptas_core::rules::{bohman_frieze, kp};

const PILOT_SEED: u64 = 7_000_000_000;

fn main() {
    let runs = 1000;
    for rule in [bohman_frieze(), kp().extend(2).unwrap()] {
        let sys = system_for(&rule).unwrap();
        let consts = limit_constants(&rule, &sys).unwrap();
        let cfg = ExperimentConfig::new(rule.clone(), 100_000, runs, PILOT_SEED);
        let recs = run_experiment(&cfg, None).unwrap();
        let g = gumbel_comparison(&recs, &consts).unwrap();
        let sigma = 0.26 / (runs as f64).sqrt();
        let threshold = (g.ks_statistic + 3.0 * sigma).min(0.06);
        println!(
            "{:<16} c={:?} d={:?} ks={:.4} threshold={:.4} mean_rel_err={:+.4} p0={:.3} (pred {:.3})",
            rule.name(),
            consts.c,
            consts.d,
            g.ks_statistic,
            threshold,
            g.relative_error,
            g.p_at_zero,
            g.p_at_zero_predicted
        );
    }
}
