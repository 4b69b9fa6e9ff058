use achlioptas_core::analysis::stats::{ks_critical_5pct, ks_statistic};
use achlioptas_core::analysis::{
    domination_check, extinction_probability, gumbel_comparison, last_species_analysis, rescale, run_experiment,
    unrescale, ExperimentConfig,
};
use achlioptas_core::dynamics::{build_ode, limit_constants, theoretical_cdf, LimitConstants};
use achlioptas_core::rules::{bohman_frieze, kp, lexicographic};
use achlioptas_core::simulator::{read_runs, write_runs, write_snapshots, RunRecord, RunStatus};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn rescaling_is_exact(t in 0u64..1_000_000_000, n in 2u64..10_000_000, ext in 1u64..20) {
        prop_assert_eq!(unrescale(rescale(t, n, ext), n, ext), t);
    }
}

fn synthetic(n: u64, ext: u64, samples: &[f64]) -> Vec<RunRecord> {
    samples
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let t = unrescale(c, n, ext);
            RunRecord {
                rule: "synthetic".into(),
                k: 1,
                n,
                seed: i as u64,
                status: RunStatus::Connected,
                t_con: Some(t),
                rounds: t,
                t_k: vec![Some(t)],
                last_size: vec![1],
                giant_time: None,
                snapshots: Vec::new(),
                rng: String::new(),
            }
        })
        .collect()
}

#[test]
fn ks_on_exact_gumbel_samples_is_calibrated() {
    // Inverse transform of exp(-D e^{-c}): c = -log(-log(U) / D).
    let consts = LimitConstants::from_weights("synthetic", 2, vec![1], vec![0.6502431]);
    let d = consts.d_total();
    let mut rng = ChaCha8Rng::seed_from_u64(20240917);
    let (trials, m) = (2000, 100);
    let n = 1_000_000_000;
    let mut below = 0;
    for _ in 0..trials {
        let samples: Vec<f64> = (0..m)
            .map(|_| {
                let u: f64 = rng.random_range(f64::EPSILON..1.0);
                -(-u.ln() / d).ln()
            })
            .collect();
        let report = gumbel_comparison(&synthetic(n, 2, &samples), &consts).unwrap();
        if report.ks_statistic < ks_critical_5pct(m) {
            below += 1;
        }
    }
    let frac = below as f64 / trials as f64;
    assert!(frac >= 0.94, "{frac}");
}

#[test]
fn constant_samples_give_cdf_jump() {
    let consts = LimitConstants::from_weights("synthetic", 2, vec![1], vec![1.0]);
    let recs = synthetic(1_000_000_000, 2, &[0.5; 150]);
    let c = recs[0].t_con.map(|t| rescale(t, 1_000_000_000, 2)).unwrap();
    let f = theoretical_cdf(&consts, c);
    let report = gumbel_comparison(&recs, &consts).unwrap();
    assert!((report.ks_statistic - f.max(1.0 - f)).abs() < 1e-12);
    let mut sorted = report.rescaled_samples.clone();
    sorted.sort_by(f64::total_cmp);
    assert_eq!(ks_statistic(&sorted, |x| theoretical_cdf(&consts, x)), report.ks_statistic);
}

#[test]
fn analysis_of_saved_tables_is_bit_stable() {
    let rule = kp().extend(2).unwrap();
    let consts = limit_constants(&rule, &build_ode(&rule).unwrap()).unwrap();
    let mut cfg = ExperimentConfig::new(rule, 2000, 120, 31);
    cfg.snapshot_times = vec![1.0];
    let recs = run_experiment(&cfg, None).unwrap();
    let mut runs = Vec::new();
    let mut snaps = Vec::new();
    write_runs(&mut runs, &recs).unwrap();
    write_snapshots(&mut snaps, &recs).unwrap();
    let back = read_runs(runs.as_slice(), Some(snaps.as_slice())).unwrap();
    assert_eq!(gumbel_comparison(&recs, &consts).unwrap(), gumbel_comparison(&back, &consts).unwrap());
    assert_eq!(last_species_analysis(&recs, &consts), last_species_analysis(&back, &consts));
}

#[test]
fn isolated_vertices_vanish_at_n_log_n_over_2_with_probability_e_minus_d1() {
    let rule = bohman_frieze();
    let consts = limit_constants(&rule, &build_ode(&rule).unwrap()).unwrap();
    let n = 100_000u64;
    let round = (n as f64 * (n as f64).ln() / 2.0).round() as u64;
    let mut cfg = ExperimentConfig::new(rule, n, 1000, 3_000_000_000);
    cfg.snapshot_rounds = vec![round];
    let recs = run_experiment(&cfg, None).unwrap();
    let (p, _) = extinction_probability(&recs, round, 1).unwrap();
    let expect = (-consts.d[0]).exp();
    let se = (expect * (1.0 - expect) / recs.len() as f64).sqrt();
    assert!((p - expect).abs() < 3.0 * se, "{p} vs {expect}");
}

#[test]
fn lex_against_itself_shows_no_violation() {
    let lex = lexicographic(2, 4).unwrap();
    let rep = domination_check(&lex, &lex, 5000, &[2500, 5000], 100, 77, None).unwrap();
    assert!(rep.holds(), "{:?}", rep.points);
    for p in &rep.points {
        assert!((p.mean_lex - p.mean_other).abs() / p.mean_lex < 0.05);
    }
}
