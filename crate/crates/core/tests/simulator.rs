mod common;

use achlioptas_core::analysis::{run_experiment, ExperimentConfig};
use achlioptas_core::rules::{bohman_frieze, erdos_renyi, kp, SizeClass};
use achlioptas_core::simulator::{write_runs, write_snapshots, ProcessState, RunStatus};
use proptest::prelude::*;

use common::{all_rules, check_against_bfs};

#[test]
fn bfs_oracle_small_graphs() {
    for rule in all_rules() {
        for (n, seed) in [(2, 1), (7, 2), (30, 3)] {
            check_against_bfs(&rule, n, 400, seed).unwrap_or_else(|e| panic!("{}: {e}", rule.name()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn invariants_hold_every_round(rule_idx in 0usize..10, n in 1u64..200, seed in any::<u64>()) {
        let rule = &all_rules()[rule_idx];
        let k = rule.k() as u64;
        let mut s = ProcessState::new(rule, n, seed).unwrap();
        let mut prev_components = s.components();
        let mut prev_largest = s.largest();
        let mut merges = 0;
        for _ in 0..(4 * n) {
            let out = s.step();
            if out.merged.is_some() {
                merges += 1;
            }
            let small: u64 = s.y_counts().iter().sum();
            for (i, &y) in s.y_counts().iter().enumerate() {
                prop_assert_eq!(y % (i as u64 + 1), 0);
            }
            // Every ω-component has more than K vertices.
            prop_assert!(n - small >= s.omega_components() * (k + 1));
            prop_assert_eq!(s.components(), n - merges);
            prop_assert!(s.components() <= prev_components);
            prop_assert!(s.largest() >= prev_largest);
            prop_assert_eq!(s.is_connected(), s.largest() == n);
            prev_components = s.components();
            prev_largest = s.largest();
        }
    }
}

#[test]
fn same_seed_gives_identical_tables() {
    let mut cfg = ExperimentConfig::new(kp().extend(2).unwrap(), 5000, 6, 99);
    cfg.snapshot_times = vec![0.5, 1.0];
    let dump = || {
        let recs = run_experiment(&cfg, None).unwrap();
        let mut runs = Vec::new();
        let mut snaps = Vec::new();
        write_runs(&mut runs, &recs).unwrap();
        write_snapshots(&mut snaps, &recs).unwrap();
        (runs, snaps)
    };
    assert_eq!(dump(), dump());
}

#[test]
fn no_op_when_all_samples_share_a_component() {
    let mut s = ProcessState::new(&erdos_renyi(), 2, 5).unwrap();
    s.run_until_connected(&[]);
    let before = s.y_counts().to_vec();
    let out = s.step();
    assert_eq!(out.merged, None);
    assert_eq!(s.y_counts(), before.as_slice());
    assert_eq!(s.isolated_count(), 0);
}

#[test]
fn bf_merges_two_isolated_vertices() {
    let mut s = ProcessState::new(&bohman_frieze(), 1000, 8).unwrap();
    let out = s.step();
    assert_eq!(&out.sizes[..2], &[SizeClass::Size(1), SizeClass::Size(1)]);
    if out.merged.is_some() {
        assert_eq!(s.isolated_count(), 998);
        assert_eq!(s.omega_components(), 1);
    }
}

#[test]
fn two_vertex_er_takes_two_rounds_on_average() {
    // Each round joins the two vertices with probability 1/2.
    let runs = 20_000;
    let cfg = ExperimentConfig::new(erdos_renyi(), 2, runs, 1);
    let recs = run_experiment(&cfg, None).unwrap();
    let mean = recs.iter().map(|r| r.t_con.unwrap() as f64).sum::<f64>() / runs as f64;
    // Geometric(1/2) has variance 2.
    let se = (2.0 / runs as f64).sqrt();
    assert!((mean - 2.0).abs() < 4.0 * se, "mean {mean}");
}

fn mean_ratio(rule: achlioptas_core::rules::RuleSpec, n: u64, ext: f64) -> f64 {
    let recs = run_experiment(&ExperimentConfig::new(rule, n, 50, 1000), None).unwrap();
    // Averaged over runs: a single run fluctuates by c / log n, and Gumbel
    // tails push individual ratios past 1.2 at this n.
    recs.iter()
        .map(|r| r.t_con.unwrap() as f64 / (n as f64 * (n as f64).ln()) * ext)
        .sum::<f64>()
        / recs.len() as f64
}

#[test]
fn connection_time_is_near_n_log_n_over_ext() {
    let n = 10_000u64;
    for (rule, ext) in [(erdos_renyi(), 2.0), (bohman_frieze(), 2.0)] {
        let ratio = mean_ratio(rule.clone(), n, ext);
        assert!((0.8..=1.2).contains(&ratio), "{}: {ratio}", rule.name());
    }
    // For the extended KP rule the second-order term 2.075 / log n is 0.225
    // at n = 1e4, so the ratio sits just above the band; check it against
    // the full expectation instead.
    let ratio = mean_ratio(kp().extend(2).unwrap(), n, 4.0);
    let predicted = 1.0 + 2.075 / (n as f64).ln();
    assert!((ratio - predicted).abs() < 0.03, "{ratio} vs {predicted}");
}

#[test]
fn fast_sizes_are_rarely_last() {
    let n = 10_000u64;
    for rule in [bohman_frieze().extend(3).unwrap(), kp().extend(3).unwrap()] {
        let sig = rule.signature();
        let recs = run_experiment(&ExperimentConfig::new(rule.clone(), n, 200, 5000), None).unwrap();
        let fast: f64 = recs
            .iter()
            .map(|r| sig.fast.iter().map(|&k| r.last_size_weight(k)).sum::<f64>())
            .sum();
        assert!(fast / recs.len() as f64 <= 0.05, "{}: {}", rule.name(), fast);
    }
}

#[test]
fn extinction_times_bounded_by_connection() {
    let recs = run_experiment(&ExperimentConfig::new(kp().extend(3).unwrap(), 3000, 20, 3), None).unwrap();
    for r in recs {
        assert_eq!(r.status, RunStatus::Connected);
        let t = r.t_con.unwrap();
        assert!(r.t_k.iter().all(|tk| tk.unwrap() <= t));
        assert!(r.giant_time.unwrap() <= t);
        assert!(!r.last_size.is_empty());
    }
}

#[test]
fn degenerate_run_times_out_with_partial_record() {
    let rule = achlioptas_core::rules::omega_avoider(1, 4).unwrap();
    let mut s = ProcessState::new(&rule, 200, 1).unwrap();
    let rec = s.run(&achlioptas_core::simulator::RunOptions {
        round_cap: Some(5000),
        snapshots: vec![100, 10_000],
        ..Default::default()
    });
    assert_eq!(rec.status, RunStatus::TimedOut);
    assert_eq!(rec.rounds, 5000);
    assert_eq!(rec.snapshots.len(), 1);
    assert!(rec.last_size.is_empty());
}
