use achlioptas_core::rules::{
    bohman_frieze, kp, lexicographic, vector_count, Applicability, RuleDocument, RuleSpec, SizeClass,
};
use proptest::prelude::*;

/// Rule whose decision for each vector is read from `picks` by index.
fn random_rule(k: u32, ell: usize, picks: Vec<u8>) -> RuleSpec {
    let edges = ell / 2;
    RuleSpec::from_fn("random", k, ell, move |s: &[SizeClass]| {
        let mut idx = 0usize;
        for &c in s {
            let code = match c {
                SizeClass::Size(v) => v as usize - 1,
                SizeClass::Omega => k as usize,
            };
            idx = idx * (k as usize + 1) + code;
        }
        picks[idx % picks.len()] as usize % edges + 1
    })
    .unwrap()
}

fn shape() -> impl Strategy<Value = (u32, usize, Vec<u8>)> {
    (1u32..=3, prop::sample::select(vec![2usize, 4])).prop_flat_map(|(k, ell)| {
        let count = vector_count(k, ell) as usize;
        (Just(k), Just(ell), prop::collection::vec(any::<u8>(), count))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn signature_partitions_sizes((k, ell, picks) in shape()) {
        let sig = random_rule(k, ell, picks).signature();
        prop_assert_eq!(sig.ext, *sig.ext_per_size.iter().min().unwrap());
        let mut all: Vec<u32> = sig.slow.iter().chain(&sig.fast).copied().collect();
        all.sort();
        prop_assert_eq!(all, (1..=k).collect::<Vec<_>>());
        for &s in &sig.slow {
            prop_assert_eq!(sig.ext_k(s), sig.ext);
        }
        prop_assert_eq!(sig.degenerate, sig.ext == 0);
    }

    #[test]
    fn document_round_trip_preserves_decisions((k, ell, picks) in shape()) {
        let rule = random_rule(k, ell, picks);
        let doc = RuleDocument::from_rule(&rule).unwrap();
        let back = RuleDocument::from_json(&doc.to_json()).unwrap().into_rule().unwrap();
        let mut original = Vec::new();
        rule.try_for_each_decision(|_, e| original.push(e)).unwrap();
        let mut copied = Vec::new();
        back.try_for_each_decision(|_, e| copied.push(e)).unwrap();
        prop_assert_eq!(original, copied);
        prop_assert_eq!(back.signature(), rule.signature());
    }

    #[test]
    fn extension_keeps_old_rates_and_adds_2k((k, ell, picks) in shape(), extra in 1u32..3) {
        let rule = random_rule(k, ell, picks);
        let ext = rule.extend(k + extra).unwrap();
        let (a, b) = (rule.signature(), ext.signature());
        for s in 1..=k {
            prop_assert_eq!(a.ext_k(s), b.ext_k(s));
        }
        for s in k + 1..=k + extra {
            prop_assert_eq!(b.ext_k(s), 2 * s as u64);
        }
        // Vectors without sizes in (K, K'] are decided as before.
        let mut mismatches = 0;
        rule.try_for_each_decision(|sizes, e| {
            if ext.decide(sizes).unwrap() != e {
                mismatches += 1;
            }
        }).unwrap();
        prop_assert_eq!(mismatches, 0);
    }
}

#[test]
fn lexicographic_extinction_rate_is_ell() {
    for ell in [2usize, 4, 6, 8] {
        let sig = lexicographic(ell as u32 / 2, ell).unwrap().signature();
        assert_eq!(sig.ext, ell as u64);
        assert_eq!(sig.slow, vec![1]);
    }
}

#[test]
fn guard_accepts_bf_and_extends_kp() {
    assert_eq!(bohman_frieze().applicability_guard().unwrap(), Applicability::Applicable);
    assert_eq!(kp().applicability_guard().unwrap(), Applicability::ExtendTo(2));
    assert_eq!(kp().extend(2).unwrap().applicability_guard().unwrap(), Applicability::Applicable);
}

#[test]
fn table_rule_matches_source() {
    let rule = kp().extend(3).unwrap();
    let table = rule.to_table_rule().unwrap();
    let mut same = true;
    rule.try_for_each_decision(|s, e| same &= table.decide(s).unwrap() == e).unwrap();
    assert!(same);
}
