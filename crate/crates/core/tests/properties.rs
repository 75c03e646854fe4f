//! Property tests for the structural invariants of the engine: encoding
//! round-trips, weight-matrix symmetry, merge algebra, energy descent and
//! the metric identities.

use proptest::prelude::*;

use hoplink_core::hopfield::{RecallConfig, TraceStep, UpdateMode, WeightState};
use hoplink_core::mapreduce::{self, JobSpec, ShardRecord};
use hoplink_core::metrics::{
    active_links, cosine_similarity, links_gained, links_lost, recovery_accuracy,
};
use hoplink_core::pattern::{triangle_len, AssociationSet, BipolarPattern};
use hoplink_core::pipeline::{ThresholdSpec, UsageMatrix};
use hoplink_core::synthgen::random_bipolar;
use hoplink_core::LearningRule;

/// Random k plus a random association set over k.
fn arb_assoc_set() -> impl Strategy<Value = AssociationSet> {
    (2usize..8).prop_flat_map(|k| {
        prop::collection::vec(any::<bool>(), triangle_len(k)).prop_map(move |mask| {
            let pairs = mask
                .iter()
                .enumerate()
                .filter(|(_, &m)| m)
                .map(|(idx, _)| hoplink_core::pattern::index_pair(idx, k));
            AssociationSet::from_pairs(k, pairs).unwrap()
        })
    })
}

fn arb_usage_matrix() -> impl Strategy<Value = UsageMatrix> {
    (2usize..7).prop_flat_map(|k| {
        prop::collection::vec(0.0f64..100.0, triangle_len(k)).prop_map(move |values| {
            let mut counts = vec![0.0; k * k];
            let mut it = values.into_iter();
            for i in 0..k {
                for j in (i + 1)..k {
                    let v = it.next().unwrap();
                    counts[i * k + j] = v;
                    counts[j * k + i] = v;
                }
            }
            UsageMatrix::from_counts(k, counts).unwrap().0
        })
    })
}

fn hebbian_trained(len: usize, patterns: &[BipolarPattern]) -> WeightState {
    let mut state = WeightState::new_hebbian(len).unwrap();
    for p in patterns {
        state.train_hebbian(p).unwrap();
    }
    state
}

proptest! {
    #[test]
    fn assoc_set_pattern_roundtrip(set in arb_assoc_set()) {
        let pattern = set.to_pattern().unwrap();
        let back = AssociationSet::from_pattern(&pattern, set.k()).unwrap();
        prop_assert_eq!(&back, &set);
        // The metric-layer entry point agrees with the decoder.
        prop_assert_eq!(active_links(&pattern, set.k()).unwrap(), set);
    }

    #[test]
    fn pattern_assoc_roundtrip(k in 2usize..8, seed in any::<u64>()) {
        let pattern = random_bipolar(triangle_len(k), seed).unwrap();
        let set = AssociationSet::from_pattern(&pattern, k).unwrap();
        prop_assert_eq!(set.to_pattern().unwrap(), pattern);
    }

    #[test]
    fn normalize_is_idempotent(m in arb_usage_matrix()) {
        prop_assume!(m.frobenius_norm() > 0.0);
        let once = m.normalized().unwrap();
        prop_assert!((once.frobenius_norm() - 1.0).abs() < 1e-12);
        let twice = once.normalized().unwrap();
        for i in 0..m.k() {
            for j in 0..m.k() {
                prop_assert!((once.get(i, j) - twice.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn binarize_is_bipolar_and_monotone_in_threshold(
        m in arb_usage_matrix(),
        lo in 0.0f64..1.0,
        delta in 0.0f64..0.5,
    ) {
        prop_assume!(m.frobenius_norm() > 0.0);
        let n = m.normalized().unwrap();
        let low = n.binarize(&ThresholdSpec::Absolute(lo)).unwrap();
        let high = n.binarize(&ThresholdSpec::Absolute(lo + delta)).unwrap();
        prop_assert_eq!(low.len(), triangle_len(m.k()));
        // Raising the threshold never turns a -1 into a +1.
        for (a, b) in low.bits().iter().zip(high.bits()) {
            prop_assert!(!(*a == -1 && *b == 1));
        }
    }

    #[test]
    fn hebbian_weights_stay_symmetric_zero_diagonal(
        len in 2usize..12,
        seeds in prop::collection::vec(any::<u64>(), 1..6),
    ) {
        let patterns: Vec<BipolarPattern> =
            seeds.iter().map(|&s| random_bipolar(len, s).unwrap()).collect();
        let state = hebbian_trained(len, &patterns);
        let accum = state.hebbian_accum().unwrap();
        for i in 0..len {
            prop_assert_eq!(accum[i * len + i], 0);
            for j in 0..len {
                prop_assert_eq!(accum[i * len + j], accum[j * len + i]);
                prop_assert!(accum[i * len + j].unsigned_abs() <= state.pattern_count());
            }
        }
    }

    #[test]
    fn oja_weights_stay_symmetric_zero_diagonal(
        len in 2usize..10,
        seeds in prop::collection::vec(any::<u64>(), 1..5),
    ) {
        // Seed from one Hebbian-style pattern so the Oja update has signal.
        let mut init = vec![0.0; len * len];
        let base = random_bipolar(len, 17).unwrap();
        for i in 0..len {
            for j in 0..len {
                if i != j {
                    init[i * len + j] =
                        (base.get(i) as f64) * (base.get(j) as f64) / len as f64;
                }
            }
        }
        let mut state = WeightState::from_oja_parts(len, init, 1, 0.05, vec![0.0; len]).unwrap();
        for &s in &seeds {
            state.train_oja(&random_bipolar(len, s).unwrap()).unwrap();
        }
        let w = state.oja_weights().unwrap();
        for i in 0..len {
            prop_assert_eq!(w[i * len + i], 0.0);
            for j in 0..len {
                prop_assert!((w[i * len + j] - w[j * len + i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hebbian_training_is_order_independent(
        len in 2usize..10,
        seeds in prop::collection::vec(any::<u64>(), 2..8),
        swap in any::<prop::sample::Index>(),
    ) {
        let patterns: Vec<BipolarPattern> =
            seeds.iter().map(|&s| random_bipolar(len, s).unwrap()).collect();
        let mut shuffled = patterns.clone();
        let pivot = swap.index(shuffled.len());
        shuffled.rotate_left(pivot);
        let a = hebbian_trained(len, &patterns);
        let b = hebbian_trained(len, &shuffled);
        prop_assert_eq!(a.hebbian_accum().unwrap(), b.hebbian_accum().unwrap());
    }

    #[test]
    fn single_pattern_and_negation_are_sync_fixed_points(
        len in 2usize..20,
        seed in any::<u64>(),
    ) {
        let p = random_bipolar(len, seed).unwrap();
        let state = hebbian_trained(len, std::slice::from_ref(&p));
        prop_assert!(state.is_fixed_point(&p, 0.0).unwrap());
        prop_assert!(state.is_fixed_point(&p.negated(), 0.0).unwrap());
    }

    #[test]
    fn async_recall_energy_never_increases(
        len in 2usize..20,
        pattern_seeds in prop::collection::vec(any::<u64>(), 1..5),
        probe_seed in any::<u64>(),
        order_seed in any::<u64>(),
    ) {
        let patterns: Vec<BipolarPattern> = pattern_seeds
            .iter()
            .map(|&s| random_bipolar(len, s).unwrap())
            .collect();
        let state = hebbian_trained(len, &patterns);
        let probe = random_bipolar(len, probe_seed).unwrap();
        let cfg = RecallConfig { seed: order_seed, ..RecallConfig::default() };
        let (outcome, trace) = state.recall_traced(&probe, &cfg).unwrap();
        let mut prev = state.energy(&probe).unwrap();
        for step in &trace {
            let TraceStep::Update { local_field, flipped, energy, .. } = step else {
                panic!("async trace records per-neuron updates");
            };
            prop_assert!(*energy <= prev + 1e-12, "energy rose {prev} -> {energy}");
            if *flipped && (*local_field - cfg.theta).abs() > 1e-12 {
                prop_assert!(*energy < prev, "flip with nonzero field must strictly descend");
            }
            prev = *energy;
        }
        if outcome.converged {
            prop_assert!(state.is_fixed_point(&outcome.pattern, cfg.theta).unwrap());
        }
    }

    #[test]
    fn converged_sync_recall_lands_on_fixed_point(
        len in 2usize..20,
        pattern_seeds in prop::collection::vec(any::<u64>(), 1..4),
        probe_seed in any::<u64>(),
    ) {
        let patterns: Vec<BipolarPattern> = pattern_seeds
            .iter()
            .map(|&s| random_bipolar(len, s).unwrap())
            .collect();
        let state = hebbian_trained(len, &patterns);
        let probe = random_bipolar(len, probe_seed).unwrap();
        let cfg = RecallConfig { mode: UpdateMode::Sync, ..RecallConfig::default() };
        let outcome = state.recall(&probe, &cfg).unwrap();
        prop_assert!(outcome.pattern.bits().iter().all(|&b| b == 1 || b == -1));
        if outcome.converged {
            prop_assert!(state.is_fixed_point(&outcome.pattern, cfg.theta).unwrap());
        }
    }

    #[test]
    fn shard_partition_invariance(
        k in 3usize..7,
        pattern_count in 1usize..24,
        shard_count in 1usize..10,
        seed in any::<u64>(),
    ) {
        let len = triangle_len(k);
        let records: Vec<ShardRecord> = (0..pattern_count)
            .map(|i| {
                let p = random_bipolar(len, seed.wrapping_add(i as u64)).unwrap();
                ShardRecord::pattern(k, p).unwrap()
            })
            .collect();
        let job = |shards: usize| JobSpec {
            version: 1,
            rule: LearningRule::Hebbian,
            oja_rate: 0.01,
            threshold: ThresholdSpec::default(),
            recall: RecallConfig::default(),
            shard_count: shards,
            shards: vec![],
            test_patterns: vec![],
        };
        let single = mapreduce::run_training(records.clone(), &job(1)).unwrap();
        let split = mapreduce::run_training(records, &job(shard_count)).unwrap();
        prop_assert_eq!(single.hebbian_accum().unwrap(), split.hebbian_accum().unwrap());
        prop_assert_eq!(single.pattern_count(), pattern_count as u64);
        prop_assert_eq!(split.pattern_count(), pattern_count as u64);
    }

    #[test]
    fn cosine_matches_dot_product_form_and_is_symmetric(
        len in 1usize..64,
        seed_a in any::<u64>(),
        seed_b in any::<u64>(),
    ) {
        let a = random_bipolar(len, seed_a).unwrap();
        let b = random_bipolar(len, seed_b).unwrap();
        let fast = cosine_similarity(&a, &b).unwrap();
        let dot: f64 = a.bits().iter().zip(b.bits())
            .map(|(&x, &y)| (x as f64) * (y as f64))
            .sum();
        let reference = dot / ((len as f64).sqrt() * (len as f64).sqrt());
        prop_assert!((fast - reference).abs() < 1e-12);
        prop_assert_eq!(fast, cosine_similarity(&b, &a).unwrap());
    }

    #[test]
    fn links_lost_partitions_the_reference(set_a in arb_assoc_set(), mask in any::<u64>()) {
        // Derive a second set over the same k by toggling membership.
        let k = set_a.k();
        let all: Vec<(usize, usize)> = (0..triangle_len(k))
            .map(|idx| hoplink_core::pattern::index_pair(idx, k))
            .collect();
        let set_b = AssociationSet::from_pairs(
            k,
            all.iter().enumerate().filter(|(i, _)| mask >> (i % 64) & 1 == 1).map(|(_, &p)| p),
        ).unwrap();

        let lost = links_lost(&set_a, &set_b).unwrap();
        let kept = set_a.intersection(&set_b).unwrap();
        prop_assert_eq!(lost.union(&kept).unwrap(), set_a.clone());
        prop_assert!(lost.intersection(&kept).unwrap().is_empty());

        let gained = links_gained(&set_b, &set_a).unwrap();
        prop_assert!(gained.iter().all(|(i, j)| set_b.contains(i, j)));
        prop_assert!(gained.intersection(&set_a).unwrap().is_empty());

        let recovery = recovery_accuracy(&set_a, &set_b).unwrap();
        prop_assert_eq!(recovery == 1.0, set_a == set_b);
        prop_assert!((0.0..=1.0).contains(&recovery));
    }
}

/// Brute-force oracle: enumerate every state of a small network and
/// collect the fixed points of the synchronous update map.
fn enumerate_fixed_points(state: &WeightState, theta: f64) -> Vec<BipolarPattern> {
    let len = state.size();
    assert!(len <= 16, "exhaustive enumeration only at small sizes");
    let mut fixed = Vec::new();
    for mask in 0u32..(1 << len) {
        let bits: Vec<i8> = (0..len)
            .map(|i| if mask >> i & 1 == 1 { 1 } else { -1 })
            .collect();
        let p = BipolarPattern::from_bits(bits).unwrap();
        if state.is_fixed_point(&p, theta).unwrap() {
            fixed.push(p);
        }
    }
    fixed
}

#[test]
fn noisy_probe_recalls_nearest_fixed_point_small_network() {
    // k=5 datasets, L=10 neurons: small enough to enumerate all 1024
    // states. With one stored pattern, recall from a one-flip probe must
    // land on the stored pattern, which the oracle confirms is the
    // nearest fixed point.
    let stored = random_bipolar(10, 99).unwrap();
    let mut state = WeightState::new_hebbian(10).unwrap();
    state.train_hebbian(&stored).unwrap();

    let fixed = enumerate_fixed_points(&state, 0.0);
    assert!(fixed.contains(&stored));
    assert!(fixed.contains(&stored.negated()));

    for flip_pos in 0..10 {
        let mut probe = stored.clone();
        probe.flip(flip_pos);
        let nearest = fixed
            .iter()
            .min_by_key(|f| f.hamming_distance(&probe).unwrap())
            .unwrap();
        assert_eq!(
            nearest, &stored,
            "stored pattern is the nearest fixed point"
        );

        for mode in [UpdateMode::Sync, UpdateMode::Async] {
            let cfg = RecallConfig {
                mode,
                seed: 5,
                ..RecallConfig::default()
            };
            let out = state.recall(&probe, &cfg).unwrap();
            assert!(out.converged);
            assert_eq!(out.pattern, stored);
        }
    }
}

#[test]
fn one_flip_probe_at_l45_recovers_stored_pattern() {
    let stored = random_bipolar(45, 4242).unwrap();
    let mut state = WeightState::new_hebbian(45).unwrap();
    state.train_hebbian(&stored).unwrap();
    let mut probe = stored.clone();
    probe.flip(17);
    let cfg = RecallConfig {
        seed: 11,
        ..RecallConfig::default()
    };
    let out = state.recall(&probe, &cfg).unwrap();
    assert!(out.converged);
    assert_eq!(out.pattern, stored);
}

#[test]
fn parallel_and_serial_map_phases_agree() {
    let k = 6;
    let len = triangle_len(k);
    let records: Vec<ShardRecord> = (0..40)
        .map(|i| ShardRecord::pattern(k, random_bipolar(len, 1000 + i).unwrap()).unwrap())
        .collect();
    let job = JobSpec {
        version: 1,
        rule: LearningRule::Hebbian,
        oja_rate: 0.01,
        threshold: ThresholdSpec::default(),
        recall: RecallConfig::default(),
        shard_count: 8,
        shards: vec![],
        test_patterns: vec![],
    };
    let wide = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap()
        .install(|| mapreduce::run_training(records.clone(), &job).unwrap());
    let narrow = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| mapreduce::run_training(records, &job).unwrap());
    assert_eq!(
        wide.hebbian_accum().unwrap(),
        narrow.hebbian_accum().unwrap()
    );
}
