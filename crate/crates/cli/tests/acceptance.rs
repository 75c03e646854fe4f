//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured numbers (visible under `--nocapture`).
//!
//! Run with:
//!     cargo test -p hoplink-cli --test acceptance -- --nocapture

use std::time::Instant;

use hoplink_cli::experiment::{run_forgetting, ExperimentConfig};
use hoplink_cli::stats::mean;
use hoplink_core::hopfield::{RecallConfig, TraceStep, UpdateMode, WeightState};
use hoplink_core::mapreduce::{run_training, JobSpec, ShardRecord};
use hoplink_core::metrics::{active_links, links_gained, links_lost, recovery_accuracy};
use hoplink_core::pattern::{index_pair, triangle_len, AssociationSet, BipolarPattern};
use hoplink_core::pipeline::{ThresholdSpec, UsageMatrix};
use hoplink_core::seed::derive_seed;
use hoplink_core::synthgen::random_bipolar;
use hoplink_core::{io, LearningRule};

fn tmp_dir(name: &str) -> std::path::PathBuf {
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Criterion 1: with one stored pattern and a 10%-flipped probe, recall
/// recovers the stored pattern exactly (no links lost, none invented,
/// recovery 1.0) in at least 95 of 100 seeded runs, within 5 seconds.
#[test]
fn acceptance_1_stage0_perfect_recovery() {
    let started = Instant::now();
    let config = ExperimentConfig {
        k: 10,
        stages: 1,
        patterns_per_stage: 1,
        dissimilarity: 0.5,
        noise_flip_prob: 0.1,
        repeats: 100,
        recall: RecallConfig::default(),
        threshold: ThresholdSpec::default(),
        seed: 0,
    };
    let outcome = run_forgetting(&config).unwrap();
    let perfect = outcome
        .series
        .iter()
        .map(|s| &s.reports[0])
        .filter(|r| {
            r.links_lost.is_empty() && r.links_gained.is_empty() && r.recovery_accuracy == 1.0
        })
        .count();
    let elapsed = started.elapsed();
    assert!(perfect >= 95, "only {perfect}/100 runs recovered perfectly");
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}, budget 5s");
    println!(
        "ACCEPTANCE 1 stage-0 perfect recovery: PASS ({perfect}/100 perfect, {:.2}s)",
        elapsed.as_secs_f64()
    );
}

/// Criterion 2: six stages of one dissimilar pattern each (distance >=
/// 0.5), 20 repeats — mean recovery decays with stage (Spearman <= -0.8)
/// and the final stage loses strictly more links than stage 0; 30 seconds.
#[test]
fn acceptance_2_forgetting_trend() {
    let started = Instant::now();
    let config = ExperimentConfig {
        k: 7,
        stages: 6,
        patterns_per_stage: 1,
        dissimilarity: 0.5,
        noise_flip_prob: 0.1,
        repeats: 20,
        recall: RecallConfig::default(),
        threshold: ThresholdSpec::default(),
        seed: 42,
    };
    let outcome = run_forgetting(&config).unwrap();
    let rho = outcome
        .summary
        .spearman_stage_vs_recovery
        .expect("recovery series must not be constant");
    let lost_first = outcome.summary.stages.first().unwrap().links_lost_mean;
    let lost_last = outcome.summary.stages.last().unwrap().links_lost_mean;
    let elapsed = started.elapsed();
    assert!(
        rho <= -0.8,
        "spearman(stage, recovery) = {rho}, need <= -0.8"
    );
    assert!(
        lost_last > lost_first,
        "mean links lost did not grow: stage 0 {lost_first}, final {lost_last}"
    );
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}, budget 30s");
    println!(
        "ACCEPTANCE 2 forgetting trend: PASS (spearman {rho:.4}, |lost| {lost_first:.2} -> {lost_last:.2}, {:.2}s)",
        elapsed.as_secs_f64()
    );
}

fn fixed_point_fraction(l: usize, m: usize, net_seed: u64) -> f64 {
    let patterns: Vec<BipolarPattern> = (0..m)
        .map(|i| random_bipolar(l, derive_seed(net_seed, i as u64)).unwrap())
        .collect();
    let mut state = WeightState::new_hebbian(l).unwrap();
    for p in &patterns {
        state.train_hebbian(p).unwrap();
    }
    let stable = patterns
        .iter()
        .filter(|p| state.is_fixed_point(p, 0.0).unwrap())
        .count();
    stable as f64 / m as f64
}

/// Criterion 3: at 100 neurons the Hebbian store keeps >= 95% of patterns
/// as sync fixed points at load 10 but <= 60% at load 25, averaged over
/// 20 seeds, within 60 seconds — bracketing the storage-capacity limit.
#[test]
fn acceptance_3_capacity_bracket() {
    let started = Instant::now();
    let low: Vec<f64> = (0..20).map(|s| fixed_point_fraction(100, 10, s)).collect();
    let high: Vec<f64> = (0..20).map(|s| fixed_point_fraction(100, 25, s)).collect();
    let low_mean = mean(&low);
    let high_mean = mean(&high);
    let elapsed = started.elapsed();
    assert!(
        low_mean >= 0.95,
        "load 10: fixed fraction {low_mean}, need >= 0.95"
    );
    assert!(
        high_mean <= 0.60,
        "load 25: fixed fraction {high_mean}, need <= 0.60"
    );
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}, budget 60s");
    println!(
        "ACCEPTANCE 3 capacity bracket: PASS (load 10 -> {low_mean:.4}, load 25 -> {high_mean:.4}, {:.2}s)",
        elapsed.as_secs_f64()
    );
}

/// Criterion 4: training 64 random patterns at L=45 over shard counts 1,
/// 2 and 8 produces byte-identical serialized weight files. Patterns are
/// round-tripped through shard files on disk.
#[test]
fn acceptance_4_mapreduce_equivalence() {
    let k = 10;
    let len = triangle_len(k);
    let records: Vec<ShardRecord> = (0..64)
        .map(|i| ShardRecord::pattern(k, random_bipolar(len, derive_seed(4, i)).unwrap()).unwrap())
        .collect();
    let dir = tmp_dir("acceptance4");
    let shard_path = dir.join("patterns.jsonl");
    io::write_shard_file(&shard_path, &records).unwrap();

    let mut files = Vec::new();
    for shard_count in [1usize, 2, 8] {
        let spec = JobSpec {
            version: 1,
            rule: LearningRule::Hebbian,
            oja_rate: 0.01,
            threshold: ThresholdSpec::default(),
            recall: RecallConfig::default(),
            shard_count,
            shards: vec![shard_path.clone()],
            test_patterns: vec![],
        };
        let loaded = io::read_shard_file(&shard_path).unwrap();
        let state = run_training(loaded, &spec).unwrap();
        assert_eq!(state.pattern_count(), 64);
        let path = dir.join(format!("weights-{shard_count}.json"));
        io::write_weights(&path, &state).unwrap();
        files.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(files[0], files[1], "shard counts 1 and 2 diverged");
    assert_eq!(files[0], files[2], "shard counts 1 and 8 diverged");
    println!(
        "ACCEPTANCE 4 map/reduce equivalence: PASS (64 patterns, L=45, {} identical bytes)",
        files[0].len()
    );
}

/// Independent set-algebra oracle over bitmasks of the 10 pairs at k=5.
mod mask_oracle {
    pub fn difference(a: u16, b: u16) -> u16 {
        a & !b
    }

    pub fn jaccard(a: u16, b: u16) -> f64 {
        let union = (a | b).count_ones();
        if union == 0 {
            return 1.0;
        }
        (a & b).count_ones() as f64 / union as f64
    }
}

fn mask_to_set(mask: u16, k: usize) -> AssociationSet {
    let pairs = (0..triangle_len(k))
        .filter(|idx| mask >> idx & 1 == 1)
        .map(|idx| index_pair(idx, k));
    AssociationSet::from_pairs(k, pairs).unwrap()
}

/// Criterion 5: over every association set with at most 4 links at k=5,
/// links-lost, links-gained and recovery match the bitmask oracle exactly.
#[test]
fn acceptance_5_metric_oracle_equivalence() {
    let k = 5;
    let masks: Vec<u16> = (0u16..1 << 10).filter(|m| m.count_ones() <= 4).collect();
    assert_eq!(masks.len(), 386);
    let sets: Vec<AssociationSet> = masks.iter().map(|&m| mask_to_set(m, k)).collect();
    let mut checked = 0usize;
    for (i, &ma) in masks.iter().enumerate() {
        for (j, &mb) in masks.iter().enumerate() {
            let lost = links_lost(&sets[i], &sets[j]).unwrap();
            assert_eq!(lost, mask_to_set(mask_oracle::difference(ma, mb), k));
            let gained = links_gained(&sets[i], &sets[j]).unwrap();
            assert_eq!(gained, mask_to_set(mask_oracle::difference(ma, mb), k));
            let recovery = recovery_accuracy(&sets[i], &sets[j]).unwrap();
            assert_eq!(recovery, mask_oracle::jaccard(ma, mb));
            checked += 1;
        }
    }
    println!("ACCEPTANCE 5 metric oracle equivalence: PASS ({checked} set pairs, exact match)");
}

/// Criterion 6: over 1000 random networks and probes (L <= 50), async
/// recall never increases the energy at any update, and every converged
/// output is confirmed a fixed point by one extra sweep.
#[test]
fn acceptance_6_energy_monotonicity() {
    let started = Instant::now();
    let mut converged_count = 0usize;
    let mut update_count = 0usize;
    for case in 0..1000u64 {
        let case_seed = derive_seed(6, case);
        let l = 2 + (derive_seed(case_seed, 0) % 49) as usize; // 2..=50
        let m = 1 + (derive_seed(case_seed, 1) % 5) as usize; // 1..=5
        let mut state = WeightState::new_hebbian(l).unwrap();
        for i in 0..m {
            state
                .train_hebbian(&random_bipolar(l, derive_seed(case_seed, 10 + i as u64)).unwrap())
                .unwrap();
        }
        let probe = random_bipolar(l, derive_seed(case_seed, 2)).unwrap();
        let cfg = RecallConfig {
            mode: UpdateMode::Async,
            theta: 0.0,
            max_sweeps: 100,
            seed: derive_seed(case_seed, 3),
        };
        let (outcome, trace) = state.recall_traced(&probe, &cfg).unwrap();
        let mut prev = state.energy(&probe).unwrap();
        for step in &trace {
            let TraceStep::Update { energy, .. } = step else {
                panic!("async trace has per-update steps");
            };
            assert!(
                *energy <= prev + 1e-9,
                "case {case}: energy rose from {prev} to {energy}"
            );
            prev = *energy;
            update_count += 1;
        }
        assert!(outcome.converged, "case {case}: async recall must settle");
        assert!(
            state.is_fixed_point(&outcome.pattern, cfg.theta).unwrap(),
            "case {case}: converged output is not a fixed point"
        );
        converged_count += 1;
    }
    let elapsed = started.elapsed();
    println!(
        "ACCEPTANCE 6 energy monotonicity: PASS ({converged_count}/1000 converged, {update_count} updates checked, {:.2}s)",
        elapsed.as_secs_f64()
    );
}

/// Random nonzero usage matrix: roughly half the pairs carry a count in
/// [1, 1000].
fn random_usage_matrix(k: usize, case_seed: u64) -> UsageMatrix {
    let occupancy = random_bipolar(triangle_len(k), derive_seed(case_seed, 1)).unwrap();
    let mut counts = vec![0.0; k * k];
    let mut idx = 0;
    for i in 0..k {
        for j in (i + 1)..k {
            if occupancy.get(idx) == 1 {
                let v = 1.0 + (derive_seed(case_seed, 2 + idx as u64) % 1000) as f64;
                counts[i * k + j] = v;
                counts[j * k + i] = v;
            }
            idx += 1;
        }
    }
    UsageMatrix::from_counts(k, counts).unwrap().0
}

/// Criterion 7: encoding round-trips on 1000 random sets, normalize
/// idempotence within 1e-12, and binarize monotonicity in the threshold.
#[test]
fn acceptance_7_pipeline_identities() {
    // Round trip: pattern -> association set -> pattern, both directions.
    let mut round_trips = 0usize;
    for case in 0..1000u64 {
        let case_seed = derive_seed(7, case);
        let k = 2 + (derive_seed(case_seed, 0) % 9) as usize; // 2..=10
        let bits = random_bipolar(triangle_len(k), derive_seed(case_seed, 1)).unwrap();
        let set = active_links(&bits, k).unwrap();
        let encoded = set.to_pattern().unwrap();
        assert_eq!(encoded, bits);
        assert_eq!(AssociationSet::from_pattern(&encoded, k).unwrap(), set);
        round_trips += 1;
    }

    // Normalize idempotence and binarize monotonicity on random matrices.
    let mut matrix_cases = 0usize;
    for case in 0..200u64 {
        let case_seed = derive_seed(70, case);
        let k = 2 + (derive_seed(case_seed, 0) % 7) as usize; // 2..=8
        let matrix = random_usage_matrix(k, case_seed);
        if matrix.frobenius_norm() == 0.0 {
            continue;
        }
        let once = matrix.normalized().unwrap();
        assert!((once.frobenius_norm() - 1.0).abs() < 1e-12);
        let twice = once.normalized().unwrap();
        for i in 0..k {
            for j in 0..k {
                assert!((once.get(i, j) - twice.get(i, j)).abs() < 1e-12);
            }
        }

        let lo = (derive_seed(case_seed, 100) % 1000) as f64 / 1000.0;
        let hi = lo + (derive_seed(case_seed, 101) % 500) as f64 / 1000.0;
        let low_pattern = once.binarize(&ThresholdSpec::Absolute(lo)).unwrap();
        let high_pattern = once.binarize(&ThresholdSpec::Absolute(hi)).unwrap();
        for (a, b) in low_pattern.bits().iter().zip(high_pattern.bits()) {
            assert!(
                !(*a == -1 && *b == 1),
                "threshold increase activated a link"
            );
        }
        matrix_cases += 1;
    }
    assert!(matrix_cases >= 150);
    println!(
        "ACCEPTANCE 7 pipeline identities: PASS ({round_trips} round-trips, {matrix_cases} normalize/monotonicity cases)"
    );
}
