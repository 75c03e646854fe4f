//! The staged forgetting experiment.
//!
//! One repeat: generate a clique-structured usage workload, binarize it
//! into the stored pattern, train a fresh Hebbian network on it, and probe
//! with a noise-flipped copy. Stage 0 evaluates recall immediately; every
//! later stage first trains `patterns_per_stage` additional patterns far
//! from the stored one (normalised distance >= `dissimilarity`) and
//! re-evaluates the same probe. Link metrics are judged against the stored
//! pattern — the recovery target — while the probe's own distance to it is
//! reported as `cosine_test_vs_stored`.
//!
//! Repeats run in parallel; every random choice derives from
//! `(seed, repeat)` so results are independent of thread count.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use hoplink_core::hopfield::{RecallConfig, WeightState};
use hoplink_core::metrics::StageReport;
use hoplink_core::pattern::triangle_len;
use hoplink_core::pipeline::ThresholdSpec;
use hoplink_core::seed::{derive_seed, rng};
use hoplink_core::synthgen::{self, GenSpec};
use hoplink_core::{Error, Result};

use crate::stats::{mean, sample_std, spearman};

// Stream tags keeping the per-repeat random choices decorrelated.
const STREAM_WORKLOAD: u64 = 1;
const STREAM_GEN: u64 = 2;
const STREAM_PROBE: u64 = 3;
const STREAM_DISSIMILAR: u64 = 4;
const STREAM_RECALL: u64 = 5;

/// Clique count range used for the synthetic workload behind each repeat.
const COUNT_RANGE: (f64, f64) = (50.0, 100.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub k: usize,
    /// Number of stages, including stage 0.
    pub stages: usize,
    pub patterns_per_stage: usize,
    /// Minimum normalised distance of interference patterns from the
    /// stored pattern.
    pub dissimilarity: f64,
    /// Per-bit flip probability deriving the probe from the stored pattern.
    pub noise_flip_prob: f64,
    pub repeats: usize,
    pub recall: RecallConfig,
    pub threshold: ThresholdSpec,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::spec(format!(
                "need at least 2 datasets, got k={}",
                self.k
            )));
        }
        if self.stages < 1 {
            return Err(Error::spec("need at least one stage"));
        }
        if self.patterns_per_stage < 1 {
            return Err(Error::spec("need at least one pattern per stage"));
        }
        if self.repeats < 1 {
            return Err(Error::spec("need at least one repeat"));
        }
        if !(self.dissimilarity > 0.0 && self.dissimilarity <= 1.0) {
            return Err(Error::spec(format!(
                "dissimilarity {} outside (0, 1]",
                self.dissimilarity
            )));
        }
        if !(0.0..=1.0).contains(&self.noise_flip_prob) {
            return Err(Error::spec(format!(
                "noise flip probability {} outside [0, 1]",
                self.noise_flip_prob
            )));
        }
        if self.recall.max_sweeps < 1 {
            return Err(Error::spec("max_sweeps must be at least 1"));
        }
        Ok(())
    }
}

/// All stage reports of one repeat, in stage order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatSeries {
    pub repeat: usize,
    pub reports: Vec<StageReport>,
}

/// Across-repeat statistics for one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    pub stage: usize,
    pub recovery_mean: f64,
    pub recovery_std: f64,
    pub links_lost_mean: f64,
    pub links_lost_std: f64,
    pub links_gained_mean: f64,
    pub links_gained_std: f64,
    pub cosine_test_vs_stored_mean: f64,
    pub cosine_result_vs_stored_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub version: u32,
    pub config: ExperimentConfig,
    pub stages: Vec<StageStats>,
    /// Rank correlation between stage index and mean recovery accuracy;
    /// `null` when the series is constant.
    pub spearman_stage_vs_recovery: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub series: Vec<RepeatSeries>,
    pub summary: ExperimentSummary,
}

pub const SUMMARY_VERSION: u32 = 1;

/// Random clique structure for one repeat's workload: `max(1, k/5)`
/// groups of up to three distinct datasets each.
fn random_cliques(k: usize, workload_seed: u64) -> Vec<Vec<usize>> {
    let clique_size = 3.min(k);
    let clique_count = (k / 5).max(1);
    let mut rng = rng(workload_seed);
    let mut cliques = Vec::with_capacity(clique_count);
    for _ in 0..clique_count {
        let mut members: Vec<usize> = (0..k).collect();
        members.shuffle(&mut rng);
        members.truncate(clique_size);
        members.sort_unstable();
        cliques.push(members);
    }
    cliques
}

fn run_repeat(config: &ExperimentConfig, repeat: usize) -> Result<RepeatSeries> {
    let repeat_seed = derive_seed(config.seed, repeat as u64);
    let k = config.k;

    let gen_spec = GenSpec {
        k,
        p: 1,
        cliques: random_cliques(k, derive_seed(repeat_seed, STREAM_WORKLOAD)),
        count_range: COUNT_RANGE,
        background_rate: 0.0,
        noise_flip_prob: config.noise_flip_prob,
        seed: derive_seed(repeat_seed, STREAM_GEN),
    };
    let workload = synthgen::generate_patterns(&gen_spec)?;
    let stored = workload[0].normalized()?.binarize(&config.threshold)?;
    let probe = synthgen::perturb(
        &stored,
        config.noise_flip_prob,
        derive_seed(repeat_seed, STREAM_PROBE),
    )?;

    let mut state = WeightState::new_hebbian(triangle_len(k))?;
    state.train_hebbian(&stored)?;

    let dissimilar_base = derive_seed(repeat_seed, STREAM_DISSIMILAR);
    let recall_base = derive_seed(repeat_seed, STREAM_RECALL);
    let mut reports = Vec::with_capacity(config.stages);
    for stage in 0..config.stages {
        if stage > 0 {
            for j in 0..config.patterns_per_stage {
                let stream = (stage * config.patterns_per_stage + j) as u64;
                let interference = synthgen::generate_dissimilar(
                    &stored,
                    config.dissimilarity,
                    derive_seed(dissimilar_base, stream),
                )?;
                state.train_hebbian(&interference)?;
            }
        }
        let recall_cfg = RecallConfig {
            seed: derive_seed(recall_base, stage as u64),
            ..config.recall.clone()
        };
        let outcome = state.recall(&probe, &recall_cfg)?;
        reports.push(StageReport::evaluate(
            stage,
            k,
            &stored,
            &stored,
            &probe,
            &outcome.pattern,
        )?);
    }
    Ok(RepeatSeries { repeat, reports })
}

pub fn run_forgetting(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let series: Vec<RepeatSeries> = (0..config.repeats)
        .into_par_iter()
        .map(|r| run_repeat(config, r))
        .collect::<Result<_>>()?;

    let mut stages = Vec::with_capacity(config.stages);
    for stage in 0..config.stages {
        let recovery: Vec<f64> = series
            .iter()
            .map(|s| s.reports[stage].recovery_accuracy)
            .collect();
        let lost: Vec<f64> = series
            .iter()
            .map(|s| s.reports[stage].links_lost.len() as f64)
            .collect();
        let gained: Vec<f64> = series
            .iter()
            .map(|s| s.reports[stage].links_gained.len() as f64)
            .collect();
        let cos_test: Vec<f64> = series
            .iter()
            .map(|s| s.reports[stage].cosine_test_vs_stored)
            .collect();
        let cos_result: Vec<f64> = series
            .iter()
            .map(|s| s.reports[stage].cosine_result_vs_stored)
            .collect();
        stages.push(StageStats {
            stage,
            recovery_mean: mean(&recovery),
            recovery_std: sample_std(&recovery),
            links_lost_mean: mean(&lost),
            links_lost_std: sample_std(&lost),
            links_gained_mean: mean(&gained),
            links_gained_std: sample_std(&gained),
            cosine_test_vs_stored_mean: mean(&cos_test),
            cosine_result_vs_stored_mean: mean(&cos_result),
        });
    }

    let stage_idx: Vec<f64> = (0..config.stages).map(|s| s as f64).collect();
    let recovery_means: Vec<f64> = stages.iter().map(|s| s.recovery_mean).collect();
    let summary = ExperimentSummary {
        version: SUMMARY_VERSION,
        config: config.clone(),
        stages,
        spearman_stage_vs_recovery: spearman(&stage_idx, &recovery_means),
    };
    Ok(ExperimentOutcome { series, summary })
}
