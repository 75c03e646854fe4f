//! Sharded training as a two-phase map/reduce computation.
//!
//! The map phase turns each shard of input records into an integer partial
//! accumulator (normalise, binarize, accumulate); the reduce phase is an
//! element-wise integer sum, so merging is commutative and associative and
//! the final weights are bit-identical for any partition of the same
//! records and any merge order. Oja training is nonlinear in the weights
//! and therefore not mergeable: jobs requesting it run on a single shard
//! or are rejected.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hopfield::{LearningRule, RecallConfig, RecallOutcome, WeightState};
use crate::pattern::{triangle_len, BipolarPattern};
use crate::pipeline::{ThresholdSpec, UsageMatrix};
use crate::seed::derive_seed;

/// One line of a shard file: either an already-binarised pattern or a raw
/// usage matrix that still needs the normalise/binarize steps.
#[derive(Debug, Clone, PartialEq)]
pub enum ShardRecord {
    Pattern { k: usize, pattern: BipolarPattern },
    Usage(UsageMatrix),
}

impl ShardRecord {
    pub fn pattern(k: usize, pattern: BipolarPattern) -> Result<Self> {
        let expected = triangle_len(k);
        if pattern.len() != expected {
            return Err(Error::dimension(format!(
                "pattern length {} is not the triangular length {expected} for k={k}",
                pattern.len()
            )));
        }
        Ok(ShardRecord::Pattern { k, pattern })
    }

    pub fn usage(matrix: UsageMatrix) -> Self {
        ShardRecord::Usage(matrix)
    }

    pub fn k(&self) -> usize {
        match self {
            ShardRecord::Pattern { k, .. } => *k,
            ShardRecord::Usage(m) => m.k(),
        }
    }

    /// Resolve to a trainable pattern. Bipolar records pass through;
    /// usage records are normalised and thresholded.
    pub fn into_pattern(self, threshold: &ThresholdSpec) -> Result<BipolarPattern> {
        match self {
            ShardRecord::Pattern { pattern, .. } => Ok(pattern),
            ShardRecord::Usage(m) => m.normalized()?.binarize(threshold),
        }
    }
}

/// A shard's emitted training state: integer partial accumulator plus the
/// number of patterns it absorbed. An empty shard is the neutral element.
#[derive(Debug, Clone, PartialEq)]
pub struct ShardContribution {
    pub shard_id: usize,
    size: usize,
    partial_accum: Vec<i64>,
    pub pattern_count: u64,
}

impl ShardContribution {
    pub fn empty(shard_id: usize) -> Self {
        ShardContribution {
            shard_id,
            size: 0,
            partial_accum: Vec::new(),
            pattern_count: 0,
        }
    }

    pub fn is_neutral(&self) -> bool {
        self.size == 0 && self.pattern_count == 0
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn partial_accum(&self) -> &[i64] {
        &self.partial_accum
    }
}

/// A complete training job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    pub version: u32,
    pub rule: LearningRule,
    /// Learning rate, consumed only under the Oja rule.
    #[serde(default = "JobSpec::default_oja_rate")]
    pub oja_rate: f64,
    pub threshold: ThresholdSpec,
    pub recall: RecallConfig,
    /// How many map partitions to split the input records into.
    pub shard_count: usize,
    /// Input shard files, read in the order given.
    pub shards: Vec<PathBuf>,
    /// Probe files for the prediction phase, one pattern each.
    #[serde(default)]
    pub test_patterns: Vec<PathBuf>,
}

impl JobSpec {
    pub const VERSION: u32 = 1;

    pub fn default_oja_rate() -> f64 {
        0.01
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != Self::VERSION {
            return Err(Error::format(
                "job spec",
                format!("unsupported version {}", self.version),
            ));
        }
        if self.shard_count < 1 {
            return Err(Error::spec("shard count must be at least 1"));
        }
        if self.rule == LearningRule::Oja && self.shard_count > 1 {
            return Err(Error::spec(
                "oja training is order-dependent and not shard-mergeable; use shard count 1",
            ));
        }
        Ok(())
    }
}

/// Map phase: fold one shard of records into a partial accumulator.
pub fn map_shard(
    shard_id: usize,
    records: Vec<ShardRecord>,
    threshold: &ThresholdSpec,
) -> Result<ShardContribution> {
    let Some(first_k) = records.first().map(ShardRecord::k) else {
        return Ok(ShardContribution::empty(shard_id));
    };
    if let Some(bad) = records.iter().find(|r| r.k() != first_k) {
        return Err(Error::dimension(format!(
            "shard {shard_id} mixes k={first_k} and k={} records",
            bad.k()
        )));
    }
    let size = triangle_len(first_k);
    let mut local = WeightState::new_hebbian(size)?;
    for record in records {
        let pattern = record.into_pattern(threshold)?;
        local.train_hebbian(&pattern)?;
    }
    Ok(ShardContribution {
        shard_id,
        size,
        partial_accum: local
            .hebbian_accum()
            .expect("local state is hebbian")
            .to_vec(),
        pattern_count: local.pattern_count(),
    })
}

/// Reduce phase: element-wise integer sum of the partial accumulators.
/// The result is identical for any arrival order of the contributions.
pub fn reduce(contributions: &[ShardContribution]) -> Result<WeightState> {
    let mut size = None;
    for c in contributions {
        if c.is_neutral() {
            continue;
        }
        match size {
            None => size = Some(c.size),
            Some(s) if s != c.size => {
                return Err(Error::dimension(format!(
                    "shard {} contributes size {}, expected {s}",
                    c.shard_id, c.size
                )));
            }
            Some(_) => {}
        }
    }
    let Some(size) = size else {
        return Err(Error::degenerate(
            "no patterns were mapped; nothing to reduce",
        ));
    };
    let mut accum = vec![0i64; size * size];
    let mut pattern_count = 0u64;
    for c in contributions {
        if c.is_neutral() {
            continue;
        }
        for (slot, &value) in accum.iter_mut().zip(&c.partial_accum) {
            *slot += value;
        }
        pattern_count += c.pattern_count;
    }
    WeightState::from_hebbian_parts(size, accum, pattern_count, vec![0.0; size])
}

/// Prediction phase: recall every probe against a shared read-only state.
/// Each probe's visit-order seed is derived from `(config.seed, index)`,
/// so results do not depend on evaluation order or parallelism.
pub fn predict(
    state: &WeightState,
    probes: &[BipolarPattern],
    config: &RecallConfig,
) -> Result<Vec<RecallOutcome>> {
    probes
        .par_iter()
        .enumerate()
        .map(|(idx, probe)| {
            let cfg = RecallConfig {
                seed: derive_seed(config.seed, idx as u64),
                ..config.clone()
            };
            state.recall(probe, &cfg)
        })
        .collect()
}

/// Split records into `shard_count` contiguous chunks, map them in
/// parallel, and reduce. Oja jobs run sequentially on the single shard.
pub fn run_training(records: Vec<ShardRecord>, spec: &JobSpec) -> Result<WeightState> {
    spec.validate()?;
    if records.is_empty() {
        return Err(Error::degenerate("no input patterns; nothing to train"));
    }
    match spec.rule {
        LearningRule::Hebbian => {
            let chunks = partition(records, spec.shard_count);
            let contributions: Vec<ShardContribution> = chunks
                .into_par_iter()
                .enumerate()
                .map(|(id, chunk)| map_shard(id, chunk, &spec.threshold))
                .collect::<Result<_>>()?;
            reduce(&contributions)
        }
        LearningRule::Oja => {
            let first_k = records[0].k();
            if let Some(bad) = records.iter().find(|r| r.k() != first_k) {
                return Err(Error::dimension(format!(
                    "input mixes k={first_k} and k={} records",
                    bad.k()
                )));
            }
            let mut state = WeightState::new_oja(triangle_len(first_k), spec.oja_rate)?;
            for record in records {
                let pattern = record.into_pattern(&spec.threshold)?;
                state.train_oja(&pattern)?;
            }
            Ok(state)
        }
    }
}

/// Contiguous near-equal partition preserving record order.
fn partition(records: Vec<ShardRecord>, shard_count: usize) -> Vec<Vec<ShardRecord>> {
    let total = records.len();
    let base = total / shard_count;
    let extra = total % shard_count;
    let mut chunks = Vec::with_capacity(shard_count);
    let mut iter = records.into_iter();
    for idx in 0..shard_count {
        let len = base + usize::from(idx < extra);
        chunks.push(iter.by_ref().take(len).collect());
    }
    chunks
}
