//! Hopfield network: weight storage, Hebbian and Oja learning, and
//! synchronous/asynchronous recall dynamics.
//!
//! Weights are symmetric with a zero diagonal. Under the Hebbian rule the
//! state keeps an integer co-occurrence accumulator (`sum over patterns of
//! x_i * x_j`) and derives the effective real weight `accum[i][j] / L` on
//! read; integer storage makes training bit-exact, order-independent and
//! mergeable across shards. Under the Oja rule weights are real and the
//! update is order-dependent, so Oja states are not shard-mergeable.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::BipolarPattern;
use crate::seed;

/// Learning rule governing how patterns are absorbed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearningRule {
    Hebbian,
    Oja,
}

/// Neuron update schedule during recall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateMode {
    /// All neurons update simultaneously each sweep. May cycle.
    Sync,
    /// Neurons update one at a time in a seeded random permutation per
    /// sweep. Energy never increases, so the dynamics always settle.
    Async,
}

/// Recall parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecallConfig {
    pub mode: UpdateMode,
    /// Activation threshold; a neuron turns `+1` when its local field is
    /// `>= theta` (ties resolve to `+1`).
    pub theta: f64,
    /// Full passes over all neurons before declaring non-convergence.
    pub max_sweeps: usize,
    /// Visit-order seed; only asynchronous recall consumes it.
    pub seed: u64,
}

impl Default for RecallConfig {
    fn default() -> Self {
        RecallConfig {
            mode: UpdateMode::Async,
            theta: 0.0,
            max_sweeps: 100,
            seed: 0,
        }
    }
}

/// Result of a recall run.
#[derive(Debug, Clone, PartialEq)]
pub struct RecallOutcome {
    pub pattern: BipolarPattern,
    /// Sweeps executed, counting the final zero-flip sweep that proves
    /// convergence.
    pub sweeps: usize,
    pub converged: bool,
}

/// One observed step of a traced recall.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceStep {
    /// Asynchronous single-neuron update.
    Update {
        neuron: usize,
        local_field: f64,
        flipped: bool,
        /// Full energy recomputed after the update.
        energy: f64,
    },
    /// Synchronous whole-network sweep.
    Sweep { flips: usize, energy: f64 },
}

enum Weights {
    Hebbian(Vec<i64>),
    Oja(Vec<f64>),
}

/// The network: weights plus learning bookkeeping.
pub struct WeightState {
    size: usize,
    rule: LearningRule,
    pattern_count: u64,
    oja_rate: f64,
    bias: Vec<f64>,
    weights: Weights,
}

impl WeightState {
    /// Fresh Hebbian network of `size` neurons, all weights zero.
    pub fn new_hebbian(size: usize) -> Result<Self> {
        Self::check_size(size)?;
        Ok(WeightState {
            size,
            rule: LearningRule::Hebbian,
            pattern_count: 0,
            oja_rate: 0.0,
            bias: vec![0.0; size],
            weights: Weights::Hebbian(vec![0; size * size]),
        })
    }

    /// Fresh Oja network with learning rate `rate`.
    pub fn new_oja(size: usize, rate: f64) -> Result<Self> {
        Self::check_size(size)?;
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::spec(format!(
                "oja learning rate must be finite and nonnegative, got {rate}"
            )));
        }
        Ok(WeightState {
            size,
            rule: LearningRule::Oja,
            pattern_count: 0,
            oja_rate: rate,
            bias: vec![0.0; size],
            weights: Weights::Oja(vec![0.0; size * size]),
        })
    }

    fn check_size(size: usize) -> Result<()> {
        if size == 0 {
            return Err(Error::dimension("network must have at least one neuron"));
        }
        Ok(())
    }

    /// Rebuild a Hebbian state from its serialised parts, validating every
    /// structural invariant (symmetry, zero diagonal, accumulator bound).
    pub fn from_hebbian_parts(
        size: usize,
        accum: Vec<i64>,
        pattern_count: u64,
        bias: Vec<f64>,
    ) -> Result<Self> {
        Self::check_size(size)?;
        if accum.len() != size * size {
            return Err(Error::dimension(format!(
                "accumulator has {} entries, expected {}",
                accum.len(),
                size * size
            )));
        }
        if bias.len() != size {
            return Err(Error::dimension(format!(
                "bias has {} entries, expected {size}",
                bias.len()
            )));
        }
        for i in 0..size {
            if accum[i * size + i] != 0 {
                return Err(Error::format(
                    "weight state",
                    format!("nonzero diagonal at ({i},{i})"),
                ));
            }
            for j in (i + 1)..size {
                let a = accum[i * size + j];
                if a != accum[j * size + i] {
                    return Err(Error::format(
                        "weight state",
                        format!("asymmetric accumulator at ({i},{j})"),
                    ));
                }
                if a.unsigned_abs() > pattern_count {
                    return Err(Error::format(
                        "weight state",
                        format!(
                            "|accum[{i}][{j}]| = {} exceeds pattern count {pattern_count}",
                            a.unsigned_abs()
                        ),
                    ));
                }
            }
        }
        Ok(WeightState {
            size,
            rule: LearningRule::Hebbian,
            pattern_count,
            oja_rate: 0.0,
            bias,
            weights: Weights::Hebbian(accum),
        })
    }

    /// Rebuild an Oja state from its serialised parts.
    pub fn from_oja_parts(
        size: usize,
        weights: Vec<f64>,
        pattern_count: u64,
        oja_rate: f64,
        bias: Vec<f64>,
    ) -> Result<Self> {
        Self::check_size(size)?;
        if weights.len() != size * size {
            return Err(Error::dimension(format!(
                "weight matrix has {} entries, expected {}",
                weights.len(),
                size * size
            )));
        }
        if bias.len() != size {
            return Err(Error::dimension(format!(
                "bias has {} entries, expected {size}",
                bias.len()
            )));
        }
        for i in 0..size {
            if weights[i * size + i] != 0.0 {
                return Err(Error::format(
                    "weight state",
                    format!("nonzero diagonal at ({i},{i})"),
                ));
            }
            for j in (i + 1)..size {
                let w = weights[i * size + j];
                if !w.is_finite() {
                    return Err(Error::format(
                        "weight state",
                        format!("non-finite weight at ({i},{j})"),
                    ));
                }
                if (w - weights[j * size + i]).abs() > 1e-12 {
                    return Err(Error::format(
                        "weight state",
                        format!("asymmetric weights at ({i},{j})"),
                    ));
                }
            }
        }
        Ok(WeightState {
            size,
            rule: LearningRule::Oja,
            pattern_count,
            oja_rate,
            bias,
            weights: Weights::Oja(weights),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn rule(&self) -> LearningRule {
        self.rule
    }

    pub fn pattern_count(&self) -> u64 {
        self.pattern_count
    }

    pub fn oja_rate(&self) -> f64 {
        self.oja_rate
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    /// Set the per-neuron bias term of the update rule.
    pub fn set_bias(&mut self, bias: Vec<f64>) -> Result<()> {
        if bias.len() != self.size {
            return Err(Error::dimension(format!(
                "bias has {} entries, expected {}",
                bias.len(),
                self.size
            )));
        }
        if bias.iter().any(|b| !b.is_finite()) {
            return Err(Error::numeric("bias entries must be finite"));
        }
        self.bias = bias;
        Ok(())
    }

    /// Raw integer accumulator, row-major. `None` for Oja states.
    pub fn hebbian_accum(&self) -> Option<&[i64]> {
        match &self.weights {
            Weights::Hebbian(a) => Some(a),
            Weights::Oja(_) => None,
        }
    }

    /// Raw real weight matrix, row-major. `None` for Hebbian states.
    pub fn oja_weights(&self) -> Option<&[f64]> {
        match &self.weights {
            Weights::Oja(w) => Some(w),
            Weights::Hebbian(_) => None,
        }
    }

    /// Effective connection weight `W[i][j]`: `accum / L` under Hebbian,
    /// the stored real value under Oja.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        match &self.weights {
            Weights::Hebbian(a) => a[i * self.size + j] as f64 / self.size as f64,
            Weights::Oja(w) => w[i * self.size + j],
        }
    }

    fn check_pattern(&self, pattern: &BipolarPattern) -> Result<()> {
        if pattern.len() != self.size {
            return Err(Error::dimension(format!(
                "pattern length {} does not match network size {}",
                pattern.len(),
                self.size
            )));
        }
        Ok(())
    }

    /// Absorb one pattern under the Hebbian rule: every off-diagonal
    /// accumulator cell gains `x_i * x_j`. Additive, so training is
    /// order-independent and partial accumulators merge by summation.
    pub fn train_hebbian(&mut self, pattern: &BipolarPattern) -> Result<()> {
        self.check_pattern(pattern)?;
        let accum = match &mut self.weights {
            Weights::Hebbian(a) => a,
            Weights::Oja(_) => {
                return Err(Error::spec(
                    "train_hebbian called on a state with rule = oja",
                ))
            }
        };
        let n = self.size;
        let bits = pattern.bits();
        for i in 0..n {
            for j in (i + 1)..n {
                let delta = (bits[i] * bits[j]) as i64;
                accum[i * n + j] += delta;
                accum[j * n + i] += delta;
            }
        }
        self.pattern_count += 1;
        Ok(())
    }

    /// Absorb one pattern under Oja's rule.
    ///
    /// For each row `i`, with `V_i = sum_j W[i][j] * x[j]` over the old
    /// weights, the off-diagonal update is
    /// `W'[i][j] = W[i][j] + u * V_i * (x[j] - V_i * W[i][j])`,
    /// after which the matrix is re-symmetrised to `(W' + W'^T) / 2` and
    /// the diagonal cleared, preserving the Hopfield weight invariants.
    pub fn train_oja(&mut self, pattern: &BipolarPattern) -> Result<()> {
        self.check_pattern(pattern)?;
        let n = self.size;
        let rate = self.oja_rate;
        let weights = match &mut self.weights {
            Weights::Oja(w) => w,
            Weights::Hebbian(_) => {
                return Err(Error::spec(
                    "train_oja called on a state with rule = hebbian",
                ))
            }
        };
        let bits = pattern.bits();
        let mut field = vec![0.0f64; n];
        for i in 0..n {
            let mut v = 0.0;
            for j in 0..n {
                v += weights[i * n + j] * bits[j] as f64;
            }
            if !v.is_finite() {
                return Err(Error::numeric(format!(
                    "oja projection for neuron {i} is not finite"
                )));
            }
            field[i] = v;
        }
        let mut updated = vec![0.0f64; n * n];
        for i in 0..n {
            let v = field[i];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let w = weights[i * n + j];
                let next = w + rate * v * (bits[j] as f64 - v * w);
                if !next.is_finite() {
                    return Err(Error::numeric(format!(
                        "oja update for ({i},{j}) is not finite"
                    )));
                }
                updated[i * n + j] = next;
            }
        }
        for i in 0..n {
            weights[i * n + i] = 0.0;
            for j in (i + 1)..n {
                let sym = (updated[i * n + j] + updated[j * n + i]) / 2.0;
                weights[i * n + j] = sym;
                weights[j * n + i] = sym;
            }
        }
        self.pattern_count += 1;
        Ok(())
    }

    /// Absorb one pattern under whichever rule this state was built with.
    pub fn train(&mut self, pattern: &BipolarPattern) -> Result<()> {
        match self.rule {
            LearningRule::Hebbian => self.train_hebbian(pattern),
            LearningRule::Oja => self.train_oja(pattern),
        }
    }

    /// Local field of neuron `i` given state bits: `bias_i + sum_j W[i][j] * s_j`.
    fn local_field(&self, bits: &[i8], i: usize) -> f64 {
        let n = self.size;
        match &self.weights {
            Weights::Hebbian(a) => {
                // Integer inner product, exact; diagonal is zero so the
                // self term contributes nothing.
                let row = &a[i * n..(i + 1) * n];
                let sum: i64 = row.iter().zip(bits).map(|(&w, &b)| w * b as i64).sum();
                self.bias[i] + sum as f64 / n as f64
            }
            Weights::Oja(w) => {
                let row = &w[i * n..(i + 1) * n];
                self.bias[i]
                    + row
                        .iter()
                        .zip(bits)
                        .map(|(&w, &b)| w * b as f64)
                        .sum::<f64>()
            }
        }
    }

    fn energy_of_bits(&self, bits: &[i8]) -> f64 {
        let n = self.size;
        let mut pair_term = 0.0;
        match &self.weights {
            Weights::Hebbian(a) => {
                let mut acc: i64 = 0;
                for i in 0..n {
                    for j in (i + 1)..n {
                        acc += a[i * n + j] * (bits[i] * bits[j]) as i64;
                    }
                }
                pair_term = acc as f64 / n as f64;
            }
            Weights::Oja(w) => {
                for i in 0..n {
                    for j in (i + 1)..n {
                        pair_term += w[i * n + j] * (bits[i] * bits[j]) as f64;
                    }
                }
            }
        }
        let bias_term: f64 = self
            .bias
            .iter()
            .zip(bits)
            .map(|(&b, &s)| b * s as f64)
            .sum();
        -pair_term - bias_term
    }

    /// Hopfield energy `-1/2 sum_{i != j} W[i][j] s_i s_j - sum_i bias_i s_i`.
    pub fn energy(&self, state: &BipolarPattern) -> Result<f64> {
        self.check_pattern(state)?;
        Ok(self.energy_of_bits(state.bits()))
    }

    fn sync_step(&self, bits: &[i8], theta: f64) -> (Vec<i8>, usize) {
        let mut next = vec![0i8; bits.len()];
        let mut flips = 0;
        for (i, slot) in next.iter_mut().enumerate() {
            let h = self.local_field(bits, i);
            *slot = if h >= theta { 1 } else { -1 };
            if *slot != bits[i] {
                flips += 1;
            }
        }
        (next, flips)
    }

    /// True when one synchronous sweep leaves the state unchanged.
    pub fn is_fixed_point(&self, state: &BipolarPattern, theta: f64) -> Result<bool> {
        self.check_pattern(state)?;
        let (_, flips) = self.sync_step(state.bits(), theta);
        Ok(flips == 0)
    }

    /// Run recall dynamics from `probe` until a full sweep produces zero
    /// flips (converged) or `max_sweeps` is exhausted.
    pub fn recall(&self, probe: &BipolarPattern, config: &RecallConfig) -> Result<RecallOutcome> {
        self.run_recall(probe, config, &mut |_| {})
    }

    /// Like [`WeightState::recall`], also returning the per-step trace with
    /// the full energy recomputed after every update (async) or sweep
    /// (sync). The recall path itself never consults the energy, so the
    /// trace doubles as an independent check of energy descent.
    pub fn recall_traced(
        &self,
        probe: &BipolarPattern,
        config: &RecallConfig,
    ) -> Result<(RecallOutcome, Vec<TraceStep>)> {
        let mut steps = Vec::new();
        let outcome = self.run_recall(probe, config, &mut |s| steps.push(s))?;
        Ok((outcome, steps))
    }

    fn run_recall(
        &self,
        probe: &BipolarPattern,
        config: &RecallConfig,
        observe: &mut dyn FnMut(TraceStep),
    ) -> Result<RecallOutcome> {
        self.check_pattern(probe)?;
        if config.max_sweeps == 0 {
            return Err(Error::spec("max_sweeps must be at least 1"));
        }
        let mut bits = probe.bits().to_vec();
        match config.mode {
            UpdateMode::Sync => {
                for sweep in 1..=config.max_sweeps {
                    let (next, flips) = self.sync_step(&bits, config.theta);
                    bits = next;
                    observe(TraceStep::Sweep {
                        flips,
                        energy: self.energy_of_bits(&bits),
                    });
                    if flips == 0 {
                        return Ok(self.outcome(bits, sweep, true));
                    }
                }
            }
            UpdateMode::Async => {
                let mut rng = seed::rng(config.seed);
                let mut order: Vec<usize> = (0..self.size).collect();
                for sweep in 1..=config.max_sweeps {
                    order.shuffle(&mut rng);
                    let mut flips = 0;
                    for &i in &order {
                        let h = self.local_field(&bits, i);
                        let next = if h >= config.theta { 1 } else { -1 };
                        let flipped = next != bits[i];
                        if flipped {
                            bits[i] = next;
                            flips += 1;
                        }
                        observe(TraceStep::Update {
                            neuron: i,
                            local_field: h,
                            flipped,
                            energy: self.energy_of_bits(&bits),
                        });
                    }
                    if flips == 0 {
                        return Ok(self.outcome(bits, sweep, true));
                    }
                }
            }
        }
        Ok(self.outcome(bits, config.max_sweeps, false))
    }

    fn outcome(&self, bits: Vec<i8>, sweeps: usize, converged: bool) -> RecallOutcome {
        RecallOutcome {
            pattern: BipolarPattern::from_bits_unchecked(bits),
            sweeps,
            converged,
        }
    }
}
