//! Synthetic co-usage workloads: clique-structured frequency matrices,
//! noisy probes, and dissimilar interference patterns. Everything is a
//! pure function of its spec and seed.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::BipolarPattern;
use crate::pipeline::{ThresholdSpec, UsageMatrix};
use crate::seed;

/// Background link values are drawn below this fraction of the clique
/// count floor, keeping them under any threshold that clique links clear.
const BACKGROUND_CEILING_FRACTION: f64 = 0.5;

/// Workload generator parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    /// Dataset count.
    pub k: usize,
    /// Number of usage matrices to generate.
    pub p: usize,
    /// Groups of dataset indices whose pairwise links carry high counts.
    pub cliques: Vec<Vec<usize>>,
    /// Inclusive count range for clique links; one value is drawn per
    /// matrix and applied to all clique links, which guarantees the whole
    /// clique clears any threshold the smallest clique count clears.
    pub count_range: (f64, f64),
    /// Probability that a non-clique pair carries a low-frequency link.
    pub background_rate: f64,
    /// Per-bit flip probability consumers use to derive noisy probes.
    pub noise_flip_prob: f64,
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::spec(format!(
                "need at least 2 datasets, got k={}",
                self.k
            )));
        }
        if self.p < 1 {
            return Err(Error::spec("need at least one pattern (p >= 1)"));
        }
        let (lo, hi) = self.count_range;
        if !(lo.is_finite() && hi.is_finite()) || lo <= 0.0 || hi < lo {
            return Err(Error::spec(format!(
                "count range ({lo}, {hi}) must satisfy 0 < min <= max"
            )));
        }
        for prob in [self.background_rate, self.noise_flip_prob] {
            if !(0.0..=1.0).contains(&prob) {
                return Err(Error::spec(format!("probability {prob} outside [0, 1]")));
            }
        }
        for (idx, clique) in self.cliques.iter().enumerate() {
            if clique.len() < 2 {
                return Err(Error::spec(format!(
                    "clique {idx} has {} members, need at least 2",
                    clique.len()
                )));
            }
            let mut seen = std::collections::BTreeSet::new();
            for &m in clique {
                if m >= self.k {
                    return Err(Error::spec(format!(
                        "clique {idx} member {m} out of range for k={}",
                        self.k
                    )));
                }
                if !seen.insert(m) {
                    return Err(Error::spec(format!("clique {idx} repeats member {m}")));
                }
            }
        }
        Ok(())
    }

    /// All unordered pairs covered by at least one clique.
    pub fn clique_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = std::collections::BTreeSet::new();
        for clique in &self.cliques {
            for (a, &i) in clique.iter().enumerate() {
                for &j in &clique[a + 1..] {
                    pairs.insert((i.min(j), i.max(j)));
                }
            }
        }
        pairs.into_iter().collect()
    }
}

/// Generate `p` usage matrices: uniform high counts on clique links, and
/// sub-threshold background links elsewhere with probability
/// `background_rate`. Deterministic given the spec.
pub fn generate_patterns(spec: &GenSpec) -> Result<Vec<UsageMatrix>> {
    spec.validate()?;
    let clique_pairs = spec.clique_pairs();
    let (lo, hi) = spec.count_range;
    let background_hi = lo * BACKGROUND_CEILING_FRACTION;
    let mut rng = seed::rng(spec.seed);
    let mut out = Vec::with_capacity(spec.p);
    for _ in 0..spec.p {
        let mut m = UsageMatrix::zeros(spec.k);
        let clique_count = if lo == hi { lo } else { rng.gen_range(lo..=hi) };
        for &(i, j) in &clique_pairs {
            m.set_pair(i, j, clique_count);
        }
        for i in 0..spec.k {
            for j in (i + 1)..spec.k {
                if m.get(i, j) != 0.0 {
                    continue;
                }
                if spec.background_rate > 0.0 && rng.gen_bool(spec.background_rate) {
                    m.set_pair(i, j, rng.gen_range(background_hi * 0.01..background_hi));
                }
            }
        }
        if !clique_pairs.is_empty() {
            check_cliques_activate(&m, &clique_pairs)?;
        }
        out.push(m);
    }
    Ok(out)
}

/// Generation-time guarantee: every clique link must survive the default
/// median threshold after normalisation.
fn check_cliques_activate(m: &UsageMatrix, clique_pairs: &[(usize, usize)]) -> Result<()> {
    let pattern = m.normalized()?.binarize(&ThresholdSpec::default())?;
    let links = crate::metrics::active_links(&pattern, m.k())?;
    for &(i, j) in clique_pairs {
        if !links.contains(i, j) {
            return Err(Error::spec(format!(
                "generated clique link ({i},{j}) does not clear the default threshold"
            )));
        }
    }
    Ok(())
}

/// Flip each bit independently with probability `flip_prob`.
pub fn perturb(pattern: &BipolarPattern, flip_prob: f64, rng_seed: u64) -> Result<BipolarPattern> {
    if !(0.0..=1.0).contains(&flip_prob) {
        return Err(Error::spec(format!(
            "flip probability {flip_prob} outside [0, 1]"
        )));
    }
    let mut rng = seed::rng(rng_seed);
    let bits = pattern
        .bits()
        .iter()
        .map(|&b| if rng.gen_bool(flip_prob) { -b } else { b })
        .collect();
    Ok(BipolarPattern::from_bits(bits).expect("perturb preserves bipolarity"))
}

/// Produce a pattern whose normalised hamming distance from `reference`
/// is at least `min_distance`, by flipping `ceil(min_distance * L)`
/// positions chosen uniformly without replacement.
pub fn generate_dissimilar(
    reference: &BipolarPattern,
    min_distance: f64,
    rng_seed: u64,
) -> Result<BipolarPattern> {
    if !(min_distance > 0.0 && min_distance <= 1.0) {
        return Err(Error::spec(format!(
            "min distance {min_distance} outside (0, 1]"
        )));
    }
    let len = reference.len();
    let flips = ((min_distance * len as f64).ceil() as usize).min(len);
    let mut rng = seed::rng(rng_seed);
    let mut positions: Vec<usize> = (0..len).collect();
    positions.shuffle(&mut rng);
    let mut out = reference.clone();
    for &pos in positions.iter().take(flips) {
        out.flip(pos);
    }
    Ok(out)
}

/// Fair-coin bipolar pattern of the given length.
pub fn random_bipolar(len: usize, rng_seed: u64) -> Result<BipolarPattern> {
    if len == 0 {
        return Err(Error::dimension("pattern must have at least one bit"));
    }
    let mut rng = seed::rng(rng_seed);
    let bits = (0..len)
        .map(|_| if rng.gen_bool(0.5) { 1i8 } else { -1i8 })
        .collect();
    Ok(BipolarPattern::from_bits(bits).expect("coin flips are bipolar"))
}
