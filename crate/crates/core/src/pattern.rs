//! Bipolar patterns and association sets.
//!
//! A link structure over `k` datasets is a symmetric relation with a
//! meaningless diagonal, so it is stored as the row-major upper triangle
//! of the `k x k` association matrix: a vector of `L = k(k-1)/2` entries
//! over `{-1, +1}`. `AssociationSet` is the set view of the same object
//! (the unordered pairs whose entry is `+1`); the two representations
//! convert losslessly in both directions.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Number of unordered pairs over `k` items, i.e. the pattern length for
/// `k` datasets.
pub fn triangle_len(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// Position of pair `(i, j)`, `i < j < k`, in the row-major upper triangle.
pub fn pair_index(i: usize, j: usize, k: usize) -> usize {
    debug_assert!(i < j && j < k, "pair ({i},{j}) out of range for k={k}");
    i * k - i * (i + 1) / 2 + (j - i - 1)
}

/// Inverse of [`pair_index`].
pub fn index_pair(idx: usize, k: usize) -> (usize, usize) {
    debug_assert!(idx < triangle_len(k), "index {idx} out of range for k={k}");
    let mut row = 0;
    let mut offset = idx;
    // Row i holds k-1-i entries.
    while offset >= k - 1 - row {
        offset -= k - 1 - row;
        row += 1;
    }
    (row, row + offset + 1)
}

/// A vector over `{-1, +1}`; the unit of storage and recall.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BipolarPattern {
    bits: Vec<i8>,
}

impl BipolarPattern {
    /// Build from raw bits, rejecting anything that is not exactly -1 or +1.
    pub fn from_bits(bits: Vec<i8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::dimension("pattern must have at least one bit"));
        }
        if let Some(pos) = bits.iter().position(|&b| b != 1 && b != -1) {
            return Err(Error::format(
                "bipolar pattern",
                format!("entry {pos} is {}, expected -1 or +1", bits[pos]),
            ));
        }
        Ok(BipolarPattern { bits })
    }

    /// All-`fill` pattern of the given length. `fill` must be -1 or +1.
    pub fn filled(len: usize, fill: i8) -> Result<Self> {
        if fill != 1 && fill != -1 {
            return Err(Error::spec(format!("fill must be -1 or +1, got {fill}")));
        }
        Self::from_bits(vec![fill; len])
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[i8] {
        &self.bits
    }

    pub fn get(&self, idx: usize) -> i8 {
        self.bits[idx]
    }

    /// Flip a single bit in place.
    pub fn flip(&mut self, idx: usize) {
        self.bits[idx] = -self.bits[idx];
    }

    /// The antipodal pattern.
    pub fn negated(&self) -> Self {
        BipolarPattern {
            bits: self.bits.iter().map(|&b| -b).collect(),
        }
    }

    /// Number of positions where the two patterns differ.
    pub fn hamming_distance(&self, other: &Self) -> Result<usize> {
        if self.len() != other.len() {
            return Err(Error::dimension(format!(
                "hamming distance over lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count())
    }

    pub(crate) fn from_bits_unchecked(bits: Vec<i8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b == 1 || b == -1));
        BipolarPattern { bits }
    }
}

impl fmt::Display for BipolarPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// A set of asserted links between datasets: unordered index pairs
/// `(i, j)` with `i < j < k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationSet {
    k: usize,
    pairs: BTreeSet<(usize, usize)>,
}

impl AssociationSet {
    /// Empty set over `k` datasets.
    pub fn new(k: usize) -> Self {
        AssociationSet {
            k,
            pairs: BTreeSet::new(),
        }
    }

    /// Build from pairs, normalising each to `(min, max)` order and
    /// rejecting self-links and out-of-range indices.
    pub fn from_pairs<I>(k: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut set = BTreeSet::new();
        for (a, b) in pairs {
            if a == b {
                return Err(Error::spec(format!("self-link ({a},{b}) is not allowed")));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if j >= k {
                return Err(Error::dimension(format!(
                    "pair ({i},{j}) out of range for k={k}"
                )));
            }
            set.insert((i, j));
        }
        Ok(AssociationSet { k, pairs: set })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.pairs.contains(&(i, j))
    }

    /// Pairs in ascending `(i, j)` order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    /// Sorted pair list, the canonical serialised form.
    pub fn to_sorted_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs.iter().copied().collect()
    }

    fn check_same_k(&self, other: &Self) -> Result<()> {
        if self.k != other.k {
            return Err(Error::dimension(format!(
                "association sets over k={} and k={}",
                self.k, other.k
            )));
        }
        Ok(())
    }

    /// Links in `self` that are absent from `other`.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.check_same_k(other)?;
        Ok(AssociationSet {
            k: self.k,
            pairs: self.pairs.difference(&other.pairs).copied().collect(),
        })
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.check_same_k(other)?;
        Ok(AssociationSet {
            k: self.k,
            pairs: self.pairs.intersection(&other.pairs).copied().collect(),
        })
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.check_same_k(other)?;
        Ok(AssociationSet {
            k: self.k,
            pairs: self.pairs.union(&other.pairs).copied().collect(),
        })
    }

    /// Encode as a bipolar pattern: `+1` at every linked pair's triangular
    /// position, `-1` elsewhere.
    pub fn to_pattern(&self) -> Result<BipolarPattern> {
        let len = triangle_len(self.k);
        if len == 0 {
            return Err(Error::dimension(format!(
                "k={} yields an empty pattern",
                self.k
            )));
        }
        let mut bits = vec![-1i8; len];
        for &(i, j) in &self.pairs {
            bits[pair_index(i, j, self.k)] = 1;
        }
        Ok(BipolarPattern { bits })
    }

    /// Decode a bipolar pattern back into the set of `+1` pairs.
    /// Inverse of [`AssociationSet::to_pattern`].
    pub fn from_pattern(pattern: &BipolarPattern, k: usize) -> Result<Self> {
        let expected = triangle_len(k);
        if pattern.len() != expected {
            return Err(Error::dimension(format!(
                "pattern length {} is not the triangular length {expected} for k={k}",
                pattern.len()
            )));
        }
        let pairs = pattern
            .bits()
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(idx, _)| index_pair(idx, k))
            .collect();
        Ok(AssociationSet { k, pairs })
    }
}
