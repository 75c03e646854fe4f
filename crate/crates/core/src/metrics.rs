//! Link-recovery metrics: which associations a recall result lost, which
//! it invented, and how close it is to the reference overall.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::{triangle_len, AssociationSet, BipolarPattern};

/// Extract the linked pairs of a pattern: every `+1` position mapped back
/// to its `(i, j)` dataset pair.
pub fn active_links(pattern: &BipolarPattern, k: usize) -> Result<AssociationSet> {
    AssociationSet::from_pattern(pattern, k)
}

/// Links present in `reference` but absent from `result`: what recall lost.
pub fn links_lost(reference: &AssociationSet, result: &AssociationSet) -> Result<AssociationSet> {
    reference.difference(result)
}

/// Links asserted by `result` that were never in `stored`: what recall
/// invented.
pub fn links_gained(result: &AssociationSet, stored: &AssociationSet) -> Result<AssociationSet> {
    result.difference(stored)
}

/// Cosine similarity `(a . b) / (|a| |b|)`. For bipolar vectors of length
/// `L` this reduces to `(L - 2 * hamming(a, b)) / L`, which is computed
/// here exactly (identical vectors give 1.0, antipodes -1.0, with no
/// square-root rounding).
pub fn cosine_similarity(a: &BipolarPattern, b: &BipolarPattern) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::dimension(format!(
            "cosine over lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let hamming = a.hamming_distance(b)?;
    let len = a.len() as f64;
    Ok((len - 2.0 * hamming as f64) / len)
}

/// Jaccard agreement between two link sets: `|A intersect B| / |A union B|`,
/// defined as 1.0 when both are empty. Equals 1 exactly when the sets
/// coincide, i.e. when nothing was lost and nothing was invented.
pub fn recovery_accuracy(reference: &AssociationSet, result: &AssociationSet) -> Result<f64> {
    let union = reference.union(result)?;
    if union.is_empty() {
        return Ok(1.0);
    }
    let inter = reference.intersection(result)?;
    Ok(inter.len() as f64 / union.len() as f64)
}

/// Per-stage evaluation record.
///
/// Pair lists are sorted, so serialised reports diff deterministically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub version: u32,
    pub stage: usize,
    pub k: usize,
    pub links_lost: Vec<(usize, usize)>,
    pub links_gained: Vec<(usize, usize)>,
    pub cosine_test_vs_stored: f64,
    pub cosine_result_vs_stored: f64,
    pub recovery_accuracy: f64,
}

impl StageReport {
    pub const VERSION: u32 = 1;

    /// Assemble a report from three patterns sharing dimension `k`:
    /// `stored` (what the network was trained on), `reference` (the link
    /// set the result is judged against), and `result` (the recall
    /// output). `test` is the probe that was fed to recall, compared to
    /// `stored` by cosine only.
    pub fn evaluate(
        stage: usize,
        k: usize,
        stored: &BipolarPattern,
        reference: &BipolarPattern,
        test: &BipolarPattern,
        result: &BipolarPattern,
    ) -> Result<StageReport> {
        let expected = triangle_len(k);
        for (name, p) in [
            ("stored", stored),
            ("reference", reference),
            ("test", test),
            ("result", result),
        ] {
            if p.len() != expected {
                return Err(Error::dimension(format!(
                    "{name} pattern length {} does not match k={k} (expected {expected})",
                    p.len()
                )));
            }
        }
        let stored_links = active_links(stored, k)?;
        let reference_links = active_links(reference, k)?;
        let result_links = active_links(result, k)?;
        Ok(StageReport {
            version: Self::VERSION,
            stage,
            k,
            links_lost: links_lost(&reference_links, &result_links)?.to_sorted_pairs(),
            links_gained: links_gained(&result_links, &stored_links)?.to_sorted_pairs(),
            cosine_test_vs_stored: cosine_similarity(test, stored)?,
            cosine_result_vs_stored: cosine_similarity(result, stored)?,
            recovery_accuracy: recovery_accuracy(&reference_links, &result_links)?,
        })
    }
}
