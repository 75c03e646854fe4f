//! Usage-matrix preprocessing: ingestion, Euclidean normalisation and
//! threshold binarisation.
//!
//! Raw co-usage frequencies arrive as a `k x k` nonnegative matrix. The
//! pipeline to a trainable pattern is `normalize` (divide by the Frobenius
//! norm, bounding entries to `[0, 1]`) followed by `binarize` (compare each
//! upper-triangle entry against a threshold and emit `+1`/`-1`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::{triangle_len, BipolarPattern};

/// Symmetric, zero-diagonal matrix of nonnegative co-usage counts.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageMatrix {
    k: usize,
    counts: Vec<f64>, // row-major k*k
}

/// What ingestion had to repair. Counts are cells in the strict upper
/// triangle (asymmetry) or on the diagonal.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub asymmetric_cells: usize,
    pub nonzero_diagonal_cells: usize,
}

impl IngestReport {
    pub fn is_clean(&self) -> bool {
        self.asymmetric_cells == 0 && self.nonzero_diagonal_cells == 0
    }
}

impl UsageMatrix {
    /// Ingest a raw `k x k` count matrix.
    ///
    /// Asymmetric cells are healed to `max(a[i][j], a[j][i])` and nonzero
    /// diagonal cells are cleared, both reported rather than rejected.
    /// Negative or non-finite entries are rejected outright.
    pub fn from_counts(k: usize, counts: Vec<f64>) -> Result<(Self, IngestReport)> {
        if k < 2 {
            return Err(Error::spec(format!("need at least 2 datasets, got k={k}")));
        }
        if counts.len() != k * k {
            return Err(Error::dimension(format!(
                "expected {} entries for k={k}, got {}",
                k * k,
                counts.len()
            )));
        }
        if let Some(pos) = counts.iter().position(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::format(
                "usage matrix",
                format!(
                    "entry ({},{}) is {}, expected a finite nonnegative count",
                    pos / k,
                    pos % k,
                    counts[pos]
                ),
            ));
        }
        let mut m = UsageMatrix { k, counts };
        let mut report = IngestReport::default();
        for i in 0..k {
            if m.counts[i * k + i] != 0.0 {
                m.counts[i * k + i] = 0.0;
                report.nonzero_diagonal_cells += 1;
            }
            for j in (i + 1)..k {
                let a = m.counts[i * k + j];
                let b = m.counts[j * k + i];
                if a != b {
                    let healed = a.max(b);
                    m.counts[i * k + j] = healed;
                    m.counts[j * k + i] = healed;
                    report.asymmetric_cells += 1;
                }
            }
        }
        Ok((m, report))
    }

    /// All-zero matrix over `k` datasets.
    pub fn zeros(k: usize) -> Self {
        UsageMatrix {
            k,
            counts: vec![0.0; k * k],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.counts[i * self.k + j]
    }

    /// Set the symmetric pair `(i, j)`/`(j, i)`. Panics on the diagonal.
    pub(crate) fn set_pair(&mut self, i: usize, j: usize, value: f64) {
        assert!(i != j, "diagonal cells carry no link semantics");
        self.counts[i * self.k + j] = value;
        self.counts[j * self.k + i] = value;
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.counts.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Strict upper-triangle entries in row-major order.
    pub fn upper_triangle(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.k)
            .flat_map(move |i| ((i + 1)..self.k).map(move |j| (i, j, self.counts[i * self.k + j])))
    }

    /// Divide every entry by the Frobenius norm, bounding values to `[0, 1]`.
    /// An all-zero matrix has no scale and is rejected.
    pub fn normalized(&self) -> Result<UsageMatrix> {
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return Err(Error::degenerate(
                "cannot normalize an all-zero usage matrix",
            ));
        }
        Ok(UsageMatrix {
            k: self.k,
            counts: self.counts.iter().map(|c| c / norm).collect(),
        })
    }

    /// Threshold the upper triangle into a bipolar pattern: `+1` where the
    /// entry is `>= theta`, `-1` below. Expects normalised input for
    /// absolute thresholds to be meaningful.
    pub fn binarize(&self, threshold: &ThresholdSpec) -> Result<BipolarPattern> {
        let theta = threshold.resolve(self)?;
        let bits = self
            .upper_triangle()
            .map(|(_, _, v)| if v >= theta { 1i8 } else { -1i8 })
            .collect();
        debug_assert_eq!(triangle_len(self.k), self.k * (self.k - 1) / 2);
        BipolarPattern::from_bits(bits)
    }
}

/// How the binarisation threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdSpec {
    /// Fixed threshold value.
    Absolute(f64),
    /// Quantile of the nonzero upper-triangle entries, nearest-rank with
    /// the lower middle on even counts. `Quantile(0.5)` is the median.
    Quantile(f64),
}

impl Default for ThresholdSpec {
    fn default() -> Self {
        ThresholdSpec::Quantile(0.5)
    }
}

impl ThresholdSpec {
    pub fn resolve(&self, m: &UsageMatrix) -> Result<f64> {
        match *self {
            ThresholdSpec::Absolute(t) => {
                if !t.is_finite() {
                    return Err(Error::spec(format!("threshold {t} is not finite")));
                }
                Ok(t)
            }
            ThresholdSpec::Quantile(q) => {
                if !(0.0..=1.0).contains(&q) {
                    return Err(Error::spec(format!("quantile {q} outside [0, 1]")));
                }
                let mut values: Vec<f64> = m
                    .upper_triangle()
                    .filter(|(_, _, v)| *v != 0.0)
                    .map(|(_, _, v)| v)
                    .collect();
                if values.is_empty() {
                    return Err(Error::degenerate(
                        "quantile threshold over an all-zero link set",
                    ));
                }
                values.sort_by(|a, b| a.partial_cmp(b).expect("finite by construction"));
                let n = values.len();
                let idx = ((q * n as f64).ceil() as usize)
                    .saturating_sub(1)
                    .min(n - 1);
                Ok(values[idx])
            }
        }
    }
}
