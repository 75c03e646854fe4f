//! File formats.
//!
//! - Shard files: JSON lines, one record per line, either
//!   `{"k": 5, "bits": [1, -1, ...]}` or `{"k": 5, "counts": [[...], ...]}`.
//! - Weight state: one JSON document
//!   `{"version", "size", "rule", "pattern_count", "oja_rate", "bias", "accum"}`
//!   with `accum` a row-major integer array under `hebbian` and a real
//!   array under `oja`.
//! - Pattern files: a single `{"k", "bits"}` object; recall results add
//!   `version`, `sweeps_used` and `converged`.
//! - Usage matrices: CSV with a header row of dataset labels and `k` rows
//!   of `k` counts; labels map to indices in file order.
//! - Association sets: one `labelA,labelB` pair per line with the default
//!   `k1..kN` label scheme.
//!
//! All writers emit canonical bytes (fixed field order, compact JSON, one
//! trailing newline), so identical states serialise identically.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hopfield::{LearningRule, RecallOutcome, WeightState};
use crate::mapreduce::{JobSpec, ShardRecord};
use crate::pattern::BipolarPattern;
use crate::pipeline::{IngestReport, UsageMatrix};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ShardLine {
    Bits { k: usize, bits: Vec<i8> },
    Counts { k: usize, counts: Vec<Vec<f64>> },
}

/// Read every record of a JSONL shard file, in file order.
pub fn read_shard_file(path: &Path) -> Result<Vec<ShardRecord>> {
    let file = fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ShardLine = serde_json::from_str(&line).map_err(|e| {
            Error::format(
                "shard record",
                format!("{}:{}: {e}", path.display(), line_no + 1),
            )
        })?;
        records.push(shard_line_to_record(parsed, path, line_no + 1)?);
    }
    Ok(records)
}

fn shard_line_to_record(line: ShardLine, path: &Path, line_no: usize) -> Result<ShardRecord> {
    let context =
        |e: Error| Error::format("shard record", format!("{}:{line_no}: {e}", path.display()));
    match line {
        ShardLine::Bits { k, bits } => {
            let pattern = BipolarPattern::from_bits(bits).map_err(context)?;
            ShardRecord::pattern(k, pattern).map_err(context)
        }
        ShardLine::Counts { k, counts } => {
            if counts.len() != k || counts.iter().any(|row| row.len() != k) {
                return Err(context(Error::dimension(format!(
                    "counts must be a {k}x{k} matrix"
                ))));
            }
            let flat: Vec<f64> = counts.into_iter().flatten().collect();
            let (matrix, _report) = UsageMatrix::from_counts(k, flat).map_err(context)?;
            Ok(ShardRecord::usage(matrix))
        }
    }
}

/// Write records as a JSONL shard file.
pub fn write_shard_file(path: &Path, records: &[ShardRecord]) -> Result<()> {
    let mut out = Vec::new();
    for record in records {
        let line = match record {
            ShardRecord::Pattern { k, pattern } => ShardLine::Bits {
                k: *k,
                bits: pattern.bits().to_vec(),
            },
            ShardRecord::Usage(m) => ShardLine::Counts {
                k: m.k(),
                counts: (0..m.k())
                    .map(|i| (0..m.k()).map(|j| m.get(i, j)).collect())
                    .collect(),
            },
        };
        serde_json::to_writer(&mut out, &line)
            .map_err(|e| Error::format("shard record", e.to_string()))?;
        out.push(b'\n');
    }
    fs::write(path, out)?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum AccumField {
    Int(Vec<i64>),
    Real(Vec<f64>),
}

#[derive(Serialize, Deserialize)]
struct WeightsDoc {
    version: u32,
    size: usize,
    rule: LearningRule,
    pattern_count: u64,
    oja_rate: f64,
    bias: Vec<f64>,
    accum: AccumField,
}

pub const WEIGHTS_VERSION: u32 = 1;

/// Serialise a weight state to its canonical JSON bytes.
pub fn weights_to_bytes(state: &WeightState) -> Result<Vec<u8>> {
    let accum = match state.rule() {
        LearningRule::Hebbian => AccumField::Int(
            state
                .hebbian_accum()
                .expect("hebbian state has an integer accumulator")
                .to_vec(),
        ),
        LearningRule::Oja => AccumField::Real(
            state
                .oja_weights()
                .expect("oja state has real weights")
                .to_vec(),
        ),
    };
    let doc = WeightsDoc {
        version: WEIGHTS_VERSION,
        size: state.size(),
        rule: state.rule(),
        pattern_count: state.pattern_count(),
        oja_rate: state.oja_rate(),
        bias: state.bias().to_vec(),
        accum,
    };
    let mut bytes =
        serde_json::to_vec(&doc).map_err(|e| Error::format("weight state", e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn write_weights(path: &Path, state: &WeightState) -> Result<()> {
    fs::write(path, weights_to_bytes(state)?)?;
    Ok(())
}

pub fn read_weights(path: &Path) -> Result<WeightState> {
    let bytes = fs::read(path)?;
    let doc: WeightsDoc = serde_json::from_slice(&bytes)
        .map_err(|e| Error::format("weight state", format!("{}: {e}", path.display())))?;
    if doc.version != WEIGHTS_VERSION {
        return Err(Error::format(
            "weight state",
            format!("unsupported version {}", doc.version),
        ));
    }
    match (doc.rule, doc.accum) {
        (LearningRule::Hebbian, AccumField::Int(accum)) => {
            WeightState::from_hebbian_parts(doc.size, accum, doc.pattern_count, doc.bias)
        }
        (LearningRule::Oja, AccumField::Real(weights)) => WeightState::from_oja_parts(
            doc.size,
            weights,
            doc.pattern_count,
            doc.oja_rate,
            doc.bias,
        ),
        (LearningRule::Hebbian, AccumField::Real(_)) => Err(Error::format(
            "weight state",
            "hebbian rule requires an integer accumulator",
        )),
        (LearningRule::Oja, AccumField::Int(weights)) => {
            // Integer-valued reals parse as integers; recover them.
            WeightState::from_oja_parts(
                doc.size,
                weights.into_iter().map(|w| w as f64).collect(),
                doc.pattern_count,
                doc.oja_rate,
                doc.bias,
            )
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PatternDoc {
    k: usize,
    bits: Vec<i8>,
}

/// Read a single-pattern JSON file (`{"k", "bits"}`); recall-result files
/// parse too since unknown fields are ignored.
pub fn read_pattern_file(path: &Path) -> Result<(usize, BipolarPattern)> {
    let bytes = fs::read(path)?;
    let doc: PatternDoc = serde_json::from_slice(&bytes)
        .map_err(|e| Error::format("pattern file", format!("{}: {e}", path.display())))?;
    let pattern = BipolarPattern::from_bits(doc.bits)?;
    // Reuse the shard-record validation of k against the pattern length.
    let record = ShardRecord::pattern(doc.k, pattern)?;
    match record {
        ShardRecord::Pattern { k, pattern } => Ok((k, pattern)),
        ShardRecord::Usage(_) => unreachable!(),
    }
}

pub fn write_pattern_file(path: &Path, k: usize, pattern: &BipolarPattern) -> Result<()> {
    let doc = PatternDoc {
        k,
        bits: pattern.bits().to_vec(),
    };
    let mut bytes =
        serde_json::to_vec(&doc).map_err(|e| Error::format("pattern file", e.to_string()))?;
    bytes.push(b'\n');
    fs::write(path, bytes)?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct RecallResultDoc {
    version: u32,
    k: usize,
    bits: Vec<i8>,
    sweeps_used: usize,
    converged: bool,
}

pub const RECALL_RESULT_VERSION: u32 = 1;

pub fn write_recall_result(path: &Path, k: usize, outcome: &RecallOutcome) -> Result<()> {
    let doc = RecallResultDoc {
        version: RECALL_RESULT_VERSION,
        k,
        bits: outcome.pattern.bits().to_vec(),
        sweeps_used: outcome.sweeps,
        converged: outcome.converged,
    };
    let mut bytes =
        serde_json::to_vec(&doc).map_err(|e| Error::format("recall result", e.to_string()))?;
    bytes.push(b'\n');
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_job_spec(path: &Path) -> Result<JobSpec> {
    let bytes = fs::read(path)?;
    let spec: JobSpec = serde_json::from_slice(&bytes)
        .map_err(|e| Error::format("job spec", format!("{}: {e}", path.display())))?;
    spec.validate()?;
    Ok(spec)
}

pub fn write_job_spec(path: &Path, spec: &JobSpec) -> Result<()> {
    let mut bytes =
        serde_json::to_vec_pretty(spec).map_err(|e| Error::format("job spec", e.to_string()))?;
    bytes.push(b'\n');
    fs::write(path, bytes)?;
    Ok(())
}

/// Default dataset label scheme: `k1..kN`, mapping label `kN` to index
/// `N - 1`.
pub fn default_labels(k: usize) -> Vec<String> {
    (1..=k).map(|n| format!("k{n}")).collect()
}

/// Parse a `k1`-style label into its dataset index.
pub fn parse_label(label: &str, k: usize) -> Result<usize> {
    let trimmed = label.trim();
    let number = trimmed
        .strip_prefix('k')
        .and_then(|rest| rest.parse::<usize>().ok())
        .ok_or_else(|| {
            Error::format(
                "dataset label",
                format!("'{trimmed}' is not of the form k<N>"),
            )
        })?;
    if number == 0 || number > k {
        return Err(Error::format(
            "dataset label",
            format!("'{trimmed}' out of range for k={k}"),
        ));
    }
    Ok(number - 1)
}

/// Read an association-set file: one `labelA,labelB` pair per line.
pub fn read_links_file(path: &Path, k: usize) -> Result<crate::pattern::AssociationSet> {
    let text = fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (a, b) = line.split_once(',').ok_or_else(|| {
            Error::format(
                "association set",
                format!(
                    "{}:{}: expected 'labelA,labelB'",
                    path.display(),
                    line_no + 1
                ),
            )
        })?;
        pairs.push((parse_label(a, k)?, parse_label(b, k)?));
    }
    crate::pattern::AssociationSet::from_pairs(k, pairs)
}

pub fn write_links_file(path: &Path, links: &crate::pattern::AssociationSet) -> Result<()> {
    let mut out = String::new();
    for (i, j) in links.iter() {
        out.push_str(&format!("k{},k{}\n", i + 1, j + 1));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read a usage matrix from CSV: header row of labels, then `k` rows of
/// `k` counts. Returns the healed matrix, the labels, and what ingestion
/// repaired.
pub fn read_usage_csv(path: &Path) -> Result<(UsageMatrix, Vec<String>, IngestReport)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::format("usage csv", format!("{}: {e}", path.display())))?;
    let labels: Vec<String> = reader
        .headers()
        .map_err(|e| Error::format("usage csv", e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let k = labels.len();
    let mut counts = Vec::with_capacity(k * k);
    for (row_no, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::format("usage csv", e.to_string()))?;
        if row.len() != k {
            return Err(Error::format(
                "usage csv",
                format!("row {} has {} columns, expected {k}", row_no + 2, row.len()),
            ));
        }
        for field in row.iter() {
            let value: f64 = field.parse().map_err(|_| {
                Error::format(
                    "usage csv",
                    format!("row {}: '{field}' is not a number", row_no + 2),
                )
            })?;
            counts.push(value);
        }
    }
    if counts.len() != k * k {
        return Err(Error::format(
            "usage csv",
            format!("expected {k} data rows, found {}", counts.len() / k.max(1)),
        ));
    }
    let (matrix, report) = UsageMatrix::from_counts(k, counts)?;
    Ok((matrix, labels, report))
}

pub fn write_usage_csv(path: &Path, matrix: &UsageMatrix, labels: &[String]) -> Result<()> {
    if labels.len() != matrix.k() {
        return Err(Error::dimension(format!(
            "{} labels for a k={} matrix",
            labels.len(),
            matrix.k()
        )));
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(labels)
        .map_err(|e| Error::format("usage csv", e.to_string()))?;
    let k = matrix.k();
    for i in 0..k {
        let row: Vec<String> = (0..k).map(|j| matrix.get(i, j).to_string()).collect();
        writer
            .write_record(&row)
            .map_err(|e| Error::format("usage csv", e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::format("usage csv", e.to_string()))?;
    fs::write(path, bytes)?;
    Ok(())
}

/// Write arbitrary JSON-serialisable data as a canonical one-line document.
pub fn write_json<T: Serialize>(path: &Path, what: &str, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec(value).map_err(|e| Error::format(what, e.to_string()))?;
    bytes.push(b'\n');
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T> {
    let bytes = fs::read(path)?;
    serde_json::from_slice(&bytes)
        .map_err(|e| Error::format(what, format!("{}: {e}", path.display())))
}
