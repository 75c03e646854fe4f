//! Associative-memory engine for dataset co-usage linking.
//!
//! Co-usage frequencies between `k` datasets are normalised, thresholded
//! into bipolar link patterns, and stored in a Hopfield network whose
//! recall dynamics recover the stored link structure from noisy or
//! partial probes. Training runs as a map/reduce computation over sharded
//! inputs with a bit-exact commutative merge, and the metrics layer
//! quantifies which links a recall result lost or invented as the memory
//! absorbs newer, dissimilar patterns.

pub mod error;
pub mod hopfield;
pub mod io;
pub mod mapreduce;
pub mod metrics;
pub mod pattern;
pub mod pipeline;
pub mod seed;
pub mod synthgen;

pub use error::{Error, Result};
pub use hopfield::{LearningRule, RecallConfig, RecallOutcome, TraceStep, UpdateMode, WeightState};
pub use mapreduce::{JobSpec, ShardContribution, ShardRecord};
pub use metrics::StageReport;
pub use pattern::{AssociationSet, BipolarPattern};
pub use pipeline::{IngestReport, ThresholdSpec, UsageMatrix};
pub use synthgen::GenSpec;
