//! Patch-level industrial anomaly detection.
//!
//! Normal-image patch features are collected into a [`MemoryBank`], each
//! entry gets a local density (mean distance to its `K` nearest bank
//! neighbors), and test patches are scored by their nearest-neighbor distance
//! minus `alpha` times the matched entry's density. Baseline scorers, greedy
//! k-center coreset subsampling, AUROC evaluation, and a synthetic defect
//! generator ([`defectmaker`]) round out the engine.

pub mod bank;
pub mod coreset;
pub mod defectmaker;
pub mod error;
pub mod eval;
pub mod features;
pub mod kv;
pub mod manifest;
pub mod neighbors;
pub mod resample;
pub mod scoring;
pub mod tensor_io;

pub use bank::{build_memory_bank, learn_local_density, LocalDensityBank, MemoryBank};
pub use coreset::{greedy_kcenter, CoresetSelection};
pub use error::{Error, Result};
pub use eval::{auroc, evaluate_dataset, BenchmarkRecord, GroundTruth, LabeledScore};
pub use features::{aggregate_hierarchies, PatchFeatureSet};
pub use manifest::SampleManifestRow;
pub use scoring::{
    nearest_neighbor, score_image, AnomalyResult, Detector, Method, PatchScoreGrid, ScoreMap,
    ScorerConfig,
};
pub use tensor_io::{FeatureTensor, RawTensor, TensorFileHeader};
