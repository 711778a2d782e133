//! Evaluation harness: dataset indexing and splitting, end-to-end
//! pipeline evaluation, classification metrics, permutation feature
//! importance, and the feature-reduction and architecture sweeps.

mod cache;
mod importance;
mod index;
mod metrics;
mod pipeline;

pub use cache::{load_features, save_features, CacheError};
pub use importance::{
    architecture_sweep, feature_reduction_sweep, permutation_importance, sweep_to_csv,
    ImportanceReport,
};
pub use index::{build_index, CommandLabel, DatasetIndex, IndexEntry, Split, SplitMode};
pub use metrics::{compute_metrics, ClassMetrics, EvalReport};
pub use pipeline::{
    evaluate_features, evaluate_pipeline, extract_clip_features, extract_features,
    ExtractedFeatures, FeatureEntry, PipelineConfig,
};

use thiserror::Error;

use crate::aggregate::AggregateError;
use crate::audio::AudioError;
use crate::features::FeatureError;
use crate::lognet::{LogNetError, TrainError};
use crate::vad::VadError;

/// A failure in one stage of per-file processing.
#[derive(Debug, Error)]
pub enum StageError {
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Vad(#[from] VadError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error("unsupported sample rate {0} Hz (expected 8000 or 16000)")]
    UnsupportedRate(u32),
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}: {source}")]
    File { path: String, source: StageError },
    #[error("dataset root {root} is missing command folder {label:?}")]
    MissingFolder { root: String, label: String },
    #[error("cannot parse a speaker id from filename {0:?}")]
    BadFilename(String),
    #[error("empty {0} split")]
    EmptySplit(String),
    #[error("label sequences differ in length: {truth} vs {predicted}")]
    LabelLengthMismatch { truth: usize, predicted: usize },
    #[error("empty label sequence")]
    EmptyLabels,
    #[error("label index {0} outside the 4-class vocabulary")]
    BadLabelIndex(usize),
    #[error("feature dim {got} does not match architecture input {expected}")]
    ArchDimMismatch { expected: usize, got: usize },
    #[error("need at least {folds} distinct speakers for {folds}-fold CV, found {speakers}")]
    TooFewSpeakers { folds: usize, speakers: usize },
    #[error("feature ranking has {ranking} entries for {dim} features")]
    RankingMismatch { ranking: usize, dim: usize },
    #[error("cannot keep {k} of {dim} features")]
    BadFeatureCount { k: usize, dim: usize },
    #[error("empty sweep range")]
    EmptyRange,
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Model(#[from] LogNetError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
