//! End-to-end pipeline: audio → VAD → MFCC → aggregation → LogNet.

use std::path::Path;

use rayon::prelude::*;

use crate::aggregate::AggregationMethod;
use crate::audio::{load_wav, resample_16k_to_8k, AudioClip};
use crate::evalkit::index::{DatasetIndex, Split};
use crate::evalkit::metrics::{compute_metrics, EvalReport};
use crate::evalkit::{EvalError, StageError};
use crate::features::{MfccConfig, MfccExtractor};
use crate::lognet::{
    fit_normalization_raw, generate_reservoir, train_readout_indexed, LcgParams, LogNetArch,
    LogNetModel, ReadoutWeights, TrainConfig, LABELS,
};
use crate::vad::{detect_segment, OfflineVadConfig, VadError};

/// Everything the end-to-end run needs besides the dataset and method.
#[derive(Debug, Clone, Default)]
pub struct PipelineConfig {
    pub vad: OfflineVadConfig,
    pub mfcc: MfccConfig,
    pub generator: LcgParams,
    pub train: TrainConfig,
}

/// Features of one clip, with everything needed to retrain without
/// touching the audio again.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureEntry {
    pub path: String,
    pub label: usize,
    pub speaker_id: String,
    pub split: Split,
    /// The VAD found no valid segment and the whole clip was used.
    pub fallback: bool,
    pub values: Vec<f64>,
}

/// A full dataset's aggregated features, cacheable to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedFeatures {
    pub method: AggregationMethod,
    /// Fingerprint of the VAD + MFCC configuration that produced this set.
    pub config_hash: u64,
    pub entries: Vec<FeatureEntry>,
}

impl ExtractedFeatures {
    /// Actual vector length; equals `method.dim()` for pipeline output
    /// but may differ for projected or synthetic sets.
    pub fn dim(&self) -> usize {
        self.entries
            .first()
            .map_or_else(|| self.method.dim(), |e| e.values.len())
    }

    pub fn fallback_count(&self) -> usize {
        self.entries.iter().filter(|e| e.fallback).count()
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &FeatureEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }
}

/// Stable fingerprint of the front-end configuration, used to key caches.
pub(crate) fn config_fingerprint(
    vad: &OfflineVadConfig,
    mfcc: &MfccConfig,
    method: AggregationMethod,
) -> u64 {
    let text = format!(
        "vad:{} {} {} {} {} {};mfcc:{} {} {} {} {} {} {} {};method:{}",
        vad.window_len,
        vad.hop,
        vad.energy_threshold,
        vad.min_duration_s,
        vad.max_duration_s,
        vad.pad_s,
        mfcc.fft_len,
        mfcc.hop,
        mfcc.n_mels,
        mfcc.fmin_hz,
        mfcc.fmax_hz,
        mfcc.n_mfcc_computed,
        mfcc.n_mfcc_kept,
        mfcc.sample_rate_hz,
        method
    );
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Run one clip through audio → VAD → MFCC → aggregation.
///
/// 16 kHz input is resampled to 8 kHz first. When the VAD finds no valid
/// segment (or the clip is shorter than one VAD window), the whole clip
/// is used and the fallback flag is set.
pub fn extract_clip_features(
    path: impl AsRef<Path>,
    method: AggregationMethod,
    vad: &OfflineVadConfig,
    extractor: &MfccExtractor,
) -> Result<(Vec<f64>, bool), StageError> {
    let clip = load_wav(path)?;
    let clip = match clip.sample_rate_hz {
        8000 => clip,
        16000 => resample_16k_to_8k(&clip)?,
        other => return Err(StageError::UnsupportedRate(other)),
    };
    let (samples, fallback) = segment_or_whole(&clip, vad)?;
    let matrix = extractor.extract(samples)?;
    let features = method.aggregate(&matrix)?;
    Ok((features.values, fallback))
}

fn segment_or_whole<'a>(
    clip: &'a AudioClip,
    vad: &OfflineVadConfig,
) -> Result<(&'a [f64], bool), StageError> {
    match detect_segment(clip, vad) {
        Ok(Some(seg)) => Ok((&clip.samples[seg.start_sample..seg.end_sample], false)),
        Ok(None) | Err(VadError::ClipTooShort { .. }) => Ok((&clip.samples[..], true)),
        Err(e) => Err(e.into()),
    }
}

/// Extract features for every index entry, in parallel. Entry order is
/// preserved, so results are deterministic.
pub fn extract_features(
    index: &DatasetIndex,
    method: AggregationMethod,
    cfg: &PipelineConfig,
) -> Result<ExtractedFeatures, EvalError> {
    let extractor = MfccExtractor::new(cfg.mfcc.clone()).map_err(|e| EvalError::File {
        path: "<config>".into(),
        source: e.into(),
    })?;
    let entries: Vec<FeatureEntry> = index
        .entries
        .par_iter()
        .map(|entry| {
            extract_clip_features(&entry.path, method, &cfg.vad, &extractor)
                .map(|(values, fallback)| FeatureEntry {
                    path: entry.path.display().to_string(),
                    label: entry.label.0,
                    speaker_id: entry.speaker_id.clone(),
                    split: entry.split,
                    fallback,
                    values,
                })
                .map_err(|source| EvalError::File {
                    path: entry.path.display().to_string(),
                    source,
                })
        })
        .collect::<Result<_, _>>()?;
    Ok(ExtractedFeatures {
        method,
        config_hash: config_fingerprint(&cfg.vad, &cfg.mfcc, method),
        entries,
    })
}

/// Fit, train, and evaluate on an already-extracted feature set.
pub fn evaluate_features(
    features: &ExtractedFeatures,
    arch: &LogNetArch,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<(EvalReport, LogNetModel), EvalError> {
    if arch.n_input != features.dim() {
        return Err(EvalError::ArchDimMismatch {
            expected: arch.n_input,
            got: features.dim(),
        });
    }
    let train: Vec<&FeatureEntry> = features.split(Split::Train).collect();
    let test: Vec<&FeatureEntry> = features.split(Split::Test).collect();
    if train.is_empty() {
        return Err(EvalError::EmptySplit("train".into()));
    }
    if test.is_empty() {
        return Err(EvalError::EmptySplit("test".into()));
    }

    let train_values: Vec<&[f64]> = train.iter().map(|e| e.values.as_slice()).collect();
    let train_labels: Vec<usize> = train.iter().map(|e| e.label).collect();
    let test_values: Vec<&[f64]> = test.iter().map(|e| e.values.as_slice()).collect();
    let test_labels: Vec<usize> = test.iter().map(|e| e.label).collect();

    let model = train_model(
        &train_values,
        &train_labels,
        arch,
        cfg.generator,
        &cfg.train,
        features.method,
        seed,
    )?;

    let predictions: Vec<usize> = test_values
        .iter()
        .map(|v| model.predict_index(v))
        .collect::<Result<_, _>>()?;
    let mut report = compute_metrics(&test_labels, &predictions)?;
    report.fallback_count = features.fallback_count();
    Ok((report, model))
}

/// The complete run: extract features from the index, train on the train
/// split, evaluate on the test split. Returns the report, the trained
/// model, and the feature set for reuse by the analysis passes.
pub fn evaluate_pipeline(
    index: &DatasetIndex,
    method: AggregationMethod,
    arch: &LogNetArch,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<(EvalReport, LogNetModel, ExtractedFeatures), EvalError> {
    let features = extract_features(index, method, cfg)?;
    let (report, model) = evaluate_features(&features, arch, cfg, seed)?;
    Ok((report, model, features))
}

/// Fit normalization and train a readout on bare feature slices.
pub(crate) fn train_model(
    train_values: &[&[f64]],
    train_labels: &[usize],
    arch: &LogNetArch,
    generator: LcgParams,
    train_cfg: &TrainConfig,
    method: AggregationMethod,
    seed: u64,
) -> Result<LogNetModel, EvalError> {
    let reservoir = generate_reservoir(arch, generator)?;
    let norms = fit_normalization_raw(&reservoir, train_values)?;
    let model = LogNetModel {
        arch: *arch,
        reservoir,
        norms,
        readout: ReadoutWeights::zeros(arch),
        labels: LABELS.iter().map(|s| s.to_string()).collect(),
        method,
    };
    let cfg = TrainConfig {
        seed,
        ..train_cfg.clone()
    };
    let (trained, _) = train_readout_indexed(&model, train_values, train_labels, &cfg)?;
    Ok(trained)
}

/// Accuracy of a model on bare feature slices.
pub(crate) fn accuracy_on(
    model: &LogNetModel,
    values: &[&[f64]],
    labels: &[usize],
) -> Result<f64, EvalError> {
    let mut correct = 0usize;
    for (v, &l) in values.iter().zip(labels) {
        if model.predict_index(v)? == l {
            correct += 1;
        }
    }
    Ok(correct as f64 / values.len().max(1) as f64)
}
