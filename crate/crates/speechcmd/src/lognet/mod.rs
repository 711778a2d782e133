//! The LogNet reservoir classifier.
//!
//! A fixed pseudo-random reservoir matrix `W` (P rows by N+1 columns,
//! filled row-wise from a linear congruential generator) projects the
//! normalized, bias-augmented feature vector into reservoir space. The
//! projection is range-normalized per row, squashed with tanh, and fed
//! to a small trainable readout: an M-neuron ReLU hidden layer and a
//! 4-way softmax output. Only the readout trains; `W` and the
//! normalization statistics stay frozen.
//!
//! Architectures are written `N:P:M:4`.

mod train;

pub use train::{
    cross_entropy_loss, readout_gradients, train_readout, train_readout_indexed, TrainConfig,
    TrainError, TrainReport,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::{AggregationMethod, FeatureVector};

/// The four command classes, in fixed index order.
pub const LABELS: [&str; 4] = ["go", "left", "right", "stop"];

/// Number of output classes.
pub const N_CLASSES: usize = 4;

#[derive(Debug, Error)]
pub enum LogNetError {
    #[error("feature vector has dim {got}, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("LCG modulus must be nonzero")]
    ZeroModulus,
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("architecture sizes must all be at least 1")]
    BadArch,
}

/// Layer sizes `N:P:M:4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogNetArch {
    pub n_input: usize,
    pub p_reservoir: usize,
    pub m_hidden: usize,
    pub n_classes: usize,
}

impl LogNetArch {
    pub fn new(n_input: usize, p_reservoir: usize, m_hidden: usize) -> Self {
        Self {
            n_input,
            p_reservoir,
            m_hidden,
            n_classes: N_CLASSES,
        }
    }

    fn validate(&self) -> Result<(), LogNetError> {
        if self.n_input == 0 || self.p_reservoir == 0 || self.m_hidden == 0 || self.n_classes == 0
        {
            return Err(LogNetError::BadArch);
        }
        Ok(())
    }
}

impl std::fmt::Display for LogNetArch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}:{}:{}:{}",
            self.n_input, self.p_reservoir, self.m_hidden, self.n_classes
        )
    }
}

/// Linear congruential generator constants: x_{n+1} = (a*x_n + c) mod m.
/// Defaults are the embedded reference constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LcgParams {
    pub multiplier: u64,
    pub increment: u64,
    pub modulus: u64,
    pub seed: u64,
}

impl Default for LcgParams {
    fn default() -> Self {
        Self {
            multiplier: 8121,
            increment: 28411,
            modulus: 134456,
            seed: 1,
        }
    }
}

/// The LCG sequence itself, mapped to weights in [-0.5, 0.5).
#[derive(Debug, Clone)]
pub struct Lcg {
    params: LcgParams,
    state: u64,
}

impl Lcg {
    pub fn new(params: LcgParams) -> Result<Self, LogNetError> {
        if params.modulus == 0 {
            return Err(LogNetError::ZeroModulus);
        }
        Ok(Self {
            state: params.seed % params.modulus,
            params,
        })
    }

    pub fn next_raw(&mut self) -> u64 {
        self.state = self
            .params
            .multiplier
            .wrapping_mul(self.state)
            .wrapping_add(self.params.increment)
            % self.params.modulus;
        self.state
    }

    /// Next reservoir weight: x/m - 0.5.
    pub fn next_weight(&mut self) -> f64 {
        self.next_raw() as f64 / self.params.modulus as f64 - 0.5
    }
}

/// The reservoir: generator constants plus the matrix they expand into.
/// `w` is P x (N+1); regenerating from the same constants reproduces it
/// bit-exactly, so model files store only the constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirSpec {
    pub generator: LcgParams,
    /// Row-major, P rows of N+1 weights.
    pub w: Vec<Vec<f64>>,
}

/// Fill `W` row-wise from the LCG.
pub fn generate_reservoir(
    arch: &LogNetArch,
    generator: LcgParams,
) -> Result<ReservoirSpec, LogNetError> {
    arch.validate()?;
    let mut lcg = Lcg::new(generator)?;
    let cols = arch.n_input + 1;
    let w = (0..arch.p_reservoir)
        .map(|_| (0..cols).map(|_| lcg.next_weight()).collect())
        .collect();
    Ok(ReservoirSpec { generator, w })
}

/// Normalization statistics fitted on the training set: per-component
/// maxima of the augmented input |Y|, and per-reservoir-row (max, min,
/// mean) of the projection S.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    /// N+1 values; zero components are replaced by 1.
    pub input_max: Vec<f64>,
    /// P rows of (max, min, mean).
    pub reservoir_stats: Vec<(f64, f64, f64)>,
}

/// Fit [`NormStats`] over a training set.
pub fn fit_normalization(
    reservoir: &ReservoirSpec,
    training: &[FeatureVector],
) -> Result<NormStats, LogNetError> {
    let fits: Vec<&[f64]> = training.iter().map(|f| f.values.as_slice()).collect();
    fit_normalization_raw(reservoir, &fits)
}

/// Same as [`fit_normalization`] but over bare value slices.
pub fn fit_normalization_raw(
    reservoir: &ReservoirSpec,
    training: &[&[f64]],
) -> Result<NormStats, LogNetError> {
    if training.is_empty() {
        return Err(LogNetError::EmptyTrainingSet);
    }
    let n = reservoir.w[0].len() - 1;
    for f in training {
        if f.len() != n {
            return Err(LogNetError::DimensionMismatch {
                expected: n,
                got: f.len(),
            });
        }
    }

    let mut input_max = vec![0.0f64; n + 1];
    input_max[0] = 1.0; // bias slot
    for f in training {
        for (j, &v) in f.iter().enumerate() {
            input_max[j + 1] = input_max[j + 1].max(v.abs());
        }
    }
    for v in &mut input_max {
        if *v == 0.0 {
            *v = 1.0;
        }
    }

    let p = reservoir.w.len();
    let mut stats = vec![(f64::NEG_INFINITY, f64::INFINITY, 0.0f64); p];
    for f in training {
        let s = project(reservoir, &input_max, f);
        for (row, &v) in stats.iter_mut().zip(&s) {
            row.0 = row.0.max(v);
            row.1 = row.1.min(v);
            row.2 += v;
        }
    }
    for row in &mut stats {
        row.2 /= training.len() as f64;
    }

    // Round to f32-representable values so the stats survive the model
    // file's 32-bit encoding unchanged.
    let input_max = input_max.iter().map(|&v| v as f32 as f64).collect();
    let reservoir_stats = stats
        .iter()
        .map(|&(a, b, c)| (a as f32 as f64, b as f32 as f64, c as f32 as f64))
        .collect();
    Ok(NormStats {
        input_max,
        reservoir_stats,
    })
}

/// S = W * (Y / input_max) with Y = (1, F).
fn project(reservoir: &ReservoirSpec, input_max: &[f64], features: &[f64]) -> Vec<f64> {
    reservoir
        .w
        .iter()
        .map(|row| {
            let mut acc = row[0] / input_max[0];
            for (j, &v) in features.iter().enumerate() {
                acc += row[j + 1] * (v / input_max[j + 1]);
            }
            acc
        })
        .collect()
}

/// Trainable readout. `hidden` is M x (P+1) acting on Sh (whose slot 0 is
/// the bias constant 1); `output` is 4 x (M+1) with its own bias column.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutWeights {
    pub hidden: Vec<Vec<f64>>,
    pub output: Vec<Vec<f64>>,
}

impl ReadoutWeights {
    /// All-zero readout of the right shape.
    pub fn zeros(arch: &LogNetArch) -> Self {
        Self {
            hidden: vec![vec![0.0; arch.p_reservoir + 1]; arch.m_hidden],
            output: vec![vec![0.0; arch.m_hidden + 1]; arch.n_classes],
        }
    }
}

/// A complete model: architecture, frozen reservoir, normalization
/// statistics, trained readout, label order, and the aggregation method
/// its features come from.
#[derive(Debug, Clone, PartialEq)]
pub struct LogNetModel {
    pub arch: LogNetArch,
    pub reservoir: ReservoirSpec,
    pub norms: NormStats,
    pub readout: ReadoutWeights,
    pub labels: Vec<String>,
    pub method: AggregationMethod,
}

impl LogNetModel {
    /// Zero-readout model ready for training.
    pub fn new(
        arch: LogNetArch,
        generator: LcgParams,
        norms: NormStats,
        method: AggregationMethod,
    ) -> Result<Self, LogNetError> {
        let reservoir = generate_reservoir(&arch, generator)?;
        Ok(Self {
            arch,
            reservoir,
            norms,
            readout: ReadoutWeights::zeros(&arch),
            labels: LABELS.iter().map(|s| s.to_string()).collect(),
            method,
        })
    }

    /// The reservoir-space input to the readout: Sh = (1, tanh(S_norm)).
    pub fn reservoir_activation(&self, features: &[f64]) -> Result<Vec<f64>, LogNetError> {
        if features.len() != self.arch.n_input {
            return Err(LogNetError::DimensionMismatch {
                expected: self.arch.n_input,
                got: features.len(),
            });
        }
        let s = project(&self.reservoir, &self.norms.input_max, features);
        let mut sh = Vec::with_capacity(self.arch.p_reservoir + 1);
        sh.push(1.0);
        for (i, &v) in s.iter().enumerate() {
            let (max, min, mean) = self.norms.reservoir_stats[i];
            let span = max - min;
            let normed = if span == 0.0 { 0.0 } else { (v - mean) / span };
            sh.push(normed.tanh());
        }
        Ok(sh)
    }

    /// Class logits (pre-softmax).
    pub fn logits(&self, features: &[f64]) -> Result<Vec<f64>, LogNetError> {
        let sh = self.reservoir_activation(features)?;
        Ok(readout_logits(&self.readout, &sh))
    }

    /// Class probabilities; always sums to 1.
    pub fn forward(&self, features: &[f64]) -> Result<Vec<f64>, LogNetError> {
        Ok(softmax(&self.logits(features)?))
    }

    /// Index of the most probable class; ties break to the lowest index.
    pub fn predict_index(&self, features: &[f64]) -> Result<usize, LogNetError> {
        let probs = self.forward(features)?;
        Ok(argmax(&probs))
    }

    /// Name of the most probable class.
    pub fn predict_label(&self, features: &[f64]) -> Result<&str, LogNetError> {
        Ok(&self.labels[self.predict_index(features)?])
    }

    /// Forward pass for a typed feature vector, checking the method tag.
    pub fn forward_feature(&self, f: &FeatureVector) -> Result<Vec<f64>, LogNetError> {
        self.forward(&f.values)
    }
}

/// logits = output * (1, ReLU(hidden * sh))
pub(crate) fn readout_logits(readout: &ReadoutWeights, sh: &[f64]) -> Vec<f64> {
    let hidden: Vec<f64> = readout
        .hidden
        .iter()
        .map(|row| {
            let z: f64 = row.iter().zip(sh).map(|(w, x)| w * x).sum();
            z.max(0.0)
        })
        .collect();
    readout
        .output
        .iter()
        .map(|row| {
            let mut acc = row[0];
            for (w, h) in row[1..].iter().zip(&hidden) {
                acc += w * h;
            }
            acc
        })
        .collect()
}

/// Numerically stable softmax.
pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|&e| e / sum).collect()
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
