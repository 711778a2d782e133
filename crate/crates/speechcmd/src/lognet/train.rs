//! Readout training: mini-batch gradient descent with momentum on the
//! softmax cross-entropy, touching only the hidden and output weights.
//! The reservoir activations are precomputed once per training set since
//! `W` and the normalization statistics are frozen.

use thiserror::Error;

use crate::aggregate::FeatureVector;
use crate::lognet::{readout_logits, softmax, LogNetError, LogNetModel, ReadoutWeights};
use crate::rng::SeededRng;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("label {0:?} is not in the model vocabulary")]
    UnknownLabel(String),
    #[error("{features} feature vectors but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error(transparent)]
    Model(#[from] LogNetError),
}

/// Training hyperparameters. Defaults: batch 64, learning rate 0.001,
/// momentum 0.9, 150 epochs, 10% validation holdout with early stop
/// after 15 epochs without improvement.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub val_fraction: f64,
    pub early_stop_patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 150,
            batch_size: 64,
            learning_rate: 1e-3,
            momentum: 0.9,
            val_fraction: 0.1,
            early_stop_patience: 15,
            seed: 1,
        }
    }
}

/// What happened during training.
#[derive(Debug, Clone)]
pub struct TrainReport {
    /// Mean training cross-entropy per epoch.
    pub loss_history: Vec<f64>,
    /// Validation accuracy per epoch (empty when no holdout).
    pub val_accuracy_history: Vec<f64>,
    pub epochs_run: usize,
    /// Epoch whose weights were kept, when early stopping was active.
    pub best_epoch: Option<usize>,
}

/// Train the readout on labeled feature vectors. Labels must belong to
/// the model vocabulary. Returns a trained copy plus the loss history;
/// the reservoir and normalization statistics are untouched.
pub fn train_readout(
    model: &LogNetModel,
    features: &[FeatureVector],
    labels: &[&str],
    cfg: &TrainConfig,
) -> Result<(LogNetModel, TrainReport), TrainError> {
    let indices: Vec<usize> = labels
        .iter()
        .map(|&l| {
            model
                .labels
                .iter()
                .position(|m| m == l)
                .ok_or_else(|| TrainError::UnknownLabel(l.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let raw: Vec<&[f64]> = features.iter().map(|f| f.values.as_slice()).collect();
    train_readout_indexed(model, &raw, &indices, cfg)
}

/// [`train_readout`] over bare value slices and class indices.
pub fn train_readout_indexed(
    model: &LogNetModel,
    features: &[&[f64]],
    labels: &[usize],
    cfg: &TrainConfig,
) -> Result<(LogNetModel, TrainReport), TrainError> {
    if features.is_empty() {
        return Err(TrainError::EmptyTrainingSet);
    }
    if features.len() != labels.len() {
        return Err(TrainError::LengthMismatch {
            features: features.len(),
            labels: labels.len(),
        });
    }
    for &l in labels {
        if l >= model.arch.n_classes {
            return Err(TrainError::UnknownLabel(format!("class index {l}")));
        }
    }

    let mut trained = model.clone();
    if cfg.epochs == 0 {
        return Ok((
            trained,
            TrainReport {
                loss_history: Vec::new(),
                val_accuracy_history: Vec::new(),
                epochs_run: 0,
                best_epoch: None,
            },
        ));
    }

    // Reservoir activations are fixed for the whole run.
    let sh: Vec<Vec<f64>> = features
        .iter()
        .map(|f| model.reservoir_activation(f))
        .collect::<Result<_, _>>()?;

    let mut rng = SeededRng::derive(cfg.seed, 0x7261_696e);
    let mut order: Vec<usize> = (0..features.len()).collect();
    rng.shuffle(&mut order);

    let val_len = ((features.len() as f64) * cfg.val_fraction).floor() as usize;
    let val_len = if val_len >= features.len() { 0 } else { val_len };
    let (train_idx, val_idx) = order.split_at(order.len() - val_len);
    let mut train_idx = train_idx.to_vec();

    trained.readout = he_init(&trained, &mut rng);
    let mut velocity_h = zeros_like(&trained.readout.hidden);
    let mut velocity_o = zeros_like(&trained.readout.output);

    let mut report = TrainReport {
        loss_history: Vec::new(),
        val_accuracy_history: Vec::new(),
        epochs_run: 0,
        best_epoch: None,
    };
    let mut best_val = f64::NEG_INFINITY;
    let mut best_weights = trained.readout.clone();
    let mut stale_epochs = 0usize;

    for epoch in 0..cfg.epochs {
        rng.shuffle(&mut train_idx);
        let mut epoch_loss = 0.0;
        let mut seen = 0usize;

        for batch in train_idx.chunks(cfg.batch_size.max(1)) {
            let (grad_h, grad_o, loss) =
                batch_gradients(&trained.readout, &sh, labels, batch);
            epoch_loss += loss * batch.len() as f64;
            seen += batch.len();

            apply_momentum(&mut trained.readout.hidden, &mut velocity_h, &grad_h, cfg);
            apply_momentum(&mut trained.readout.output, &mut velocity_o, &grad_o, cfg);
        }

        report.loss_history.push(epoch_loss / seen.max(1) as f64);
        report.epochs_run = epoch + 1;

        if !val_idx.is_empty() {
            let correct = val_idx
                .iter()
                .filter(|&&i| {
                    let logits = readout_logits(&trained.readout, &sh[i]);
                    crate::lognet::argmax(&logits) == labels[i]
                })
                .count();
            let acc = correct as f64 / val_idx.len() as f64;
            report.val_accuracy_history.push(acc);
            if acc > best_val {
                best_val = acc;
                best_weights = trained.readout.clone();
                report.best_epoch = Some(epoch);
                stale_epochs = 0;
            } else {
                stale_epochs += 1;
                if stale_epochs >= cfg.early_stop_patience {
                    break;
                }
            }
        }
    }

    if !val_idx.is_empty() {
        trained.readout = best_weights;
    }
    round_to_f32(&mut trained.readout);
    Ok((trained, report))
}

/// Mean cross-entropy of the model on labeled features.
pub fn cross_entropy_loss(
    model: &LogNetModel,
    features: &[&[f64]],
    labels: &[usize],
) -> Result<f64, LogNetError> {
    let mut total = 0.0;
    for (f, &y) in features.iter().zip(labels) {
        let probs = model.forward(f)?;
        total -= probs[y].max(1e-300).ln();
    }
    Ok(total / features.len() as f64)
}

/// Gradient matrices for (hidden, output) readout layers.
pub type ReadoutGradients = (Vec<Vec<f64>>, Vec<Vec<f64>>);

/// Analytic gradients of the mean cross-entropy with respect to the
/// readout weights. Exposed so the training path can be checked against
/// finite differences.
pub fn readout_gradients(
    model: &LogNetModel,
    features: &[&[f64]],
    labels: &[usize],
) -> Result<ReadoutGradients, LogNetError> {
    let sh: Vec<Vec<f64>> = features
        .iter()
        .map(|f| model.reservoir_activation(f))
        .collect::<Result<_, _>>()?;
    let batch: Vec<usize> = (0..features.len()).collect();
    let (gh, go, _) = batch_gradients(&model.readout, &sh, labels, &batch);
    Ok((gh, go))
}

/// Backprop over one batch; returns (grad hidden, grad output, mean loss).
fn batch_gradients(
    readout: &ReadoutWeights,
    sh: &[Vec<f64>],
    labels: &[usize],
    batch: &[usize],
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, f64) {
    let m = readout.hidden.len();
    let mut grad_h = zeros_like(&readout.hidden);
    let mut grad_o = zeros_like(&readout.output);
    let mut loss = 0.0;
    let scale = 1.0 / batch.len() as f64;

    for &i in batch {
        let sh_i = &sh[i];
        let y = labels[i];

        let pre_hidden: Vec<f64> = readout
            .hidden
            .iter()
            .map(|row| row.iter().zip(sh_i).map(|(w, x)| w * x).sum())
            .collect();
        let hidden: Vec<f64> = pre_hidden.iter().map(|&z| z.max(0.0)).collect();
        let logits: Vec<f64> = readout
            .output
            .iter()
            .map(|row| {
                let mut acc = row[0];
                for (w, h) in row[1..].iter().zip(&hidden) {
                    acc += w * h;
                }
                acc
            })
            .collect();
        let probs = softmax(&logits);
        loss -= probs[y].max(1e-300).ln();

        // d loss / d logits
        let mut dz = probs;
        dz[y] -= 1.0;

        for (c, row) in grad_o.iter_mut().enumerate() {
            row[0] += scale * dz[c];
            for (j, g) in row[1..].iter_mut().enumerate() {
                *g += scale * dz[c] * hidden[j];
            }
        }

        for j in 0..m {
            if pre_hidden[j] <= 0.0 {
                continue;
            }
            let dh: f64 = (0..dz.len()).map(|c| dz[c] * readout.output[c][j + 1]).sum();
            for (k, g) in grad_h[j].iter_mut().enumerate() {
                *g += scale * dh * sh_i[k];
            }
        }
    }

    (grad_h, grad_o, loss * scale)
}

fn apply_momentum(
    weights: &mut [Vec<f64>],
    velocity: &mut [Vec<f64>],
    grads: &[Vec<f64>],
    cfg: &TrainConfig,
) {
    for ((wrow, vrow), grow) in weights.iter_mut().zip(velocity.iter_mut()).zip(grads) {
        for ((w, v), &g) in wrow.iter_mut().zip(vrow.iter_mut()).zip(grow) {
            *v = cfg.momentum * *v + g;
            *w -= cfg.learning_rate * *v;
        }
    }
}

/// He-scaled normal initialization, rounded to f32-representable values
/// so a freshly initialized model already survives serialization.
fn he_init(model: &LogNetModel, rng: &mut SeededRng) -> ReadoutWeights {
    let p1 = model.arch.p_reservoir + 1;
    let m1 = model.arch.m_hidden + 1;
    let h_scale = (2.0 / p1 as f64).sqrt();
    let o_scale = (2.0 / m1 as f64).sqrt();
    let hidden = (0..model.arch.m_hidden)
        .map(|_| {
            (0..p1)
                .map(|_| (rng.next_normal() * h_scale) as f32 as f64)
                .collect()
        })
        .collect();
    let output = (0..model.arch.n_classes)
        .map(|_| {
            (0..m1)
                .map(|_| (rng.next_normal() * o_scale) as f32 as f64)
                .collect()
        })
        .collect();
    ReadoutWeights { hidden, output }
}

fn zeros_like(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| vec![0.0; r.len()]).collect()
}

fn round_to_f32(readout: &mut ReadoutWeights) {
    for row in readout.hidden.iter_mut().chain(readout.output.iter_mut()) {
        for w in row {
            *w = *w as f32 as f64;
        }
    }
}
