//! Permutation feature importance and the model-size analyses built on
//! top of the feature cache: progressive feature reduction and the
//! reservoir/hidden-layer architecture sweep.

use rayon::prelude::*;

use crate::evalkit::index::Split;
use crate::evalkit::pipeline::{accuracy_on, train_model, ExtractedFeatures, PipelineConfig};
use crate::evalkit::EvalError;
use crate::lognet::LogNetArch;
use crate::rng::SeededRng;

/// Per-feature importance: the mean accuracy drop when that feature's
/// values are shuffled across the evaluation fold.
#[derive(Debug, Clone)]
pub struct ImportanceReport {
    /// Mean accuracy drop per feature, averaged over folds.
    pub drops: Vec<f64>,
    /// Feature indices from most to least important (ties to the lower
    /// index).
    pub ranking: Vec<usize>,
    /// Unpermuted accuracy per fold.
    pub fold_baselines: Vec<f64>,
}

/// Permutation feature importance under speaker-stratified k-fold CV.
///
/// Speakers are shuffled with the seed and dealt round-robin into
/// `folds` folds, so no speaker spans a fold boundary. Per fold a model
/// is trained on the remaining folds, then each feature column is
/// permuted `permutations` times on the held-out fold and the mean
/// accuracy drop recorded.
pub fn permutation_importance(
    features: &ExtractedFeatures,
    p_reservoir: usize,
    m_hidden: usize,
    cfg: &PipelineConfig,
    folds: usize,
    permutations: usize,
    seed: u64,
) -> Result<ImportanceReport, EvalError> {
    let dim = features.dim();
    let entries = &features.entries;

    let mut speakers: Vec<&str> = entries.iter().map(|e| e.speaker_id.as_str()).collect();
    speakers.sort_unstable();
    speakers.dedup();
    if speakers.len() < folds {
        return Err(EvalError::TooFewSpeakers {
            folds,
            speakers: speakers.len(),
        });
    }
    let mut shuffled = speakers.clone();
    SeededRng::derive(seed, 0x666f_6c64).shuffle(&mut shuffled);
    let fold_of: std::collections::HashMap<&str, usize> = shuffled
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, i % folds))
        .collect();

    let fold_assignment: Vec<usize> = entries
        .iter()
        .map(|e| fold_of[e.speaker_id.as_str()])
        .collect();

    let mut drops = vec![0.0f64; dim];
    let mut fold_baselines = Vec::with_capacity(folds);

    for fold in 0..folds {
        let train_values: Vec<&[f64]> = entries
            .iter()
            .zip(&fold_assignment)
            .filter(|(_, &f)| f != fold)
            .map(|(e, _)| e.values.as_slice())
            .collect();
        let train_labels: Vec<usize> = entries
            .iter()
            .zip(&fold_assignment)
            .filter(|(_, &f)| f != fold)
            .map(|(e, _)| e.label)
            .collect();
        let eval_values: Vec<&[f64]> = entries
            .iter()
            .zip(&fold_assignment)
            .filter(|(_, &f)| f == fold)
            .map(|(e, _)| e.values.as_slice())
            .collect();
        let eval_labels: Vec<usize> = entries
            .iter()
            .zip(&fold_assignment)
            .filter(|(_, &f)| f == fold)
            .map(|(e, _)| e.label)
            .collect();
        if train_values.is_empty() || eval_values.is_empty() {
            return Err(EvalError::EmptySplit(format!("fold {fold}")));
        }

        let arch = LogNetArch::new(dim, p_reservoir, m_hidden);
        let model = train_model(
            &train_values,
            &train_labels,
            &arch,
            cfg.generator,
            &cfg.train,
            features.method,
            SeededRng::derive(seed, fold as u64).next_u64(),
        )?;
        let baseline = accuracy_on(&model, &eval_values, &eval_labels)?;
        fold_baselines.push(baseline);

        let fold_drops: Vec<f64> = (0..dim)
            .into_par_iter()
            .map(|feature| -> Result<f64, EvalError> {
                let mut acc_sum = 0.0;
                for perm in 0..permutations {
                    let mut order: Vec<usize> = (0..eval_values.len()).collect();
                    let stream = (fold as u64) << 40 | (feature as u64) << 16 | perm as u64;
                    SeededRng::derive(seed ^ 0x7065_726d, stream).shuffle(&mut order);

                    let mut correct = 0usize;
                    let mut scratch = vec![0.0f64; dim];
                    for (i, values) in eval_values.iter().enumerate() {
                        scratch.copy_from_slice(values);
                        scratch[feature] = eval_values[order[i]][feature];
                        if model.predict_index(&scratch)? == eval_labels[i] {
                            correct += 1;
                        }
                    }
                    acc_sum += correct as f64 / eval_values.len() as f64;
                }
                Ok(baseline - acc_sum / permutations as f64)
            })
            .collect::<Result<_, _>>()?;

        for (total, d) in drops.iter_mut().zip(&fold_drops) {
            *total += d;
        }
    }

    for d in &mut drops {
        *d /= folds as f64;
    }

    let mut ranking: Vec<usize> = (0..dim).collect();
    ranking.sort_by(|&a, &b| {
        drops[b]
            .partial_cmp(&drops[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    Ok(ImportanceReport {
        drops,
        ranking,
        fold_baselines,
    })
}

/// Progressive feature reduction: for each requested k, keep the k most
/// important features, retrain on the train split, and score the test
/// split. Returns (k, accuracy) pairs in the order requested.
pub fn feature_reduction_sweep(
    features: &ExtractedFeatures,
    ranking: &[usize],
    p_reservoir: usize,
    m_hidden: usize,
    cfg: &PipelineConfig,
    ks: &[usize],
    seed: u64,
) -> Result<Vec<(usize, f64)>, EvalError> {
    let dim = features.dim();
    if ranking.len() != dim {
        return Err(EvalError::RankingMismatch {
            ranking: ranking.len(),
            dim,
        });
    }
    if ks.is_empty() {
        return Err(EvalError::EmptyRange);
    }
    for &k in ks {
        if k < 1 || k > dim {
            return Err(EvalError::BadFeatureCount { k, dim });
        }
    }

    let train: Vec<_> = features.split(Split::Train).collect();
    let test: Vec<_> = features.split(Split::Test).collect();
    if train.is_empty() {
        return Err(EvalError::EmptySplit("train".into()));
    }
    if test.is_empty() {
        return Err(EvalError::EmptySplit("test".into()));
    }
    let train_labels: Vec<usize> = train.iter().map(|e| e.label).collect();
    let test_labels: Vec<usize> = test.iter().map(|e| e.label).collect();

    ks.par_iter()
        .map(|&k| -> Result<(usize, f64), EvalError> {
            // Keep the top-k features, in their original column order.
            let mut keep: Vec<usize> = ranking[..k].to_vec();
            keep.sort_unstable();

            let project = |entries: &[&crate::evalkit::pipeline::FeatureEntry]| -> Vec<Vec<f64>> {
                entries
                    .iter()
                    .map(|e| keep.iter().map(|&j| e.values[j]).collect())
                    .collect()
            };
            let train_proj = project(&train);
            let test_proj = project(&test);
            let train_refs: Vec<&[f64]> = train_proj.iter().map(|v| v.as_slice()).collect();
            let test_refs: Vec<&[f64]> = test_proj.iter().map(|v| v.as_slice()).collect();

            let arch = LogNetArch::new(k, p_reservoir, m_hidden);
            let model = train_model(
                &train_refs,
                &train_labels,
                &arch,
                cfg.generator,
                &cfg.train,
                features.method,
                seed,
            )?;
            let acc = accuracy_on(&model, &test_refs, &test_labels)?;
            Ok((k, acc))
        })
        .collect()
}

/// Train one model per (P, M) cell with the same seed and report test
/// accuracy for each.
pub fn architecture_sweep(
    features: &ExtractedFeatures,
    p_values: &[usize],
    m_values: &[usize],
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<Vec<(usize, usize, f64)>, EvalError> {
    if p_values.is_empty() || m_values.is_empty() {
        return Err(EvalError::EmptyRange);
    }
    let train: Vec<_> = features.split(Split::Train).collect();
    let test: Vec<_> = features.split(Split::Test).collect();
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

    let cells: Vec<(usize, usize)> = p_values
        .iter()
        .flat_map(|&p| m_values.iter().map(move |&m| (p, m)))
        .collect();

    cells
        .par_iter()
        .map(|&(p, m)| -> Result<(usize, usize, f64), EvalError> {
            let arch = LogNetArch::new(features.dim(), p, m);
            let model = train_model(
                &train_values,
                &train_labels,
                &arch,
                cfg.generator,
                &cfg.train,
                features.method,
                seed,
            )?;
            let acc = accuracy_on(&model, &test_values, &test_labels)?;
            Ok((p, m, acc))
        })
        .collect()
}

/// Sweep grid rows as CSV.
pub fn sweep_to_csv(grid: &[(usize, usize, f64)]) -> String {
    let mut out = String::from("p,m,accuracy\n");
    for &(p, m, acc) in grid {
        out.push_str(&format!("{p},{m},{acc:.6}\n"));
    }
    out
}
