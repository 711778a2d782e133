//! Classification metrics over the four-command vocabulary.

use serde::Serialize;

use crate::evalkit::EvalError;
use crate::lognet::LABELS;

#[derive(Debug, Clone, Serialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Full evaluation report. Confusion rows are true labels, columns
/// predictions. Zero-denominator rates follow the `0` convention.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub confusion: [[u64; 4]; 4],
    pub total: usize,
    pub accuracy: f64,
    pub balanced_accuracy: f64,
    pub mcc: f64,
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// Clips where the VAD found no segment and the whole clip was used.
    pub fallback_count: usize,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Confusion matrix plus per-class rows as CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\pred");
        for l in LABELS {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, row) in self.confusion.iter().enumerate() {
            out.push_str(LABELS[i]);
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out.push_str("\nlabel,precision,recall,f1,support\n");
        for c in &self.per_class {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6},{}\n",
                c.label, c.precision, c.recall, c.f1, c.support
            ));
        }
        out.push_str(&format!(
            "macro,{:.6},{:.6},{:.6},{}\n",
            self.macro_precision, self.macro_recall, self.macro_f1, self.total
        ));
        out.push_str(&format!(
            "\naccuracy,{:.6}\nbalanced_accuracy,{:.6}\nmcc,{:.6}\nfallback_count,{}\n",
            self.accuracy, self.balanced_accuracy, self.mcc, self.fallback_count
        ));
        out
    }
}

/// Compute the report from equal-length truth/prediction sequences of
/// class indices. Balanced accuracy is the mean per-class recall; MCC is
/// the multiclass covariance form on the confusion matrix.
pub fn compute_metrics(truth: &[usize], predicted: &[usize]) -> Result<EvalReport, EvalError> {
    if truth.is_empty() {
        return Err(EvalError::EmptyLabels);
    }
    if truth.len() != predicted.len() {
        return Err(EvalError::LabelLengthMismatch {
            truth: truth.len(),
            predicted: predicted.len(),
        });
    }

    let mut confusion = [[0u64; 4]; 4];
    for (&t, &p) in truth.iter().zip(predicted) {
        if t >= 4 {
            return Err(EvalError::BadLabelIndex(t));
        }
        if p >= 4 {
            return Err(EvalError::BadLabelIndex(p));
        }
        confusion[t][p] += 1;
    }

    Ok(report_from_confusion(confusion, truth.len()))
}

fn report_from_confusion(confusion: [[u64; 4]; 4], total: usize) -> EvalReport {
    let ratio = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };

    let row_sums: Vec<f64> = (0..4)
        .map(|i| confusion[i].iter().sum::<u64>() as f64)
        .collect();
    let col_sums: Vec<f64> = (0..4)
        .map(|j| (0..4).map(|i| confusion[i][j]).sum::<u64>() as f64)
        .collect();
    let trace: f64 = (0..4).map(|i| confusion[i][i] as f64).sum();
    let n = total as f64;

    let accuracy = trace / n;

    let mut per_class = Vec::with_capacity(4);
    for k in 0..4 {
        let tp = confusion[k][k] as f64;
        let precision = ratio(tp, col_sums[k]);
        let recall = ratio(tp, row_sums[k]);
        let f1 = ratio(2.0 * precision * recall, precision + recall);
        per_class.push(ClassMetrics {
            label: LABELS[k].to_string(),
            precision,
            recall,
            f1,
            support: row_sums[k] as usize,
        });
    }

    let balanced_accuracy = per_class.iter().map(|c| c.recall).sum::<f64>() / 4.0;
    let macro_precision = per_class.iter().map(|c| c.precision).sum::<f64>() / 4.0;
    let macro_recall = balanced_accuracy;
    let macro_f1 = per_class.iter().map(|c| c.f1).sum::<f64>() / 4.0;

    // Multiclass MCC, covariance form:
    // (c*s - sum p_k t_k) / sqrt((s^2 - sum p_k^2)(s^2 - sum t_k^2))
    let pt: f64 = (0..4).map(|k| col_sums[k] * row_sums[k]).sum();
    let pp: f64 = col_sums.iter().map(|p| p * p).sum();
    let tt: f64 = row_sums.iter().map(|t| t * t).sum();
    let denom = ((n * n - pp) * (n * n - tt)).sqrt();
    let mcc = if denom == 0.0 {
        0.0
    } else {
        (trace * n - pt) / denom
    };

    EvalReport {
        confusion,
        total,
        accuracy,
        balanced_accuracy,
        mcc,
        per_class,
        macro_precision,
        macro_recall,
        macro_f1,
        fallback_count: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let truth: Vec<usize> = (0..400).map(|i| i % 4).collect();
        let report = compute_metrics(&truth, &truth).unwrap();
        assert_eq!(report.accuracy, 1.0);
        assert_eq!(report.balanced_accuracy, 1.0);
        assert!((report.mcc - 1.0).abs() < 1e-12);
        for c in &report.per_class {
            assert_eq!(c.f1, 1.0);
        }
    }

    #[test]
    fn random_labels_have_near_zero_mcc() {
        let mut state = 123u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 33) % 4) as usize
        };
        let truth: Vec<usize> = (0..4000).map(|_| next()).collect();
        let predicted: Vec<usize> = (0..4000).map(|_| next()).collect();
        let report = compute_metrics(&truth, &predicted).unwrap();
        assert!(report.mcc.abs() < 0.1, "mcc={}", report.mcc);
    }

    #[test]
    #[allow(clippy::needless_range_loop)] // explicit indices mirror the formulas
    fn known_confusion_matrix_matches_brute_force() {
        // [[5,1,0,0],[0,6,0,0],[1,0,4,1],[0,0,1,5]]
        let rows = [[5, 1, 0, 0], [0, 6, 0, 0], [1, 0, 4, 1], [0, 0, 1, 5]];
        let mut truth = Vec::new();
        let mut predicted = Vec::new();
        for (t, row) in rows.iter().enumerate() {
            for (p, &count) in row.iter().enumerate() {
                for _ in 0..count {
                    truth.push(t);
                    predicted.push(p);
                }
            }
        }
        let report = compute_metrics(&truth, &predicted).unwrap();

        // Independent brute-force computation of every formula.
        let n = truth.len() as f64;
        let mut conf = [[0f64; 4]; 4];
        for (&t, &p) in truth.iter().zip(&predicted) {
            conf[t][p] += 1.0;
        }
        let trace: f64 = (0..4).map(|i| conf[i][i]).sum();
        assert!((report.accuracy - trace / n).abs() < 1e-15);

        for k in 0..4 {
            let tp = conf[k][k];
            let fp: f64 = (0..4).filter(|&i| i != k).map(|i| conf[i][k]).sum();
            let fn_: f64 = (0..4).filter(|&j| j != k).map(|j| conf[k][j]).sum();
            let precision = if tp + fp == 0.0 { 0.0 } else { tp / (tp + fp) };
            let recall = if tp + fn_ == 0.0 { 0.0 } else { tp / (tp + fn_) };
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            assert!((report.per_class[k].precision - precision).abs() < 1e-15);
            assert!((report.per_class[k].recall - recall).abs() < 1e-15);
            assert!((report.per_class[k].f1 - f1).abs() < 1e-15);
        }

        let recalls: f64 = (0..4)
            .map(|k| {
                let row: f64 = conf[k].iter().sum();
                conf[k][k] / row
            })
            .sum();
        assert!((report.balanced_accuracy - recalls / 4.0).abs() < 1e-15);

        let t_sums: Vec<f64> = (0..4).map(|k| conf[k].iter().sum()).collect();
        let p_sums: Vec<f64> = (0..4).map(|k| (0..4).map(|i| conf[i][k]).sum()).collect();
        let pt: f64 = (0..4).map(|k| p_sums[k] * t_sums[k]).sum();
        let pp: f64 = p_sums.iter().map(|v| v * v).sum();
        let tt: f64 = t_sums.iter().map(|v| v * v).sum();
        let mcc = (trace * n - pt) / ((n * n - pp) * (n * n - tt)).sqrt();
        assert!((report.mcc - mcc).abs() < 1e-15);
    }

    #[test]
    fn balanced_accuracy_equals_accuracy_on_balanced_sets() {
        // Exactly equal class supports.
        let mut truth = Vec::new();
        let mut predicted = Vec::new();
        let mut state = 5u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 33) % 4) as usize
        };
        for c in 0..4 {
            for _ in 0..250 {
                truth.push(c);
                predicted.push(next());
            }
        }
        let report = compute_metrics(&truth, &predicted).unwrap();
        assert!((report.accuracy - report.balanced_accuracy).abs() < 1e-12);
    }

    #[test]
    fn degenerate_all_one_class() {
        let truth = vec![2usize; 50];
        let predicted = vec![2usize; 50];
        let report = compute_metrics(&truth, &predicted).unwrap();
        assert_eq!(report.accuracy, 1.0);
        // Absent classes get the zero convention.
        assert_eq!(report.per_class[0].precision, 0.0);
        assert_eq!(report.per_class[0].recall, 0.0);
        // All mass in one cell: MCC denominator vanishes.
        assert_eq!(report.mcc, 0.0);
    }

    #[test]
    fn length_mismatch_and_empty_rejected() {
        assert!(matches!(
            compute_metrics(&[0, 1], &[0]),
            Err(EvalError::LabelLengthMismatch { .. })
        ));
        assert!(matches!(compute_metrics(&[], &[]), Err(EvalError::EmptyLabels)));
    }

    #[test]
    fn confusion_sums_to_total() {
        let truth = vec![0, 1, 2, 3, 0, 1];
        let predicted = vec![0, 2, 2, 3, 1, 1];
        let report = compute_metrics(&truth, &predicted).unwrap();
        let sum: u64 = report.confusion.iter().flatten().sum();
        assert_eq!(sum as usize, report.total);
    }
}
