//! Fixed-length feature vectors from variable-length MFCC matrices.
//!
//! Four aggregation schemes, each collapsing the time axis of every
//! coefficient row:
//!
//! | method              | per coefficient                               | dim |
//! |---------------------|-----------------------------------------------|-----|
//! | `basic_stats`       | mean, sample std, min, max                    | 32  |
//! | `temporal_dynamics` | (mean, std) of row, delta, delta-delta        | 48  |
//! | `windowed_stats`    | mean, pop. std, min, max over 4 time windows  | 128 |
//! | `adaptive_binning`  | means over 8 equal time bins                  | 64  |

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::MfccMatrix;

#[derive(Debug, Error)]
pub enum AggregateError {
    #[error("{method} needs at least {min} frames, got {got}")]
    TooFewFrames {
        method: AggregationMethod,
        min: usize,
        got: usize,
    },
    #[error("empty MFCC matrix")]
    EmptyMatrix,
}

/// The four aggregation schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AggregationMethod {
    BasicStats,
    TemporalDynamics,
    WindowedStats,
    AdaptiveBinning,
}

impl AggregationMethod {
    pub const ALL: [AggregationMethod; 4] = [
        AggregationMethod::BasicStats,
        AggregationMethod::TemporalDynamics,
        AggregationMethod::WindowedStats,
        AggregationMethod::AdaptiveBinning,
    ];

    /// Output dimension for 8 MFCC coefficients.
    pub fn dim(&self) -> usize {
        match self {
            AggregationMethod::BasicStats => 32,
            AggregationMethod::TemporalDynamics => 48,
            AggregationMethod::WindowedStats => 128,
            AggregationMethod::AdaptiveBinning => 64,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AggregationMethod::BasicStats => "basic_stats",
            AggregationMethod::TemporalDynamics => "temporal_dynamics",
            AggregationMethod::WindowedStats => "windowed_stats",
            AggregationMethod::AdaptiveBinning => "adaptive_binning",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "basic_stats" | "basic" => Some(AggregationMethod::BasicStats),
            "temporal_dynamics" | "temporal" => Some(AggregationMethod::TemporalDynamics),
            "windowed_stats" | "windowed" => Some(AggregationMethod::WindowedStats),
            "adaptive_binning" | "adaptive" => Some(AggregationMethod::AdaptiveBinning),
            _ => None,
        }
    }

    /// Apply this method to a matrix.
    pub fn aggregate(&self, m: &MfccMatrix) -> Result<FeatureVector, AggregateError> {
        match self {
            AggregationMethod::BasicStats => basic_stats(m),
            AggregationMethod::TemporalDynamics => temporal_dynamics(m),
            AggregationMethod::WindowedStats => windowed_stats(m),
            AggregationMethod::AdaptiveBinning => adaptive_binning(m),
        }
    }
}

impl std::fmt::Display for AggregationMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// An aggregated feature vector tagged with the method that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub method: AggregationMethod,
}

impl FeatureVector {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (N-1 denominator).
fn sample_std(xs: &[f64]) -> f64 {
    let mu = mean(xs);
    (xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Population standard deviation (N denominator).
fn population_std(xs: &[f64]) -> f64 {
    let mu = mean(xs);
    (xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / xs.len() as f64).sqrt()
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    let mut lo = xs[0];
    let mut hi = xs[0];
    for &x in &xs[1..] {
        if x < lo {
            lo = x;
        }
        if x > hi {
            hi = x;
        }
    }
    (lo, hi)
}

fn first_difference(xs: &[f64]) -> Vec<f64> {
    xs.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Interval `k` (0-based) of `total` frames split into `parts` contiguous
/// pieces: `[floor(k*T/parts), floor((k+1)*T/parts))`. Exhaustive and
/// non-overlapping; may be empty when `T < parts`.
fn interval_bounds(k: usize, total: usize, parts: usize) -> (usize, usize) {
    (k * total / parts, (k + 1) * total / parts)
}

/// Per coefficient: mean, sample std, min, max. Coefficient-major layout.
pub fn basic_stats(m: &MfccMatrix) -> Result<FeatureVector, AggregateError> {
    let t = m.n_frames();
    if t < 2 {
        return Err(AggregateError::TooFewFrames {
            method: AggregationMethod::BasicStats,
            min: 2,
            got: t,
        });
    }
    let mut values = Vec::with_capacity(m.n_coeffs() * 4);
    for row in &m.coeffs {
        let (lo, hi) = min_max(row);
        values.extend([mean(row), sample_std(row), lo, hi]);
    }
    Ok(FeatureVector {
        values,
        method: AggregationMethod::BasicStats,
    })
}

/// Per coefficient: (mean, std) of the row, of its first difference, and
/// of its second difference. Stds are sample stds of each series.
pub fn temporal_dynamics(m: &MfccMatrix) -> Result<FeatureVector, AggregateError> {
    let t = m.n_frames();
    if t < 4 {
        return Err(AggregateError::TooFewFrames {
            method: AggregationMethod::TemporalDynamics,
            min: 4,
            got: t,
        });
    }
    let mut values = Vec::with_capacity(m.n_coeffs() * 6);
    for row in &m.coeffs {
        let delta = first_difference(row);
        let delta2 = first_difference(&delta);
        values.extend([
            mean(row),
            sample_std(row),
            mean(&delta),
            sample_std(&delta),
            mean(&delta2),
            sample_std(&delta2),
        ]);
    }
    Ok(FeatureVector {
        values,
        method: AggregationMethod::TemporalDynamics,
    })
}

/// Four contiguous time windows; per window and coefficient: mean,
/// population std, min, max. Window-major layout (all coefficients of
/// window 1, then window 2, ...).
pub fn windowed_stats(m: &MfccMatrix) -> Result<FeatureVector, AggregateError> {
    const WINDOWS: usize = 4;
    let t = m.n_frames();
    if t < WINDOWS {
        return Err(AggregateError::TooFewFrames {
            method: AggregationMethod::WindowedStats,
            min: WINDOWS,
            got: t,
        });
    }
    let mut values = Vec::with_capacity(m.n_coeffs() * WINDOWS * 4);
    for k in 0..WINDOWS {
        let (start, end) = interval_bounds(k, t, WINDOWS);
        for row in &m.coeffs {
            let window = &row[start..end];
            let (lo, hi) = min_max(window);
            values.extend([mean(window), population_std(window), lo, hi]);
        }
    }
    Ok(FeatureVector {
        values,
        method: AggregationMethod::WindowedStats,
    })
}

/// Eight equal time bins per coefficient, emitting each bin's mean.
/// Coefficient-major layout. Empty bins (only possible when `T < 8`)
/// repeat the nearest preceding non-empty bin.
pub fn adaptive_binning(m: &MfccMatrix) -> Result<FeatureVector, AggregateError> {
    const BINS: usize = 8;
    let t = m.n_frames();
    if t == 0 {
        return Err(AggregateError::EmptyMatrix);
    }
    let mut values = Vec::with_capacity(m.n_coeffs() * BINS);
    for row in &m.coeffs {
        let mut previous = row[0];
        for b in 0..BINS {
            let (start, end) = interval_bounds(b, t, BINS);
            let v = if start < end {
                mean(&row[start..end])
            } else {
                previous
            };
            values.push(v);
            previous = v;
        }
    }
    Ok(FeatureVector {
        values,
        method: AggregationMethod::AdaptiveBinning,
    })
}
