//! 8 kHz MFCC front end.
//!
//! Frames the segment with a 128-sample Hamming window at 50% overlap,
//! takes the 128-point FFT magnitude spectrum, applies a 12-filter
//! triangular mel bank over 300-3800 Hz, logs the filter energies, and
//! decorrelates with an orthonormal DCT-II. Nine coefficients are
//! computed and the highest-order one is dropped, keeping c0..c7.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("segment has {samples} samples, shorter than one {frame}-sample frame")]
    SegmentTooShort { samples: usize, frame: usize },
    #[error("fmax {fmax} Hz exceeds the Nyquist frequency {nyquist} Hz")]
    FmaxAboveNyquist { fmax: f64, nyquist: f64 },
    #[error("invalid MFCC config: {0}")]
    BadConfig(String),
}

/// Front-end parameters. Defaults are the embedded configuration:
/// 128-point FFT (16 ms at 8 kHz), 64-sample hop, 12 mel filters over
/// 300-3800 Hz, 9 coefficients computed and 8 kept.
#[derive(Debug, Clone)]
pub struct MfccConfig {
    pub fft_len: usize,
    pub hop: usize,
    pub n_mels: usize,
    pub fmin_hz: f64,
    pub fmax_hz: f64,
    pub n_mfcc_computed: usize,
    pub n_mfcc_kept: usize,
    pub sample_rate_hz: u32,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            fft_len: 128,
            hop: 64,
            n_mels: 12,
            fmin_hz: 300.0,
            fmax_hz: 3800.0,
            n_mfcc_computed: 9,
            n_mfcc_kept: 8,
            sample_rate_hz: 8000,
        }
    }
}

impl MfccConfig {
    fn validate(&self) -> Result<(), FeatureError> {
        let nyquist = self.sample_rate_hz as f64 / 2.0;
        if self.fmax_hz > nyquist {
            return Err(FeatureError::FmaxAboveNyquist {
                fmax: self.fmax_hz,
                nyquist,
            });
        }
        if self.hop == 0 || self.hop > self.fft_len {
            return Err(FeatureError::BadConfig(format!(
                "hop {} must be in 1..={}",
                self.hop, self.fft_len
            )));
        }
        if !self.fft_len.is_power_of_two() {
            return Err(FeatureError::BadConfig(format!(
                "fft_len {} must be a power of two",
                self.fft_len
            )));
        }
        if self.fmin_hz <= 0.0 || self.fmin_hz >= self.fmax_hz {
            return Err(FeatureError::BadConfig(format!(
                "fmin {} must be in (0, fmax)",
                self.fmin_hz
            )));
        }
        if self.n_mfcc_kept > self.n_mfcc_computed || self.n_mfcc_computed > self.n_mels {
            return Err(FeatureError::BadConfig(
                "need n_mfcc_kept <= n_mfcc_computed <= n_mels".into(),
            ));
        }
        Ok(())
    }
}

/// Triangular mel filterbank over the magnitude-spectrum bins.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    /// `n_mels` rows of `fft_len / 2` weights.
    pub weights: Vec<Vec<f64>>,
    /// Filter center frequencies in Hz, strictly increasing.
    pub centers_hz: Vec<f64>,
}

/// mel(f) = 2595 * log10(1 + f / 700)
pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Build the triangular filterbank: centers uniformly spaced on the mel
/// scale between `fmin_hz` and `fmax_hz`, each filter zero at its band
/// edges and peaking at 1.
pub fn build_mel_filterbank(cfg: &MfccConfig) -> Result<MelFilterbank, FeatureError> {
    cfg.validate()?;
    let n_bins = cfg.fft_len / 2;
    let bin_hz = cfg.sample_rate_hz as f64 / cfg.fft_len as f64;

    let mel_lo = hz_to_mel(cfg.fmin_hz);
    let mel_hi = hz_to_mel(cfg.fmax_hz);
    let edges: Vec<f64> = (0..cfg.n_mels + 2)
        .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (cfg.n_mels + 1) as f64))
        .collect();

    let mut weights = Vec::with_capacity(cfg.n_mels);
    for m in 0..cfg.n_mels {
        let (left, center, right) = (edges[m], edges[m + 1], edges[m + 2]);
        let row: Vec<f64> = (0..n_bins)
            .map(|k| {
                let f = k as f64 * bin_hz;
                if f > left && f < center {
                    (f - left) / (center - left)
                } else if f >= center && f < right {
                    (right - f) / (right - center)
                } else {
                    0.0
                }
            })
            .collect();
        weights.push(row);
    }
    Ok(MelFilterbank {
        weights,
        centers_hz: edges[1..=cfg.n_mels].to_vec(),
    })
}

/// MFCC coefficients, `n_mfcc_kept` rows by `T` frame columns.
#[derive(Debug, Clone, PartialEq)]
pub struct MfccMatrix {
    /// `coeffs[i][t]` is coefficient `i` of frame `t`.
    pub coeffs: Vec<Vec<f64>>,
    pub hop: usize,
    pub sample_rate_hz: u32,
}

impl MfccMatrix {
    pub fn n_coeffs(&self) -> usize {
        self.coeffs.len()
    }

    /// Number of frames T.
    pub fn n_frames(&self) -> usize {
        self.coeffs.first().map_or(0, Vec::len)
    }

    /// Serialize as CSV, one coefficient row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.coeffs {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Floor under filter energies before the log.
const LOG_FLOOR: f64 = 1e-10;

/// Extractor holding the precomputed window, filterbank, and DCT basis.
/// Immutable once built; shareable across threads.
#[derive(Debug, Clone)]
pub struct MfccExtractor {
    cfg: MfccConfig,
    window: Vec<f64>,
    filterbank: MelFilterbank,
    /// `n_mfcc_computed` rows of the orthonormal DCT-II over `n_mels` points.
    dct: Vec<Vec<f64>>,
}

impl MfccExtractor {
    pub fn new(cfg: MfccConfig) -> Result<Self, FeatureError> {
        cfg.validate()?;
        let filterbank = build_mel_filterbank(&cfg)?;
        let window = hamming_window(cfg.fft_len);
        let dct = dct_basis(cfg.n_mfcc_computed, cfg.n_mels);
        Ok(Self {
            cfg,
            window,
            filterbank,
            dct,
        })
    }

    pub fn config(&self) -> &MfccConfig {
        &self.cfg
    }

    pub fn filterbank(&self) -> &MelFilterbank {
        &self.filterbank
    }

    /// MFCC matrix for an 8 kHz segment. `T = (len - fft_len) / hop + 1`.
    pub fn extract(&self, samples: &[f64]) -> Result<MfccMatrix, FeatureError> {
        if samples.len() < self.cfg.fft_len {
            return Err(FeatureError::SegmentTooShort {
                samples: samples.len(),
                frame: self.cfg.fft_len,
            });
        }
        let n_frames = (samples.len() - self.cfg.fft_len) / self.cfg.hop + 1;
        let mut coeffs = vec![Vec::with_capacity(n_frames); self.cfg.n_mfcc_kept];
        let mut re = vec![0.0; self.cfg.fft_len];
        let mut im = vec![0.0; self.cfg.fft_len];

        for t in 0..n_frames {
            let start = t * self.cfg.hop;
            for (n, (r, i)) in re.iter_mut().zip(im.iter_mut()).enumerate() {
                *r = samples[start + n] * self.window[n];
                *i = 0.0;
            }
            fft_in_place(&mut re, &mut im);

            // Magnitude spectrum over the first fft_len/2 bins.
            let n_bins = self.cfg.fft_len / 2;
            let mags: Vec<f64> = (0..n_bins)
                .map(|k| (re[k] * re[k] + im[k] * im[k]).sqrt())
                .collect();

            let energies: Vec<f64> = self
                .filterbank
                .weights
                .iter()
                .map(|row| row.iter().zip(&mags).map(|(w, m)| w * m).sum::<f64>())
                .collect();
            let logs: Vec<f64> = energies.iter().map(|e| e.max(LOG_FLOOR).ln()).collect();

            for (i, coeff_row) in coeffs.iter_mut().enumerate() {
                let c: f64 = self.dct[i].iter().zip(&logs).map(|(d, l)| d * l).sum();
                coeff_row.push(c);
            }
        }

        Ok(MfccMatrix {
            coeffs,
            hop: self.cfg.hop,
            sample_rate_hz: self.cfg.sample_rate_hz,
        })
    }
}

/// Convenience wrapper: build an extractor and run it once.
pub fn mfcc_from_segment(samples: &[f64], cfg: &MfccConfig) -> Result<MfccMatrix, FeatureError> {
    MfccExtractor::new(cfg.clone())?.extract(samples)
}

fn hamming_window(len: usize) -> Vec<f64> {
    use std::f64::consts::PI;
    (0..len)
        .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / (len - 1) as f64).cos())
        .collect()
}

/// Orthonormal DCT-II rows: row k over n points, so D * D^T = I on the
/// computed rows.
pub fn dct_basis(n_rows: usize, n_points: usize) -> Vec<Vec<f64>> {
    use std::f64::consts::PI;
    (0..n_rows)
        .map(|k| {
            let scale = if k == 0 {
                (1.0 / n_points as f64).sqrt()
            } else {
                (2.0 / n_points as f64).sqrt()
            };
            (0..n_points)
                .map(|n| scale * (PI * (2.0 * n as f64 + 1.0) * k as f64 / (2.0 * n_points as f64)).cos())
                .collect()
        })
        .collect()
}

/// Iterative radix-2 decimation-in-time FFT over parallel re/im slices.
/// Lengths must be powers of two.
pub fn fft_in_place(re: &mut [f64], im: &mut [f64]) {
    use std::f64::consts::PI;
    let n = re.len();
    debug_assert!(n.is_power_of_two());

    // Bit-reversal permutation.
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            re.swap(i, j);
            im.swap(i, j);
        }
    }

    let mut len = 2;
    while len <= n {
        let angle = -2.0 * PI / len as f64;
        let (w_re, w_im) = (angle.cos(), angle.sin());
        for start in (0..n).step_by(len) {
            let (mut cur_re, mut cur_im) = (1.0, 0.0);
            for k in 0..len / 2 {
                let a = start + k;
                let b = start + k + len / 2;
                let t_re = re[b] * cur_re - im[b] * cur_im;
                let t_im = re[b] * cur_im + im[b] * cur_re;
                re[b] = re[a] - t_re;
                im[b] = im[a] - t_im;
                re[a] += t_re;
                im[a] += t_im;
                let next_re = cur_re * w_re - cur_im * w_im;
                cur_im = cur_re * w_im + cur_im * w_re;
                cur_re = next_re;
            }
        }
        len <<= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Naive DFT used as the independent oracle for the FFT path.
    fn naive_dft(signal: &[f64]) -> Vec<(f64, f64)> {
        let n = signal.len();
        (0..n)
            .map(|k| {
                let mut re = 0.0;
                let mut im = 0.0;
                for (t, &x) in signal.iter().enumerate() {
                    let phase = -2.0 * PI * k as f64 * t as f64 / n as f64;
                    re += x * phase.cos();
                    im += x * phase.sin();
                }
                (re, im)
            })
            .collect()
    }

    fn test_signal(n: usize, seed: u64) -> Vec<f64> {
        let mut state = seed;
        (0..n)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 33) as f64 / (1u64 << 31) as f64 - 0.5
            })
            .collect()
    }

    #[test]
    fn fft_matches_naive_dft() {
        let signal = test_signal(128, 42);
        let mut re = signal.clone();
        let mut im = vec![0.0; 128];
        fft_in_place(&mut re, &mut im);
        let reference = naive_dft(&signal);
        for k in 0..128 {
            assert!((re[k] - reference[k].0).abs() < 1e-9, "bin {k} re");
            assert!((im[k] - reference[k].1).abs() < 1e-9, "bin {k} im");
        }
    }

    #[test]
    fn windowed_fft_parseval() {
        // sum |X_k|^2 / N == sum x_n^2 for the windowed frame.
        let cfg = MfccConfig::default();
        let window = hamming_window(cfg.fft_len);
        let signal = test_signal(cfg.fft_len, 7);
        let windowed: Vec<f64> = signal.iter().zip(&window).map(|(s, w)| s * w).collect();

        let mut re = windowed.clone();
        let mut im = vec![0.0; cfg.fft_len];
        fft_in_place(&mut re, &mut im);

        let spec_energy: f64 = re
            .iter()
            .zip(&im)
            .map(|(r, i)| r * r + i * i)
            .sum::<f64>()
            / cfg.fft_len as f64;
        let time_energy: f64 = windowed.iter().map(|x| x * x).sum();
        let rel = (spec_energy - time_energy).abs() / time_energy;
        assert!(rel < 1e-6, "relative error {rel}");
    }

    #[test]
    fn dct_rows_are_orthonormal() {
        let d = dct_basis(9, 12);
        for a in 0..9 {
            for b in 0..9 {
                let dot: f64 = d[a].iter().zip(&d[b]).map(|(x, y)| x * y).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-10, "rows {a},{b}: {dot}");
            }
        }
    }

    #[test]
    fn default_filterbank_shape_is_12_by_64() {
        let fb = build_mel_filterbank(&MfccConfig::default()).unwrap();
        assert_eq!(fb.weights.len(), 12);
        for row in &fb.weights {
            assert_eq!(row.len(), 64);
        }
    }

    #[test]
    fn every_filter_has_positive_weight() {
        let fb = build_mel_filterbank(&MfccConfig::default()).unwrap();
        for (i, row) in fb.weights.iter().enumerate() {
            assert!(row.iter().any(|&w| w > 0.0), "filter {i} is all zero");
            assert!(row.iter().all(|&w| w >= 0.0), "filter {i} has negatives");
        }
    }

    #[test]
    fn filter_centers_match_mel_formula_and_increase() {
        let cfg = MfccConfig::default();
        let fb = build_mel_filterbank(&cfg).unwrap();
        // Independent mel-spacing computation.
        let lo = 2595.0 * (1.0f64 + 300.0 / 700.0).log10();
        let hi = 2595.0 * (1.0f64 + 3800.0 / 700.0).log10();
        for (i, &c) in fb.centers_hz.iter().enumerate() {
            let mel = lo + (hi - lo) * (i as f64 + 1.0) / 13.0;
            let expect = 700.0 * (10f64.powf(mel / 2595.0) - 1.0);
            assert!((c - expect).abs() < 1e-9, "center {i}");
        }
        for w in fb.centers_hz.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn each_bin_covered_by_at_most_two_filters() {
        let fb = build_mel_filterbank(&MfccConfig::default()).unwrap();
        for k in 0..64 {
            let covering = fb.weights.iter().filter(|row| row[k] > 0.0).count();
            assert!(covering <= 2, "bin {k} covered by {covering}");
        }
    }

    #[test]
    fn fmax_above_nyquist_rejected() {
        let cfg = MfccConfig {
            fmax_hz: 4100.0,
            ..MfccConfig::default()
        };
        assert!(matches!(
            build_mel_filterbank(&cfg),
            Err(FeatureError::FmaxAboveNyquist { .. })
        ));
    }

    #[test]
    fn single_frame_segment() {
        let m = mfcc_from_segment(&test_signal(128, 3), &MfccConfig::default()).unwrap();
        assert_eq!(m.n_coeffs(), 8);
        assert_eq!(m.n_frames(), 1);
    }

    #[test]
    fn frame_count_formula() {
        let m = mfcc_from_segment(&test_signal(4000, 4), &MfccConfig::default()).unwrap();
        assert_eq!(m.n_frames(), (4000 - 128) / 64 + 1);
        assert_eq!(m.n_frames(), 61);
    }

    #[test]
    fn segment_shorter_than_frame_errors() {
        assert!(matches!(
            mfcc_from_segment(&[0.0; 100], &MfccConfig::default()),
            Err(FeatureError::SegmentTooShort { .. })
        ));
    }

    #[test]
    fn identical_frames_give_identical_columns() {
        let frame = test_signal(128, 9);
        let mut samples = frame.clone();
        samples.extend(&frame);
        // hop = fft_len so frames don't overlap.
        let cfg = MfccConfig {
            hop: 128,
            ..MfccConfig::default()
        };
        let m = mfcc_from_segment(&samples, &cfg).unwrap();
        assert_eq!(m.n_frames(), 2);
        for row in &m.coeffs {
            assert_eq!(row[0], row[1]);
        }
    }

    #[test]
    fn hop_shift_moves_columns_by_one() {
        let cfg = MfccConfig::default();
        let signal = test_signal(4000, 11);
        let shifted = &signal[cfg.hop..];
        let a = mfcc_from_segment(&signal, &cfg).unwrap();
        let b = mfcc_from_segment(shifted, &cfg).unwrap();
        for i in 0..a.n_coeffs() {
            for t in 0..b.n_frames().min(a.n_frames() - 1) {
                let d = (a.coeffs[i][t + 1] - b.coeffs[i][t]).abs();
                assert!(d < 1e-9, "coeff {i} frame {t}: {d}");
            }
        }
    }

    #[test]
    fn all_zero_input_stays_finite() {
        let m = mfcc_from_segment(&[0.0; 1024], &MfccConfig::default()).unwrap();
        for row in &m.coeffs {
            for &v in row {
                assert!(v.is_finite());
            }
        }
    }

    #[test]
    fn tone_concentrates_energy_in_matching_filter() {
        // A 1 kHz tone should excite the filter whose center is nearest
        // 1 kHz more than distant filters.
        let cfg = MfccConfig::default();
        let fb = build_mel_filterbank(&cfg).unwrap();
        let tone: Vec<f64> = (0..128)
            .map(|i| (2.0 * PI * 1000.0 * i as f64 / 8000.0).sin())
            .collect();
        let window = hamming_window(128);
        let windowed: Vec<f64> = tone.iter().zip(&window).map(|(s, w)| s * w).collect();
        let mut re = windowed;
        let mut im = vec![0.0; 128];
        fft_in_place(&mut re, &mut im);
        let mags: Vec<f64> = (0..64)
            .map(|k| (re[k] * re[k] + im[k] * im[k]).sqrt())
            .collect();
        let energies: Vec<f64> = fb
            .weights
            .iter()
            .map(|row| row.iter().zip(&mags).map(|(w, m)| w * m).sum())
            .collect();
        let nearest = fb
            .centers_hz
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1 - 1000.0)
                    .abs()
                    .partial_cmp(&(b.1 - 1000.0).abs())
                    .unwrap()
            })
            .unwrap()
            .0;
        let strongest = energies
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!(
            (strongest as i64 - nearest as i64).abs() <= 1,
            "strongest filter {strongest}, nearest {nearest}"
        );
    }
}
