//! WAV loading and the canonical 16 kHz → 8 kHz conversion.
//!
//! Everything downstream consumes 8 kHz mono clips with samples in [-1, 1].
//! The decimator is a linear-phase Hamming windowed-sinc low-pass followed
//! by a factor-2 downsample, so the whole front end stays deterministic.

use std::path::Path;

use thiserror::Error;

/// Length of the anti-alias FIR. Odd, so the group delay is an integer
/// number of input samples and can be compensated exactly.
const FIR_TAPS: usize = 129;

/// Low-pass cutoff in cycles per input sample. 4050 Hz at a 16 kHz input:
/// the passband stays flat past the 3.8 kHz mel band edge while the
/// stopband starts well before content can alias into it.
const FIR_CUTOFF: f64 = 4050.0 / 16000.0;

/// Mono audio with a known sample rate. Samples are dimensionless
/// amplitudes, nominally in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate_hz: u32,
}

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("cannot open {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: not a readable PCM WAV file: {reason}")]
    BadWav { path: String, reason: String },
    #[error("{path}: non-PCM encoding unsupported (found IEEE float)")]
    NonPcm { path: String },
    #[error("{path}: multi-channel unsupported ({channels} channels)")]
    MultiChannel { path: String, channels: u16 },
    #[error("{path}: unsupported bit depth {bits} (expected 16)")]
    BadBitDepth { path: String, bits: u16 },
    #[error("{path}: file contains no samples")]
    Empty { path: String },
    #[error("expected a {expected} Hz clip, got {actual} Hz")]
    WrongRate { expected: u32, actual: u32 },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: hound::Error,
    },
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Self {
        Self {
            samples,
            sample_rate_hz,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }
}

/// Load a mono 16-bit PCM WAV file, scaling samples to reals by 1/32768.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioClip, AudioError> {
    let path = path.as_ref();
    let display = path.display().to_string();

    let reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(source) => AudioError::Io {
            path: display.clone(),
            source,
        },
        other => AudioError::BadWav {
            path: display.clone(),
            reason: other.to_string(),
        },
    })?;

    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int {
        return Err(AudioError::NonPcm { path: display });
    }
    if spec.channels != 1 {
        return Err(AudioError::MultiChannel {
            path: display,
            channels: spec.channels,
        });
    }
    if spec.bits_per_sample != 16 {
        return Err(AudioError::BadBitDepth {
            path: display,
            bits: spec.bits_per_sample,
        });
    }

    let samples: Result<Vec<i16>, _> = reader.into_samples::<i16>().collect();
    let samples = samples.map_err(|e| AudioError::BadWav {
        path: display.clone(),
        reason: e.to_string(),
    })?;
    if samples.is_empty() {
        return Err(AudioError::Empty { path: display });
    }

    Ok(AudioClip {
        samples: samples.iter().map(|&s| f64::from(s) / 32768.0).collect(),
        sample_rate_hz: spec.sample_rate,
    })
}

/// Write a clip back out as mono 16-bit PCM. Samples loaded by [`load_wav`]
/// round-trip exactly; out-of-range values are clamped.
pub fn write_wav(clip: &AudioClip, path: impl AsRef<Path>) -> Result<(), AudioError> {
    let path = path.as_ref();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate_hz,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| AudioError::Write {
        path: path.display().to_string(),
        source: e,
    })?;
    for &s in &clip.samples {
        let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(v).map_err(|e| AudioError::Write {
            path: path.display().to_string(),
            source: e,
        })?;
    }
    writer.finalize().map_err(|e| AudioError::Write {
        path: path.display().to_string(),
        source: e,
    })
}

/// Hamming windowed-sinc low-pass taps, normalized to exact unity DC gain.
fn lowpass_taps(num_taps: usize, cutoff: f64) -> Vec<f64> {
    use std::f64::consts::PI;
    let center = (num_taps - 1) as f64 / 2.0;
    let omega = 2.0 * PI * cutoff;
    let mut taps: Vec<f64> = (0..num_taps)
        .map(|n| {
            let x = n as f64 - center;
            let sinc = if x == 0.0 {
                omega / PI
            } else {
                (omega * x).sin() / (PI * x)
            };
            let window = 0.54 - 0.46 * (2.0 * PI * n as f64 / (num_taps - 1) as f64).cos();
            sinc * window
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Halve the sample rate of a 16 kHz clip with anti-alias filtering.
///
/// Output length is `ceil(input / 2)`. The FIR group delay is compensated
/// so output sample `n` aligns with input sample `2n`; the signal is
/// zero-padded at both clip boundaries.
pub fn resample_16k_to_8k(clip: &AudioClip) -> Result<AudioClip, AudioError> {
    if clip.sample_rate_hz != 16000 {
        return Err(AudioError::WrongRate {
            expected: 16000,
            actual: clip.sample_rate_hz,
        });
    }
    let taps = lowpass_taps(FIR_TAPS, FIR_CUTOFF);
    let delay = (FIR_TAPS - 1) / 2;
    let x = &clip.samples;
    let out_len = x.len().div_ceil(2);
    let mut out = Vec::with_capacity(out_len);
    for n in 0..out_len {
        // y[n] = sum_k taps[k] * x[2n + delay - k], zero outside the clip
        let anchor = 2 * n + delay;
        let mut acc = 0.0;
        for (k, &t) in taps.iter().enumerate() {
            if let Some(i) = anchor.checked_sub(k) {
                if i < x.len() {
                    acc += t * x[i];
                }
            }
        }
        out.push(acc);
    }
    Ok(AudioClip {
        samples: out,
        sample_rate_hz: 8000,
    })
}
