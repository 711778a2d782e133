//! Shared helpers for the integration tests: synthetic tone datasets and
//! a small deterministic generator.

// Each test target uses a different subset of these helpers.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::Path;

use speechcmd::lognet::LABELS;

/// One pure tone per command class; linearly separable in MFCC space.
pub const CLASS_TONES_HZ: [f64; 4] = [440.0, 900.0, 1800.0, 3200.0];

pub struct Lcg64(pub u64);

impl Lcg64 {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 33) as f64 / (1u64 << 31) as f64
    }

    /// Uniform in [-1, 1).
    pub fn next_signed(&mut self) -> f64 {
        self.next_f64() * 2.0 - 1.0
    }
}

pub fn write_wav_i16(path: &Path, rate: u32, samples: &[i16]) {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec).unwrap();
    for &s in samples {
        w.write_sample(s).unwrap();
    }
    w.finalize().unwrap();
}

/// A 1 s clip at `rate`: silence, a 0.5 s tone, silence.
pub fn tone_clip(rate: u32, freq: f64, amplitude: f64, phase: f64) -> Vec<i16> {
    let n = rate as usize;
    let lo = n / 4;
    let hi = 3 * n / 4;
    (0..n)
        .map(|i| {
            if (lo..hi).contains(&i) {
                let v = amplitude * (2.0 * PI * freq * i as f64 / rate as f64 + phase).sin();
                (v * 20000.0) as i16
            } else {
                0
            }
        })
        .collect()
}

/// Lay out a Speech Commands style tree of tone clips. Speakers rotate
/// so speaker-independent splitting has material to work with.
pub fn build_tone_dataset(dir: &Path, rate: u32, per_class: usize) {
    for (c, label) in LABELS.iter().enumerate() {
        let sub = dir.join(label);
        std::fs::create_dir_all(&sub).unwrap();
        for i in 0..per_class {
            let amplitude = 0.5 + 0.04 * (i % 5) as f64;
            let phase = i as f64 * 0.7;
            let samples = tone_clip(rate, CLASS_TONES_HZ[c], amplitude, phase);
            write_wav_i16(
                &sub.join(format!("spk{i:03}_nohash_0.wav")),
                rate,
                &samples,
            );
        }
    }
}
