//! Energy-based voice activity detection.
//!
//! Two detectors share the same mean-squared-energy statistic:
//!
//! * [`detect_segment`] — offline whole-clip segmentation used when
//!   preparing dataset clips. Slides a long window, thresholds its energy,
//!   and picks the candidate with the highest mean energy.
//! * [`StreamVad`] — the streaming four-state machine
//!   (SILENCE / MAYBE_SPEECH / SPEECH / MAYBE_SILENCE) over a circular
//!   buffer, mirroring the embedded real-time detector.

use std::collections::VecDeque;

use thiserror::Error;

use crate::audio::AudioClip;

#[derive(Debug, Error)]
pub enum VadError {
    #[error("frame is empty")]
    EmptyFrame,
    #[error("clip has {samples} samples, shorter than one {window}-sample window")]
    ClipTooShort { samples: usize, window: usize },
    #[error("expected an 8000 Hz clip, got {0} Hz")]
    WrongRate(u32),
    #[error("invalid VAD config: {0}")]
    BadConfig(String),
}

/// Mean squared energy of a frame: (1/N) * sum(x_i^2).
pub fn frame_energy(frame: &[f64]) -> Result<f64, VadError> {
    if frame.is_empty() {
        return Err(VadError::EmptyFrame);
    }
    Ok(frame.iter().map(|x| x * x).sum::<f64>() / frame.len() as f64)
}

/// Offline segmentation parameters. Defaults match the dataset
/// preprocessing configuration: 1000-sample windows hopped by 300,
/// threshold 0.001, command duration 0.1-0.7 s, 0.05 s padding.
#[derive(Debug, Clone)]
pub struct OfflineVadConfig {
    pub window_len: usize,
    pub hop: usize,
    pub energy_threshold: f64,
    pub min_duration_s: f64,
    pub max_duration_s: f64,
    pub pad_s: f64,
}

impl Default for OfflineVadConfig {
    fn default() -> Self {
        Self {
            window_len: 1000,
            hop: 300,
            energy_threshold: 0.001,
            min_duration_s: 0.1,
            max_duration_s: 0.7,
            pad_s: 0.05,
        }
    }
}

impl OfflineVadConfig {
    fn validate(&self) -> Result<(), VadError> {
        if self.window_len == 0 || self.hop == 0 || self.hop > self.window_len {
            return Err(VadError::BadConfig(format!(
                "need 0 < hop <= window_len, got hop {} window {}",
                self.hop, self.window_len
            )));
        }
        if !(self.min_duration_s > 0.0 && self.min_duration_s < self.max_duration_s) {
            return Err(VadError::BadConfig(format!(
                "need 0 < min_duration < max_duration, got {} and {}",
                self.min_duration_s, self.max_duration_s
            )));
        }
        if self.pad_s < 0.0 {
            return Err(VadError::BadConfig("negative padding".into()));
        }
        Ok(())
    }
}

/// A detected speech interval, in samples, with its mean frame energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start_sample: usize,
    /// Exclusive.
    pub end_sample: usize,
    pub mean_energy: f64,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end_sample - self.start_sample
    }

    pub fn is_empty(&self) -> bool {
        self.end_sample == self.start_sample
    }
}

/// Find the spoken-command interval in an 8 kHz clip, or `None` when no
/// candidate passes the energy and duration gates.
///
/// Frames of `window_len` samples are hopped by `hop`; a run of frames
/// with energy above the threshold forms a candidate spanning the hop
/// grid from its first to one past its last active frame. Candidates are
/// gated on unpadded duration, the one with the highest mean frame energy
/// wins (ties to the earliest), and the winner is padded by `pad_s` on
/// both sides, clamped to the clip.
pub fn detect_segment(
    clip: &AudioClip,
    cfg: &OfflineVadConfig,
) -> Result<Option<Segment>, VadError> {
    cfg.validate()?;
    if clip.sample_rate_hz != 8000 {
        return Err(VadError::WrongRate(clip.sample_rate_hz));
    }
    if clip.len() < cfg.window_len {
        return Err(VadError::ClipTooShort {
            samples: clip.len(),
            window: cfg.window_len,
        });
    }

    let rate = clip.sample_rate_hz as f64;
    let n_frames = (clip.len() - cfg.window_len) / cfg.hop + 1;
    let energies: Vec<f64> = (0..n_frames)
        .map(|i| {
            let start = i * cfg.hop;
            frame_energy(&clip.samples[start..start + cfg.window_len]).expect("non-empty frame")
        })
        .collect();

    let min_samples = (cfg.min_duration_s * rate).round() as usize;
    let max_samples = (cfg.max_duration_s * rate).round() as usize;
    let pad = (cfg.pad_s * rate).round() as usize;

    let mut best: Option<(usize, usize, f64)> = None; // (first, last, mean energy)
    let mut run_start: Option<usize> = None;
    for i in 0..=n_frames {
        let active = i < n_frames && energies[i] > cfg.energy_threshold;
        match (run_start, active) {
            (None, true) => run_start = Some(i),
            (Some(first), false) => {
                let last = i - 1;
                let duration = (last - first + 1) * cfg.hop;
                if duration >= min_samples && duration <= max_samples {
                    let mean =
                        energies[first..=last].iter().sum::<f64>() / (last - first + 1) as f64;
                    let better = match best {
                        None => true,
                        Some((_, _, best_mean)) => mean > best_mean,
                    };
                    if better {
                        best = Some((first, last, mean));
                    }
                }
                run_start = None;
            }
            _ => {}
        }
    }

    Ok(best.map(|(first, last, mean)| {
        let raw_start = first * cfg.hop;
        let raw_end = ((last + 1) * cfg.hop).min(clip.len());
        Segment {
            start_sample: raw_start.saturating_sub(pad),
            end_sample: (raw_end + pad).min(clip.len()),
            mean_energy: mean,
        }
    }))
}

/// Streaming detector parameters. Defaults mirror the embedded
/// configuration: 4000-sample ring, 160-sample frames hopped by 40,
/// onset at 6x and offset at 2.5x the noise estimate, 300-700 ms
/// commands, 50 ms hangover, 50-frame energy history.
#[derive(Debug, Clone)]
pub struct StreamVadConfig {
    pub ring_capacity: usize,
    pub frame_len: usize,
    pub frame_hop: usize,
    pub onset_multiplier: f64,
    pub offset_multiplier: f64,
    pub min_command_ms: u32,
    pub max_command_ms: u32,
    pub hangover_ms: u32,
    /// Divisor applied to raw 12-bit ADC counts when pushing integer
    /// samples; half the ADC dynamic range.
    pub adc_norm: f64,
    pub energy_history_len: usize,
    pub sample_rate_hz: u32,
}

impl Default for StreamVadConfig {
    fn default() -> Self {
        Self {
            ring_capacity: 4000,
            frame_len: 160,
            frame_hop: 40,
            onset_multiplier: 6.0,
            offset_multiplier: 2.5,
            min_command_ms: 300,
            max_command_ms: 700,
            hangover_ms: 50,
            adc_norm: 2048.0,
            energy_history_len: 50,
            sample_rate_hz: 8000,
        }
    }
}

impl StreamVadConfig {
    fn hangover_frames(&self) -> u32 {
        let hop_ms = self.frame_hop as f64 * 1000.0 / self.sample_rate_hz as f64;
        (self.hangover_ms as f64 / hop_ms).round().max(1.0) as u32
    }

    fn ms_to_samples(&self, ms: u32) -> usize {
        (ms as u64 * self.sample_rate_hz as u64 / 1000) as usize
    }
}

/// The four detector states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VadState {
    Silence,
    MaybeSpeech,
    Speech,
    MaybeSilence,
}

impl std::fmt::Display for VadState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            VadState::Silence => "SILENCE",
            VadState::MaybeSpeech => "MAYBE_SPEECH",
            VadState::Speech => "SPEECH",
            VadState::MaybeSilence => "MAYBE_SILENCE",
        };
        f.write_str(name)
    }
}

/// One row of the optional FSM trace: per analysis frame.
#[derive(Debug, Clone)]
pub struct VadTraceRow {
    pub frame_index: u64,
    pub energy: f64,
    pub noise_level: f64,
    pub state: VadState,
}

/// Consecutive frames above the onset threshold required to confirm
/// SPEECH (15 ms at the 5 ms default hop).
const ONSET_DEBOUNCE_FRAMES: u32 = 3;

/// Noise floor so thresholds never collapse to zero.
const NOISE_FLOOR: f64 = 1e-6;

/// Exponential moving average factor for the noise estimate.
const NOISE_EMA: f64 = 0.95;

/// Streaming voice activity detector.
///
/// Feed samples in chunks of any size with [`push`](Self::push) /
/// [`push_adc`](Self::push_adc); completed command segments come back in
/// absolute sample coordinates. Segment boundaries are independent of how
/// the stream is chunked. Single-owner: one stream per instance.
#[derive(Debug, Clone)]
pub struct StreamVad {
    cfg: StreamVadConfig,
    ring: VecDeque<f64>,
    /// Total samples ever pushed; frame k covers [k*hop, k*hop+frame_len).
    total_samples: u64,
    next_frame: u64,
    state: VadState,
    noise_level: f64,
    energy_history: VecDeque<f64>,
    warmed_up: bool,
    segment_start: u64,
    onset_run: u32,
    low_run: u32,
    /// Absolute frame where the current low-energy run began.
    low_run_start_frame: u64,
    last_emitted_end: u64,
    trace: Option<Vec<VadTraceRow>>,
}

impl StreamVad {
    /// Panics on an inconsistent config (hop above frame length, onset
    /// multiplier not above offset, inverted duration range).
    pub fn new(cfg: StreamVadConfig) -> Self {
        assert!(
            cfg.frame_len > 0 && cfg.frame_hop > 0 && cfg.frame_hop <= cfg.frame_len,
            "need 0 < frame_hop <= frame_len"
        );
        assert!(cfg.ring_capacity >= cfg.frame_len, "ring smaller than a frame");
        assert!(
            cfg.onset_multiplier > cfg.offset_multiplier && cfg.offset_multiplier > 0.0,
            "need onset_multiplier > offset_multiplier > 0"
        );
        assert!(cfg.min_command_ms < cfg.max_command_ms, "inverted duration range");
        Self {
            cfg,
            ring: VecDeque::new(),
            total_samples: 0,
            next_frame: 0,
            state: VadState::Silence,
            noise_level: NOISE_FLOOR,
            energy_history: VecDeque::new(),
            warmed_up: false,
            segment_start: 0,
            onset_run: 0,
            low_run: 0,
            low_run_start_frame: 0,
            last_emitted_end: 0,
            trace: None,
        }
    }

    pub fn state(&self) -> VadState {
        self.state
    }

    pub fn noise_level(&self) -> f64 {
        self.noise_level
    }

    /// Start recording a per-frame trace, retrievable with [`take_trace`](Self::take_trace).
    pub fn enable_trace(&mut self) {
        if self.trace.is_none() {
            self.trace = Some(Vec::new());
        }
    }

    pub fn take_trace(&mut self) -> Vec<VadTraceRow> {
        self.trace.take().unwrap_or_default()
    }

    /// Push raw 12-bit ADC counts; each is normalized by `adc_norm`.
    pub fn push_adc(&mut self, samples: &[i16]) -> Vec<Segment> {
        let norm = self.cfg.adc_norm;
        let scaled: Vec<f64> = samples.iter().map(|&s| f64::from(s) / norm).collect();
        self.push(&scaled)
    }

    /// Push already-normalized samples in [-1, 1]. Returns any segments
    /// completed by this chunk.
    pub fn push(&mut self, samples: &[f64]) -> Vec<Segment> {
        let mut emitted = Vec::new();
        for &s in samples {
            self.ring.push_back(s);
            while self.ring.len() > self.cfg.ring_capacity {
                self.ring.pop_front();
            }
            self.total_samples += 1;
            while self.frame_ready() {
                if let Some(seg) = self.step_frame() {
                    emitted.push(seg);
                }
            }
        }
        emitted
    }

    fn frame_ready(&self) -> bool {
        self.next_frame * self.cfg.frame_hop as u64 + self.cfg.frame_len as u64
            <= self.total_samples
    }

    /// Energy of frame `index` read back from the ring buffer.
    fn frame_energy_at(&self, index: u64) -> f64 {
        let frame_start = index * self.cfg.frame_hop as u64;
        let ring_start_abs = self.total_samples - self.ring.len() as u64;
        let offset = (frame_start - ring_start_abs) as usize;
        let sum: f64 = self
            .ring
            .iter()
            .skip(offset)
            .take(self.cfg.frame_len)
            .map(|x| x * x)
            .sum();
        sum / self.cfg.frame_len as f64
    }

    fn step_frame(&mut self) -> Option<Segment> {
        let frame = self.next_frame;
        self.next_frame += 1;
        let energy = self.frame_energy_at(frame);

        self.energy_history.push_back(energy);
        while self.energy_history.len() > self.cfg.energy_history_len {
            self.energy_history.pop_front();
        }

        // The noise estimate seeds from the first full history window and
        // then tracks silence with an EMA.
        if !self.warmed_up {
            if self.energy_history.len() == self.cfg.energy_history_len {
                let mean = self.energy_history.iter().sum::<f64>()
                    / self.energy_history.len() as f64;
                self.noise_level = mean.max(NOISE_FLOOR);
                self.warmed_up = true;
            }
            self.record_trace(frame, energy);
            return None;
        }

        let onset_threshold = self.cfg.onset_multiplier * self.noise_level;
        let offset_threshold = self.cfg.offset_multiplier * self.noise_level;
        let mut finished: Option<Segment> = None;

        match self.state {
            VadState::Silence => {
                if energy > onset_threshold {
                    self.state = VadState::MaybeSpeech;
                    self.onset_run = 1;
                    // Attribute the onset to the newest hop of the frame that
                    // tripped the threshold; everything earlier was already
                    // analyzed as silence.
                    self.segment_start = frame * self.cfg.frame_hop as u64
                        + (self.cfg.frame_len - self.cfg.frame_hop) as u64;
                } else {
                    self.noise_level = (NOISE_EMA * self.noise_level
                        + (1.0 - NOISE_EMA) * energy)
                        .max(NOISE_FLOOR);
                }
            }
            VadState::MaybeSpeech => {
                if energy > onset_threshold {
                    self.onset_run += 1;
                    if self.onset_run >= ONSET_DEBOUNCE_FRAMES {
                        self.state = VadState::Speech;
                    }
                } else {
                    self.state = VadState::Silence;
                    self.onset_run = 0;
                }
            }
            VadState::Speech => {
                if energy < offset_threshold {
                    self.state = VadState::MaybeSilence;
                    self.low_run = 1;
                    self.low_run_start_frame = frame;
                }
            }
            VadState::MaybeSilence => {
                if energy < offset_threshold {
                    self.low_run += 1;
                    if self.low_run >= self.cfg.hangover_frames() {
                        finished = self.finish_segment();
                        self.state = VadState::Silence;
                        self.low_run = 0;
                        self.onset_run = 0;
                    }
                } else {
                    self.state = VadState::Speech;
                    self.low_run = 0;
                }
            }
        }

        self.record_trace(frame, energy);
        finished
    }

    /// Close the active segment at the frame where the low-energy run
    /// began; gate it on the command duration range.
    fn finish_segment(&mut self) -> Option<Segment> {
        let end = self.low_run_start_frame * self.cfg.frame_hop as u64;
        let start = self.segment_start.max(self.last_emitted_end);
        if end <= start {
            return None;
        }
        let duration = (end - start) as usize;
        let min = self.cfg.ms_to_samples(self.cfg.min_command_ms);
        let max = self.cfg.ms_to_samples(self.cfg.max_command_ms);
        if duration < min || duration > max {
            return None;
        }
        self.last_emitted_end = end;
        Some(Segment {
            start_sample: start as usize,
            end_sample: end as usize,
            mean_energy: 0.0,
        })
    }

    fn record_trace(&mut self, frame: u64, energy: f64) {
        let state = self.state;
        let noise = self.noise_level;
        if let Some(trace) = &mut self.trace {
            trace.push(VadTraceRow {
                frame_index: frame,
                energy,
                noise_level: noise,
                state,
            });
        }
    }
}
