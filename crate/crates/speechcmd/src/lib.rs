//! Speech-command recognition on a strict memory budget.
//!
//! The crate implements the full desk-side pipeline for a four-word
//! command recognizer designed to run on Cortex-M0+ class hardware:
//!
//! * [`audio`] — WAV loading and 16 kHz → 8 kHz resampling
//! * [`vad`] — energy-based voice activity detection, offline and streaming
//! * [`features`] — 8 kHz MFCC front end (128-point FFT, 12 mel filters, 8 coefficients)
//! * [`aggregate`] — four schemes that collapse the MFCC matrix into a fixed-length vector
//! * [`lognet`] — the LogNet reservoir classifier (LCG-generated reservoir, trainable readout)
//! * [`evalkit`] — dataset indexing, metrics, permutation feature importance, sweeps
//! * [`deploy`] — model persistence, C header export, memory budgeting, timer math

pub mod aggregate;
pub mod audio;
pub mod deploy;
pub mod evalkit;
pub mod features;
pub mod lognet;
pub mod vad;

mod bytesio;
mod rng;
