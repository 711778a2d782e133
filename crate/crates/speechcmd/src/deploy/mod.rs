//! Deployment tooling: model persistence, C header export, RAM budget
//! estimation for the embedded target, and the timer-interrupt
//! frequency calculator.

mod c_header;
mod model_file;

pub use c_header::export_c_header;
pub use model_file::{load_model, save_model, ModelFileError};

use serde::Serialize;
use thiserror::Error;

use crate::aggregate::AggregationMethod;
use crate::features::MfccConfig;
use crate::lognet::LogNetArch;
use crate::vad::StreamVadConfig;

#[derive(Debug, Error)]
pub enum DeployError {
    #[error("timer parameters must be positive (clock {clk}, divider {div}, compare {cc})")]
    BadTimerParams { clk: f64, div: f64, cc: f64 },
}

/// RAM capacity of the reference target (32 KB).
pub const TARGET_RAM_BYTES: u32 = 32 * 1024;

/// Difference between the compiler-measured allocation on the reference
/// firmware build and the sum of the component estimates below. Carried
/// so the reported total matches that measurement; see `MemoryBudget`.
const MEASURED_REMAINDER_BYTES: u32 = 432;

/// One budget line.
#[derive(Debug, Clone, Serialize)]
pub struct MemoryItem {
    pub name: &'static str,
    pub bytes: u32,
    pub description: String,
    /// Allocated only while a command is being processed; excluded from
    /// the steady-state total.
    pub dynamic: bool,
}

/// Per-component RAM budget.
///
/// `total_measured` follows the reference firmware's accounting: the sum of the
/// static line items (dynamic allocations excluded) plus a fixed
/// measured remainder that reconciles the estimates with the reference
/// build's compiler-reported allocation.
#[derive(Debug, Clone, Serialize)]
pub struct MemoryBudget {
    pub items: Vec<MemoryItem>,
    pub total_measured: u32,
    pub capacity: u32,
    pub utilization: f64,
}

impl MemoryBudget {
    /// Utilization truncated to one decimal, e.g. "54.9%".
    pub fn utilization_str(&self) -> String {
        let tenths = (self.utilization * 1000.0).floor() / 10.0;
        format!("{tenths:.1}%")
    }

    /// Aligned text table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let width = self.items.iter().map(|i| i.name.len()).max().unwrap_or(0);
        for item in &self.items {
            let marker = if item.dynamic { " *" } else { "" };
            out.push_str(&format!(
                "{:width$}  {:>6}{}  {}\n",
                item.name, item.bytes, marker, item.description
            ));
        }
        out.push_str(&format!(
            "{:width$}  {:>6}\n",
            "Total measured", self.total_measured
        ));
        out.push_str(&format!(
            "{:width$}  {:>6}  of {} bytes\n",
            "Utilization",
            self.utilization_str(),
            self.capacity
        ));
        out.push_str("* dynamically allocated only while processing a command\n");
        out
    }

    /// CSV rows: name,bytes,dynamic,description.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("component,bytes,dynamic,description\n");
        for item in &self.items {
            out.push_str(&format!(
                "{},{},{},{}\n",
                item.name, item.bytes, item.dynamic, item.description
            ));
        }
        out.push_str(&format!("total_measured,{},,\n", self.total_measured));
        out
    }
}

/// Feature-vector plus working-memory footprint of one aggregation
/// method, excluding the shared MFCC input buffer.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MethodMemory {
    pub vector_bytes: u32,
    pub workspace_bytes: u32,
    pub total_bytes: u32,
}

/// Aggregation footprints: vector of `dim` floats plus the method's
/// local variables and temporaries.
pub fn method_memory(method: AggregationMethod) -> MethodMemory {
    let vector_bytes = method.dim() as u32 * 4;
    let workspace_bytes = match method {
        AggregationMethod::BasicStats => 40,
        // Locals plus the delta/delta-delta temporaries.
        AggregationMethod::TemporalDynamics => 440,
        AggregationMethod::WindowedStats => 44,
        AggregationMethod::AdaptiveBinning => 20,
    };
    MethodMemory {
        vector_bytes,
        workspace_bytes,
        total_bytes: vector_bytes + workspace_bytes,
    }
}

/// Estimate the per-component RAM budget of the embedded pipeline.
pub fn estimate_memory(
    arch: &LogNetArch,
    vad: &StreamVadConfig,
    mfcc: &MfccConfig,
    method: AggregationMethod,
) -> MemoryBudget {
    let p = arch.p_reservoir as u32;
    let m = arch.m_hidden as u32;
    let classes = arch.n_classes as u32;
    let max_frames = mfcc.sample_rate_hz / mfcc.hop as u32;
    let n_bins = (mfcc.fft_len / 2) as u32;

    let items = vec![
        MemoryItem {
            name: "Circular buffer",
            bytes: vad.ring_capacity as u32 * 2,
            description: format!("{} samples x 2 bytes (int16_t)", vad.ring_capacity),
            dynamic: false,
        },
        MemoryItem {
            name: "VAD state variables",
            bytes: 88,
            description: "finite state machine, counters".into(),
            dynamic: false,
        },
        MemoryItem {
            name: "Energy history",
            bytes: vad.energy_history_len as u32 * 4,
            description: format!("{} frames x 4 bytes (float)", vad.energy_history_len),
            dynamic: false,
        },
        MemoryItem {
            name: "FFT buffers",
            bytes: mfcc.fft_len as u32 * 2 * 8,
            description: format!("{} complex samples x 2 x 8 bytes (double)", mfcc.fft_len),
            dynamic: false,
        },
        MemoryItem {
            name: "Mel filterbank",
            bytes: mfcc.n_mels as u32 * n_bins * 4,
            description: format!("{} filters x {} bins x 4 bytes (float)", mfcc.n_mels, n_bins),
            dynamic: false,
        },
        MemoryItem {
            name: "DCT matrix",
            bytes: mfcc.n_mfcc_kept as u32 * mfcc.n_mels as u32 * 4,
            description: format!(
                "{} coefficients x {} mel energies x 4 bytes (float)",
                mfcc.n_mfcc_kept, mfcc.n_mels
            ),
            dynamic: false,
        },
        MemoryItem {
            name: "MFCC frames (dynamic)",
            bytes: max_frames * mfcc.n_mfcc_kept as u32 * 4,
            description: format!(
                "max {} frames x {} coefficients x 4 bytes (float)",
                max_frames, mfcc.n_mfcc_kept
            ),
            dynamic: true,
        },
        MemoryItem {
            name: "Feature vector",
            bytes: method.dim() as u32 * 4,
            description: format!("{} features x 4 bytes (float), {}", method.dim(), method),
            dynamic: false,
        },
        MemoryItem {
            name: "LCG parameters",
            bytes: 8,
            description: "4 x 2 bytes (int)".into(),
            dynamic: false,
        },
        MemoryItem {
            name: "Reservoir normalization",
            bytes: p * 3 * 4,
            description: format!("{p} rows x 3 statistics (max, min, mean) x 4 bytes"),
            dynamic: false,
        },
        MemoryItem {
            name: "MLP weights (hidden)",
            bytes: p * m * 4,
            description: format!("{p} x {m} x 4 bytes (float), bias-free count"),
            dynamic: false,
        },
        MemoryItem {
            name: "MLP weights (output)",
            bytes: m * classes * 4,
            description: format!("{m} x {classes} x 4 bytes (float), bias-free count"),
            dynamic: false,
        },
        MemoryItem {
            name: "Runtime buffers",
            bytes: 300,
            description: "layer activations and local variables".into(),
            dynamic: false,
        },
        MemoryItem {
            name: "FFT library",
            bytes: 500,
            description: "FFT object and methods".into(),
            dynamic: false,
        },
        MemoryItem {
            name: "System variables",
            bytes: 1000,
            description: "global state, interrupt handlers, stack, core".into(),
            dynamic: false,
        },
        MemoryItem {
            name: "Measured remainder",
            bytes: MEASURED_REMAINDER_BYTES,
            description: "compiler-measured total minus summed estimates on the reference build"
                .into(),
            dynamic: false,
        },
    ];

    let total_measured = items
        .iter()
        .filter(|i| !i.dynamic)
        .map(|i| i.bytes)
        .sum::<u32>();
    MemoryBudget {
        items,
        total_measured,
        capacity: TARGET_RAM_BYTES,
        utilization: f64::from(total_measured) / f64::from(TARGET_RAM_BYTES),
    }
}

/// Timer interrupt frequency: f_clk / (divider * (compare + 1)).
///
/// `compare` is accepted as a real number so the reference firmware's fractional
/// compare value can be evaluated as printed, even though hardware
/// compare registers are integers.
pub fn timer_interrupt_frequency(
    f_clk_hz: f64,
    divider: f64,
    compare_value: f64,
) -> Result<f64, DeployError> {
    if f_clk_hz <= 0.0 || divider <= 0.0 || compare_value <= 0.0 {
        return Err(DeployError::BadTimerParams {
            clk: f_clk_hz,
            div: divider,
            cc: compare_value,
        });
    }
    Ok(f_clk_hz / (divider * (compare_value + 1.0)))
}
