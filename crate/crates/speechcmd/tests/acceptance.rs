//! Acceptance suite: one test per shipping criterion, each printing a
//! PASS/FAIL line (visible with `--nocapture`).
//!
//! Criteria 1-4 and the dataset-scale reduction curve need the Speech
//! Commands dataset on disk; those tests are `#[ignore]`d and resolve
//! the dataset root from `SPEECH_COMMANDS_DIR` or the fetch cache
//! (`$SPEECHCMD_CACHE/speech_commands_v0.02`). Run them with
//! `cargo test -p speechcmd --test acceptance -- --ignored --nocapture`
//! after `speechcmd fetch`.

mod common;

use std::path::PathBuf;

use speechcmd::aggregate::{
    adaptive_binning, basic_stats, temporal_dynamics, windowed_stats, AggregationMethod,
};
use speechcmd::deploy::{
    estimate_memory, load_model, method_memory, save_model, timer_interrupt_frequency,
};
use speechcmd::evalkit::{
    build_index, compute_metrics, evaluate_features, extract_features, feature_reduction_sweep,
    permutation_importance, ExtractedFeatures, FeatureEntry, PipelineConfig, Split, SplitMode,
};
use speechcmd::features::{dct_basis, fft_in_place, MfccMatrix};
use speechcmd::lognet::{
    cross_entropy_loss, fit_normalization, generate_reservoir, readout_gradients, train_readout,
    LcgParams, LogNetArch, LogNetModel, TrainConfig, LABELS,
};
use speechcmd::vad::{frame_energy, StreamVad, StreamVadConfig};

const IGNORE_REASON: &str =
    "requires the Speech Commands dataset: run `speechcmd fetch` or set SPEECH_COMMANDS_DIR, \
     then `cargo test -p speechcmd --test acceptance -- --ignored`";

fn criterion(id: &str, description: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {id} {verdict}: {description} [{detail}]");
    assert!(pass, "acceptance criterion {id} failed: {detail}");
}

fn dataset_root() -> PathBuf {
    if let Ok(dir) = std::env::var("SPEECH_COMMANDS_DIR") {
        let dir = PathBuf::from(dir);
        if dir.is_dir() {
            return dir;
        }
    }
    let cache = std::env::var("SPEECHCMD_CACHE")
        .map(PathBuf::from)
        .unwrap_or_else(|_| {
            let home = std::env::var("HOME").unwrap_or_else(|_| ".".into());
            PathBuf::from(home).join(".cache").join("speechcmd")
        });
    let root = cache.join("speech_commands_v0.02");
    assert!(root.is_dir(), "dataset not found at {}; {IGNORE_REASON}", root.display());
    root
}

/// The reference evaluation setup: default hyperparameters.
fn dataset_cfg(seed: u64) -> PipelineConfig {
    PipelineConfig {
        train: TrainConfig {
            seed,
            ..TrainConfig::default()
        },
        ..PipelineConfig::default()
    }
}

fn run_split(
    method: AggregationMethod,
    p: usize,
    m: usize,
    mode: SplitMode,
    seed: u64,
) -> (f64, ExtractedFeatures) {
    let root = dataset_root();
    let index = build_index(&root, mode, seed).expect("index");
    let cfg = dataset_cfg(seed);
    let features = extract_features(&index, method, &cfg).expect("features");
    let arch = LogNetArch::new(method.dim(), p, m);
    let (report, _) = evaluate_features(&features, &arch, &cfg, seed).expect("evaluation");
    (report.accuracy, features)
}

// --- criterion 1: headline end-to-end accuracy -------------------------

#[test]
#[ignore = "requires the Speech Commands dataset; see module docs"]
fn acceptance_1_headline_accuracy() {
    let (accuracy, _) = run_split(
        AggregationMethod::AdaptiveBinning,
        50,
        40,
        SplitMode::SpeakerIndependent,
        1,
    );
    criterion(
        "1",
        "adaptive binning 64:50:40:4 speaker-independent accuracy >= 0.89",
        accuracy >= 0.89,
        format!("accuracy {accuracy:.4}"),
    );
}

// --- criterion 2: method ordering --------------------------------------

#[test]
#[ignore = "requires the Speech Commands dataset; see module docs"]
fn acceptance_2_method_ordering() {
    let seed = 1;
    let (basic, _) = run_split(AggregationMethod::BasicStats, 50, 40, SplitMode::SpeakerIndependent, seed);
    let (temporal, _) = run_split(AggregationMethod::TemporalDynamics, 50, 40, SplitMode::SpeakerIndependent, seed);
    let (windowed, _) = run_split(AggregationMethod::WindowedStats, 50, 40, SplitMode::SpeakerIndependent, seed);
    let (adaptive, _) = run_split(AggregationMethod::AdaptiveBinning, 50, 40, SplitMode::SpeakerIndependent, seed);

    let ordering = basic < temporal && temporal < windowed;
    let adaptive_close = (adaptive - windowed).abs() <= 0.015;
    criterion(
        "2",
        "method ordering basic < temporal < windowed, adaptive within 1.5 points of windowed",
        ordering && adaptive_close,
        format!("basic {basic:.4}, temporal {temporal:.4}, windowed {windowed:.4}, adaptive {adaptive:.4}"),
    );
}

// --- criterion 3: split-leakage gap -------------------------------------

#[test]
#[ignore = "requires the Speech Commands dataset; see module docs"]
fn acceptance_3_split_leakage_gap() {
    let seed = 1;
    let (si, _) = run_split(AggregationMethod::AdaptiveBinning, 50, 40, SplitMode::SpeakerIndependent, seed);
    let (random, _) = run_split(AggregationMethod::AdaptiveBinning, 50, 40, SplitMode::Random8020, seed);
    let gap = random - si;
    criterion(
        "3",
        "random 80/20 accuracy exceeds speaker-independent by >= 1.0 point (adaptive binning)",
        gap >= 0.01,
        format!("random {random:.4}, speaker-independent {si:.4}, gap {gap:+.4}"),
    );
}

// --- criterion 4: embedded-size architecture ----------------------------

#[test]
#[ignore = "requires the Speech Commands dataset; see module docs"]
fn acceptance_4_embedded_architecture() {
    let (accuracy, _) = run_split(
        AggregationMethod::AdaptiveBinning,
        33,
        9,
        SplitMode::SpeakerIndependent,
        1,
    );
    criterion(
        "4",
        "64:33:9:4 speaker-independent accuracy >= 0.86",
        accuracy >= 0.86,
        format!("accuracy {accuracy:.4}"),
    );
}

// --- criterion 5: memory estimator --------------------------------------

#[test]
fn acceptance_5_memory_budget() {
    let table4: Vec<(AggregationMethod, u32)> = vec![
        (AggregationMethod::BasicStats, 168),
        (AggregationMethod::TemporalDynamics, 632),
        (AggregationMethod::WindowedStats, 556),
        (AggregationMethod::AdaptiveBinning, 276),
    ];
    let mut detail = String::new();
    let mut pass = true;
    for (method, expected) in table4 {
        let got = method_memory(method).total_bytes;
        detail.push_str(&format!("{method} {got}B; "));
        pass &= got == expected;
    }

    let budget = estimate_memory(
        &LogNetArch::new(64, 33, 9),
        &StreamVadConfig::default(),
        &speechcmd::features::MfccConfig::default(),
        AggregationMethod::AdaptiveBinning,
    );
    detail.push_str(&format!(
        "total {}B, utilization {}",
        budget.total_measured,
        budget.utilization_str()
    ));
    pass &= budget.total_measured == 18016;
    pass &= budget.utilization_str() == "54.9%";

    criterion(
        "5",
        "memory totals 168/632/556/276 bytes and 18016 bytes at 54.9% utilization",
        pass,
        detail,
    );
}

// --- criterion 6: timer calculator ---------------------------------------

#[test]
fn acceptance_6_timer_frequency() {
    let integer_cc = timer_interrupt_frequency(48e6, 64.0, 93.0).unwrap();
    let printed_cc = timer_interrupt_frequency(48e6, 64.0, 93.75).unwrap();
    // The integer compare value reproduces the firmware's ~7979 Hz; the
    // fractional parameters evaluate to neither 8000 Hz nor 7979 Hz,
    // which is the inconsistency the CLI surfaces.
    let pass = (integer_cc - 7978.7234).abs() < 0.01
        && format!("{integer_cc:.0}") == "7979"
        && (printed_cc - 7915.5673).abs() < 0.01
        && (printed_cc - 8000.0).abs() > 50.0
        && (printed_cc - 7979.0).abs() > 50.0;
    criterion(
        "6",
        "timer gives ~7978.7 Hz at CC=93 and flags the fractional-CC inconsistency",
        pass,
        format!("CC=93 -> {integer_cc:.1} Hz, CC=93.75 -> {printed_cc:.1} Hz"),
    );
}

// --- criterion 7: property suites ----------------------------------------

#[test]
fn acceptance_7a_fft_parseval() {
    // Windowed-frame Parseval within 1e-6 relative error.
    let mut rng = common::Lcg64(0xF0F0);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let window: Vec<f64> = (0..128)
            .map(|n| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * n as f64 / 127.0).cos())
            .collect();
        let frame: Vec<f64> = (0..128).map(|_| rng.next_signed()).collect();
        let windowed: Vec<f64> = frame.iter().zip(&window).map(|(x, w)| x * w).collect();
        let mut re = windowed.clone();
        let mut im = vec![0.0; 128];
        fft_in_place(&mut re, &mut im);
        let spectral: f64 =
            re.iter().zip(&im).map(|(r, i)| r * r + i * i).sum::<f64>() / 128.0;
        let temporal: f64 = windowed.iter().map(|x| x * x).sum();
        worst = worst.max((spectral - temporal).abs() / temporal);
    }
    criterion(
        "7a",
        "windowed-FFT Parseval within 1e-6 relative",
        worst < 1e-6,
        format!("worst relative error {worst:.2e}"),
    );
}

#[test]
fn acceptance_7b_dct_orthonormality() {
    let d = dct_basis(9, 12);
    let mut worst: f64 = 0.0;
    for a in 0..9 {
        for b in 0..9 {
            let dot: f64 = d[a].iter().zip(&d[b]).map(|(x, y)| x * y).sum();
            let expect = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - expect).abs());
        }
    }
    criterion(
        "7b",
        "DCT basis orthonormal within 1e-10",
        worst < 1e-10,
        format!("worst deviation {worst:.2e}"),
    );
}

#[test]
fn acceptance_7c_aggregation_contracts() {
    let mut rng = common::Lcg64(0xA66);
    let mut pass = true;
    for t in [4usize, 7, 16, 61] {
        let m = MfccMatrix {
            coeffs: (0..8)
                .map(|_| (0..t).map(|_| rng.next_signed() * 10.0).collect())
                .collect(),
            hop: 64,
            sample_rate_hz: 8000,
        };
        pass &= basic_stats(&m).unwrap().dim() == 32;
        pass &= temporal_dynamics(&m).unwrap().dim() == 48;
        pass &= windowed_stats(&m).unwrap().dim() == 128;
        pass &= adaptive_binning(&m).unwrap().dim() == 64;
    }
    // Constant-input identities.
    let c = 2.75;
    let constant = MfccMatrix {
        coeffs: vec![vec![c; 20]; 8],
        hop: 64,
        sample_rate_hz: 8000,
    };
    for chunk in basic_stats(&constant).unwrap().values.chunks(4) {
        pass &= (chunk[0] - c).abs() < 1e-12 && chunk[1].abs() < 1e-12;
        pass &= (chunk[2] - c).abs() < 1e-12 && (chunk[3] - c).abs() < 1e-12;
    }
    pass &= adaptive_binning(&constant)
        .unwrap()
        .values
        .iter()
        .all(|&v| (v - c).abs() < 1e-12);
    for chunk in windowed_stats(&constant).unwrap().values.chunks(4) {
        pass &= (chunk[0] - c).abs() < 1e-12 && chunk[1].abs() < 1e-12;
    }
    criterion(
        "7c",
        "aggregation dimension contracts 32/48/128/64 and constant-input identities",
        pass,
        "checked T in {4,7,16,61} plus constant matrices".into(),
    );
}

#[test]
fn acceptance_7d_vad_chunking_determinism() {
    let mut rng = common::Lcg64(0xBEEF);
    let mut stream: Vec<f64> = Vec::with_capacity(16000);
    for i in 0..16000usize {
        let amp = if (6000..9500).contains(&i) { 0.3 } else { 0.01 };
        stream.push(rng.next_signed() * amp);
    }
    let run = |chunk: usize| {
        let mut vad = StreamVad::new(StreamVadConfig::default());
        let mut segs = Vec::new();
        for c in stream.chunks(chunk) {
            segs.extend(vad.push(c));
        }
        segs
    };
    let reference = run(1);
    let pass = [7usize, 160, 1000, 16000]
        .iter()
        .all(|&chunk| run(chunk) == reference)
        && !reference.is_empty();
    criterion(
        "7d",
        "streaming VAD segment boundaries independent of chunk size",
        pass,
        format!("{} segment(s) across chunk sizes 1/7/160/1000/16000", reference.len()),
    );
}

#[test]
fn acceptance_7e_energy_scale_quadratic() {
    let mut rng = common::Lcg64(0x51);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let frame: Vec<f64> = (0..160).map(|_| rng.next_signed()).collect();
        let scale = rng.next_signed() * 2.0;
        let scaled: Vec<f64> = frame.iter().map(|x| scale * x).collect();
        let err = (frame_energy(&scaled).unwrap()
            - scale * scale * frame_energy(&frame).unwrap())
        .abs();
        worst = worst.max(err);
    }
    criterion(
        "7e",
        "frame energy is scale-quadratic within 1e-12",
        worst < 1e-12,
        format!("worst absolute error {worst:.2e}"),
    );
}

#[test]
#[allow(clippy::needless_range_loop)] // explicit weight coordinates
fn acceptance_7f_gradient_check() {
    // Tiny model N=4, P=3, M=2 against central finite differences.
    let mut rng = common::Lcg64(0x9bad);
    let arch = LogNetArch::new(4, 3, 2);
    let reservoir = generate_reservoir(&arch, LcgParams::default()).unwrap();
    let features: Vec<speechcmd::aggregate::FeatureVector> = (0..12)
        .map(|_| speechcmd::aggregate::FeatureVector {
            values: (0..4).map(|_| rng.next_signed() * 2.0).collect(),
            method: AggregationMethod::AdaptiveBinning,
        })
        .collect();
    let norms = fit_normalization(&reservoir, &features).unwrap();
    let mut model = LogNetModel::new(
        arch,
        LcgParams::default(),
        norms,
        AggregationMethod::AdaptiveBinning,
    )
    .unwrap();
    for row in model
        .readout
        .hidden
        .iter_mut()
        .chain(model.readout.output.iter_mut())
    {
        for w in row {
            *w = rng.next_signed() * 0.6;
        }
    }
    let raw: Vec<&[f64]> = features.iter().map(|f| f.values.as_slice()).collect();
    let labels: Vec<usize> = (0..raw.len()).map(|i| i % 4).collect();
    let (gh, go) = readout_gradients(&model, &raw, &labels).unwrap();

    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for j in 0..2 {
        for k in 0..4 {
            let mut plus = model.clone();
            plus.readout.hidden[j][k] += h;
            let mut minus = model.clone();
            minus.readout.hidden[j][k] -= h;
            let numeric = (cross_entropy_loss(&plus, &raw, &labels).unwrap()
                - cross_entropy_loss(&minus, &raw, &labels).unwrap())
                / (2.0 * h);
            let denom = numeric.abs().max(gh[j][k].abs()).max(1e-8);
            worst = worst.max((numeric - gh[j][k]).abs() / denom);
        }
    }
    for c in 0..4 {
        for k in 0..3 {
            let mut plus = model.clone();
            plus.readout.output[c][k] += h;
            let mut minus = model.clone();
            minus.readout.output[c][k] -= h;
            let numeric = (cross_entropy_loss(&plus, &raw, &labels).unwrap()
                - cross_entropy_loss(&minus, &raw, &labels).unwrap())
                / (2.0 * h);
            let denom = numeric.abs().max(go[c][k].abs()).max(1e-8);
            worst = worst.max((numeric - go[c][k]).abs() / denom);
        }
    }
    criterion(
        "7f",
        "readout gradients match central finite differences within 1e-4 relative",
        worst < 1e-4,
        format!("worst relative error {worst:.2e}"),
    );
}

#[test]
#[allow(clippy::needless_range_loop)] // explicit indices mirror the formulas
fn acceptance_7g_metrics_brute_force() {
    // 1000 random truth/prediction pairs against an independent
    // implementation of every formula.
    let mut rng = common::Lcg64(0x3141);
    let mut worst: f64 = 0.0;
    for round in 0..1000 {
        let n = 8 + (round % 120);
        let truth: Vec<usize> = (0..n).map(|_| (rng.next_f64() * 4.0) as usize % 4).collect();
        let predicted: Vec<usize> =
            (0..n).map(|_| (rng.next_f64() * 4.0) as usize % 4).collect();
        let report = compute_metrics(&truth, &predicted).unwrap();

        let mut conf = [[0f64; 4]; 4];
        for (&t, &p) in truth.iter().zip(&predicted) {
            conf[t][p] += 1.0;
        }
        let total = n as f64;
        let trace: f64 = (0..4).map(|i| conf[i][i]).sum();
        worst = worst.max((report.accuracy - trace / total).abs());

        let mut recall_sum = 0.0;
        for k in 0..4 {
            let row: f64 = conf[k].iter().sum();
            let col: f64 = (0..4).map(|i| conf[i][k]).sum();
            let tp = conf[k][k];
            let precision = if col == 0.0 { 0.0 } else { tp / col };
            let recall = if row == 0.0 { 0.0 } else { tp / row };
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            recall_sum += recall;
            worst = worst.max((report.per_class[k].precision - precision).abs());
            worst = worst.max((report.per_class[k].recall - recall).abs());
            worst = worst.max((report.per_class[k].f1 - f1).abs());
        }
        worst = worst.max((report.balanced_accuracy - recall_sum / 4.0).abs());

        let rows: Vec<f64> = (0..4).map(|k| conf[k].iter().sum()).collect();
        let cols: Vec<f64> = (0..4).map(|k| (0..4).map(|i| conf[i][k]).sum()).collect();
        let pt: f64 = (0..4).map(|k| rows[k] * cols[k]).sum();
        let pp: f64 = cols.iter().map(|v| v * v).sum();
        let tt: f64 = rows.iter().map(|v| v * v).sum();
        let denom = ((total * total - pp) * (total * total - tt)).sqrt();
        let mcc = if denom == 0.0 { 0.0 } else { (trace * total - pt) / denom };
        worst = worst.max((report.mcc - mcc).abs());
    }
    criterion(
        "7g",
        "metrics equal the brute-force formulas on 1000 random label sets",
        worst < 1e-12,
        format!("worst deviation {worst:.2e}"),
    );
}

#[test]
fn acceptance_7h_model_round_trip() {
    let mut rng = common::Lcg64(0x10ad);
    let arch = LogNetArch::new(6, 5, 3);
    let reservoir = generate_reservoir(&arch, LcgParams::default()).unwrap();
    let features: Vec<speechcmd::aggregate::FeatureVector> = (0..30)
        .map(|_| speechcmd::aggregate::FeatureVector {
            values: (0..6).map(|_| rng.next_signed() * 3.0).collect(),
            method: AggregationMethod::AdaptiveBinning,
        })
        .collect();
    let labels: Vec<&str> = (0..30).map(|i| LABELS[i % 4]).collect();
    let norms = fit_normalization(&reservoir, &features).unwrap();
    let model = LogNetModel::new(
        arch,
        LcgParams::default(),
        norms,
        AggregationMethod::AdaptiveBinning,
    )
    .unwrap();
    let (trained, _) = train_readout(
        &model,
        &features,
        &labels,
        &TrainConfig {
            epochs: 5,
            ..TrainConfig::default()
        },
    )
    .unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.bin");
    save_model(&trained, &path).unwrap();
    let loaded = load_model(&path).unwrap();

    let mut pass = true;
    for _ in 0..100 {
        let f: Vec<f64> = (0..6).map(|_| rng.next_signed() * 2.0).collect();
        pass &= trained.forward(&f).unwrap() == loaded.forward(&f).unwrap();
    }
    // Byte-identical second save.
    save_model(&loaded, dir.path().join("model2.bin")).unwrap();
    pass &= std::fs::read(&path).unwrap() == std::fs::read(dir.path().join("model2.bin")).unwrap();
    criterion(
        "7h",
        "model save/load round-trip is bit-exact (forward outputs and bytes)",
        pass,
        "100 random inputs".into(),
    );
}

#[test]
fn acceptance_7i_reservoir_determinism() {
    let arch = LogNetArch::new(64, 50, 40);
    let a = generate_reservoir(&arch, LcgParams::default()).unwrap();
    let b = generate_reservoir(&arch, LcgParams::default()).unwrap();
    let pass = a.w == b.w && a.w.len() == 50 && a.w[0].len() == 65;
    criterion(
        "7i",
        "reservoir regeneration is deterministic and bit-exact",
        pass,
        "two generations of a 50x65 reservoir".into(),
    );
}

// --- criterion 8: PFI sanity ----------------------------------------------

/// 64-dim synthetic feature set shaped like adaptive-binning output:
/// column 9 decides the class, columns 30/31 are exactly constant, the
/// rest are low-variance nuisance.
fn pfi_synthetic_features() -> ExtractedFeatures {
    let mut rng = common::Lcg64(0x5eed);
    let mut entries = Vec::new();
    for class in 0..4usize {
        for i in 0..40usize {
            let id = class * 40 + i;
            let mut values: Vec<f64> = (0..64).map(|_| 0.5 + rng.next_f64() * 0.05).collect();
            values[9] = class as f64 * 2.0 + rng.next_f64() * 0.2;
            values[30] = 1.0;
            values[31] = -0.25;
            entries.push(FeatureEntry {
                path: format!("synthetic/{id}.wav"),
                label: class,
                speaker_id: format!("spk{:02}", id % 24),
                split: if id % 5 == 0 { Split::Test } else { Split::Train },
                fallback: false,
                values,
            });
        }
    }
    ExtractedFeatures {
        method: AggregationMethod::AdaptiveBinning,
        config_hash: 0,
        entries,
    }
}

fn synth_cfg() -> PipelineConfig {
    PipelineConfig {
        train: TrainConfig {
            epochs: 200,
            learning_rate: 0.05,
            val_fraction: 0.0,
            ..TrainConfig::default()
        },
        ..PipelineConfig::default()
    }
}

#[test]
fn acceptance_8_pfi_sanity_desk_scale() {
    let features = pfi_synthetic_features();
    let cfg = synth_cfg();
    let report = permutation_importance(&features, 20, 12, &cfg, 3, 10, 7).unwrap();

    let length_ok = report.drops.len() == 64;
    let constant_ok =
        report.drops[30].abs() < 0.005 && report.drops[31].abs() < 0.005;
    let informative_first = report.ranking[0] == 9;
    criterion(
        "8",
        "PFI: 64-long importance vector, constant columns |drop| < 0.005, informative feature first",
        length_ok && constant_ok && informative_first,
        format!(
            "len {}, constant drops {:+.4}/{:+.4}, top feature {} (drop {:.3})",
            report.drops.len(),
            report.drops[30],
            report.drops[31],
            report.ranking[0],
            report.drops[report.ranking[0]],
        ),
    );
}

#[test]
#[ignore = "requires the Speech Commands dataset; see module docs"]
fn acceptance_8_reduction_curve_dataset_scale() {
    let seed = 1;
    let root = dataset_root();
    let index = build_index(&root, SplitMode::SpeakerIndependent, seed).unwrap();
    let cfg = dataset_cfg(seed);
    let features =
        extract_features(&index, AggregationMethod::AdaptiveBinning, &cfg).unwrap();
    let importance = permutation_importance(&features, 50, 40, &cfg, 3, 10, seed).unwrap();
    let curve = feature_reduction_sweep(
        &features,
        &importance.ranking,
        50,
        40,
        &cfg,
        &[60, 64],
        seed,
    )
    .unwrap();
    let at = |k: usize| curve.iter().find(|&&(ck, _)| ck == k).unwrap().1;
    let (k60, k64) = (at(60), at(64));
    criterion(
        "8 (reduction curve)",
        "k=60 accuracy within 1.5 points of k=64",
        (k64 - k60).abs() <= 0.015,
        format!("k=60 {k60:.4}, k=64 {k64:.4}"),
    );
}
