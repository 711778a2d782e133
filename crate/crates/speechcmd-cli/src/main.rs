//! `speechcmd` — command-line surface for the speech-command pipeline:
//! dataset fetching, training, evaluation, single-file and streaming
//! inference, importance/reduction/architecture analyses, embedded
//! export, memory budgeting, and the timer calculator.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand};

use speechcmd::aggregate::AggregationMethod;
use speechcmd::audio::{load_wav, resample_16k_to_8k, AudioClip};
use speechcmd::deploy::{
    estimate_memory, export_c_header, load_model, method_memory, save_model,
    timer_interrupt_frequency,
};
use speechcmd::evalkit::{
    architecture_sweep, build_index, compute_metrics, evaluate_features, extract_features,
    feature_reduction_sweep, load_features, permutation_importance, save_features, sweep_to_csv,
    PipelineConfig, Split, SplitMode,
};
use speechcmd::features::{mfcc_from_segment, MfccConfig};
use speechcmd::lognet::{LogNetArch, LogNetModel, TrainConfig};
use speechcmd::vad::{detect_segment, OfflineVadConfig, StreamVad, StreamVadConfig};

/// Exit codes: 0 success, 1 runtime failure, 2 bad flags (clap), 3
/// missing file or dataset, 4 no speech detected, 5 unknown subcommand.
const EXIT_FAILURE: u8 = 1;
const EXIT_MISSING: u8 = 3;
const EXIT_NO_SPEECH: u8 = 4;
const EXIT_BAD_SUBCOMMAND: u8 = 5;

const DATASET_URL: &str = "http://download.tensorflow.org/data/speech_commands_v0.02.tar.gz";
const DATASET_DIR_NAME: &str = "speech_commands_v0.02";

#[derive(Parser)]
#[command(
    name = "speechcmd",
    version,
    about = "Four-word speech-command recognition: VAD, 8 kHz MFCC front end, LogNet classifier",
    after_help = "Environment:\n  SPEECHCMD_CACHE      cache directory for the dataset (default ~/.cache/speechcmd)\n  SPEECH_COMMANDS_DIR  direct path to an unpacked dataset root (overrides the cache)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TrainHyper {
    /// Training epochs
    #[arg(long, default_value_t = 150)]
    epochs: usize,
    /// Mini-batch size
    #[arg(long, default_value_t = 64)]
    batch: usize,
    /// Learning rate (gradient descent with momentum 0.9)
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    /// Fraction of the training split held out for early stopping
    #[arg(long, default_value_t = 0.1)]
    val_fraction: f64,
    /// Early-stop patience in epochs
    #[arg(long, default_value_t = 15)]
    patience: usize,
}

impl TrainHyper {
    fn to_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch,
            learning_rate: self.lr,
            momentum: 0.9,
            val_fraction: self.val_fraction,
            early_stop_patience: self.patience,
            seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Download and unpack the Speech Commands dataset (the four command
    /// folders only)
    Fetch {
        /// Archive URL
        #[arg(long, default_value = DATASET_URL)]
        url: String,
        /// Destination directory (default: the cache directory)
        #[arg(long)]
        dest: Option<PathBuf>,
        /// Unpack a local .tar.gz instead of downloading
        #[arg(long)]
        archive: Option<PathBuf>,
    },
    /// Index the dataset, extract features, train a model, and write
    /// model + report + feature cache
    Train {
        /// Dataset root (default: $SPEECH_COMMANDS_DIR or the cache)
        #[arg(long)]
        data: Option<PathBuf>,
        /// Aggregation method: basic | temporal | windowed | adaptive
        #[arg(long, default_value = "adaptive")]
        agg: String,
        /// Architecture N:P:M:4
        #[arg(long, default_value = "64:50:40:4")]
        arch: String,
        /// Split mode: random | speaker-independent
        #[arg(long, default_value = "speaker-independent")]
        split: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Also write report.csv
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        hyper: TrainHyper,
    },
    /// Evaluate a saved model on a dataset split
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value = "speaker-independent")]
        split: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Report path (default: print to stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: bool,
    },
    /// Classify a single WAV file
    Infer {
        #[arg(long)]
        model: PathBuf,
        wav: PathBuf,
        /// Dump the MFCC matrix (coefficient rows x frame columns) as CSV
        #[arg(long)]
        dump_mfcc: Option<PathBuf>,
        /// Dump the detected speech segment as a WAV file
        #[arg(long)]
        dump_segment: Option<PathBuf>,
    },
    /// Replay a WAV through the streaming VAD and classify each segment
    Stream {
        #[arg(long)]
        model: PathBuf,
        wav: PathBuf,
        /// Write the FSM trace (frame,energy,noise,state) as CSV
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Permutation feature importance over a feature cache
    Pfi {
        /// Feature cache written by `train`
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value = "64:50:40:4")]
        arch: String,
        #[arg(long, default_value_t = 3)]
        folds: usize,
        #[arg(long, default_value_t = 10)]
        permutations: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Ranking CSV output path
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        hyper: TrainHyper,
    },
    /// Progressive feature reduction: retrain with the top-k features
    Reduce {
        #[arg(long)]
        features: PathBuf,
        /// PFI ranking CSV from `pfi`
        #[arg(long)]
        pfi: PathBuf,
        #[arg(long, default_value = "64:50:40:4")]
        arch: String,
        /// Feature counts to evaluate: "lo:hi[:step]" or comma list
        #[arg(long, default_value = "4:64:4")]
        ks: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        hyper: TrainHyper,
    },
    /// Accuracy grid over reservoir rows (P) and hidden neurons (M)
    Sweep {
        #[arg(long)]
        features: PathBuf,
        /// P range "lo:hi[:step]" or comma list
        #[arg(long, default_value = "1:50")]
        p: String,
        /// M range "lo:hi[:step]" or comma list
        #[arg(long, default_value = "1:50")]
        m: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        hyper: TrainHyper,
    },
    /// Export a trained model as a C header of constant arrays
    ExportHeader {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-component RAM budget for an architecture
    MemBudget {
        #[arg(long, default_value = "64:33:9:4")]
        arch: String,
        #[arg(long, default_value = "adaptive")]
        agg: String,
        /// Also write the budget as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Timer interrupt frequency: f_clk / (div * (cc + 1))
    Timer {
        #[arg(long, default_value_t = 48_000_000.0)]
        clk: f64,
        #[arg(long, default_value_t = 64.0)]
        div: f64,
        #[arg(long, default_value_t = 93.75)]
        cc: f64,
    },
}

/// Sentinel for the "no speech detected" exit code.
#[derive(Debug)]
struct NoSpeech;

impl std::fmt::Display for NoSpeech {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "no speech detected")
    }
}

impl std::error::Error for NoSpeech {}

/// Sentinel for the missing-input exit code.
#[derive(Debug)]
struct MissingInput(PathBuf);

impl std::fmt::Display for MissingInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} not found", self.0.display())
    }
}

impl std::error::Error for MissingInput {}

fn main() -> std::process::ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => {
                    print!("{e}");
                    std::process::ExitCode::SUCCESS
                }
                ClapErrorKind::InvalidSubcommand => {
                    eprint!("{e}");
                    std::process::ExitCode::from(EXIT_BAD_SUBCOMMAND)
                }
                _ => {
                    eprint!("{e}");
                    std::process::ExitCode::from(2)
                }
            };
        }
    };
    match run(cli.command) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::from(classify_error(&e))
        }
    }
}

fn classify_error(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<NoSpeech>().is_some() {
        return EXIT_NO_SPEECH;
    }
    if e.downcast_ref::<MissingInput>().is_some() {
        return EXIT_MISSING;
    }
    // File-not-found surfaced by a stage (e.g. a WAV path).
    if e.chain().any(|cause| {
        cause
            .downcast_ref::<std::io::Error>()
            .map(|io| io.kind() == std::io::ErrorKind::NotFound)
            .unwrap_or(false)
    }) {
        return EXIT_MISSING;
    }
    EXIT_FAILURE
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Fetch { url, dest, archive } => cmd_fetch(&url, dest, archive),
        Command::Train {
            data,
            agg,
            arch,
            split,
            seed,
            out,
            csv,
            hyper,
        } => cmd_train(data, &agg, &arch, &split, seed, &out, csv, &hyper),
        Command::Eval {
            model,
            data,
            split,
            seed,
            out,
            csv,
        } => cmd_eval(&model, data, &split, seed, out, csv),
        Command::Infer {
            model,
            wav,
            dump_mfcc,
            dump_segment,
        } => cmd_infer(&model, &wav, dump_mfcc, dump_segment),
        Command::Stream { model, wav, trace } => cmd_stream(&model, &wav, trace),
        Command::Pfi {
            features,
            arch,
            folds,
            permutations,
            seed,
            out,
            hyper,
        } => cmd_pfi(&features, &arch, folds, permutations, seed, out, &hyper),
        Command::Reduce {
            features,
            pfi,
            arch,
            ks,
            seed,
            out,
            hyper,
        } => cmd_reduce(&features, &pfi, &arch, &ks, seed, out, &hyper),
        Command::Sweep {
            features,
            p,
            m,
            seed,
            out,
            hyper,
        } => cmd_sweep(&features, &p, &m, seed, out, &hyper),
        Command::ExportHeader { model, out } => {
            let model = load_model_checked(&model)?;
            export_c_header(&model, &out)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::MemBudget { arch, agg, csv } => cmd_mem_budget(&arch, &agg, csv),
        Command::Timer { clk, div, cc } => cmd_timer(clk, div, cc),
    }
}

// --- shared helpers ---

fn parse_arch(s: &str) -> anyhow::Result<LogNetArch> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 {
        bail!("architecture must be N:P:M:4, got {s:?}");
    }
    let nums: Vec<usize> = parts
        .iter()
        .map(|p| {
            p.parse::<usize>()
                .map_err(|_| anyhow!("bad architecture component {p:?}"))
        })
        .collect::<Result<_, _>>()?;
    if nums.contains(&0) {
        bail!("architecture components must be positive: {s}");
    }
    if nums[3] != 4 {
        bail!("this pipeline classifies 4 commands; architecture must end in :4");
    }
    Ok(LogNetArch::new(nums[0], nums[1], nums[2]))
}

fn parse_method(s: &str) -> anyhow::Result<AggregationMethod> {
    AggregationMethod::parse(s).ok_or_else(|| {
        anyhow!("unknown aggregation method {s:?} (basic | temporal | windowed | adaptive)")
    })
}

fn parse_split(s: &str) -> anyhow::Result<SplitMode> {
    SplitMode::parse(s)
        .ok_or_else(|| anyhow!("unknown split mode {s:?} (random | speaker-independent)"))
}

/// "lo:hi[:step]" or "a,b,c".
fn parse_range(s: &str) -> anyhow::Result<Vec<usize>> {
    if s.contains(',') {
        return s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| anyhow!("bad value {t:?} in {s:?}"))
            })
            .collect();
    }
    let parts: Vec<&str> = s.split(':').collect();
    let parse = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| anyhow!("bad value {t:?} in {s:?}"))
    };
    match parts.as_slice() {
        [single] => Ok(vec![parse(single)?]),
        [lo, hi] => {
            let (lo, hi) = (parse(lo)?, parse(hi)?);
            Ok((lo..=hi).collect())
        }
        [lo, hi, step] => {
            let (lo, hi, step) = (parse(lo)?, parse(hi)?, parse(step)?);
            if step == 0 {
                bail!("step must be positive in {s:?}");
            }
            Ok((lo..=hi).step_by(step).collect())
        }
        _ => bail!("range must be lo:hi[:step] or a comma list, got {s:?}"),
    }
}

fn cache_root() -> PathBuf {
    if let Ok(dir) = std::env::var("SPEECHCMD_CACHE") {
        return PathBuf::from(dir);
    }
    let home = std::env::var("HOME").unwrap_or_else(|_| ".".into());
    Path::new(&home).join(".cache").join("speechcmd")
}

fn resolve_dataset(flag: Option<PathBuf>) -> anyhow::Result<PathBuf> {
    if let Some(dir) = flag {
        if !dir.is_dir() {
            return Err(MissingInput(dir).into());
        }
        return Ok(dir);
    }
    if let Ok(dir) = std::env::var("SPEECH_COMMANDS_DIR") {
        let dir = PathBuf::from(dir);
        if dir.is_dir() {
            return Ok(dir);
        }
        return Err(MissingInput(dir).into());
    }
    let cached = cache_root().join(DATASET_DIR_NAME);
    if cached.is_dir() {
        return Ok(cached);
    }
    Err(anyhow::Error::from(MissingInput(cached)).context(
        "no dataset found; run `speechcmd fetch`, set SPEECH_COMMANDS_DIR, or pass --data",
    ))
}

fn require_file(path: &Path) -> anyhow::Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(MissingInput(path.to_path_buf()).into())
    }
}

fn load_model_checked(path: &Path) -> anyhow::Result<LogNetModel> {
    require_file(path)?;
    Ok(load_model(path)?)
}

fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp-{}",
            path.file_name().unwrap_or_default().to_string_lossy(),
            std::process::id()
        )),
        None => PathBuf::from(format!(".speechcmd.tmp-{}", std::process::id())),
    };
    std::fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Load an 8 kHz clip, resampling 16 kHz input.
fn load_clip_8k(path: &Path) -> anyhow::Result<AudioClip> {
    require_file(path)?;
    let clip = load_wav(path)?;
    Ok(match clip.sample_rate_hz {
        8000 => clip,
        16000 => resample_16k_to_8k(&clip)?,
        other => bail!("unsupported sample rate {other} Hz (expected 8000 or 16000)"),
    })
}

fn pipeline_config(hyper: &TrainHyper, seed: u64) -> PipelineConfig {
    PipelineConfig {
        train: hyper.to_config(seed),
        ..Default::default()
    }
}

// --- subcommands ---

fn cmd_fetch(url: &str, dest: Option<PathBuf>, archive: Option<PathBuf>) -> anyhow::Result<()> {
    let dest_root = dest.unwrap_or_else(cache_root);
    let dataset_dir = dest_root.join(DATASET_DIR_NAME);
    std::fs::create_dir_all(&dataset_dir)
        .with_context(|| format!("creating {}", dataset_dir.display()))?;

    let reader: Box<dyn std::io::Read> = match archive {
        Some(path) => {
            require_file(&path)?;
            println!("unpacking {}", path.display());
            Box::new(std::fs::File::open(&path)?)
        }
        None => {
            println!("downloading {url}");
            let response = ureq::get(url)
                .call()
                .with_context(|| format!("downloading {url}"))?;
            Box::new(response.into_body().into_reader())
        }
    };

    let keep = ["go/", "left/", "right/", "stop/", "LICENSE", "README.md"];
    let gz = flate2::read::GzDecoder::new(reader);
    let mut tar = tar::Archive::new(gz);
    let mut unpacked = 0usize;
    for entry in tar.entries()? {
        let mut entry = entry?;
        let path = entry.path()?.into_owned();
        let name = path.to_string_lossy().into_owned();
        let trimmed = name.trim_start_matches("./");
        if keep.iter().any(|k| trimmed.starts_with(k)) {
            entry.unpack_in(&dataset_dir)?;
            unpacked += 1;
            if unpacked.is_multiple_of(2000) {
                println!("  {unpacked} files...");
            }
        }
    }
    if unpacked == 0 {
        bail!("archive contained none of the expected command folders");
    }

    let index = build_index(&dataset_dir, SplitMode::SpeakerIndependent, 0)?;
    println!(
        "unpacked {unpacked} files to {}; clips per class: go {} / left {} / right {} / stop {} (total {})",
        dataset_dir.display(),
        index.class_counts[0],
        index.class_counts[1],
        index.class_counts[2],
        index.class_counts[3],
        index.entries.len()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    data: Option<PathBuf>,
    agg: &str,
    arch: &str,
    split: &str,
    seed: u64,
    out: &Path,
    csv: bool,
    hyper: &TrainHyper,
) -> anyhow::Result<()> {
    let method = parse_method(agg)?;
    let arch = parse_arch(arch)?;
    if arch.n_input != method.dim() {
        bail!(
            "architecture input {} does not match {} dimension {}",
            arch.n_input,
            method,
            method.dim()
        );
    }
    let mode = parse_split(split)?;
    let root = resolve_dataset(data)?;
    std::fs::create_dir_all(out)?;

    let start = std::time::Instant::now();
    let index = build_index(&root, mode, seed)?;
    println!(
        "indexed {} clips (train {} / test {}); per class go {} / left {} / right {} / stop {}",
        index.entries.len(),
        index.train_count(),
        index.test_count(),
        index.class_counts[0],
        index.class_counts[1],
        index.class_counts[2],
        index.class_counts[3],
    );

    let cfg = pipeline_config(hyper, seed);
    let features = extract_features(&index, method, &cfg)?;
    println!(
        "extracted {}-dim {} features for {} clips ({} VAD fallbacks) in {:.1?}",
        features.dim(),
        method,
        features.entries.len(),
        features.fallback_count(),
        start.elapsed()
    );
    let cache_path = out.join(format!("features_{method}.bin"));
    save_features(&features, &cache_path)?;

    let (report, model) = evaluate_features(&features, &arch, &cfg, seed)?;
    let model_path = out.join("model.bin");
    save_model(&model, &model_path)?;
    write_atomic(&out.join("report.json"), &report.to_json())?;
    if csv {
        write_atomic(&out.join("report.csv"), &report.to_csv())?;
    }

    println!(
        "arch {} on {} split: accuracy {:.4}, balanced {:.4}, MCC {:.4}",
        model.arch, split, report.accuracy, report.balanced_accuracy, report.mcc
    );
    println!(
        "wrote {}, {}, {}",
        model_path.display(),
        out.join("report.json").display(),
        cache_path.display()
    );
    Ok(())
}

fn cmd_eval(
    model_path: &Path,
    data: Option<PathBuf>,
    split: &str,
    seed: u64,
    out: Option<PathBuf>,
    csv: bool,
) -> anyhow::Result<()> {
    let model = load_model_checked(model_path)?;
    let mode = parse_split(split)?;
    let root = resolve_dataset(data)?;

    let index = build_index(&root, mode, seed)?;
    let cfg = PipelineConfig::default();
    let features = extract_features(&index, model.method, &cfg)?;

    let test: Vec<_> = features
        .entries
        .iter()
        .filter(|e| e.split == Split::Test)
        .collect();
    if test.is_empty() {
        bail!("empty test split");
    }
    let truth: Vec<usize> = test.iter().map(|e| e.label).collect();
    let predicted: Vec<usize> = test
        .iter()
        .map(|e| model.predict_index(&e.values))
        .collect::<Result<_, _>>()?;
    let mut report = compute_metrics(&truth, &predicted)?;
    report.fallback_count = features.fallback_count();

    println!(
        "accuracy {:.4}, balanced {:.4}, MCC {:.4} on {} test clips ({} fallbacks)",
        report.accuracy,
        report.balanced_accuracy,
        report.mcc,
        test.len(),
        report.fallback_count
    );
    if let Some(path) = out {
        write_atomic(&path, &report.to_json())?;
        if csv {
            write_atomic(&path.with_extension("csv"), &report.to_csv())?;
        }
        println!("wrote {}", path.display());
    } else {
        println!("{}", report.to_json());
    }
    Ok(())
}

fn cmd_infer(
    model_path: &Path,
    wav: &Path,
    dump_mfcc: Option<PathBuf>,
    dump_segment: Option<PathBuf>,
) -> anyhow::Result<()> {
    let model = load_model_checked(model_path)?;
    let clip = load_clip_8k(wav)?;
    let segment = detect_segment(&clip, &OfflineVadConfig::default())?;
    let Some(segment) = segment else {
        return Err(NoSpeech.into());
    };
    let samples = &clip.samples[segment.start_sample..segment.end_sample];
    let matrix = mfcc_from_segment(samples, &MfccConfig::default())?;
    if let Some(path) = dump_mfcc {
        write_atomic(&path, &matrix.to_csv())?;
    }
    if let Some(path) = dump_segment {
        let piece = AudioClip::new(samples.to_vec(), clip.sample_rate_hz);
        speechcmd::audio::write_wav(&piece, &path)?;
    }
    let features = model.method.aggregate(&matrix)?;
    let probs = model.forward(&features.values)?;
    let label = model.predict_label(&features.values)?;

    // Contract: one line, label TAB comma-separated probabilities in
    // label order.
    let rendered: Vec<String> = probs.iter().map(|p| format!("{p:.6}")).collect();
    println!("{label}\t{}", rendered.join(","));
    Ok(())
}

fn cmd_stream(model_path: &Path, wav: &Path, trace: Option<PathBuf>) -> anyhow::Result<()> {
    let model = load_model_checked(model_path)?;
    let clip = load_clip_8k(wav)?;

    let cfg = StreamVadConfig::default();
    let mut vad = StreamVad::new(cfg.clone());
    if trace.is_some() {
        vad.enable_trace();
    }

    let mut segments = Vec::new();
    for chunk in clip.samples.chunks(cfg.frame_len) {
        segments.extend(vad.push(chunk));
    }

    for seg in &segments {
        let samples = &clip.samples[seg.start_sample..seg.end_sample.min(clip.samples.len())];
        let matrix = mfcc_from_segment(samples, &MfccConfig::default())?;
        let features = model.method.aggregate(&matrix)?;
        let probs = model.forward(&features.values)?;
        let label = model.predict_label(&features.values)?;
        let rendered: Vec<String> = probs.iter().map(|p| format!("{p:.6}")).collect();
        println!(
            "segment {:.3}s..{:.3}s\t{}\t{}",
            seg.start_sample as f64 / 8000.0,
            seg.end_sample as f64 / 8000.0,
            label,
            rendered.join(",")
        );
    }
    println!("{} segment(s)", segments.len());

    if let Some(path) = trace {
        let mut csv = String::from("frame_index,energy,noise_level,state\n");
        for row in vad.take_trace() {
            csv.push_str(&format!(
                "{},{:.9e},{:.9e},{}\n",
                row.frame_index, row.energy, row.noise_level, row.state
            ));
        }
        write_atomic(&path, &csv)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_pfi(
    features_path: &Path,
    arch: &str,
    folds: usize,
    permutations: usize,
    seed: u64,
    out: Option<PathBuf>,
    hyper: &TrainHyper,
) -> anyhow::Result<()> {
    require_file(features_path)?;
    let features = load_features(features_path)?;
    let arch = parse_arch(arch)?;
    if arch.n_input != features.dim() {
        bail!(
            "architecture input {} does not match feature dim {}",
            arch.n_input,
            features.dim()
        );
    }
    let cfg = pipeline_config(hyper, seed);
    let report = permutation_importance(
        &features,
        arch.p_reservoir,
        arch.m_hidden,
        &cfg,
        folds,
        permutations,
        seed,
    )?;

    println!(
        "fold baselines: {}",
        report
            .fold_baselines
            .iter()
            .map(|b| format!("{b:.4}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    println!("top 10 features by mean accuracy drop:");
    for (rank, &feature) in report.ranking.iter().take(10).enumerate() {
        println!(
            "  #{:<2} feature {:<3} drop {:.4}",
            rank + 1,
            feature,
            report.drops[feature]
        );
    }

    let mut csv = String::from("rank,feature,mean_accuracy_drop\n");
    for (rank, &feature) in report.ranking.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{:.9}\n",
            rank + 1,
            feature,
            report.drops[feature]
        ));
    }
    let out = out.unwrap_or_else(|| PathBuf::from("pfi.csv"));
    write_atomic(&out, &csv)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn read_ranking_csv(path: &Path, dim: usize) -> anyhow::Result<Vec<usize>> {
    require_file(path)?;
    let text = std::fs::read_to_string(path)?;
    let mut ranking = Vec::new();
    for line in text.lines().skip(1) {
        let mut cols = line.split(',');
        let _rank = cols.next();
        let feature: usize = cols
            .next()
            .ok_or_else(|| anyhow!("malformed ranking line {line:?}"))?
            .trim()
            .parse()
            .map_err(|_| anyhow!("malformed feature index in {line:?}"))?;
        ranking.push(feature);
    }
    if ranking.len() != dim {
        bail!("ranking has {} entries, expected {dim}", ranking.len());
    }
    Ok(ranking)
}

#[allow(clippy::too_many_arguments)]
fn cmd_reduce(
    features_path: &Path,
    pfi_path: &Path,
    arch: &str,
    ks: &str,
    seed: u64,
    out: Option<PathBuf>,
    hyper: &TrainHyper,
) -> anyhow::Result<()> {
    require_file(features_path)?;
    let features = load_features(features_path)?;
    let arch = parse_arch(arch)?;
    let ranking = read_ranking_csv(pfi_path, features.dim())?;
    let ks = parse_range(ks)?;
    let cfg = pipeline_config(hyper, seed);

    let curve = feature_reduction_sweep(
        &features,
        &ranking,
        arch.p_reservoir,
        arch.m_hidden,
        &cfg,
        &ks,
        seed,
    )?;
    let mut csv = String::from("k,accuracy\n");
    for &(k, acc) in &curve {
        println!("k={k:<4} accuracy {acc:.4}");
        csv.push_str(&format!("{k},{acc:.6}\n"));
    }
    let out = out.unwrap_or_else(|| PathBuf::from("reduction.csv"));
    write_atomic(&out, &csv)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_sweep(
    features_path: &Path,
    p: &str,
    m: &str,
    seed: u64,
    out: Option<PathBuf>,
    hyper: &TrainHyper,
) -> anyhow::Result<()> {
    require_file(features_path)?;
    let features = load_features(features_path)?;
    let p_values = parse_range(p)?;
    let m_values = parse_range(m)?;
    let cfg = pipeline_config(hyper, seed);

    let grid = architecture_sweep(&features, &p_values, &m_values, &cfg, seed)?;
    let best = grid
        .iter()
        .max_by(|a, b| a.2.partial_cmp(&b.2).unwrap())
        .unwrap();
    println!(
        "{} cells; best accuracy {:.4} at P={}, M={}",
        grid.len(),
        best.2,
        best.0,
        best.1
    );
    let out = out.unwrap_or_else(|| PathBuf::from("sweep.csv"));
    write_atomic(&out, &sweep_to_csv(&grid))?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_mem_budget(arch: &str, agg: &str, csv: Option<PathBuf>) -> anyhow::Result<()> {
    let arch = parse_arch(arch)?;
    let method = parse_method(agg)?;
    let budget = estimate_memory(
        &arch,
        &StreamVadConfig::default(),
        &MfccConfig::default(),
        method,
    );
    println!("RAM budget for {arch} with {method} aggregation:");
    print!("{}", budget.to_table());
    println!(
        "total {} bytes, utilization {} of {} bytes",
        budget.total_measured,
        budget.utilization_str(),
        budget.capacity
    );

    println!("\naggregation footprints (vector + workspace):");
    for m in AggregationMethod::ALL {
        let mm = method_memory(m);
        println!(
            "  {:<18} {:>3} + {:>3} = {:>4} bytes",
            m.name(),
            mm.vector_bytes,
            mm.workspace_bytes,
            mm.total_bytes
        );
    }

    if let Some(path) = csv {
        write_atomic(&path, &budget.to_csv())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_timer(clk: f64, div: f64, cc: f64) -> anyhow::Result<()> {
    let freq = timer_interrupt_frequency(clk, div, cc)?;
    println!(
        "f = {clk} / ({div} x ({cc} + 1)) = {freq:.1} Hz ({:.2} us period)",
        1e6 / freq
    );
    if cc.fract() != 0.0 {
        let floor_cc = cc.floor();
        let f_floor = timer_interrupt_frequency(clk, div, floor_cc)?;
        println!(
            "note: compare registers are integers; CC = {cc} is not realizable and evaluates \
             to {freq:.1} Hz rather than a nominal 8000 Hz."
        );
        println!(
            "      the nearest integer CC = {floor_cc} gives {f_floor:.1} Hz (the ~7979 Hz reference figure)."
        );
    }
    Ok(())
}
