//! Versioned binary model container.
//!
//! Layout (all little-endian), followed by a CRC32 of everything before it:
//!
//! ```text
//! magic    4 bytes  "LNET"
//! version  u16      1
//! method   u8       aggregation method tag
//! pad      u8       0
//! arch     4 x u32  N, P, M, classes
//! lcg      4 x u64  multiplier, increment, modulus, seed
//! labels   classes x (u16 len + utf8)
//! input_max        (N+1) x f32
//! reservoir_stats  P x 3 x f32 (max, min, mean)
//! hidden weights   M x (P+1) x f32
//! output weights   classes x (M+1) x f32
//! crc32    u32
//! ```
//!
//! The reservoir matrix is regenerated from the stored generator
//! constants at load time rather than persisted, mirroring the embedded
//! design and keeping files small. All reals are stored as f32; fitted
//! and trained models hold f32-representable values, so save → load →
//! save is byte-identical and a loaded model's forward outputs match the
//! saved model's bit for bit.

use std::io::{Cursor, Read};
use std::path::Path;

use thiserror::Error;

use crate::aggregate::AggregationMethod;
use crate::bytesio::*;
use crate::lognet::{
    generate_reservoir, LcgParams, LogNetArch, LogNetModel, NormStats, ReadoutWeights,
};

const MAGIC: [u8; 4] = *b"LNET";
const FORMAT_VERSION: u16 = 1;
/// Shape sanity bound applied before allocating buffers.
const MAX_DIM: u32 = 1 << 20;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("bad magic bytes; not a model file")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("file is truncated")]
    Truncated,
    #[error("checksum mismatch; file is corrupt")]
    ChecksumMismatch,
    #[error("malformed model file: {0}")]
    Malformed(String),
}

/// Serialize a model into the container format.
pub fn model_to_bytes(model: &LogNetModel) -> Vec<u8> {
    let mut body = Vec::new();
    body.extend_from_slice(&MAGIC);
    write_u16(&mut body, FORMAT_VERSION).unwrap();
    body.push(method_tag(model.method));
    body.push(0);

    for v in [
        model.arch.n_input,
        model.arch.p_reservoir,
        model.arch.m_hidden,
        model.arch.n_classes,
    ] {
        write_u32(&mut body, v as u32).unwrap();
    }
    for v in [
        model.reservoir.generator.multiplier,
        model.reservoir.generator.increment,
        model.reservoir.generator.modulus,
        model.reservoir.generator.seed,
    ] {
        write_u64(&mut body, v).unwrap();
    }
    for label in &model.labels {
        write_str(&mut body, label).unwrap();
    }
    for &v in &model.norms.input_max {
        write_f32(&mut body, v as f32).unwrap();
    }
    for &(max, min, mean) in &model.norms.reservoir_stats {
        write_f32(&mut body, max as f32).unwrap();
        write_f32(&mut body, min as f32).unwrap();
        write_f32(&mut body, mean as f32).unwrap();
    }
    for row in model.readout.hidden.iter().chain(model.readout.output.iter()) {
        for &v in row {
            write_f32(&mut body, v as f32).unwrap();
        }
    }

    let crc = crc32fast::hash(&body);
    write_u32(&mut body, crc).unwrap();
    body
}

/// Parse a model from container bytes.
pub fn model_from_bytes(bytes: &[u8]) -> Result<LogNetModel, ModelFileError> {
    if bytes.len() < 4 {
        return Err(ModelFileError::Truncated);
    }
    if bytes[..4] != MAGIC {
        return Err(ModelFileError::BadMagic);
    }
    if bytes.len() < 10 {
        return Err(ModelFileError::Truncated);
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    let stored_crc = u32::from_le_bytes(tail.try_into().unwrap());

    let mut r = Cursor::new(&body[4..]);
    let version = read_u16(&mut r).map_err(map_eof)?;
    if version != FORMAT_VERSION {
        return Err(ModelFileError::UnsupportedVersion(version));
    }
    let method_byte = read_exact::<1>(&mut r).map_err(map_eof)?[0];
    let method = method_from_tag(method_byte)
        .ok_or_else(|| ModelFileError::Malformed(format!("unknown method tag {method_byte}")))?;
    let _pad = read_exact::<1>(&mut r).map_err(map_eof)?;

    let n = read_u32(&mut r).map_err(map_eof)?;
    let p = read_u32(&mut r).map_err(map_eof)?;
    let m = read_u32(&mut r).map_err(map_eof)?;
    let classes = read_u32(&mut r).map_err(map_eof)?;
    for (name, v) in [("N", n), ("P", p), ("M", m), ("classes", classes)] {
        if v == 0 || v > MAX_DIM {
            return Err(ModelFileError::Malformed(format!("bad {name} = {v}")));
        }
    }

    let generator = LcgParams {
        multiplier: read_u64(&mut r).map_err(map_eof)?,
        increment: read_u64(&mut r).map_err(map_eof)?,
        modulus: read_u64(&mut r).map_err(map_eof)?,
        seed: read_u64(&mut r).map_err(map_eof)?,
    };
    if generator.modulus == 0 {
        return Err(ModelFileError::Malformed("zero LCG modulus".into()));
    }

    let labels: Vec<String> = (0..classes)
        .map(|_| read_str(&mut r, 256).map_err(map_eof))
        .collect::<Result<_, _>>()?;

    let input_max: Vec<f64> = (0..n + 1)
        .map(|_| read_f32(&mut r).map(f64::from).map_err(map_eof))
        .collect::<Result<_, _>>()?;
    let reservoir_stats: Vec<(f64, f64, f64)> = (0..p)
        .map(|_| -> Result<_, ModelFileError> {
            let max = read_f32(&mut r).map_err(map_eof)?;
            let min = read_f32(&mut r).map_err(map_eof)?;
            let mean = read_f32(&mut r).map_err(map_eof)?;
            Ok((f64::from(max), f64::from(min), f64::from(mean)))
        })
        .collect::<Result<_, _>>()?;

    let read_matrix = |r: &mut Cursor<&[u8]>, rows: u32, cols: u32| -> Result<Vec<Vec<f64>>, ModelFileError> {
        (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|_| read_f32(r).map(f64::from).map_err(map_eof))
                    .collect()
            })
            .collect()
    };
    let hidden = read_matrix(&mut r, m, p + 1)?;
    let output = read_matrix(&mut r, classes, m + 1)?;

    if r.position() as usize != body.len() - 4 {
        return Err(ModelFileError::Malformed("trailing bytes".into()));
    }
    if crc32fast::hash(body) != stored_crc {
        return Err(ModelFileError::ChecksumMismatch);
    }

    let arch = LogNetArch {
        n_input: n as usize,
        p_reservoir: p as usize,
        m_hidden: m as usize,
        n_classes: classes as usize,
    };
    let reservoir = generate_reservoir(&arch, generator)
        .map_err(|e| ModelFileError::Malformed(e.to_string()))?;
    Ok(LogNetModel {
        arch,
        reservoir,
        norms: NormStats {
            input_max,
            reservoir_stats,
        },
        readout: ReadoutWeights { hidden, output },
        labels,
        method,
    })
}

/// Save a model, writing atomically (temp file + rename).
pub fn save_model(model: &LogNetModel, path: impl AsRef<Path>) -> Result<(), ModelFileError> {
    let path = path.as_ref();
    atomic_write(path, &model_to_bytes(model)).map_err(|source| ModelFileError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Load a model saved by [`save_model`].
pub fn load_model(path: impl AsRef<Path>) -> Result<LogNetModel, ModelFileError> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|source| ModelFileError::Io {
            path: path.display().to_string(),
            source,
        })?;
    model_from_bytes(&bytes)
}

fn map_eof(e: std::io::Error) -> ModelFileError {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        ModelFileError::Truncated
    } else {
        ModelFileError::Malformed(e.to_string())
    }
}

fn method_tag(m: AggregationMethod) -> u8 {
    match m {
        AggregationMethod::BasicStats => 0,
        AggregationMethod::TemporalDynamics => 1,
        AggregationMethod::WindowedStats => 2,
        AggregationMethod::AdaptiveBinning => 3,
    }
}

fn method_from_tag(tag: u8) -> Option<AggregationMethod> {
    match tag {
        0 => Some(AggregationMethod::BasicStats),
        1 => Some(AggregationMethod::TemporalDynamics),
        2 => Some(AggregationMethod::WindowedStats),
        3 => Some(AggregationMethod::AdaptiveBinning),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::FeatureVector;
    use crate::lognet::{fit_normalization, train_readout, TrainConfig};

    fn trained_model(n: usize, p: usize, m: usize) -> LogNetModel {
        let arch = LogNetArch::new(n, p, m);
        let reservoir = generate_reservoir(&arch, LcgParams::default()).unwrap();
        let mut state = 3u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 33) as f64 / (1u64 << 31) as f64 - 0.5
        };
        let features: Vec<FeatureVector> = (0..40)
            .map(|_| FeatureVector {
                values: (0..n).map(|_| next() * 2.0).collect(),
                method: AggregationMethod::AdaptiveBinning,
            })
            .collect();
        let labels: Vec<&str> = (0..40).map(|i| crate::lognet::LABELS[i % 4]).collect();
        let norms = fit_normalization(&reservoir, &features).unwrap();
        let model = LogNetModel::new(
            arch,
            LcgParams::default(),
            norms,
            AggregationMethod::AdaptiveBinning,
        )
        .unwrap();
        let cfg = TrainConfig {
            epochs: 5,
            ..TrainConfig::default()
        };
        train_readout(&model, &features, &labels, &cfg).unwrap().0
    }

    #[test]
    fn save_load_forward_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.bin");
        let model = trained_model(6, 5, 3);
        save_model(&model, &path).unwrap();
        let loaded = load_model(&path).unwrap();

        let mut state = 11u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 33) as f64 / (1u64 << 31) as f64 - 0.5
        };
        for _ in 0..100 {
            let f: Vec<f64> = (0..6).map(|_| next() * 3.0).collect();
            let a = model.forward(&f).unwrap();
            let b = loaded.forward(&f).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn save_load_save_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.bin");
        let model = trained_model(4, 3, 2);
        save_model(&model, &path).unwrap();
        let bytes1 = std::fs::read(&path).unwrap();
        let loaded = load_model(&path).unwrap();
        let bytes2 = model_to_bytes(&loaded);
        assert_eq!(bytes1, bytes2);
    }

    #[test]
    fn truncation_is_detected() {
        let model = trained_model(4, 3, 2);
        let bytes = model_to_bytes(&model);
        let truncated = &bytes[..bytes.len() - 1];
        match model_from_bytes(truncated) {
            Err(ModelFileError::Truncated) | Err(ModelFileError::ChecksumMismatch) => {}
            other => panic!("expected truncation error, got {other:?}"),
        }
        // Deep truncation in the payload region also reports truncated.
        assert!(matches!(
            model_from_bytes(&bytes[..40]),
            Err(ModelFileError::Truncated)
        ));
    }

    #[test]
    fn bad_magic_is_detected() {
        let model = trained_model(4, 3, 2);
        let mut bytes = model_to_bytes(&model);
        bytes[0] = b'X';
        assert!(matches!(
            model_from_bytes(&bytes),
            Err(ModelFileError::BadMagic)
        ));
    }

    #[test]
    fn bit_flip_fails_checksum() {
        let model = trained_model(4, 3, 2);
        let mut bytes = model_to_bytes(&model);
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        match model_from_bytes(&bytes) {
            Err(ModelFileError::ChecksumMismatch) | Err(ModelFileError::Malformed(_)) => {}
            other => panic!("expected corruption error, got {other:?}"),
        }
    }

    #[test]
    fn version_mismatch_is_detected() {
        let model = trained_model(4, 3, 2);
        let mut bytes = model_to_bytes(&model);
        bytes[4] = 9; // version low byte
        assert!(matches!(
            model_from_bytes(&bytes),
            Err(ModelFileError::UnsupportedVersion(9))
        ));
    }

    #[test]
    fn readout_payload_matches_shape_arithmetic() {
        // 64:33:9:4 carries 34x9 + 10x4 = 346 readout reals.
        let arch = LogNetArch::new(64, 33, 9);
        let reservoir = generate_reservoir(&arch, LcgParams::default()).unwrap();
        let norms = NormStats {
            input_max: vec![1.0; 65],
            reservoir_stats: vec![(1.0, -1.0, 0.0); 33],
        };
        let model = LogNetModel {
            arch,
            reservoir,
            norms,
            readout: ReadoutWeights::zeros(&arch),
            labels: crate::lognet::LABELS.iter().map(|s| s.to_string()).collect(),
            method: AggregationMethod::AdaptiveBinning,
        };
        let readout_reals = 9 * 34 + 4 * 10;
        assert_eq!(readout_reals, 346);
        let bytes = model_to_bytes(&model);
        let header = 4 + 2 + 2 + 16 + 32 + model.labels.iter().map(|l| 2 + l.len()).sum::<usize>();
        let norms_bytes = 65 * 4 + 33 * 3 * 4;
        assert_eq!(bytes.len(), header + norms_bytes + readout_reals * 4 + 4);
    }

    #[test]
    fn reservoir_is_regenerated_not_stored() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.bin");
        let model = trained_model(4, 3, 2);
        save_model(&model, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded.reservoir.w, model.reservoir.w);
        // File is far smaller than the full reservoir would require.
        let file_len = std::fs::metadata(&path).unwrap().len() as usize;
        assert!(file_len < 1000, "file is {file_len} bytes");
    }
}
