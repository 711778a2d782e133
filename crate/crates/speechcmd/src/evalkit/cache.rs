//! On-disk feature cache.
//!
//! Features are extracted once per (clip, method, front-end config) and
//! reused by the analysis passes, which only retrain readouts. The file
//! is a little-endian binary container keyed by a fingerprint of the
//! producing configuration, with a trailing CRC32:
//!
//! ```text
//! magic        4 bytes "SCFC"
//! version      u16
//! method       u8, pad u8
//! config_hash  u64
//! dim          u32
//! count        u32
//! entries      count x { path str, speaker str, label u8, split u8,
//!                        fallback u8, dim x f64 }
//! crc32        u32
//! ```

use std::io::{Cursor, Read};
use std::path::Path;

use thiserror::Error;

use crate::aggregate::AggregationMethod;
use crate::bytesio::*;
use crate::evalkit::index::Split;
use crate::evalkit::pipeline::{ExtractedFeatures, FeatureEntry};

const MAGIC: [u8; 4] = *b"SCFC";
const FORMAT_VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("bad magic bytes; not a feature cache")]
    BadMagic,
    #[error("unsupported cache version {0}")]
    UnsupportedVersion(u16),
    #[error("cache file is truncated")]
    Truncated,
    #[error("cache checksum mismatch; file is corrupt")]
    ChecksumMismatch,
    #[error("malformed cache: {0}")]
    Malformed(String),
}

pub fn features_to_bytes(features: &ExtractedFeatures) -> Vec<u8> {
    let mut body = Vec::new();
    body.extend_from_slice(&MAGIC);
    write_u16(&mut body, FORMAT_VERSION).unwrap();
    body.push(match features.method {
        AggregationMethod::BasicStats => 0,
        AggregationMethod::TemporalDynamics => 1,
        AggregationMethod::WindowedStats => 2,
        AggregationMethod::AdaptiveBinning => 3,
    });
    body.push(0);
    write_u64(&mut body, features.config_hash).unwrap();
    write_u32(&mut body, features.dim() as u32).unwrap();
    write_u32(&mut body, features.entries.len() as u32).unwrap();
    for e in &features.entries {
        write_str(&mut body, &e.path).unwrap();
        write_str(&mut body, &e.speaker_id).unwrap();
        body.push(e.label as u8);
        body.push(match e.split {
            Split::Train => 0,
            Split::Test => 1,
        });
        body.push(u8::from(e.fallback));
        for &v in &e.values {
            write_f64(&mut body, v).unwrap();
        }
    }
    let crc = crc32fast::hash(&body);
    write_u32(&mut body, crc).unwrap();
    body
}

pub fn features_from_bytes(bytes: &[u8]) -> Result<ExtractedFeatures, CacheError> {
    if bytes.len() < 4 {
        return Err(CacheError::Truncated);
    }
    if bytes[..4] != MAGIC {
        return Err(CacheError::BadMagic);
    }
    if bytes.len() < 28 {
        return Err(CacheError::Truncated);
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    let stored_crc = u32::from_le_bytes(tail.try_into().unwrap());
    if crc32fast::hash(body) != stored_crc {
        return Err(CacheError::ChecksumMismatch);
    }

    let mut r = Cursor::new(&body[4..]);
    let version = read_u16(&mut r).map_err(map_eof)?;
    if version != FORMAT_VERSION {
        return Err(CacheError::UnsupportedVersion(version));
    }
    let method = match read_exact::<1>(&mut r).map_err(map_eof)?[0] {
        0 => AggregationMethod::BasicStats,
        1 => AggregationMethod::TemporalDynamics,
        2 => AggregationMethod::WindowedStats,
        3 => AggregationMethod::AdaptiveBinning,
        t => return Err(CacheError::Malformed(format!("unknown method tag {t}"))),
    };
    let _pad = read_exact::<1>(&mut r).map_err(map_eof)?;
    let config_hash = read_u64(&mut r).map_err(map_eof)?;
    let dim = read_u32(&mut r).map_err(map_eof)? as usize;
    if dim == 0 || dim > 1 << 20 {
        return Err(CacheError::Malformed(format!("implausible dim {dim}")));
    }
    let count = read_u32(&mut r).map_err(map_eof)? as usize;

    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let path = read_str(&mut r, 4096).map_err(map_eof)?;
        let speaker_id = read_str(&mut r, 256).map_err(map_eof)?;
        let label = read_exact::<1>(&mut r).map_err(map_eof)?[0] as usize;
        if label >= 4 {
            return Err(CacheError::Malformed(format!("label index {label}")));
        }
        let split = match read_exact::<1>(&mut r).map_err(map_eof)?[0] {
            0 => Split::Train,
            1 => Split::Test,
            s => return Err(CacheError::Malformed(format!("split tag {s}"))),
        };
        let fallback = read_exact::<1>(&mut r).map_err(map_eof)?[0] != 0;
        let values: Vec<f64> = (0..dim)
            .map(|_| read_f64(&mut r).map_err(map_eof))
            .collect::<Result<_, _>>()?;
        entries.push(FeatureEntry {
            path,
            label,
            speaker_id,
            split,
            fallback,
            values,
        });
    }
    if r.position() as usize != body.len() - 4 {
        return Err(CacheError::Malformed("trailing bytes".into()));
    }

    Ok(ExtractedFeatures {
        method,
        config_hash,
        entries,
    })
}

/// Write a feature cache atomically.
pub fn save_features(
    features: &ExtractedFeatures,
    path: impl AsRef<Path>,
) -> Result<(), CacheError> {
    let path = path.as_ref();
    atomic_write(path, &features_to_bytes(features)).map_err(|source| CacheError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Load a cache written by [`save_features`].
pub fn load_features(path: impl AsRef<Path>) -> Result<ExtractedFeatures, CacheError> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|source| CacheError::Io {
            path: path.display().to_string(),
            source,
        })?;
    features_from_bytes(&bytes)
}

fn map_eof(e: std::io::Error) -> CacheError {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        CacheError::Truncated
    } else {
        CacheError::Malformed(e.to_string())
    }
}
