//! Dataset indexing and train/test splitting.
//!
//! The dataset root follows the Speech Commands layout: one folder per
//! word, WAV files named `<speakerhash>_nohash_<n>.wav`. Only the four
//! command folders are indexed. Two split modes exist: a seeded random
//! 80/20 shuffle, and a speaker-independent assignment where a stable
//! hash sends each speaker wholly to train or test.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::evalkit::EvalError;
use crate::lognet::LABELS;
use crate::rng::SeededRng;

/// One of the four commands, by index into [`LABELS`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CommandLabel(pub usize);

impl CommandLabel {
    pub fn name(&self) -> &'static str {
        LABELS[self.0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    Random8020,
    SpeakerIndependent,
}

impl SplitMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "random" | "random-80-20" | "random_80_20" => Some(SplitMode::Random8020),
            "speaker-independent" | "speaker_independent" | "si" => {
                Some(SplitMode::SpeakerIndependent)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexEntry {
    pub path: PathBuf,
    pub label: CommandLabel,
    pub speaker_id: String,
    pub split: Split,
}

#[derive(Debug, Clone)]
pub struct DatasetIndex {
    pub entries: Vec<IndexEntry>,
    /// Clip count per class, in label order.
    pub class_counts: [usize; 4],
}

impl DatasetIndex {
    pub fn train(&self) -> impl Iterator<Item = &IndexEntry> {
        self.entries.iter().filter(|e| e.split == Split::Train)
    }

    pub fn test(&self) -> impl Iterator<Item = &IndexEntry> {
        self.entries.iter().filter(|e| e.split == Split::Test)
    }

    pub fn train_count(&self) -> usize {
        self.train().count()
    }

    pub fn test_count(&self) -> usize {
        self.test().count()
    }
}

/// Stable 32-bit FNV-1a.
pub(crate) fn fnv1a_32(bytes: &[u8]) -> u32 {
    let mut hash: u32 = 2166136261;
    for &b in bytes {
        hash ^= u32::from(b);
        hash = hash.wrapping_mul(16777619);
    }
    hash
}

/// Speakers hashing below this percentile go to the test split.
const SI_TEST_PERCENT: u32 = 20;

/// Scan the four command folders and assign splits.
///
/// Random mode shuffles all entries with the seed and sends the first
/// `round(0.8 n)` to train. Speaker-independent mode assigns each speaker
/// wholly to train or test via `fnv1a(speaker) % 100 < 20`, independent
/// of the seed, so the split is stable across runs and machines.
pub fn build_index(
    root: impl AsRef<Path>,
    mode: SplitMode,
    seed: u64,
) -> Result<DatasetIndex, EvalError> {
    let root = root.as_ref();
    let mut entries = Vec::new();
    let mut class_counts = [0usize; 4];

    for (label_idx, &label) in LABELS.iter().enumerate() {
        let dir = root.join(label);
        if !dir.is_dir() {
            return Err(EvalError::MissingFolder {
                root: root.display().to_string(),
                label: label.to_string(),
            });
        }
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| {
                p.extension()
                    .map(|x| x.eq_ignore_ascii_case("wav"))
                    .unwrap_or(false)
            })
            .collect();
        files.sort();

        for path in files {
            let file_name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let speaker_id = file_name
                .split('_')
                .next()
                .filter(|s| !s.is_empty())
                .ok_or_else(|| EvalError::BadFilename(file_name.clone()))?
                .to_string();
            class_counts[label_idx] += 1;
            entries.push(IndexEntry {
                path,
                label: CommandLabel(label_idx),
                speaker_id,
                split: Split::Train,
            });
        }
    }

    match mode {
        SplitMode::Random8020 => {
            let mut order: Vec<usize> = (0..entries.len()).collect();
            SeededRng::derive(seed, 0x5370_6c69).shuffle(&mut order);
            let train_len = (entries.len() as f64 * 0.8).round() as usize;
            for (rank, &i) in order.iter().enumerate() {
                entries[i].split = if rank < train_len {
                    Split::Train
                } else {
                    Split::Test
                };
            }
        }
        SplitMode::SpeakerIndependent => {
            for e in &mut entries {
                let bucket = fnv1a_32(e.speaker_id.as_bytes()) % 100;
                e.split = if bucket < SI_TEST_PERCENT {
                    Split::Test
                } else {
                    Split::Train
                };
            }
        }
    }

    Ok(DatasetIndex {
        entries,
        class_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Lay out a toy Speech Commands tree; speakers x labels x takes.
    fn toy_tree(speakers: &[&str], takes: usize) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        for label in LABELS {
            let sub = dir.path().join(label);
            std::fs::create_dir(&sub).unwrap();
            for sp in speakers {
                for t in 0..takes {
                    std::fs::write(sub.join(format!("{sp}_nohash_{t}.wav")), b"stub").unwrap();
                }
            }
        }
        dir
    }

    #[test]
    fn missing_folder_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("go")).unwrap();
        let err = build_index(dir.path(), SplitMode::Random8020, 1).unwrap_err();
        assert!(matches!(err, EvalError::MissingFolder { .. }));
    }

    #[test]
    fn counts_and_entries() {
        let dir = toy_tree(&["alpha", "beta", "gamma"], 2);
        let index = build_index(dir.path(), SplitMode::Random8020, 1).unwrap();
        assert_eq!(index.entries.len(), 4 * 3 * 2);
        assert_eq!(index.class_counts, [6, 6, 6, 6]);
    }

    #[test]
    fn random_split_ratio_is_80_20() {
        let speakers: Vec<String> = (0..25).map(|i| format!("spk{i:02}")).collect();
        let refs: Vec<&str> = speakers.iter().map(|s| s.as_str()).collect();
        let dir = toy_tree(&refs, 1);
        let index = build_index(dir.path(), SplitMode::Random8020, 7).unwrap();
        let n = index.entries.len();
        assert_eq!(index.train_count(), (n as f64 * 0.8).round() as usize);
        assert_eq!(index.test_count(), n - index.train_count());
    }

    #[test]
    fn same_seed_same_split() {
        let dir = toy_tree(&["a", "b", "c", "d", "e"], 2);
        let one = build_index(dir.path(), SplitMode::Random8020, 42).unwrap();
        let two = build_index(dir.path(), SplitMode::Random8020, 42).unwrap();
        for (x, y) in one.entries.iter().zip(&two.entries) {
            assert_eq!(x.split, y.split);
            assert_eq!(x.path, y.path);
        }
        let three = build_index(dir.path(), SplitMode::Random8020, 43).unwrap();
        let differs = one
            .entries
            .iter()
            .zip(&three.entries)
            .any(|(x, y)| x.split != y.split);
        assert!(differs, "different seeds should shuffle differently");
    }

    #[test]
    fn speaker_independent_split_is_disjoint() {
        let speakers: Vec<String> = (0..40).map(|i| format!("h{i:03}x")).collect();
        let refs: Vec<&str> = speakers.iter().map(|s| s.as_str()).collect();
        let dir = toy_tree(&refs, 3);
        let index = build_index(dir.path(), SplitMode::SpeakerIndependent, 0).unwrap();
        let train: HashSet<&str> = index.train().map(|e| e.speaker_id.as_str()).collect();
        let test: HashSet<&str> = index.test().map(|e| e.speaker_id.as_str()).collect();
        assert!(train.is_disjoint(&test));
        assert!(!test.is_empty(), "some speakers should land in test");
    }

    #[test]
    fn unparsable_filename_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        for label in LABELS {
            let sub = dir.path().join(label);
            std::fs::create_dir(&sub).unwrap();
            std::fs::write(sub.join("ok_nohash_0.wav"), b"stub").unwrap();
        }
        std::fs::write(dir.path().join("go").join("_bad.wav"), b"stub").unwrap();
        let err = build_index(dir.path(), SplitMode::Random8020, 1).unwrap_err();
        assert!(matches!(err, EvalError::BadFilename(_)));
    }

    #[test]
    fn fnv1a_reference_values() {
        // Well-known FNV-1a test vectors.
        assert_eq!(fnv1a_32(b""), 0x811c9dc5);
        assert_eq!(fnv1a_32(b"a"), 0xe40c292c);
        assert_eq!(fnv1a_32(b"foobar"), 0xbf9cf968);
    }

    #[test]
    fn non_wav_files_are_ignored() {
        let dir = toy_tree(&["solo"], 1);
        std::fs::write(dir.path().join("go").join("notes.txt"), b"x").unwrap();
        let index = build_index(dir.path(), SplitMode::Random8020, 1).unwrap();
        assert_eq!(index.entries.len(), 4);
    }
}
