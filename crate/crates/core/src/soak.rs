//! Long single-trajectory runs with atomic, resumable checkpoints.
//!
//! A checkpoint holds the system, the step index, the word and its rolling
//! hash. It is written to a temporary file next to the target and renamed
//! over it, so a reader sees either the previous or the new checkpoint.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hash::RollingHash;
use crate::system::{ParseError, TagSystem};
use crate::word::Word;

pub const DEFAULT_CHECKPOINT_EVERY: u64 = 1_000_000_000;

/// `(100)^110`, the classic starting word for Post's system.
pub fn post_soak_word() -> Word {
    Word::repeat(&[1, 0, 0], 110)
}

#[derive(Debug, Error)]
pub enum SoakError {
    #[error("checkpoint interval must be positive")]
    ZeroInterval,
    #[error("checkpoint {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("checkpoint {path} is malformed: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("checkpoint was written for a different system")]
    SystemMismatch,
    #[error("checkpoint hash does not match its word (stored {stored:#018x}, computed {computed:#018x})")]
    HashMismatch { stored: u64, computed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub system: String,
    pub step: u64,
    pub length: usize,
    pub hash: RollingHash,
    pub word: String,
}

impl Checkpoint {
    pub fn capture(system: &TagSystem, step: u64, word: &Word) -> Self {
        Self {
            system: system.to_string(),
            step,
            length: word.len(),
            hash: RollingHash::of_word(word),
            word: system.format_word(word),
        }
    }

    /// Parses the word back and checks it against the stored hash.
    pub fn restore(&self, system: &TagSystem) -> Result<Word, SoakError> {
        if self.system != system.to_string() {
            return Err(SoakError::SystemMismatch);
        }
        let word = system
            .parse_word(&self.word)
            .map_err(|e: ParseError| SoakError::Malformed {
                path: PathBuf::new(),
                message: e.to_string(),
            })?;
        let computed = RollingHash::of_word(&word);
        if computed != self.hash || word.len() != self.length {
            return Err(SoakError::HashMismatch {
                stored: self.hash.value(),
                computed: computed.value(),
            });
        }
        Ok(word)
    }

    pub fn load(path: &Path) -> Result<Self, SoakError> {
        let text = fs::read_to_string(path).map_err(|source| SoakError::Io {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| SoakError::Malformed {
            path: path.to_owned(),
            message: e.to_string(),
        })
    }

    pub fn save_atomic(&self, path: &Path) -> Result<(), SoakError> {
        let io = |source| SoakError::Io {
            path: path.to_owned(),
            source,
        };
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        let mut f = fs::File::create(&tmp).map_err(io)?;
        serde_json::to_writer(&mut f, self).map_err(|e| io(e.into()))?;
        f.write_all(b"\n").map_err(io)?;
        f.sync_all().map_err(io)?;
        fs::rename(&tmp, path).map_err(io)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoakConfig {
    /// Stop once this step index is reached.
    pub target_step: u64,
    pub checkpoint_every: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoakSummary {
    pub start_step: u64,
    pub step: u64,
    pub halted: bool,
    pub length: usize,
    pub max_length: usize,
    pub hash: RollingHash,
    pub checkpoints_written: u64,
}

/// Runs `system` from `initial`, or from the checkpoint at `path` when one
/// exists and `resume` is set, until `target_step` or a halt. A checkpoint is
/// written at every multiple of `checkpoint_every` and at the end.
pub fn soak(
    system: &TagSystem,
    initial: &Word,
    path: &Path,
    config: SoakConfig,
    resume: bool,
) -> Result<SoakSummary, SoakError> {
    if config.checkpoint_every == 0 {
        return Err(SoakError::ZeroInterval);
    }
    let (mut step, mut word) = if resume && path.exists() {
        let cp = Checkpoint::load(path)?;
        let word = cp.restore(system).map_err(|e| match e {
            SoakError::Malformed { message, .. } => SoakError::Malformed {
                path: path.to_owned(),
                message,
            },
            other => other,
        })?;
        (cp.step, word)
    } else {
        (0, initial.clone())
    };
    let start_step = step;
    let mut max_length = word.len();
    let mut written = 0;
    let mut halted = false;
    while step < config.target_step {
        let next_checkpoint = (step / config.checkpoint_every + 1) * config.checkpoint_every;
        let stop = next_checkpoint.min(config.target_step);
        while step < stop {
            if !system.step_in_place(&mut word) {
                halted = true;
                break;
            }
            step += 1;
            max_length = max_length.max(word.len());
        }
        if halted {
            break;
        }
        if step % config.checkpoint_every == 0 && step < config.target_step {
            Checkpoint::capture(system, step, &word).save_atomic(path)?;
            written += 1;
        }
    }
    Checkpoint::capture(system, step, &word).save_atomic(path)?;
    written += 1;
    Ok(SoakSummary {
        start_step,
        step,
        halted,
        length: word.len(),
        max_length,
        hash: RollingHash::of_word(&word),
        checkpoints_written: written,
    })
}
