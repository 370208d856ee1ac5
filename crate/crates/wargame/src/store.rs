//! Append-only game record store: one JSON line per finished game.
//!
//! The store is the experiment's crash-safety mechanism. Completed games are
//! appended and flushed immediately; on restart the experiment reloads the
//! file, keeps every intact line, and skips the games already present. A
//! truncated final line (torn write from a crash) is tolerated and reported;
//! corruption anywhere else is a hard error rather than silent data loss.

use crate::session::GameRecord;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("record store i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt record on line {line}: {message}")]
    CorruptRecord { line: usize, message: String },
    #[error("duplicate record for game {0:?}")]
    DuplicateGame(String),
}

/// Outcome of loading a store file.
#[derive(Debug)]
pub struct LoadedStore {
    pub records: Vec<GameRecord>,
    /// Set when the final line was torn and dropped.
    pub truncated_tail: bool,
    /// Length of the intact prefix; bytes past this are the torn tail.
    pub valid_len: u64,
}

/// Append-only JSONL store keyed by game key.
#[derive(Debug)]
pub struct RecordStore {
    path: PathBuf,
    file: std::fs::File,
    keys: BTreeMap<String, usize>,
    records: Vec<GameRecord>,
    truncated_tail: bool,
}

impl RecordStore {
    /// Opens (or creates) a store, loading every intact record.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        let loaded = if path.exists() {
            Self::load(&path)?
        } else {
            LoadedStore { records: Vec::new(), truncated_tail: false, valid_len: 0 }
        };
        // Drop the torn tail from the file so future loads see only intact
        // lines; nothing before the tear is ever touched.
        if loaded.truncated_tail {
            let trunc = std::fs::OpenOptions::new().write(true).open(&path)?;
            trunc.set_len(loaded.valid_len)?;
        }
        let file = std::fs::OpenOptions::new().create(true).append(true).open(&path)?;
        let mut keys = BTreeMap::new();
        for (i, r) in loaded.records.iter().enumerate() {
            if keys.insert(r.game_key.clone(), i).is_some() {
                return Err(StoreError::DuplicateGame(r.game_key.clone()));
            }
        }
        Ok(RecordStore {
            path,
            file,
            keys,
            records: loaded.records,
            truncated_tail: loaded.truncated_tail,
        })
    }

    /// Parses a store file without opening it for writing.
    pub fn load(path: impl AsRef<Path>) -> Result<LoadedStore, StoreError> {
        let content = std::fs::read_to_string(path)?;
        let mut records = Vec::new();
        let mut truncated_tail = false;
        let mut valid_len = 0u64;
        let mut offset = 0usize;
        for (i, chunk) in content.split_inclusive('\n').enumerate() {
            let terminated = chunk.ends_with('\n');
            let line = chunk.trim_end_matches('\n');
            offset += chunk.len();
            if line.trim().is_empty() {
                valid_len = offset as u64;
                continue;
            }
            match serde_json::from_str::<GameRecord>(line) {
                Ok(r) => {
                    records.push(r);
                    valid_len = offset as u64;
                }
                Err(e) => {
                    // Only an unterminated final line may be dropped.
                    if !terminated && offset == content.len() && e.is_eof() {
                        truncated_tail = true;
                    } else {
                        return Err(StoreError::CorruptRecord {
                            line: i + 1,
                            message: e.to_string(),
                        });
                    }
                }
            }
        }
        Ok(LoadedStore { records, truncated_tail, valid_len })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn truncated_tail_on_open(&self) -> bool {
        self.truncated_tail
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn contains(&self, game_key: &str) -> bool {
        self.keys.contains_key(game_key)
    }

    pub fn get(&self, game_key: &str) -> Option<&GameRecord> {
        self.keys.get(game_key).map(|&i| &self.records[i])
    }

    pub fn records(&self) -> &[GameRecord] {
        &self.records
    }

    /// Appends one record and flushes it to disk before returning.
    pub fn append(&mut self, record: GameRecord) -> Result<(), StoreError> {
        if self.contains(&record.game_key) {
            return Err(StoreError::DuplicateGame(record.game_key));
        }
        let mut line = serde_json::to_string(&record)
            .map_err(|e| StoreError::CorruptRecord { line: 0, message: e.to_string() })?;
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.flush()?;
        self.keys.insert(record.game_key.clone(), self.records.len());
        self.records.push(record);
        Ok(())
    }
}
