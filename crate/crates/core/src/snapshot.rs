//! Versioned single-file snapshots.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic    8 bytes  "XPRTSNAP"
//! version  u32      FORMAT_VERSION
//! kind     4 bytes  e.g. "PIDX" for a paper-term index
//! blocks   u32      number of blocks
//! then per block:
//!   tag    4 bytes  e.g. "STAT", "POST"
//!   len    u64      payload length
//!   data   len bytes, UTF-8 JSON
//! ```
//!
//! Payloads are serialized from ordered maps only, so identical inputs give
//! byte-identical files.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"XPRTSNAP";
pub const FORMAT_VERSION: u32 = 1;

pub type Tag = [u8; 4];

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot io: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a snapshot file (bad magic)")]
    BadMagic,
    #[error("snapshot format version {found}, expected {expected}")]
    Version { found: u32, expected: u32 },
    #[error("snapshot holds `{found}`, expected `{expected}`")]
    Kind { found: String, expected: String },
    #[error("snapshot is missing block `{0}`")]
    MissingBlock(String),
    #[error("snapshot truncated")]
    Truncated,
    #[error("snapshot payload: {0}")]
    Payload(#[from] serde_json::Error),
    #[error("snapshot content invalid: {0}")]
    Invalid(String),
}

fn tag_str(t: &Tag) -> String {
    String::from_utf8_lossy(t).into_owned()
}

/// Accumulates blocks, then writes them in insertion order.
pub struct SnapshotWriter {
    kind: Tag,
    blocks: Vec<(Tag, Vec<u8>)>,
}

impl SnapshotWriter {
    pub fn new(kind: Tag) -> Self {
        SnapshotWriter { kind, blocks: Vec::new() }
    }

    pub fn block<T: Serialize + ?Sized>(mut self, tag: Tag, value: &T) -> Result<Self, SnapshotError> {
        self.blocks.push((tag, serde_json::to_vec(value)?));
        Ok(self)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&self.kind);
        out.extend_from_slice(&(self.blocks.len() as u32).to_le_bytes());
        for (tag, data) in &self.blocks {
            out.extend_from_slice(tag);
            out.extend_from_slice(&(data.len() as u64).to_le_bytes());
            out.extend_from_slice(data);
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), SnapshotError> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        f.sync_all()?;
        Ok(())
    }
}

pub struct SnapshotReader {
    blocks: Vec<(Tag, Vec<u8>)>,
}

fn take<'a>(buf: &mut &'a [u8], n: usize) -> Result<&'a [u8], SnapshotError> {
    if buf.len() < n {
        return Err(SnapshotError::Truncated);
    }
    let (head, rest) = buf.split_at(n);
    *buf = rest;
    Ok(head)
}

impl SnapshotReader {
    pub fn from_bytes(bytes: &[u8], kind: Tag) -> Result<Self, SnapshotError> {
        let mut buf = bytes;
        if take(&mut buf, 8).map_err(|_| SnapshotError::BadMagic)? != MAGIC {
            return Err(SnapshotError::BadMagic);
        }
        let version = u32::from_le_bytes(take(&mut buf, 4)?.try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(SnapshotError::Version { found: version, expected: FORMAT_VERSION });
        }
        let found: Tag = take(&mut buf, 4)?.try_into().unwrap();
        if found != kind {
            return Err(SnapshotError::Kind { found: tag_str(&found), expected: tag_str(&kind) });
        }
        let count = u32::from_le_bytes(take(&mut buf, 4)?.try_into().unwrap());
        let mut blocks = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let tag: Tag = take(&mut buf, 4)?.try_into().unwrap();
            let len = u64::from_le_bytes(take(&mut buf, 8)?.try_into().unwrap()) as usize;
            blocks.push((tag, take(&mut buf, len)?.to_vec()));
        }
        Ok(SnapshotReader { blocks })
    }

    pub fn open(path: &Path, kind: Tag) -> Result<Self, SnapshotError> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes, kind)
    }

    pub fn block<T: DeserializeOwned>(&self, tag: Tag) -> Result<T, SnapshotError> {
        let (_, data) = self
            .blocks
            .iter()
            .find(|(t, _)| *t == tag)
            .ok_or_else(|| SnapshotError::MissingBlock(tag_str(&tag)))?;
        Ok(serde_json::from_slice(data)?)
    }
}

/// Types persisted as a snapshot of their own.
pub trait Snapshot: Sized {
    const KIND: Tag;

    fn to_writer(&self) -> Result<SnapshotWriter, SnapshotError>;
    fn from_reader(r: &SnapshotReader) -> Result<Self, SnapshotError>;

    fn save(&self, path: &Path) -> Result<(), SnapshotError> {
        self.to_writer()?.write(path)
    }

    fn to_bytes(&self) -> Result<Vec<u8>, SnapshotError> {
        Ok(self.to_writer()?.to_bytes())
    }

    fn load(path: &Path) -> Result<Self, SnapshotError> {
        Self::from_reader(&SnapshotReader::open(path, Self::KIND)?)
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self, SnapshotError> {
        Self::from_reader(&SnapshotReader::from_bytes(bytes, Self::KIND)?)
    }
}
