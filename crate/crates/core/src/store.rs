//! Ordered, persistent ciphertext store keyed by canonical tag bytes.
//!
//! Every searchable ciphertext is filed under the canonical encoding of its
//! first component. The index is a sorted array searched by binary search,
//! so a lookup among `n` records costs at most `ceil(log2 n) + 1` key
//! comparisons; the comparison meter makes that bound testable.
//!
//! # File format
//!
//! ```text
//! +--------------------------------------------------------------+
//! | magic "SPCHSDB1" | version | backend | reserved | record count|
//! +--------------------------------------------------------------+
//! \------------------/\--------/\--------/\---------/\-----------/
//!        8 bytes          u8        u8      2 bytes      u32
//! +-----------------------------------------------+
//! | tag | payload | structure label |   ... (xN)  |
//! +-----------------------------------------------+
//! ```
//!
//! All integers little-endian; the three record fields are `u32`
//! length-prefixed. Records appear in ordinal order and the file ends after
//! the last one; anything shorter or longer is rejected.

use std::cmp::Ordering;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use thiserror::Error;

use crate::wire::{put_bytes, put_u32, Reader, WireError};

pub const STORE_MAGIC: &[u8; 8] = b"SPCHSDB1";
pub const STORE_VERSION: u8 = 1;
/// Size of the fixed store header in bytes.
pub const STORE_HEADER_BYTES: usize = 16;

/// Which scheme produced the records of a store or key file.
///
/// Stores and key files carry this byte so that material from different
/// backends is never mixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendId {
    Scratch = 1,
    Generic = 2,
    Peks = 3,
}

impl BackendId {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            1 => Some(BackendId::Scratch),
            2 => Some(BackendId::Generic),
            3 => Some(BackendId::Peks),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BackendId::Scratch => "scratch",
            BackendId::Generic => "generic",
            BackendId::Peks => "peks",
        }
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("tag already present in store")]
    DuplicateTag,
    #[error("record tag must be nonempty")]
    EmptyTag,
    #[error("store holds too many records for the file format")]
    TooManyRecords,
    #[error("bad store file magic")]
    BadMagic,
    #[error("unsupported store format version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown backend byte {0}")]
    UnknownBackend(u8),
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One stored ciphertext: lookup tag, remaining components, and the public
/// head of the structure it was uploaded under (used only to label results).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub tag: Vec<u8>,
    pub payload: Vec<u8>,
    pub ordinal: u64,
    pub structure_label: Vec<u8>,
}

/// Append-only record sequence plus a sorted tag index.
#[derive(Debug)]
pub struct TagIndexedStore {
    backend: BackendId,
    records: Vec<Record>,
    /// Ordinals sorted by the tag bytes of the record they point at.
    index: Vec<u64>,
    comparisons: AtomicU64,
}

impl TagIndexedStore {
    pub fn new(backend: BackendId) -> Self {
        TagIndexedStore {
            backend,
            records: Vec::new(),
            index: Vec::new(),
            comparisons: AtomicU64::new(0),
        }
    }

    pub fn backend(&self) -> BackendId {
        self.backend
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Appends a record; the tag must be new.
    pub fn insert(
        &mut self,
        tag: Vec<u8>,
        payload: Vec<u8>,
        structure_label: Vec<u8>,
    ) -> Result<u64, StoreError> {
        if tag.is_empty() {
            return Err(StoreError::EmptyTag);
        }
        if self.records.len() >= u32::MAX as usize {
            return Err(StoreError::TooManyRecords);
        }
        let pos = self
            .index
            .partition_point(|&ord| self.records[ord as usize].tag[..] < tag[..]);
        if pos < self.index.len() && self.records[self.index[pos] as usize].tag == tag {
            return Err(StoreError::DuplicateTag);
        }
        let ordinal = self.records.len() as u64;
        self.records.push(Record {
            tag,
            payload,
            ordinal,
            structure_label,
        });
        self.index.insert(pos, ordinal);
        Ok(ordinal)
    }

    /// Exact-match lookup by tag; counts one comparison per probe.
    pub fn find_by_tag(&self, tag: &[u8]) -> Option<&Record> {
        let mut lo = 0usize;
        let mut hi = self.index.len();
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let record = &self.records[self.index[mid] as usize];
            self.comparisons.fetch_add(1, AtomicOrdering::Relaxed);
            match record.tag[..].cmp(tag) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(record),
            }
        }
        None
    }

    pub fn record(&self, ordinal: u64) -> Option<&Record> {
        self.records.get(ordinal as usize)
    }

    /// Records in ordinal (insertion) order.
    pub fn records(&self) -> impl Iterator<Item = &Record> {
        self.records.iter()
    }

    /// Distinct structure labels in first-appearance order.
    pub fn structure_labels(&self) -> Vec<Vec<u8>> {
        let mut seen = std::collections::HashSet::new();
        let mut labels = Vec::new();
        for record in &self.records {
            if seen.insert(record.structure_label.clone()) {
                labels.push(record.structure_label.clone());
            }
        }
        labels
    }

    /// Key comparisons spent by lookups since the last reset.
    pub fn comparisons(&self) -> u64 {
        self.comparisons.load(AtomicOrdering::Relaxed)
    }

    pub fn reset_comparisons(&self) {
        self.comparisons.store(0, AtomicOrdering::Relaxed);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(STORE_HEADER_BYTES);
        out.extend_from_slice(STORE_MAGIC);
        out.push(STORE_VERSION);
        out.push(self.backend as u8);
        out.extend_from_slice(&[0u8; 2]);
        put_u32(&mut out, self.records.len() as u32);
        for record in &self.records {
            put_bytes(&mut out, &record.tag);
            put_bytes(&mut out, &record.payload);
            put_bytes(&mut out, &record.structure_label);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, StoreError> {
        let mut reader = Reader::new(bytes);
        if reader.take(8)? != STORE_MAGIC {
            return Err(StoreError::BadMagic);
        }
        let version = reader.u8()?;
        if version != STORE_VERSION {
            return Err(StoreError::UnsupportedVersion(version));
        }
        let backend_byte = reader.u8()?;
        let backend =
            BackendId::from_byte(backend_byte).ok_or(StoreError::UnknownBackend(backend_byte))?;
        reader.take(2)?;
        let count = reader.u32()?;
        let mut store = TagIndexedStore::new(backend);
        for _ in 0..count {
            let tag = reader.bytes()?.to_vec();
            let payload = reader.bytes()?.to_vec();
            let label = reader.bytes()?.to_vec();
            store.insert(tag, payload, label)?;
        }
        reader.expect_end()?;
        Ok(store)
    }

    pub fn persist(&self, path: &Path) -> Result<(), StoreError> {
        Ok(std::fs::write(path, self.to_bytes())?)
    }

    pub fn load(path: &Path) -> Result<Self, StoreError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}
