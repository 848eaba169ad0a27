//! Archive container.
//!
//! ```text
//! header (56 B) | params record | block payloads | dictionary record | block table | manifest?
//! ```
//!
//! The header is `"RLZA"`, `u16` version, `u8` scheme id, `u8 log2(block
//! size)`, then `u64` source length, block count, dictionary record offset,
//! table offset, manifest offset (0 when absent), and an FNV-1a checksum of
//! the preceding 48 bytes. All integers are little-endian.
//!
//! The params record holds the scheme parameters: `u32` record length, `u8`
//! offset width, `u32` min_literal, and the two integer primes, each as `u32`
//! raw length, `u32` stored length, DEFLATE bytes.
//!
//! The dictionary record is `u32` sample size, `u64` length, DEFLATE of the
//! dictionary. The table is DEFLATE of `(u64 offset, u32 length)` pairs; the
//! manifest is `u64` count then `(u32 id length, id, u64 start, u64 length)`.

mod manifest;
mod params;
mod reader;
mod stats;
mod writer;

use std::hash::Hasher;

use fnv::FnvHasher;

pub use manifest::{Manifest, ManifestEntry};
pub use reader::{ArchiveReader, ByteSource};
pub use stats::ArchiveStats;
pub use writer::{ArchiveWriter, WriteSummary};

use crate::codecs::SchemeId;
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"RLZA";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 56;
const CHECKED_LEN: usize = 48;

pub const MIN_BLOCK_SIZE: u32 = 4 * 1024;
pub const MAX_BLOCK_SIZE: u32 = 1 << 30;
/// Bytes per table entry once loaded.
pub const TABLE_ENTRY_BYTES: usize = 12;

/// Checks that `block_size` is a power of two in the supported range.
pub fn check_block_size(block_size: u64) -> Result<u32> {
    if !block_size.is_power_of_two() || !(MIN_BLOCK_SIZE as u64..=MAX_BLOCK_SIZE as u64).contains(&block_size) {
        return Err(Error::param(format!(
            "block size {block_size} must be a power of two between {MIN_BLOCK_SIZE} and {MAX_BLOCK_SIZE}"
        )));
    }
    Ok(block_size as u32)
}

pub fn block_count(source_length: u64, block_size: u32) -> u64 {
    source_length.div_ceil(block_size as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArchiveHeader {
    pub version: u16,
    pub scheme: SchemeId,
    pub log2_block_size: u8,
    pub source_length: u64,
    pub block_count: u64,
    pub dict_offset: u64,
    pub table_offset: u64,
    /// Zero when the archive has no manifest.
    pub manifest_offset: u64,
}

impl ArchiveHeader {
    pub fn block_size(&self) -> u32 {
        1 << self.log2_block_size
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(&MAGIC);
        b[4..6].copy_from_slice(&self.version.to_le_bytes());
        b[6] = self.scheme as u8;
        b[7] = self.log2_block_size;
        let fields = [
            self.source_length,
            self.block_count,
            self.dict_offset,
            self.table_offset,
            self.manifest_offset,
        ];
        for (i, f) in fields.iter().enumerate() {
            b[8 + 8 * i..16 + 8 * i].copy_from_slice(&f.to_le_bytes());
        }
        let sum = checksum(&b[..CHECKED_LEN]);
        b[CHECKED_LEN..].copy_from_slice(&sum.to_le_bytes());
        b
    }

    /// Parses and checks a header. Offsets are checked against the file by
    /// the reader.
    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        if b.len() < HEADER_LEN {
            if b.len() >= 4 && b[..4] != MAGIC {
                return Err(Error::BadMagic);
            }
            return Err(Error::corrupt(format!("{}-byte file is shorter than the header", b.len())));
        }
        if b[..4] != MAGIC {
            return Err(Error::BadMagic);
        }
        let version = u16::from_le_bytes([b[4], b[5]]);
        if version != VERSION {
            return Err(Error::Version(version));
        }
        let stored = u64::from_le_bytes(b[CHECKED_LEN..HEADER_LEN].try_into().unwrap());
        if stored != checksum(&b[..CHECKED_LEN]) {
            return Err(Error::Checksum);
        }
        let scheme = SchemeId::from_u8(b[6]).ok_or_else(|| Error::corrupt(format!("unknown scheme id {}", b[6])))?;
        let log2_block_size = b[7];
        if log2_block_size >= 32 || check_block_size(1u64 << log2_block_size).is_err() {
            return Err(Error::corrupt(format!("block size 2^{log2_block_size} out of range")));
        }
        let field = |i: usize| u64::from_le_bytes(b[8 + 8 * i..16 + 8 * i].try_into().unwrap());
        let h = ArchiveHeader {
            version,
            scheme,
            log2_block_size,
            source_length: field(0),
            block_count: field(1),
            dict_offset: field(2),
            table_offset: field(3),
            manifest_offset: field(4),
        };
        if h.block_count != block_count(h.source_length, h.block_size()) {
            return Err(Error::corrupt(format!(
                "{} blocks cannot hold {} bytes in {}-byte blocks",
                h.block_count,
                h.source_length,
                h.block_size()
            )));
        }
        Ok(h)
    }

    /// Length of block `i` (the last block may be short).
    pub fn block_len(&self, i: u64) -> u32 {
        let bs = self.block_size() as u64;
        (self.source_length - i * bs).min(bs) as u32
    }

    pub fn locate(&self, start: u64, len: u64) -> Result<BlockSpan> {
        locate_blocks(self.block_size(), self.source_length, start, len)
    }
}

fn checksum(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

/// Blocks touched by a byte range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockSpan {
    pub first_block: u64,
    pub last_block: u64,
    pub offset_in_first: u32,
}

impl BlockSpan {
    pub fn block_count(&self) -> u64 {
        self.last_block - self.first_block + 1
    }
}

pub fn locate_blocks(block_size: u32, source_length: u64, start: u64, len: u64) -> Result<BlockSpan> {
    let end = start.checked_add(len);
    if len == 0 || end.is_none_or(|e| e > source_length) {
        return Err(Error::OutOfBounds {
            start,
            len,
            total: source_length,
        });
    }
    let bs = block_size as u64;
    Ok(BlockSpan {
        first_block: start / bs,
        last_block: (start + len - 1) / bs,
        offset_in_first: (start % bs) as u32,
    })
}

/// Block offset table: where each payload sits in the file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BlockTable {
    offsets: Vec<u64>,
    lengths: Vec<u32>,
}

impl BlockTable {
    pub fn with_capacity(n: usize) -> Self {
        BlockTable {
            offsets: Vec::with_capacity(n),
            lengths: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, offset: u64, length: u32) {
        self.offsets.push(offset);
        self.lengths.push(length);
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// `(file offset, payload length)` of block `i`.
    pub fn entry(&self, i: usize) -> (u64, u32) {
        (self.offsets[i], self.lengths[i])
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.offsets.iter().copied().zip(self.lengths.iter().copied())
    }

    pub fn payload_bytes(&self) -> u64 {
        self.lengths.iter().map(|&l| l as u64).sum()
    }

    /// Memory held by the loaded table.
    pub fn heap_bytes(&self) -> u64 {
        (self.len() * TABLE_ENTRY_BYTES) as u64
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len() * TABLE_ENTRY_BYTES);
        for (o, l) in self.entries() {
            out.extend_from_slice(&o.to_le_bytes());
            out.extend_from_slice(&l.to_le_bytes());
        }
        out
    }

    /// Parses raw entries and checks that payloads are in order, do not
    /// overlap, and lie within `region`.
    pub fn from_bytes(raw: &[u8], region: std::ops::Range<u64>) -> Result<Self> {
        if !raw.len().is_multiple_of(TABLE_ENTRY_BYTES) {
            return Err(Error::corrupt("block table length is not a whole number of entries"));
        }
        let mut t = BlockTable::with_capacity(raw.len() / TABLE_ENTRY_BYTES);
        let mut next = region.start;
        for e in raw.chunks_exact(TABLE_ENTRY_BYTES) {
            let offset = u64::from_le_bytes(e[..8].try_into().unwrap());
            let length = u32::from_le_bytes(e[8..].try_into().unwrap());
            if offset < next || length == 0 || offset.saturating_add(length as u64) > region.end {
                return Err(Error::corrupt(format!(
                    "block {} payload {offset}+{length} is out of order or outside the payload region",
                    t.len()
                )));
            }
            next = offset + length as u64;
            t.push(offset, length);
        }
        Ok(t)
    }
}

/// Bytes for a table of `entries` pointers packed at `bits_per_entry` bits.
pub fn packed_table_bytes(entries: u64, bits_per_entry: u32) -> u64 {
    (entries * bits_per_entry as u64).div_ceil(8)
}

/// Resident memory needed to serve queries: the dictionary and the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Footprint {
    pub dictionary_bytes: u64,
    pub table_bytes: u64,
}

impl Footprint {
    pub fn total(&self) -> u64 {
        self.dictionary_bytes + self.table_bytes
    }
}
