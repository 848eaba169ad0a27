use serde::Serialize;

use super::{ArchiveReader, ByteSource, Footprint};
use crate::codecs::{self, StreamSizes};
use crate::factorize::ParseMode;
use crate::Result;

/// Space breakdown and factor statistics of an archive.
#[derive(Debug, Clone, Serialize)]
pub struct ArchiveStats {
    pub scheme: String,
    pub block_size: u32,
    pub block_count: u64,
    pub source_length: u64,
    pub file_bytes: u64,
    /// Header and params record.
    pub header_bytes: u64,
    pub payload_bytes: u64,
    pub dictionary_bytes: u64,
    pub table_bytes: u64,
    pub manifest_bytes: u64,
    pub dictionary_length: u64,
    pub streams: StreamSizes,
    pub factor_count: u64,
    pub copy_factors: u64,
    pub literal_factors: u64,
    pub literal_bytes: u64,
    pub copied_bytes: u64,
    pub footprint: Footprint,
}

impl ArchiveStats {
    /// Whole file size over corpus size.
    pub fn compression_rate(&self) -> f64 {
        ratio(self.file_bytes, self.source_length)
    }

    pub fn payload_rate(&self) -> f64 {
        ratio(self.payload_bytes, self.source_length)
    }

    pub fn dictionary_rate(&self) -> f64 {
        ratio(self.dictionary_bytes, self.source_length)
    }

    pub fn table_rate(&self) -> f64 {
        ratio(self.table_bytes, self.source_length)
    }

    /// Header, params and manifest.
    pub fn other_rate(&self) -> f64 {
        ratio(self.header_bytes + self.manifest_bytes, self.source_length)
    }

    /// Corpus bytes covered per factor (literals included).
    pub fn mean_factor_length(&self) -> f64 {
        ratio(self.source_length, self.factor_count)
    }

    /// Mean length of the copy factors alone.
    pub fn mean_copy_length(&self) -> f64 {
        ratio(self.copied_bytes, self.copy_factors)
    }

    /// Dictionary length over corpus length.
    pub fn dictionary_share(&self) -> f64 {
        ratio(self.dictionary_length, self.source_length)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl<S: ByteSource> ArchiveReader<S> {
    /// Walks every block payload (factor statistics need the streams).
    pub fn stats(&self) -> Result<ArchiveStats> {
        let h = self.header();
        let end_of_table = if h.manifest_offset == 0 { self.file_len() } else { h.manifest_offset };
        let first_payload = if self.table().is_empty() { h.dict_offset } else { self.table().entry(0).0 };
        let mut s = ArchiveStats {
            scheme: h.scheme.name().to_owned(),
            block_size: h.block_size(),
            block_count: h.block_count,
            source_length: h.source_length,
            file_bytes: self.file_len(),
            header_bytes: first_payload,
            payload_bytes: h.dict_offset - first_payload,
            dictionary_bytes: h.table_offset - h.dict_offset,
            table_bytes: end_of_table - h.table_offset,
            manifest_bytes: self.file_len() - end_of_table,
            dictionary_length: self.dictionary().len() as u64,
            streams: StreamSizes::default(),
            factor_count: 0,
            copy_factors: 0,
            literal_factors: 0,
            literal_bytes: 0,
            copied_bytes: 0,
            footprint: self.footprint(),
        };
        let codec = self.codec();
        let mut buf = Vec::new();
        for i in 0..h.block_count {
            self.fetch_blocks(i, i, &mut buf)?;
            let block_len = h.block_len(i);
            s.streams.add(&codecs::stream_sizes(&buf, codec.scheme, block_len)?);
            if !codec.scheme.id.is_rlz() {
                continue;
            }
            let fs = codec.factor_streams(&buf, block_len)?;
            s.factor_count += fs.factor_count() as u64;
            for f in fs.factors() {
                if f.length > 0 {
                    s.copy_factors += 1;
                    s.copied_bytes += f.length as u64;
                } else {
                    s.literal_factors += 1;
                    s.literal_bytes += match fs.mode {
                        ParseMode::Interleaved => 1,
                        ParseMode::ThreeStream { .. } => f.offset as u64,
                    };
                }
            }
        }
        Ok(s)
    }
}
