use std::io::{BufWriter, Read, Seek, SeekFrom, Write};

use log::{debug, info};
use rayon::prelude::*;

use super::{block_count, check_block_size, params, ArchiveHeader, BlockTable, Manifest, HEADER_LEN, VERSION};
use crate::codecs::{deflate, priming, BlockCodec, EncodedBlock, PrimingContext, Scheme};
use crate::dictionary::{Dictionary, DictionaryIndex};
use crate::factorize::{self, ParseMode};
use crate::{Error, Result};

/// Byte counts of each part of a written archive.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct WriteSummary {
    pub source_length: u64,
    pub block_count: u64,
    pub factor_count: u64,
    /// Header plus params record.
    pub header_bytes: u64,
    pub payload_bytes: u64,
    pub dictionary_bytes: u64,
    pub table_bytes: u64,
    pub manifest_bytes: u64,
}

impl WriteSummary {
    pub fn total_bytes(&self) -> u64 {
        self.header_bytes + self.payload_bytes + self.dictionary_bytes + self.table_bytes + self.manifest_bytes
    }
}

pub struct ArchiveWriter {
    scheme: Scheme,
    block_size: u32,
    batch_blocks: usize,
}

impl ArchiveWriter {
    pub fn new(scheme: Scheme, block_size: u64) -> Result<Self> {
        let block_size = check_block_size(block_size)?;
        let batch_bytes = 8 << 20;
        Ok(ArchiveWriter {
            scheme,
            block_size,
            batch_blocks: (batch_bytes / block_size as usize).max(rayon::current_num_threads() * 2),
        })
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn block_size(&self) -> u32 {
        self.block_size
    }

    /// Compresses all of `corpus` into `out`.
    ///
    /// RLZ schemes need `index`, built over `dict`. Schemes without a
    /// dictionary ignore `dict` and store an empty one.
    pub fn write<R, W>(
        &self,
        corpus: &mut R,
        dict: &Dictionary,
        index: Option<&DictionaryIndex<'_>>,
        manifest: Option<&Manifest>,
        out: W,
    ) -> Result<WriteSummary>
    where
        R: Read + Seek,
        W: Write + Seek,
    {
        let scheme = &self.scheme;
        let source_length = corpus.seek(SeekFrom::End(0))?;
        let empty;
        let dict = if scheme.id.uses_dictionary() {
            dict
        } else {
            empty = Dictionary::empty(source_length);
            &empty
        };
        scheme.check(dict.len())?;
        if !dict.is_empty() && dict.source_length() != source_length {
            return Err(Error::param(format!(
                "dictionary was sampled from {} bytes but the corpus has {source_length}",
                dict.source_length()
            )));
        }
        let index = match index.filter(|_| scheme.id.is_rlz()) {
            Some(ix) if !std::ptr::eq(ix.dictionary(), dict) => {
                return Err(Error::param("index was built over a different dictionary"))
            }
            Some(ix) => Some(ix),
            None if scheme.id.is_rlz() => return Err(Error::param(format!("{} needs a dictionary index", scheme.id))),
            None => None,
        };
        if let Some(m) = manifest {
            if let Some(last) = m.entries().last() {
                if last.start + last.len > source_length {
                    return Err(Error::param("manifest ranges extend past the corpus"));
                }
            }
        }

        let blocks = block_count(source_length, self.block_size);
        let primes = match (scheme.id, index) {
            (crate::codecs::SchemeId::RlzZzPrimed, Some(ix)) => self.train_primes(corpus, ix, source_length)?,
            _ => PrimingContext::default(),
        };
        let codec = BlockCodec { scheme, dict, primes: &primes };

        let mut out = BufWriter::with_capacity(1 << 20, out);
        out.seek(SeekFrom::Start(0))?;
        out.write_all(&[0u8; HEADER_LEN])?;
        let params = params::encode(scheme, &primes);
        out.write_all(&params)?;
        let mut pos = (HEADER_LEN + params.len()) as u64;
        let mut summary = WriteSummary {
            source_length,
            block_count: blocks,
            header_bytes: pos,
            ..Default::default()
        };

        corpus.seek(SeekFrom::Start(0))?;
        let mut table = BlockTable::with_capacity(blocks as usize);
        let mut batch: Vec<Vec<u8>> = Vec::new();
        let mut next_block = 0u64;
        while next_block < blocks {
            let n = (self.batch_blocks as u64).min(blocks - next_block);
            batch.resize_with(n as usize, Vec::new);
            for (k, buf) in batch.iter_mut().enumerate() {
                let start = (next_block + k as u64) * self.block_size as u64;
                let len = (source_length - start).min(self.block_size as u64) as usize;
                buf.resize(len, 0);
                corpus.read_exact(buf)?;
            }
            let first = next_block;
            let encoded: Vec<EncodedBlock> = batch
                .par_iter()
                .enumerate()
                .map(|(k, block)| codec.compress(index, block, (first + k as u64) * self.block_size as u64))
                .collect::<Result<_>>()?;
            for eb in encoded {
                let len = u32::try_from(eb.payload.len()).map_err(|_| Error::param("block payload exceeds 4 GiB"))?;
                out.write_all(&eb.payload)?;
                table.push(pos, len);
                pos += len as u64;
                summary.payload_bytes += len as u64;
                summary.factor_count += eb.factor_count as u64;
            }
            next_block += n;
            debug!("encoded {next_block}/{blocks} blocks");
        }

        let dict_offset = pos;
        let mut record = Vec::with_capacity(12 + dict.len() / 2);
        record.extend_from_slice(&dict.sample_size().to_le_bytes());
        record.extend_from_slice(&(dict.len() as u64).to_le_bytes());
        deflate::compress_into(dict.data(), None, &mut record);
        out.write_all(&record)?;
        summary.dictionary_bytes = record.len() as u64;
        pos += record.len() as u64;

        let table_offset = pos;
        let packed_table = deflate::compress(&table.to_bytes(), None);
        out.write_all(&packed_table)?;
        summary.table_bytes = packed_table.len() as u64;
        pos += packed_table.len() as u64;

        let manifest_offset = match manifest {
            Some(m) => {
                let bytes = m.to_bytes();
                out.write_all(&bytes)?;
                summary.manifest_bytes = bytes.len() as u64;
                pos
            }
            None => 0,
        };

        let header = ArchiveHeader {
            version: VERSION,
            scheme: scheme.id,
            log2_block_size: self.block_size.trailing_zeros() as u8,
            source_length,
            block_count: blocks,
            dict_offset,
            table_offset,
            manifest_offset,
        };
        out.seek(SeekFrom::Start(0))?;
        out.write_all(&header.to_bytes())?;
        out.seek(SeekFrom::End(0))?;
        out.flush()?;
        info!(
            "wrote {} blocks: payload {} B, dictionary {} B, table {} B",
            blocks, summary.payload_bytes, summary.dictionary_bytes, summary.table_bytes
        );
        Ok(summary)
    }

    // Factorizes blocks spread over the corpus and keeps their most common
    // offsets and lengths.
    fn train_primes<R: Read + Seek>(
        &self,
        corpus: &mut R,
        index: &DictionaryIndex<'_>,
        source_length: u64,
    ) -> Result<PrimingContext> {
        let blocks = block_count(source_length, self.block_size);
        let mut texts = Vec::new();
        for i in priming::training_block_indices(blocks) {
            let start = i * self.block_size as u64;
            let mut buf = vec![0u8; (source_length - start).min(self.block_size as u64) as usize];
            corpus.seek(SeekFrom::Start(start))?;
            corpus.read_exact(&mut buf)?;
            texts.push(buf);
        }
        let streams = texts
            .par_iter()
            .map(|t| factorize::factorize_block(index, t, ParseMode::Interleaved))
            .collect::<Result<Vec<_>>>()?;
        Ok(PrimingContext::train(&streams))
    }
}
