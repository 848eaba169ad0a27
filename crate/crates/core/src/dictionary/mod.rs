//! Sampled dictionaries and the longest-prefix-match index built over them.
//!
//! The dictionary is the concatenation of `|D| / s` samples of `s` bytes,
//! taken every `floor(|C| / (|D| / s))` bytes of the corpus without regard
//! to document boundaries.

mod index;
mod rmq;

use std::io::{self, Read, Seek, SeekFrom};

use log::warn;

use crate::{Error, Result};

pub use index::{DictionaryIndex, Match};

/// Largest dictionary the index can address with 32-bit suffix positions.
pub const MAX_DICTIONARY_SIZE: usize = (i32::MAX as usize) + 1 - 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dictionary {
    data: Vec<u8>,
    sample_size: u32,
    source_length: u64,
    sample_interval: u64,
}

/// Distance between consecutive sample starts.
///
/// Never smaller than the sample size: a corpus shorter than the dictionary
/// degenerates to its own zero-padded prefix.
pub fn sample_interval(source_length: u64, dict_size: u64, sample_size: u64) -> u64 {
    if sample_size == 0 || dict_size == 0 {
        return 0;
    }
    let samples = dict_size / sample_size;
    (source_length / samples).max(sample_size)
}

impl Dictionary {
    /// Samples a dictionary of `dict_size` bytes from a seekable corpus.
    pub fn build<R: Read + Seek>(corpus: &mut R, dict_size: usize, sample_size: usize) -> Result<Self> {
        check_sizes(dict_size, sample_size)?;
        let source_length = corpus.seek(SeekFrom::End(0))?;
        if (dict_size as u64) > source_length {
            warn!(
                "dictionary size {dict_size} exceeds corpus length {source_length}; \
                 using the zero-padded corpus prefix"
            );
        }
        let interval = sample_interval(source_length, dict_size as u64, sample_size as u64);
        let mut data = vec![0u8; dict_size];
        for (i, sample) in data.chunks_exact_mut(sample_size).enumerate() {
            let start = i as u64 * interval;
            if start >= source_length {
                break;
            }
            corpus.seek(SeekFrom::Start(start))?;
            read_up_to(corpus, sample)?;
        }
        Ok(Dictionary {
            data,
            sample_size: sample_size as u32,
            source_length,
            sample_interval: interval,
        })
    }

    pub fn from_bytes(corpus: &[u8], dict_size: usize, sample_size: usize) -> Result<Self> {
        Self::build(&mut io::Cursor::new(corpus), dict_size, sample_size)
    }

    /// Reassembles a dictionary read back from an archive.
    pub fn from_parts(data: Vec<u8>, sample_size: u32, source_length: u64) -> Result<Self> {
        if data.is_empty() {
            return Ok(Self::empty(source_length));
        }
        check_sizes(data.len(), sample_size as usize)?;
        let sample_interval = sample_interval(source_length, data.len() as u64, sample_size as u64);
        Ok(Dictionary {
            data,
            sample_size,
            source_length,
            sample_interval,
        })
    }

    /// The dictionary of schemes that do not use one.
    pub fn empty(source_length: u64) -> Self {
        Dictionary {
            data: Vec::new(),
            sample_size: 0,
            source_length,
            sample_interval: 0,
        }
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn sample_size(&self) -> u32 {
        self.sample_size
    }

    pub fn source_length(&self) -> u64 {
        self.source_length
    }

    pub fn sample_interval(&self) -> u64 {
        self.sample_interval
    }

    pub fn sample_count(&self) -> usize {
        if self.sample_size == 0 {
            0
        } else {
            self.data.len() / self.sample_size as usize
        }
    }

    /// Corpus offset the `i`-th sample was copied from.
    pub fn sample_source_offset(&self, i: usize) -> u64 {
        i as u64 * self.sample_interval
    }
}

fn check_sizes(dict_size: usize, sample_size: usize) -> Result<()> {
    if sample_size == 0 {
        return Err(Error::param("sample size must be positive"));
    }
    if dict_size < sample_size {
        return Err(Error::param(format!(
            "dictionary size {dict_size} is smaller than the sample size {sample_size}"
        )));
    }
    if !dict_size.is_multiple_of(sample_size) {
        return Err(Error::param(format!(
            "dictionary size {dict_size} is not a multiple of the sample size {sample_size}"
        )));
    }
    if dict_size > MAX_DICTIONARY_SIZE {
        return Err(Error::param(format!(
            "dictionary size {dict_size} exceeds the supported maximum {MAX_DICTIONARY_SIZE}"
        )));
    }
    Ok(())
}

// Fills as much of `buf` as the source provides; the rest stays zero.
fn read_up_to<R: Read>(src: &mut R, buf: &mut [u8]) -> io::Result<()> {
    let mut filled = 0;
    while filled < buf.len() {
        match src.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
