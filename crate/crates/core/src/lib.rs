//! Blocked relative Lempel-Ziv (RLZ) archives.
//!
//! A corpus is split into fixed-length blocks. Each block is factorized
//! against a dictionary built from regular samples of the corpus, and the
//! resulting factor streams are written with one of several static or
//! DEFLATE-based codes. A block table kept in memory lets the reader fetch
//! and decode only the blocks touched by a byte-range query.
//!
//! Baseline schemes (raw copy, whole-block DEFLATE and a small fast LZ)
//! share the same container so their access costs can be compared.
//!
//! ```no_run
//! use rlz_core::archive::{ArchiveReader, ArchiveWriter};
//! use rlz_core::codecs::{Scheme, SchemeId};
//! use rlz_core::dictionary::{Dictionary, DictionaryIndex};
//!
//! # fn main() -> rlz_core::Result<()> {
//! let corpus = std::fs::read("corpus.txt")?;
//! let dict = Dictionary::from_bytes(&corpus, 1 << 20, 1024)?;
//! let index = DictionaryIndex::new(&dict)?;
//! let scheme = Scheme::for_dictionary(SchemeId::RlzPv, dict.len(), 4);
//! let file = std::fs::File::create("corpus.rlz")?;
//! let mut source = std::io::Cursor::new(&corpus);
//! ArchiveWriter::new(scheme, 16 * 1024)?.write(&mut source, &dict, Some(&index), None, file)?;
//!
//! let reader = ArchiveReader::open("corpus.rlz")?;
//! let fragment = reader.get_range(1_000, 16 * 1024)?;
//! # Ok(()) }
//! ```

pub mod access;
pub mod archive;
pub mod codecs;
pub mod dictionary;
pub mod error;
pub mod factorize;
pub mod perfmodel;
pub mod synth;
pub mod units;

pub use error::{Error, Result};
