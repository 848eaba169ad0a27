use std::fs::File;
use std::io;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use super::{params, ArchiveHeader, BlockTable, Footprint, Manifest, HEADER_LEN, TABLE_ENTRY_BYTES};
use crate::codecs::{deflate, BlockCodec, PrimingContext, Scheme};
use crate::dictionary::{Dictionary, MAX_DICTIONARY_SIZE};
use crate::{Error, Result};

/// Random-access byte storage an archive can be read from.
pub trait ByteSource: Send + Sync {
    fn len(&self) -> io::Result<u64>;

    fn is_empty(&self) -> io::Result<bool> {
        Ok(self.len()? == 0)
    }

    /// Fills `buf` from `offset`; failing with `UnexpectedEof` past the end.
    fn read_exact_at(&self, buf: &mut [u8], offset: u64) -> io::Result<()>;
}

impl ByteSource for File {
    fn len(&self) -> io::Result<u64> {
        Ok(self.metadata()?.len())
    }

    #[cfg(unix)]
    fn read_exact_at(&self, buf: &mut [u8], offset: u64) -> io::Result<()> {
        std::os::unix::fs::FileExt::read_exact_at(self, buf, offset)
    }

    #[cfg(windows)]
    fn read_exact_at(&self, mut buf: &mut [u8], mut offset: u64) -> io::Result<()> {
        use std::os::windows::fs::FileExt;
        while !buf.is_empty() {
            match self.seek_read(buf, offset)? {
                0 => return Err(io::ErrorKind::UnexpectedEof.into()),
                n => {
                    buf = &mut buf[n..];
                    offset += n as u64;
                }
            }
        }
        Ok(())
    }
}

impl ByteSource for Vec<u8> {
    fn len(&self) -> io::Result<u64> {
        Ok(self.as_slice().len() as u64)
    }

    fn read_exact_at(&self, buf: &mut [u8], offset: u64) -> io::Result<()> {
        let start = usize::try_from(offset).map_err(|_| io::Error::from(io::ErrorKind::UnexpectedEof))?;
        let src = start
            .checked_add(buf.len())
            .and_then(|end| self.get(start..end))
            .ok_or(io::ErrorKind::UnexpectedEof)?;
        buf.copy_from_slice(src);
        Ok(())
    }
}

// DEFLATE cannot expand data by more than this factor.
const MAX_INFLATE_RATIO: u64 = 1032;

fn read_vec<S: ByteSource>(src: &S, offset: u64, len: u64) -> Result<Vec<u8>> {
    let mut buf = vec![0u8; usize::try_from(len).map_err(|_| Error::corrupt("section too large"))?];
    src.read_exact_at(&mut buf, offset).map_err(eof_is_corrupt)?;
    Ok(buf)
}

pub(crate) fn eof_is_corrupt(e: io::Error) -> Error {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        Error::corrupt("archive is truncated")
    } else {
        Error::Io(e)
    }
}

/// An opened archive. The dictionary and block table live in memory;
/// payloads are read from the source on demand. Queries may run
/// concurrently from many threads.
pub struct ArchiveReader<S = File> {
    source: S,
    header: ArchiveHeader,
    scheme: Scheme,
    primes: PrimingContext,
    dict: Dictionary,
    table: BlockTable,
    manifest: Option<Manifest>,
    file_len: u64,
    blocks_fetched: AtomicU64,
}

impl ArchiveReader<File> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_source(File::open(path)?)
    }
}

impl<S: ByteSource> ArchiveReader<S> {
    /// Loads and checks everything except the block payloads.
    pub fn from_source(source: S) -> Result<Self> {
        let file_len = source.len()?;
        let head = read_vec(&source, 0, file_len.min(HEADER_LEN as u64 + 4))?;
        let header = ArchiveHeader::from_bytes(&head)?;
        if head.len() < HEADER_LEN + 4 {
            return Err(Error::corrupt("archive is truncated"));
        }
        let params_len = u32::from_le_bytes(head[HEADER_LEN..].try_into().unwrap()) as u64;
        let payload_start = HEADER_LEN as u64 + 4 + params_len;
        let end_of_table = if header.manifest_offset == 0 {
            file_len
        } else {
            header.manifest_offset
        };
        if !(payload_start <= header.dict_offset
            && header.dict_offset.saturating_add(12) <= header.table_offset
            && header.table_offset < end_of_table
            && end_of_table <= file_len)
        {
            return Err(Error::corrupt("section offsets are out of order or past the end of the file"));
        }

        let params = read_vec(&source, HEADER_LEN as u64 + 4, params_len)?;
        let (scheme, primes) = params::decode(&params, header.scheme)?;

        let dict_head = read_vec(&source, header.dict_offset, 12)?;
        let sample_size = u32::from_le_bytes(dict_head[..4].try_into().unwrap());
        let dict_len = u64::from_le_bytes(dict_head[4..].try_into().unwrap());
        let packed_len = header.table_offset - header.dict_offset - 12;
        if dict_len > MAX_DICTIONARY_SIZE as u64 || dict_len > packed_len.saturating_mul(MAX_INFLATE_RATIO) {
            return Err(Error::corrupt(format!("implausible dictionary length {dict_len}")));
        }
        let packed = read_vec(&source, header.dict_offset + 12, packed_len)?;
        let data = deflate::decompress(&packed, None, dict_len as usize)?;
        let dict = Dictionary::from_parts(data, sample_size, header.source_length)
            .map_err(|e| Error::corrupt(format!("dictionary record: {e}")))?;
        if header.scheme.uses_dictionary() == dict.is_empty() {
            return Err(Error::corrupt(format!("dictionary does not fit scheme {}", header.scheme)));
        }
        scheme
            .check(dict.len())
            .map_err(|e| Error::corrupt(format!("scheme parameters: {e}")))?;

        let packed_len = end_of_table - header.table_offset;
        let raw_len = header
            .block_count
            .checked_mul(TABLE_ENTRY_BYTES as u64)
            .filter(|&n| n <= packed_len.saturating_mul(MAX_INFLATE_RATIO))
            .ok_or_else(|| Error::corrupt(format!("implausible block count {}", header.block_count)))?;
        let packed = read_vec(&source, header.table_offset, packed_len)?;
        let raw = deflate::decompress(&packed, None, raw_len as usize)?;
        let table = BlockTable::from_bytes(&raw, payload_start..header.dict_offset)?;

        let manifest = if header.manifest_offset == 0 {
            None
        } else {
            let bytes = read_vec(&source, header.manifest_offset, file_len - header.manifest_offset)?;
            Some(Manifest::from_bytes(&bytes, header.source_length)?)
        };

        Ok(ArchiveReader {
            source,
            header,
            scheme,
            primes,
            dict,
            table,
            manifest,
            file_len,
            blocks_fetched: AtomicU64::new(0),
        })
    }

    pub fn header(&self) -> &ArchiveHeader {
        &self.header
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn primes(&self) -> &PrimingContext {
        &self.primes
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    pub fn table(&self) -> &BlockTable {
        &self.table
    }

    pub fn manifest(&self) -> Option<&Manifest> {
        self.manifest.as_ref()
    }

    pub fn source_length(&self) -> u64 {
        self.header.source_length
    }

    pub fn block_size(&self) -> u32 {
        self.header.block_size()
    }

    pub fn block_count(&self) -> u64 {
        self.header.block_count
    }

    pub fn file_len(&self) -> u64 {
        self.file_len
    }

    pub fn footprint(&self) -> Footprint {
        Footprint {
            dictionary_bytes: self.dict.len() as u64,
            table_bytes: self.table.heap_bytes(),
        }
    }

    pub fn codec(&self) -> BlockCodec<'_> {
        BlockCodec {
            scheme: &self.scheme,
            dict: &self.dict,
            primes: &self.primes,
        }
    }

    /// Reads the payloads of blocks `first..=last` with one positional read
    /// (they are stored contiguously). Returns the offset of each payload
    /// within `buf`.
    pub fn fetch_blocks(&self, first: u64, last: u64, buf: &mut Vec<u8>) -> Result<()> {
        if first > last || last >= self.header.block_count {
            return Err(Error::param(format!("block range {first}..={last} outside 0..{}", self.header.block_count)));
        }
        let (start, _) = self.table.entry(first as usize);
        let (last_off, last_len) = self.table.entry(last as usize);
        let len = (last_off + last_len as u64 - start) as usize;
        buf.clear();
        buf.resize(len, 0);
        self.source.read_exact_at(buf, start).map_err(eof_is_corrupt)?;
        self.blocks_fetched.fetch_add(last - first + 1, Ordering::Relaxed);
        Ok(())
    }

    /// Payload of block `i` inside a buffer filled by [`fetch_blocks`]
    /// starting at block `first`.
    ///
    /// [`fetch_blocks`]: Self::fetch_blocks
    pub fn payload_in<'b>(&self, buf: &'b [u8], first: u64, i: u64) -> &'b [u8] {
        let base = self.table.entry(first as usize).0;
        let (off, len) = self.table.entry(i as usize);
        let at = (off - base) as usize;
        &buf[at..at + len as usize]
    }

    /// Raw payload of block `i`.
    pub fn block_payload(&self, i: u64) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.fetch_blocks(i, i, &mut buf)?;
        Ok(buf)
    }

    /// Decodes block `i` onto the end of `out`.
    pub fn decode_payload_into(&self, i: u64, payload: &[u8], out: &mut Vec<u8>) -> Result<()> {
        let start = i * self.block_size() as u64;
        self.codec()
            .decompress_into(payload, start, self.header.block_len(i), out)
    }

    /// Decoded text of block `i`.
    pub fn read_block(&self, i: u64) -> Result<Vec<u8>> {
        let payload = self.block_payload(i)?;
        let mut out = Vec::with_capacity(self.header.block_len(i) as usize);
        self.decode_payload_into(i, &payload, &mut out)?;
        Ok(out)
    }

    /// Blocks fetched from the source since open or the last reset.
    pub fn blocks_fetched(&self) -> u64 {
        self.blocks_fetched.load(Ordering::Relaxed)
    }

    pub fn reset_blocks_fetched(&self) {
        self.blocks_fetched.store(0, Ordering::Relaxed);
    }

    /// Bytes `start..start + len` of the original corpus.
    pub fn get_range(&self, start: u64, len: u64) -> Result<Vec<u8>> {
        crate::access::get_range(self, start, len)
    }

    /// Text of a document listed in the manifest.
    pub fn document(&self, id: &str) -> Result<Vec<u8>> {
        let entry = self
            .manifest
            .as_ref()
            .and_then(|m| m.get(id))
            .ok_or_else(|| Error::UnknownDocument(id.to_owned()))?;
        if entry.len == 0 {
            return Ok(Vec::new());
        }
        self.get_range(entry.start, entry.len)
    }
}
