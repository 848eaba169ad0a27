//! Block payload codes.
//!
//! RLZ schemes serialize the factor streams of a block; baseline schemes
//! store the block text itself (raw, DEFLATE, or the byte-oriented fast LZ).
//! Every payload begins with whatever prelude its scheme needs to be parsed
//! on its own, so a block can be decoded from nothing but its table entry.
//!
//! Layouts (`vb` = vbyte, `u32` = little-endian):
//!
//! | scheme | payload |
//! |---|---|
//! | RLZ-UV | `vb count`, `count × u32` offsets, `count × vb` lengths |
//! | RLZ-PV | `vb count`, offsets packed at the scheme width, `count × vb` lengths |
//! | RLZ-ZZ(′) | `vb count`, `u32` size of each DEFLATE stream, offsets stream, lengths stream |
//! | RLZ-ZZZ | as RLZ-ZZ with a third stream holding literal bytes |
//! | COPY | block bytes |
//! | DEF-BLOCK(′) | DEFLATE of the block |
//! | FASTLZ-BLOCK | [`fastlz`] tokens |

pub mod bits;
pub mod deflate;
pub mod fastlz;
pub mod priming;
pub mod vbyte;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dictionary::{Dictionary, DictionaryIndex};
use crate::factorize::{self, FactorStreams, ParseMode};
use crate::{Error, Result};

pub use priming::PrimingContext;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum SchemeId {
    Copy = 0,
    DefBlock = 1,
    FastLzBlock = 2,
    RlzUv = 3,
    RlzPv = 4,
    RlzZz = 5,
    RlzZzPrimed = 6,
    RlzZzz = 7,
    DefBlockPrimed = 8,
}

impl SchemeId {
    pub const ALL: [SchemeId; 9] = [
        SchemeId::Copy,
        SchemeId::DefBlock,
        SchemeId::FastLzBlock,
        SchemeId::RlzUv,
        SchemeId::RlzPv,
        SchemeId::RlzZz,
        SchemeId::RlzZzPrimed,
        SchemeId::RlzZzz,
        SchemeId::DefBlockPrimed,
    ];

    pub fn from_u8(v: u8) -> Option<Self> {
        Self::ALL.get(v as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Copy => "copy",
            SchemeId::DefBlock => "def-block",
            SchemeId::FastLzBlock => "fastlz-block",
            SchemeId::RlzUv => "rlz-uv",
            SchemeId::RlzPv => "rlz-pv",
            SchemeId::RlzZz => "rlz-zz",
            SchemeId::RlzZzPrimed => "rlz-zz-primed",
            SchemeId::RlzZzz => "rlz-zzz",
            SchemeId::DefBlockPrimed => "def-block-primed",
        }
    }

    /// Schemes whose payloads are factor streams.
    pub fn is_rlz(self) -> bool {
        matches!(
            self,
            SchemeId::RlzUv | SchemeId::RlzPv | SchemeId::RlzZz | SchemeId::RlzZzPrimed | SchemeId::RlzZzz
        )
    }

    /// Schemes that need a dictionary stored in the archive.
    pub fn uses_dictionary(self) -> bool {
        self.is_rlz() || self == SchemeId::DefBlockPrimed
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        SchemeId::ALL
            .into_iter()
            .find(|id| id.name() == norm)
            .ok_or_else(|| {
                let names: Vec<_> = SchemeId::ALL.iter().map(|i| i.name()).collect();
                Error::param(format!("unknown scheme {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// A scheme with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scheme {
    pub id: SchemeId,
    /// Width of packed offsets (RLZ-PV).
    pub offset_bit_width: u8,
    /// Shortest copy factor kept out of the literal stream (RLZ-ZZZ).
    pub min_literal: u32,
}

/// Offset width for RLZ-PV: `ceil(log2 |D|)`, but at least 8 bits because
/// literal bytes share the offset slots.
pub fn offset_bit_width(dict_len: usize) -> u8 {
    bits::ceil_log2(dict_len as u64).clamp(8, 32) as u8
}

impl Scheme {
    pub fn for_dictionary(id: SchemeId, dict_len: usize, min_literal: u32) -> Self {
        Scheme {
            id,
            offset_bit_width: offset_bit_width(dict_len),
            min_literal,
        }
    }

    pub fn parse_mode(&self) -> ParseMode {
        match self.id {
            SchemeId::RlzZzz => ParseMode::ThreeStream {
                min_literal: self.min_literal,
            },
            _ => ParseMode::Interleaved,
        }
    }

    /// Checks the parameters against the dictionary the scheme will use.
    pub fn check(&self, dict_len: usize) -> Result<()> {
        if self.id.uses_dictionary() && dict_len == 0 {
            return Err(Error::param(format!("scheme {} needs a dictionary", self.id)));
        }
        if self.id == SchemeId::RlzPv && self.offset_bit_width != offset_bit_width(dict_len) {
            return Err(Error::param(format!(
                "offset width {} does not match a {dict_len}-byte dictionary (expected {})",
                self.offset_bit_width,
                offset_bit_width(dict_len)
            )));
        }
        if self.id == SchemeId::RlzZzz && self.min_literal == 0 {
            return Err(Error::param("min_literal must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedBlock {
    pub factor_count: u32,
    pub payload: Vec<u8>,
}

/// Byte sizes of the parts of one payload.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StreamSizes {
    pub prelude: u64,
    pub offsets: u64,
    pub lengths: u64,
    pub literals: u64,
    /// Whole-block text payloads (baseline schemes).
    pub text: u64,
}

impl StreamSizes {
    pub fn total(&self) -> u64 {
        self.prelude + self.offsets + self.lengths + self.literals + self.text
    }

    pub fn add(&mut self, other: &StreamSizes) {
        self.prelude += other.prelude;
        self.offsets += other.offsets;
        self.lengths += other.lengths;
        self.literals += other.literals;
        self.text += other.text;
    }
}

fn u32s_to_le(values: &[u32]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn le_to_u32s(bytes: &[u8], out: &mut Vec<u32>) {
    out.extend(bytes.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())));
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

/// Serializes factor streams under an RLZ scheme.
pub fn encode_block(fs: &FactorStreams, scheme: &Scheme, primes: &PrimingContext) -> Result<EncodedBlock> {
    if !scheme.id.is_rlz() {
        return Err(Error::param(format!("{} does not code factor streams", scheme.id)));
    }
    if fs.mode != scheme.parse_mode() {
        return Err(Error::param(format!("{:?} streams cannot be coded as {}", fs.mode, scheme.id)));
    }
    let count = fs.factor_count();
    let factor_count = u32::try_from(count).map_err(|_| Error::param("too many factors"))?;
    let mut payload = Vec::with_capacity(count * 5 + 8);
    vbyte::encode(factor_count, &mut payload);
    match scheme.id {
        SchemeId::RlzUv => {
            for &o in &fs.offsets {
                payload.extend_from_slice(&o.to_le_bytes());
            }
            for &l in &fs.lengths {
                vbyte::encode(l, &mut payload);
            }
        }
        SchemeId::RlzPv => {
            bits::pack_bits_into(&fs.offsets, scheme.offset_bit_width as u32, &mut payload)?;
            for &l in &fs.lengths {
                vbyte::encode(l, &mut payload);
            }
        }
        SchemeId::RlzZz | SchemeId::RlzZzPrimed | SchemeId::RlzZzz => {
            let primed = scheme.id == SchemeId::RlzZzPrimed;
            let offsets = deflate::compress(&u32s_to_le(&fs.offsets), primed.then_some(&primes.offsets[..]));
            let lengths = deflate::compress(&u32s_to_le(&fs.lengths), primed.then_some(&primes.lengths[..]));
            put_u32(&mut payload, offsets.len());
            put_u32(&mut payload, lengths.len());
            let literals = (scheme.id == SchemeId::RlzZzz).then(|| deflate::compress(&fs.literals, None));
            if let Some(l) = &literals {
                put_u32(&mut payload, l.len());
            }
            payload.extend_from_slice(&offsets);
            payload.extend_from_slice(&lengths);
            if let Some(l) = &literals {
                payload.extend_from_slice(l);
            }
        }
        _ => unreachable!("checked is_rlz above"),
    }
    Ok(EncodedBlock { factor_count, payload })
}

/// Parses an RLZ payload back into validated factor streams.
pub fn decode_block(
    payload: &[u8],
    scheme: &Scheme,
    primes: &PrimingContext,
    dict_len: usize,
    block_len: u32,
) -> Result<FactorStreams> {
    let fs = decode_streams(payload, scheme, primes, block_len)?;
    fs.validate(dict_len)?;
    Ok(fs)
}

struct Sections<'a> {
    count: usize,
    prelude: usize,
    parts: Vec<&'a [u8]>,
}

// Splits a payload into its prelude and per-stream byte ranges.
fn split_payload<'a>(payload: &'a [u8], scheme: &Scheme, block_len: u32) -> Result<Sections<'a>> {
    let (count, used) = vbyte::decode(payload)?;
    let count = count as usize;
    if count > block_len as usize {
        return Err(Error::corrupt(format!("{count} factors in a {block_len}-byte block")));
    }
    let rest = &payload[used..];
    let stream_count = match scheme.id {
        SchemeId::RlzUv | SchemeId::RlzPv => {
            let offset_bytes = if scheme.id == SchemeId::RlzUv {
                count * 4
            } else {
                bits::packed_len(count, scheme.offset_bit_width as u32)
            };
            if rest.len() < offset_bytes {
                return Err(Error::corrupt("payload ends inside the offset stream"));
            }
            let (offsets, lengths) = rest.split_at(offset_bytes);
            return Ok(Sections {
                count,
                prelude: used,
                parts: vec![offsets, lengths],
            });
        }
        SchemeId::RlzZz | SchemeId::RlzZzPrimed => 2,
        SchemeId::RlzZzz => 3,
        other => return Err(Error::param(format!("{other} does not code factor streams"))),
    };
    let header = 4 * stream_count;
    if rest.len() < header {
        return Err(Error::corrupt("payload ends inside the stream size prelude"));
    }
    let mut parts = Vec::with_capacity(stream_count);
    let mut body = &rest[header..];
    for k in 0..stream_count {
        let size = u32::from_le_bytes(rest[4 * k..4 * k + 4].try_into().unwrap()) as usize;
        if size > body.len() {
            return Err(Error::corrupt("stream size exceeds payload"));
        }
        let (part, tail) = body.split_at(size);
        parts.push(part);
        body = tail;
    }
    if !body.is_empty() {
        return Err(Error::corrupt(format!("{} trailing payload bytes", body.len())));
    }
    Ok(Sections {
        count,
        prelude: used + header,
        parts,
    })
}

pub(crate) fn decode_streams(
    payload: &[u8],
    scheme: &Scheme,
    primes: &PrimingContext,
    block_len: u32,
) -> Result<FactorStreams> {
    let sections = split_payload(payload, scheme, block_len)?;
    let count = sections.count;
    let mut fs = FactorStreams::new(scheme.parse_mode(), block_len);
    match scheme.id {
        SchemeId::RlzUv | SchemeId::RlzPv => {
            if scheme.id == SchemeId::RlzUv {
                le_to_u32s(sections.parts[0], &mut fs.offsets);
            } else {
                bits::unpack_bits_into(sections.parts[0], count, scheme.offset_bit_width as u32, &mut fs.offsets)?;
            }
            let used = vbyte::decode_many(sections.parts[1], count, &mut fs.lengths)?;
            if used != sections.parts[1].len() {
                return Err(Error::corrupt("trailing bytes after the length stream"));
            }
        }
        _ => {
            let primed = scheme.id == SchemeId::RlzZzPrimed;
            let raw = deflate::decompress(sections.parts[0], primed.then_some(&primes.offsets[..]), count * 4)?;
            le_to_u32s(&raw, &mut fs.offsets);
            let raw = deflate::decompress(sections.parts[1], primed.then_some(&primes.lengths[..]), count * 4)?;
            le_to_u32s(&raw, &mut fs.lengths);
            if scheme.id == SchemeId::RlzZzz {
                let literal_bytes: u64 = fs
                    .factors()
                    .filter(|f| f.length == 0)
                    .map(|f| f.offset as u64)
                    .sum();
                if literal_bytes > block_len as u64 {
                    return Err(Error::corrupt("literal runs exceed the block"));
                }
                fs.literals = deflate::decompress(sections.parts[2], None, literal_bytes as usize)?;
            }
        }
    }
    Ok(fs)
}

/// Sizes of the parts of a payload, without decoding it.
pub fn stream_sizes(payload: &[u8], scheme: &Scheme, block_len: u32) -> Result<StreamSizes> {
    if !scheme.id.is_rlz() {
        return Ok(StreamSizes {
            text: payload.len() as u64,
            ..Default::default()
        });
    }
    let s = split_payload(payload, scheme, block_len)?;
    Ok(StreamSizes {
        prelude: s.prelude as u64,
        offsets: s.parts[0].len() as u64,
        lengths: s.parts[1].len() as u64,
        literals: s.parts.get(2).map_or(0, |p| p.len() as u64),
        text: 0,
    })
}

/// Codes a whole block of text under a baseline scheme. `text_prime` is
/// used by DEF-BLOCK′ only.
pub fn encode_raw(block: &[u8], scheme: &Scheme, text_prime: &[u8]) -> Result<Vec<u8>> {
    Ok(match scheme.id {
        SchemeId::Copy => block.to_vec(),
        SchemeId::DefBlock => deflate::compress(block, None),
        SchemeId::DefBlockPrimed => deflate::compress(block, Some(text_prime)),
        SchemeId::FastLzBlock => fastlz::compress(block),
        other => return Err(Error::param(format!("{other} codes factor streams, not text"))),
    })
}

pub fn decode_raw(payload: &[u8], scheme: &Scheme, text_prime: &[u8], block_len: u32) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(block_len as usize);
    decode_raw_into(payload, scheme, text_prime, block_len, &mut out)?;
    Ok(out)
}

fn decode_raw_into(payload: &[u8], scheme: &Scheme, text_prime: &[u8], block_len: u32, out: &mut Vec<u8>) -> Result<()> {
    let len = block_len as usize;
    match scheme.id {
        SchemeId::Copy => {
            if payload.len() != len {
                return Err(Error::corrupt(format!("raw block of {} bytes, expected {len}", payload.len())));
            }
            out.extend_from_slice(payload);
            Ok(())
        }
        SchemeId::DefBlock => deflate::decompress_into(payload, None, len, out),
        SchemeId::DefBlockPrimed => deflate::decompress_into(payload, Some(text_prime), len, out),
        SchemeId::FastLzBlock => fastlz::decompress_into(payload, len, out),
        other => Err(Error::param(format!("{other} codes factor streams, not text"))),
    }
}

/// Everything needed to turn block text into payloads and back.
#[derive(Debug, Clone, Copy)]
pub struct BlockCodec<'a> {
    pub scheme: &'a Scheme,
    pub dict: &'a Dictionary,
    pub primes: &'a PrimingContext,
}

impl BlockCodec<'_> {
    /// Codes the block that starts at corpus offset `block_start`. RLZ
    /// schemes need the dictionary index.
    pub fn compress(&self, index: Option<&DictionaryIndex<'_>>, block: &[u8], block_start: u64) -> Result<EncodedBlock> {
        if self.scheme.id.is_rlz() {
            let index = index.ok_or_else(|| Error::param(format!("{} needs a dictionary index", self.scheme.id)))?;
            let fs = factorize::factorize_block(index, block, self.scheme.parse_mode())?;
            encode_block(&fs, self.scheme, self.primes)
        } else {
            let prime = priming::text_prime(self.dict, block_start);
            Ok(EncodedBlock {
                factor_count: 0,
                payload: encode_raw(block, self.scheme, prime)?,
            })
        }
    }

    /// Appends the decoded block to `out`.
    pub fn decompress_into(&self, payload: &[u8], block_start: u64, block_len: u32, out: &mut Vec<u8>) -> Result<()> {
        if self.scheme.id.is_rlz() {
            let fs = decode_streams(payload, self.scheme, self.primes, block_len)?;
            factorize::defactorize_into(self.dict.data(), &fs, out)
        } else {
            let prime = priming::text_prime(self.dict, block_start);
            decode_raw_into(payload, self.scheme, prime, block_len, out)
        }
    }

    /// Factor streams of an RLZ payload (for statistics).
    pub fn factor_streams(&self, payload: &[u8], block_len: u32) -> Result<FactorStreams> {
        decode_block(payload, self.scheme, self.primes, self.dict.len(), block_len)
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    const DICT_LEN: usize = 1 << 20;

    fn random_streams(seed: u64, count: usize, mode: ParseMode) -> FactorStreams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fs = FactorStreams::new(mode, 0);
        let mut block_len = 0u32;
        for _ in 0..count {
            if rng.random_bool(0.1) {
                match mode {
                    ParseMode::Interleaved => {
                        fs.offsets.push(rng.random_range(0..256));
                        block_len += 1;
                    }
                    ParseMode::ThreeStream { .. } => {
                        let run = rng.random_range(1..20u32);
                        fs.offsets.push(run);
                        fs.literals.extend((0..run).map(|_| rng.random::<u8>()));
                        block_len += run;
                    }
                }
                fs.lengths.push(0);
            } else {
                let len = rng.random_range(4..300u32);
                fs.offsets.push(rng.random_range(0..(DICT_LEN as u32 - len)));
                fs.lengths.push(len);
                block_len += len;
            }
        }
        fs.block_len = block_len;
        fs
    }

    fn primes() -> PrimingContext {
        let training: Vec<_> = (0..4).map(|s| random_streams(100 + s, 500, ParseMode::Interleaved)).collect();
        PrimingContext::train(&training)
    }

    #[test]
    fn all_rlz_schemes_round_trip() {
        let primes = primes();
        for id in SchemeId::ALL.into_iter().filter(|id| id.is_rlz()) {
            let scheme = Scheme::for_dictionary(id, DICT_LEN, 4);
            let fs = random_streams(9, 200, scheme.parse_mode());
            let eb = encode_block(&fs, &scheme, &primes).unwrap();
            assert_eq!(eb.factor_count, 200);
            let back = decode_block(&eb.payload, &scheme, &primes, DICT_LEN, fs.block_len).unwrap();
            assert_eq!(back, fs, "{id}");
            let sizes = stream_sizes(&eb.payload, &scheme, fs.block_len).unwrap();
            assert_eq!(sizes.total(), eb.payload.len() as u64);
        }
    }

    #[test]
    fn all_raw_schemes_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let block: Vec<u8> = (0..20_000).map(|_| b"abcdefgh "[rng.random_range(0..9)]).collect();
        let prime = &block[..5000];
        for id in SchemeId::ALL.into_iter().filter(|id| !id.is_rlz()) {
            let scheme = Scheme::for_dictionary(id, 0, 4);
            let payload = encode_raw(&block, &scheme, prime).unwrap();
            assert_eq!(decode_raw(&payload, &scheme, prime, block.len() as u32).unwrap(), block, "{id}");
        }
    }

    #[test]
    fn single_literal_uv_layout() {
        let fs = FactorStreams {
            offsets: vec![98],
            lengths: vec![0],
            literals: vec![],
            mode: ParseMode::Interleaved,
            block_len: 1,
        };
        let scheme = Scheme::for_dictionary(SchemeId::RlzUv, 1024, 4);
        let eb = encode_block(&fs, &scheme, &PrimingContext::default()).unwrap();
        assert_eq!(eb.factor_count, 1);
        assert_eq!(eb.payload, [0x81, 98, 0, 0, 0, 0x80]);
    }

    #[test]
    fn packed_offsets_are_smaller() {
        let p = PrimingContext::default();
        for seed in 0..5 {
            let fs = random_streams(seed, 50 + seed as usize * 40, ParseMode::Interleaved);
            let uv = encode_block(&fs, &Scheme::for_dictionary(SchemeId::RlzUv, DICT_LEN, 4), &p).unwrap();
            let pv = encode_block(&fs, &Scheme::for_dictionary(SchemeId::RlzPv, DICT_LEN, 4), &p).unwrap();
            assert!(pv.payload.len() < uv.payload.len());
        }
    }

    #[test]
    fn offset_widths() {
        assert_eq!(offset_bit_width(64 << 20), 26);
        assert_eq!(offset_bit_width(1 << 20), 20);
        assert_eq!(offset_bit_width((1 << 20) + 1), 21);
        // literal bytes need a full byte
        assert_eq!(offset_bit_width(16), 8);
    }

    #[test]
    fn scheme_names() {
        for id in SchemeId::ALL {
            assert_eq!(id.name().parse::<SchemeId>().unwrap(), id);
            assert_eq!(SchemeId::from_u8(id as u8), Some(id));
        }
        assert_eq!("RLZ_ZZZ".parse::<SchemeId>().unwrap(), SchemeId::RlzZzz);
        assert!("lz4".parse::<SchemeId>().is_err());
        assert_eq!(SchemeId::from_u8(9), None);
    }

    #[test]
    fn scheme_checks() {
        assert!(Scheme::for_dictionary(SchemeId::RlzPv, 0, 4).check(0).is_err());
        assert!(Scheme::for_dictionary(SchemeId::RlzPv, 1 << 20, 4).check(1 << 21).is_err());
        assert!(Scheme::for_dictionary(SchemeId::RlzZzz, 1 << 20, 0).check(1 << 20).is_err());
        assert!(Scheme::for_dictionary(SchemeId::Copy, 0, 4).check(0).is_ok());
    }

    #[test]
    fn damaged_payloads() {
        let p = PrimingContext::default();
        for id in SchemeId::ALL.into_iter().filter(|id| id.is_rlz()) {
            let scheme = Scheme::for_dictionary(id, DICT_LEN, 4);
            let fs = random_streams(11, 60, scheme.parse_mode());
            let eb = encode_block(&fs, &scheme, &p).unwrap();
            let decode = |bytes: &[u8], len| decode_block(bytes, &scheme, &p, DICT_LEN, len);
            assert!(decode(&eb.payload[..eb.payload.len() - 1], fs.block_len).is_err(), "{id}");
            let mut longer = eb.payload.clone();
            longer.push(0x80);
            assert!(decode(&longer, fs.block_len).is_err(), "{id}");
            assert!(decode(&eb.payload, fs.block_len + 1).is_err(), "{id}");
            assert!(decode(&[], fs.block_len).is_err(), "{id}");
        }
    }

    #[test]
    fn wrong_scheme_kind() {
        let p = PrimingContext::default();
        let fs = random_streams(1, 10, ParseMode::Interleaved);
        assert!(encode_block(&fs, &Scheme::for_dictionary(SchemeId::Copy, 0, 4), &p).is_err());
        assert!(encode_block(&fs, &Scheme::for_dictionary(SchemeId::RlzZzz, DICT_LEN, 4), &p).is_err());
        assert!(encode_raw(b"abc", &Scheme::for_dictionary(SchemeId::RlzUv, DICT_LEN, 4), b"").is_err());
    }
}
