//! Bodies of the fuzz targets. Plain functions over `&[u8]` so the checked-in
//! seeds can also be replayed by an ordinary test on stable.

use std::sync::OnceLock;

use rlz_core::archive::{ArchiveReader, Manifest};
use rlz_core::codecs::priming::INTEGER_PRIME_BYTES;
use rlz_core::codecs::{
    self, bits, deflate, fastlz, vbyte, BlockCodec, PrimingContext, Scheme, SchemeId,
};
use rlz_core::dictionary::{Dictionary, DictionaryIndex};
use rlz_core::factorize;
use rlz_core::units::parse_size;

const MAX_OUTPUT: usize = 1 << 20;

fn u32_at(data: &[u8], at: usize) -> Option<u32> {
    Some(u32::from_le_bytes(data.get(at..at + 4)?.try_into().ok()?))
}

/// `count` byte, then vbyte values.
pub fn vbyte_decode(data: &[u8]) {
    let Some((&count, rest)) = data.split_first() else { return };
    let mut values = Vec::new();
    if let Ok(used) = vbyte::decode_many(rest, count as usize, &mut values) {
        assert!(used <= rest.len());
        assert_eq!(values.len(), count as usize);
        let mut again = Vec::new();
        for &v in &values {
            vbyte::encode(v, &mut again);
        }
        let mut back = Vec::new();
        assert_eq!(vbyte::decode_many(&again, values.len(), &mut back).unwrap(), again.len());
        assert_eq!(back, values);
    }
}

/// width byte, u16 count, packed bits.
pub fn unpack_bits(data: &[u8]) {
    if data.len() < 3 {
        return;
    }
    let width = (data[0] % 32) as u32 + 1;
    let count = u16::from_le_bytes([data[1], data[2]]) as usize;
    if let Ok(values) = bits::unpack_bits(&data[3..], count, width) {
        assert_eq!(values.len(), count);
        let packed = bits::pack_bits(&values, width).unwrap();
        assert_eq!(packed.len(), bits::packed_len(count, width));
        assert_eq!(bits::unpack_bits(&packed, count, width).unwrap(), values);
    }
}

/// u32 expected length, token stream. The whole input is also round-tripped.
pub fn fastlz(data: &[u8]) {
    if let Some(len) = u32_at(data, 0) {
        let len = len as usize % MAX_OUTPUT;
        if let Ok(out) = fastlz::decompress(&data[4..], len) {
            assert_eq!(out.len(), len);
        }
    }
    let packed = fastlz::compress(data);
    assert_eq!(fastlz::decompress(&packed, data.len()).unwrap(), data);
}

/// u32 expected length, raw DEFLATE. The whole input is also round-tripped
/// with its first half as the prime.
pub fn deflate(data: &[u8]) {
    if let Some(len) = u32_at(data, 0) {
        let len = len as usize % MAX_OUTPUT;
        if let Ok(out) = deflate::decompress(&data[4..], None, len) {
            assert_eq!(out.len(), len);
        }
    }
    let (prime, body) = data.split_at(data.len() / 2);
    let packed = deflate::compress(body, Some(prime));
    assert_eq!(deflate::decompress(&packed, Some(prime), body.len()).unwrap(), body);
}

fn fixed_dictionary() -> &'static Dictionary {
    static DICT: OnceLock<Dictionary> = OnceLock::new();
    DICT.get_or_init(|| {
        let text: Vec<u8> = (0..16 * 1024u32)
            .map(|i| b"the quick brown fox jumps over a lazy dog "[(i as usize * 7 + (i as usize >> 5)) % 42])
            .collect();
        Dictionary::from_bytes(&text, 4096, 64).expect("valid sizes")
    })
}

fn fixed_primes() -> &'static PrimingContext {
    static PRIMES: OnceLock<PrimingContext> = OnceLock::new();
    PRIMES.get_or_init(|| PrimingContext {
        offsets: (0..INTEGER_PRIME_BYTES).map(|i| (i % 251) as u8).collect(),
        lengths: (0..INTEGER_PRIME_BYTES).map(|i| (i % 13) as u8).collect(),
    })
}

/// scheme id byte, u32 block length, payload; decoded against a fixed 4 KiB
/// dictionary.
pub fn decode_block(data: &[u8]) {
    let (Some(&id), Some(len)) = (data.first(), u32_at(data, 1)) else { return };
    let id = SchemeId::ALL[id as usize % SchemeId::ALL.len()];
    let block_len = len % (64 * 1024) + 1;
    let payload = &data[5..];
    let dict = fixed_dictionary();
    let empty = PrimingContext::default();
    let primes = if id == SchemeId::RlzZzPrimed { fixed_primes() } else { &empty };
    let scheme = Scheme::for_dictionary(id, dict.len(), 4);
    if id.is_rlz() {
        if let Ok(fs) = codecs::decode_block(payload, &scheme, primes, dict.len(), block_len) {
            let text = factorize::defactorize(dict, &fs).expect("validated streams decode");
            assert_eq!(text.len(), block_len as usize);
        }
    }
    let codec = BlockCodec { scheme: &scheme, dict, primes };
    let mut out = Vec::new();
    if codec.decompress_into(payload, 0, block_len, &mut out).is_ok() {
        assert_eq!(out.len(), block_len as usize);
    }
}

/// First half is the dictionary, second half the block; every RLZ scheme
/// must reproduce the block.
pub fn block_round_trip(data: &[u8]) {
    let (dict_bytes, block) = data.split_at(data.len() / 2);
    if dict_bytes.is_empty() || block.is_empty() {
        return;
    }
    let dict = Dictionary::from_parts(dict_bytes.to_vec(), 1, dict_bytes.len() as u64).unwrap();
    let index = DictionaryIndex::new(&dict).unwrap();
    let primes = fixed_primes();
    for id in SchemeId::ALL {
        let scheme = Scheme::for_dictionary(id, dict.len(), 1 + data[0] as u32 % 8);
        let codec = BlockCodec { scheme: &scheme, dict: &dict, primes };
        let eb = codec.compress(Some(&index), block, 0).unwrap();
        let mut out = Vec::new();
        codec.decompress_into(&eb.payload, 0, block.len() as u32, &mut out).unwrap();
        assert_eq!(out, block, "{id}");
    }
}

/// A whole archive file.
pub fn archive_open(data: &[u8]) {
    let Ok(reader) = ArchiveReader::from_source(data.to_vec()) else { return };
    let total = reader.source_length();
    if total == 0 || total > 16 << 20 {
        return;
    }
    if let Ok(all) = reader.get_range(0, total) {
        assert_eq!(all.len() as u64, total);
        if let Ok(tail) = reader.get_range(total - 1, 1) {
            assert_eq!(tail[0], all[all.len() - 1]);
        }
    }
    let _ = reader.stats();
    if let Some(m) = reader.manifest() {
        for e in m.entries().iter().take(16) {
            let _ = reader.document(&e.id);
        }
    }
}

/// A serialized manifest; valid ones re-serialize to the same bytes.
pub fn manifest(data: &[u8]) {
    if let Ok(m) = Manifest::from_bytes(data, u64::MAX) {
        assert_eq!(m.to_bytes(), data);
    }
}

/// A size string such as `16KiB`.
pub fn size_string(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(n) = parse_size(text) {
        let t = text.trim();
        if t.bytes().all(|b| b.is_ascii_digit()) {
            assert_eq!(t.parse::<u64>().unwrap(), n);
        }
    }
}

pub type Check = fn(&[u8]);

/// Checks by target name, for seed replay.
pub const ALL: &[(&str, Check)] = &[
    ("vbyte_decode", vbyte_decode),
    ("unpack_bits", unpack_bits),
    ("fastlz", fastlz),
    ("deflate", deflate),
    ("decode_block", decode_block),
    ("block_round_trip", block_round_trip),
    ("archive_open", archive_open),
    ("manifest", manifest),
    ("size_string", size_string),
];

