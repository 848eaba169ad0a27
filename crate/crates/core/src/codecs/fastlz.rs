//! Byte-oriented LZ77 baseline for whole blocks.
//!
//! Token stream, one control byte per token:
//!
//! * `0ccccccc`: literal run of `c` bytes (1..=127) that follow.
//! * `1lllllll dd dd`: copy `l + 4` bytes (4..=131) from `d` bytes back,
//!   `d` a little-endian u16 in 1..=65535. Copies may overlap their output.
//!
//! Matches are found greedily through hash chains over 4-byte prefixes.

use crate::{Error, Result};

pub const MIN_MATCH: usize = 4;
pub const MAX_MATCH: usize = MIN_MATCH + 127;
pub const MAX_LITERAL_RUN: usize = 127;
pub const MAX_DISTANCE: usize = 65_535;

const HASH_BITS: u32 = 15;
const MAX_CHAIN: usize = 24;
const NONE: u32 = u32::MAX;

fn hash4(bytes: &[u8]) -> usize {
    let v = u32::from_le_bytes(bytes[..4].try_into().unwrap());
    (v.wrapping_mul(2_654_435_761) >> (32 - HASH_BITS)) as usize
}

pub fn compress(data: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(data.len() / 2 + 16);
    let mut head = vec![NONE; 1 << HASH_BITS];
    let mut prev = vec![NONE; data.len()];
    let mut literal_start = 0;
    let mut pos = 0;

    let insert = |head: &mut [u32], prev: &mut [u32], p: usize| {
        if p + MIN_MATCH <= data.len() {
            let h = hash4(&data[p..]);
            prev[p] = head[h];
            head[h] = p as u32;
        }
    };

    while pos + MIN_MATCH <= data.len() {
        let (best_len, best_dist) = find_match(data, pos, &head, &prev);
        if best_len >= MIN_MATCH {
            flush_literals(&data[literal_start..pos], &mut out);
            out.push(0x80 | (best_len - MIN_MATCH) as u8);
            out.extend_from_slice(&(best_dist as u16).to_le_bytes());
            for p in pos..pos + best_len {
                insert(&mut head, &mut prev, p);
            }
            pos += best_len;
            literal_start = pos;
        } else {
            insert(&mut head, &mut prev, pos);
            pos += 1;
        }
    }
    flush_literals(&data[literal_start..], &mut out);
    out
}

fn find_match(data: &[u8], pos: usize, head: &[u32], prev: &[u32]) -> (usize, usize) {
    let limit = (data.len() - pos).min(MAX_MATCH);
    let mut candidate = head[hash4(&data[pos..])];
    let (mut best_len, mut best_dist) = (0, 0);
    for _ in 0..MAX_CHAIN {
        if candidate == NONE {
            break;
        }
        let c = candidate as usize;
        let dist = pos - c;
        if dist > MAX_DISTANCE {
            break;
        }
        let len = data[c..]
            .iter()
            .zip(&data[pos..pos + limit])
            .take_while(|(a, b)| a == b)
            .count();
        if len > best_len {
            best_len = len;
            best_dist = dist;
            if len == limit {
                break;
            }
        }
        candidate = prev[c];
    }
    (best_len, best_dist)
}

fn flush_literals(mut lits: &[u8], out: &mut Vec<u8>) {
    while !lits.is_empty() {
        let n = lits.len().min(MAX_LITERAL_RUN);
        out.push(n as u8);
        out.extend_from_slice(&lits[..n]);
        lits = &lits[n..];
    }
}

pub fn decompress(src: &[u8], expected_len: usize) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(expected_len);
    decompress_into(src, expected_len, &mut out)?;
    Ok(out)
}

/// Appends exactly `expected_len` bytes to `out`.
pub fn decompress_into(src: &[u8], expected_len: usize, out: &mut Vec<u8>) -> Result<()> {
    let start = out.len();
    let end = start + expected_len;
    out.reserve(expected_len);
    let mut i = 0;
    while i < src.len() {
        let control = src[i];
        i += 1;
        if control & 0x80 == 0 {
            let n = control as usize;
            if n == 0 {
                return Err(Error::corrupt("empty literal run"));
            }
            let lits = src
                .get(i..i + n)
                .ok_or_else(|| Error::corrupt("literal run past end of input"))?;
            if out.len() + n > end {
                return Err(Error::corrupt("literal run past end of block"));
            }
            out.extend_from_slice(lits);
            i += n;
        } else {
            let len = (control & 0x7f) as usize + MIN_MATCH;
            let d = src
                .get(i..i + 2)
                .ok_or_else(|| Error::corrupt("copy token past end of input"))?;
            let dist = u16::from_le_bytes([d[0], d[1]]) as usize;
            i += 2;
            let produced = out.len() - start;
            if dist == 0 || dist > produced {
                return Err(Error::corrupt(format!("copy distance {dist} with {produced} bytes decoded")));
            }
            if out.len() + len > end {
                return Err(Error::corrupt("copy past end of block"));
            }
            let from = out.len() - dist;
            if dist >= len {
                out.extend_from_within(from..from + len);
            } else {
                for k in 0..len {
                    let b = out[from + k];
                    out.push(b);
                }
            }
        }
    }
    if out.len() != end {
        let produced = out.len() - start;
        out.truncate(start);
        return Err(Error::corrupt(format!("decoded {produced} of {expected_len} bytes")));
    }
    Ok(())
}
