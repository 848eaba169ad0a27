//! Byte-oriented variable-length integers: 7-bit groups, least significant
//! group first, high bit set on the final byte.

use crate::{Error, Result};

const MAX_BYTES: usize = 5;

pub fn encode(mut n: u32, out: &mut Vec<u8>) {
    while n >= 0x80 {
        out.push((n & 0x7f) as u8);
        n >>= 7;
    }
    out.push(n as u8 | 0x80);
}

pub fn encoded_len(n: u32) -> usize {
    match n {
        0..=0x7f => 1,
        0x80..=0x3fff => 2,
        0x4000..=0x1f_ffff => 3,
        0x20_0000..=0xfff_ffff => 4,
        _ => 5,
    }
}

/// Decodes one value, returning it with the number of bytes consumed.
pub fn decode(buf: &[u8]) -> Result<(u32, usize)> {
    let mut value: u64 = 0;
    for (i, &b) in buf.iter().take(MAX_BYTES).enumerate() {
        value |= ((b & 0x7f) as u64) << (7 * i);
        if b & 0x80 != 0 {
            let value = u32::try_from(value).map_err(|_| Error::corrupt("vbyte value exceeds 32 bits"))?;
            return Ok((value, i + 1));
        }
    }
    if buf.len() >= MAX_BYTES {
        Err(Error::corrupt("vbyte code longer than 5 bytes"))
    } else {
        Err(Error::corrupt("truncated vbyte code"))
    }
}

/// Decodes exactly `count` values from the front of `buf`.
pub fn decode_many(buf: &[u8], count: usize, out: &mut Vec<u32>) -> Result<usize> {
    out.reserve(count);
    let mut pos = 0;
    for _ in 0..count {
        // Lengths are almost always a single byte.
        match buf.get(pos) {
            Some(&b) if b & 0x80 != 0 => {
                out.push((b & 0x7f) as u32);
                pos += 1;
            }
            _ => {
                let (v, used) = decode(&buf[pos.min(buf.len())..])?;
                out.push(v);
                pos += used;
            }
        }
    }
    Ok(pos)
}
