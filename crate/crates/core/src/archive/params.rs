//! Scheme parameters stored right after the header.

use crate::codecs::priming::INTEGER_PRIME_BYTES;
use crate::codecs::{deflate, PrimingContext, Scheme, SchemeId};
use crate::{Error, Result};

/// Serializes the record, including its `u32` length prefix.
pub(crate) fn encode(scheme: &Scheme, primes: &PrimingContext) -> Vec<u8> {
    let mut body = Vec::new();
    body.push(scheme.offset_bit_width);
    body.extend_from_slice(&scheme.min_literal.to_le_bytes());
    for prime in [&primes.offsets, &primes.lengths] {
        let packed = deflate::compress(prime, None);
        body.extend_from_slice(&(prime.len() as u32).to_le_bytes());
        body.extend_from_slice(&(packed.len() as u32).to_le_bytes());
        body.extend_from_slice(&packed);
    }
    let mut out = Vec::with_capacity(body.len() + 4);
    out.extend_from_slice(&(body.len() as u32).to_le_bytes());
    out.extend_from_slice(&body);
    out
}

/// Parses the record body (without the length prefix).
pub(crate) fn decode(mut b: &[u8], id: SchemeId) -> Result<(Scheme, PrimingContext)> {
    let offset_bit_width = *take(&mut b, 1)?.first().unwrap();
    let min_literal = take_u32(&mut b)?;
    let mut primes = [Vec::new(), Vec::new()];
    for prime in &mut primes {
        let raw_len = take_u32(&mut b)? as usize;
        let packed_len = take_u32(&mut b)? as usize;
        if raw_len != 0 && raw_len != INTEGER_PRIME_BYTES {
            return Err(Error::corrupt(format!("integer prime of {raw_len} bytes")));
        }
        *prime = deflate::decompress(take(&mut b, packed_len)?, None, raw_len)?;
    }
    if !b.is_empty() {
        return Err(Error::corrupt("trailing bytes in the params record"));
    }
    let [offsets, lengths] = primes;
    let primes = PrimingContext { offsets, lengths };
    if (id == SchemeId::RlzZzPrimed) == primes.is_empty() {
        return Err(Error::corrupt(format!("integer primes do not fit scheme {id}")));
    }
    if !(1..=32).contains(&offset_bit_width) {
        return Err(Error::corrupt(format!("offset width {offset_bit_width}")));
    }
    let scheme = Scheme {
        id,
        offset_bit_width,
        min_literal,
    };
    Ok((scheme, primes))
}

fn take<'a>(b: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
    if b.len() < n {
        return Err(Error::corrupt("params record is truncated"));
    }
    let (head, tail) = b.split_at(n);
    *b = tail;
    Ok(head)
}

fn take_u32(b: &mut &[u8]) -> Result<u32> {
    take(b, 4).map(|s| u32::from_le_bytes(s.try_into().unwrap()))
}
