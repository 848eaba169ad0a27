//! Raw DEFLATE (RFC 1951) with optional preset dictionaries.
//!
//! A prime is treated as text preceding the input. Only its final 32 KiB
//! can be referenced, so longer primes are trimmed to that window.

use flate2::{Compress, Compression, Decompress, FlushCompress, FlushDecompress, Status};

use crate::{Error, Result};

pub const WINDOW: usize = 32 * 1024;

fn window_of(prime: &[u8]) -> &[u8] {
    &prime[prime.len().saturating_sub(WINDOW)..]
}

pub fn compress(data: &[u8], prime: Option<&[u8]>) -> Vec<u8> {
    let mut out = Vec::new();
    compress_into(data, prime, &mut out);
    out
}

/// Appends the compressed form of `data` to `out`, returning its length.
pub fn compress_into(data: &[u8], prime: Option<&[u8]>, out: &mut Vec<u8>) -> usize {
    let mut z = Compress::new(Compression::default(), false);
    if let Some(p) = prime.filter(|p| !p.is_empty()) {
        z.set_dictionary(window_of(p))
            .expect("setting a dictionary on a fresh raw stream cannot fail");
    }
    let start = out.len();
    out.reserve(data.len() / 2 + 64);
    loop {
        let consumed = z.total_in() as usize;
        if out.capacity() - out.len() < 64 {
            out.reserve(out.capacity().max(4096));
        }
        let status = z
            .compress_vec(&data[consumed..], out, FlushCompress::Finish)
            .expect("compression of in-memory data cannot fail");
        if status == Status::StreamEnd {
            break;
        }
    }
    out.len() - start
}

pub fn decompress(blob: &[u8], prime: Option<&[u8]>, expected_len: usize) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    decompress_into(blob, prime, expected_len, &mut out)?;
    Ok(out)
}

/// Appends exactly `expected_len` decoded bytes to `out`; anything else,
/// including trailing input, is corruption.
pub fn decompress_into(blob: &[u8], prime: Option<&[u8]>, expected_len: usize, out: &mut Vec<u8>) -> Result<()> {
    let mut z = Decompress::new(false);
    if let Some(p) = prime.filter(|p| !p.is_empty()) {
        z.set_dictionary(window_of(p))
            .map_err(|e| Error::corrupt(format!("cannot install prime: {e}")))?;
    }
    let start = out.len();
    // One spare byte so overlong streams are noticed.
    out.reserve_exact(expected_len + 1);
    loop {
        let consumed = z.total_in() as usize;
        let before_out = z.total_out();
        let status = z
            .decompress_vec(&blob[consumed..], out, FlushDecompress::Finish)
            .map_err(|e| Error::corrupt(format!("DEFLATE stream: {e}")))?;
        let produced = out.len() - start;
        if produced > expected_len {
            out.truncate(start);
            return Err(Error::corrupt(format!("DEFLATE stream longer than {expected_len} bytes")));
        }
        match status {
            Status::StreamEnd => break,
            _ if z.total_in() as usize == consumed && z.total_out() == before_out => {
                out.truncate(start);
                return Err(Error::corrupt("truncated DEFLATE stream"));
            }
            _ => {}
        }
    }
    let produced = out.len() - start;
    if produced != expected_len || z.total_in() as usize != blob.len() {
        out.truncate(start);
        return Err(Error::corrupt(format!(
            "DEFLATE stream gave {produced} bytes (expected {expected_len}) from {} of {} input bytes",
            z.total_in(),
            blob.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use rand::{Rng, RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn empty_input() {
        let c = compress(b"", None);
        assert!(!c.is_empty());
        assert_eq!(decompress(&c, None, 0).unwrap(), b"");
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for len in [1usize, 100, 40_000, 1 << 20] {
            let mut data = vec![0u8; len];
            rng.fill_bytes(&mut data);
            // make half of it compressible
            for b in data.iter_mut().take(len / 2) {
                *b %= 4;
            }
            let c = compress(&data, None);
            assert_eq!(decompress(&c, None, len).unwrap(), data);
        }
    }

    fn repetitive_text(seed: u64, len: usize) -> Vec<u8> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let words: Vec<Vec<u8>> = (0..300)
            .map(|_| (0..rng.random_range(3..9)).map(|_| rng.random_range(b'a'..=b'z')).collect())
            .collect();
        let mut out = Vec::with_capacity(len + 16);
        while out.len() < len {
            out.extend_from_slice(&words[rng.random_range(0..words.len())]);
            out.push(b' ');
        }
        out.truncate(len);
        out
    }

    #[test]
    fn priming_helps_and_never_changes_output() {
        let text = repetitive_text(42, 16 * 1024 + 4096);
        let (prime, block) = text.split_at(16 * 1024);
        let plain = compress(block, None);
        let primed = compress(block, Some(prime));
        assert!(primed.len() <= plain.len(), "{} > {}", primed.len(), plain.len());
        assert_eq!(decompress(&primed, Some(prime), block.len()).unwrap(), block);
        assert_eq!(decompress(&plain, None, block.len()).unwrap(), block);
    }

    #[test]
    fn long_primes_use_the_trailing_window() {
        let text = repetitive_text(5, 80_000);
        let (prime, block) = text.split_at(70_000);
        let a = compress(block, Some(prime));
        let b = compress(block, Some(&prime[prime.len() - WINDOW..]));
        assert_eq!(a, b);
        assert_eq!(decompress(&a, Some(prime), block.len()).unwrap(), block);
    }

    #[test]
    fn missing_prime_is_corruption() {
        let block = b"the quick brown fox jumps over the lazy dog".repeat(3);
        let prime = block.clone();
        let c = compress(&block, Some(&prime));
        assert!(matches!(decompress(&c, None, block.len()), Err(Error::Corrupt(_))));
    }

    #[test]
    fn damaged_streams() {
        let data = repetitive_text(9, 5000);
        let c = compress(&data, None);
        assert!(decompress(&c[..c.len() / 2], None, data.len()).is_err());
        assert!(decompress(&c, None, data.len() - 1).is_err());
        assert!(decompress(&c, None, data.len() + 1).is_err());
        let mut trailing = c.clone();
        trailing.push(0);
        assert!(decompress(&trailing, None, data.len()).is_err());
        assert!(decompress(&[0xff; 16], None, 10).is_err());
    }
}
