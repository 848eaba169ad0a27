//! Preset data for the primed DEFLATE variants.
//!
//! Whole-block DEFLATE is primed with up to 32 KiB of dictionary text
//! sampled near the block. The primed RLZ variant uses two fixed integer
//! sequences (offsets and lengths) trained once per archive.

use std::collections::HashMap;

use crate::dictionary::Dictionary;
use crate::factorize::FactorStreams;

use super::deflate::WINDOW;

pub const TEXT_PRIME_MAX: usize = WINDOW;
pub const INTEGER_PRIME_BYTES: usize = 64 * 1024;
/// Number of blocks sampled across the corpus to train the integer primes.
pub const TRAINING_BLOCKS: usize = 64;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrimingContext {
    pub offsets: Vec<u8>,
    pub lengths: Vec<u8>,
}

impl PrimingContext {
    /// Builds the integer primes from factorized training blocks.
    pub fn train<'a>(blocks: impl IntoIterator<Item = &'a FactorStreams>) -> Self {
        let mut offsets: HashMap<u32, u64> = HashMap::new();
        let mut lengths: HashMap<u32, u64> = HashMap::new();
        for fs in blocks {
            for &o in &fs.offsets {
                *offsets.entry(o).or_default() += 1;
            }
            for &l in &fs.lengths {
                *lengths.entry(l).or_default() += 1;
            }
        }
        PrimingContext {
            offsets: integer_prime(offsets),
            lengths: integer_prime(lengths),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty() && self.lengths.is_empty()
    }
}

// Most frequent values, serialized as u32-LE with the most frequent last so
// they sit closest to the data (and inside the DEFLATE window). Front-padded
// with zeros to the full size.
fn integer_prime(freq: HashMap<u32, u64>) -> Vec<u8> {
    let slots = INTEGER_PRIME_BYTES / 4;
    let mut ranked: Vec<(u32, u64)> = freq.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(slots);
    let mut out = vec![0u8; (slots - ranked.len()) * 4];
    for (value, _) in ranked.iter().rev() {
        out.extend_from_slice(&value.to_le_bytes());
    }
    out
}

/// Dictionary text used to prime the block starting at `block_start`: the
/// samples taken just before (and including) that point, up to 32 KiB.
pub fn text_prime(dict: &Dictionary, block_start: u64) -> &[u8] {
    let data = dict.data();
    if data.is_empty() || dict.sample_interval() == 0 {
        return &[];
    }
    let s = dict.sample_size() as usize;
    let nearest = ((block_start / dict.sample_interval()) as usize).min(dict.sample_count() - 1);
    let end = ((nearest + 1) * s).min(data.len());
    let start = end.saturating_sub(TEXT_PRIME_MAX);
    let end = end.max((start + TEXT_PRIME_MAX).min(data.len()));
    &data[start..end]
}

/// Block indices used to train integer primes, spread evenly over the corpus.
pub fn training_block_indices(block_count: u64) -> Vec<u64> {
    let n = (TRAINING_BLOCKS as u64).min(block_count);
    let mut picks: Vec<u64> = (0..n).map(|i| i * block_count / n.max(1)).collect();
    picks.dedup();
    picks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorize::ParseMode;

    #[test]
    fn integer_primes_rank_by_frequency() {
        let fs = FactorStreams {
            offsets: vec![7, 7, 7, 3, 3, 9],
            lengths: vec![20, 20, 5, 5, 5, 1],
            literals: vec![],
            mode: ParseMode::Interleaved,
            block_len: 0,
        };
        let p = PrimingContext::train([&fs]);
        assert_eq!(p.offsets.len(), INTEGER_PRIME_BYTES);
        assert_eq!(p.lengths.len(), INTEGER_PRIME_BYTES);
        let tail: Vec<u32> = p.offsets[p.offsets.len() - 12..]
            .chunks(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        assert_eq!(tail, [9, 3, 7]);
        let tail: Vec<u32> = p.lengths[p.lengths.len() - 12..]
            .chunks(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        assert_eq!(tail, [1, 20, 5]);
    }

    #[test]
    fn text_prime_window() {
        // 256 samples of 1 KiB taken every 4 KiB of a 1 MiB corpus.
        let corpus: Vec<u8> = (0..(1u32 << 20)).map(|i| (i / 1024) as u8).collect();
        let d = Dictionary::from_bytes(&corpus, 256 * 1024, 1024).unwrap();
        assert_eq!(d.sample_interval(), 4096);
        let p = text_prime(&d, 0);
        assert_eq!(p, &d.data()[..TEXT_PRIME_MAX]);
        // block at 400 KiB: nearest sample is #100, the window ends with it
        let p = text_prime(&d, 400 * 1024);
        assert_eq!(p.len(), TEXT_PRIME_MAX);
        assert_eq!(p, &d.data()[101 * 1024 - TEXT_PRIME_MAX..101 * 1024]);
        let p = text_prime(&d, 1 << 40);
        assert_eq!(p, &d.data()[d.len() - TEXT_PRIME_MAX..]);
        assert!(text_prime(&Dictionary::empty(10), 0).is_empty());
    }

    #[test]
    fn training_picks() {
        assert_eq!(training_block_indices(0), Vec::<u64>::new());
        assert_eq!(training_block_indices(3), vec![0, 1, 2]);
        let p = training_block_indices(4096);
        assert_eq!(p.len(), 64);
        assert_eq!(p[1], 64);
    }
}
