//! Seeded synthetic corpora with controllable redundancy.
//!
//! Text is emitted in segments. With probability `novelty` a segment is
//! fresh text (words drawn from a Zipf-distributed vocabulary); otherwise it
//! copies earlier output from at most `repeat_distance` bytes back, which is
//! the kind of long-range repetition web crawls are full of.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::units::MIB;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub size: u64,
    pub seed: u64,
    /// Probability that a segment is fresh text rather than a copy.
    pub novelty: f64,
    /// Furthest back a copied segment may start.
    pub repeat_distance: u64,
    pub vocabulary: usize,
    pub min_segment: usize,
    pub max_segment: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            size: 64 * MIB,
            seed: 42,
            novelty: 0.1,
            repeat_distance: 4 * MIB,
            vocabulary: 50_000,
            min_segment: 32,
            max_segment: 2048,
        }
    }
}

impl SynthConfig {
    pub fn new(size: u64, seed: u64, novelty: f64) -> Self {
        SynthConfig {
            size,
            seed,
            novelty,
            ..Default::default()
        }
    }

    fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.novelty) {
            return Err(Error::param(format!("novelty {} must be in [0, 1]", self.novelty)));
        }
        if self.repeat_distance == 0 || self.vocabulary == 0 {
            return Err(Error::param("repeat distance and vocabulary must be positive"));
        }
        if self.min_segment == 0 || self.min_segment > self.max_segment {
            return Err(Error::param("segment bounds must satisfy 1 <= min <= max"));
        }
        if usize::try_from(self.size).is_err() {
            return Err(Error::param("corpus does not fit in memory"));
        }
        Ok(())
    }
}

struct Vocabulary {
    words: Vec<Vec<u8>>,
    cdf: Vec<f64>,
}

impl Vocabulary {
    fn new(rng: &mut ChaCha8Rng, n: usize) -> Self {
        let words = (0..n)
            .map(|_| {
                let len = rng.random_range(2..=11);
                (0..len).map(|_| b'a' + rng.random_range(0..26u8)).collect()
            })
            .collect();
        let mut total = 0.0;
        let cdf = (1..=n)
            .map(|r| {
                total += 1.0 / r as f64;
                total
            })
            .collect();
        Vocabulary { words, cdf }
    }

    fn pick(&self, rng: &mut ChaCha8Rng) -> &[u8] {
        let x = rng.random::<f64>() * self.cdf[self.cdf.len() - 1];
        let i = self.cdf.partition_point(|&c| c < x).min(self.words.len() - 1);
        &self.words[i]
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<Vec<u8>> {
    cfg.check()?;
    let size = cfg.size as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let vocab = Vocabulary::new(&mut rng, cfg.vocabulary);
    let mut out = Vec::with_capacity(size);
    while out.len() < size {
        let want = rng.random_range(cfg.min_segment..=cfg.max_segment).min(size - out.len());
        if out.len() < cfg.min_segment || rng.random_bool(cfg.novelty) {
            let end = out.len() + want;
            while out.len() < end {
                out.extend_from_slice(vocab.pick(&mut rng));
                out.push(match rng.random_range(0..40) {
                    0 => b'\n',
                    1 => b'.',
                    2 => b',',
                    _ => b' ',
                });
            }
            out.truncate(end);
        } else {
            let back = rng.random_range(1..=(cfg.repeat_distance as usize).min(out.len()));
            let from = out.len() - back;
            // may overlap its own output when `back` is short
            for k in 0..want {
                out.push(out[from + k]);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codecs::deflate;

    #[test]
    fn exact_size_and_deterministic() {
        let cfg = SynthConfig::new(100_000, 3, 0.1);
        let a = generate(&cfg).unwrap();
        assert_eq!(a.len(), 100_000);
        assert_eq!(a, generate(&cfg).unwrap());
        assert_ne!(a, generate(&SynthConfig::new(100_000, 4, 0.1)).unwrap());
        assert!(generate(&SynthConfig::new(0, 3, 0.1)).unwrap().is_empty());
    }

    #[test]
    fn novelty_controls_redundancy() {
        let size = 1 << 20;
        let packed = |n| deflate::compress(&generate(&SynthConfig::new(size, 1, n)).unwrap(), None).len();
        let (low, mid, high) = (packed(0.01), packed(0.1), packed(0.5));
        assert!(low < mid && mid < high, "{low} {mid} {high}");
    }

    #[test]
    fn bad_configs() {
        assert!(generate(&SynthConfig::new(10, 1, 1.5)).is_err());
        let cfg = SynthConfig {
            min_segment: 10,
            max_segment: 5,
            ..SynthConfig::new(10, 1, 0.1)
        };
        assert!(generate(&cfg).is_err());
    }
}
