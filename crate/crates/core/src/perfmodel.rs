//! Analytical access-time model for blocked archives on rotating and solid
//! state media.
//!
//! A random query pays one seek, transfers every touched compressed block,
//! and decodes from the start of the first touched block to the end of the
//! fragment. Starts are uniform, so the expected in-block offset is half a
//! block. Rates use decimal megabytes, as drive datasheets do.

use serde::Serialize;

use crate::units::KIB;
use crate::{Error, Result};

pub const MB: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MediaProfile {
    pub name: &'static str,
    /// Seek plus rotational latency, seconds.
    pub random_read_latency: f64,
    /// Bytes per second.
    pub sequential_transfer_rate: f64,
}

impl MediaProfile {
    pub const HDD: MediaProfile = MediaProfile {
        name: "hdd",
        random_read_latency: 8.5e-3,
        sequential_transfer_rate: 150.0 * MB,
    };
    pub const SSD: MediaProfile = MediaProfile {
        name: "ssd",
        random_read_latency: 0.12e-3,
        sequential_transfer_rate: 1000.0 * MB,
    };

    pub fn preset(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "hdd" => Ok(Self::HDD),
            "ssd" => Ok(Self::SSD),
            _ => Err(Error::param(format!("unknown media preset {name:?}; expected hdd or ssd"))),
        }
    }

    pub fn custom(random_read_latency: f64, sequential_transfer_rate: f64) -> Result<Self> {
        let p = MediaProfile {
            name: "custom",
            random_read_latency,
            sequential_transfer_rate,
        };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        if !(self.random_read_latency > 0.0 && self.sequential_transfer_rate > 0.0) {
            return Err(Error::param("media latency and transfer rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelInputs {
    pub block_size: u64,
    pub fragment_size: u64,
    /// Compressed size over original size.
    pub compression_rate: f64,
    /// Decoded bytes per second.
    pub decode_rate: f64,
    /// Effective latency when queries are served in address order.
    pub batch_latency_override: Option<f64>,
}

impl ModelInputs {
    pub fn new(block_size: u64, fragment_size: u64, compression_rate: f64, decode_rate: f64) -> Self {
        ModelInputs {
            block_size,
            fragment_size,
            compression_rate,
            decode_rate,
            batch_latency_override: None,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.block_size == 0 || self.fragment_size == 0 {
            return Err(Error::param("block and fragment sizes must be positive"));
        }
        if !(self.compression_rate > 0.0 && self.compression_rate <= 1.0) {
            return Err(Error::param(format!(
                "compression rate {} must be in (0, 1]",
                self.compression_rate
            )));
        }
        if self.decode_rate.is_nan() || self.decode_rate <= 0.0 {
            return Err(Error::param("decode rate must be positive"));
        }
        Ok(())
    }

    /// Expected blocks touched by a query starting mid-block.
    pub fn touched_blocks(&self) -> u64 {
        (self.block_size / 2 + self.fragment_size).div_ceil(self.block_size)
    }
}

/// Seconds per query, by component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Breakdown {
    pub latency: f64,
    pub transfer: f64,
    pub decode: f64,
}

impl Breakdown {
    pub fn total(&self) -> f64 {
        self.latency + self.transfer + self.decode
    }

    pub fn decode_share(&self) -> f64 {
        self.decode / self.total()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction {
    pub qps: f64,
    pub breakdown: Breakdown,
}

fn predict(latency: f64, m: &MediaProfile, inp: &ModelInputs) -> Result<Prediction> {
    m.check()?;
    inp.check()?;
    let bs = inp.block_size as f64;
    let transfer = inp.touched_blocks() as f64 * bs * inp.compression_rate / m.sequential_transfer_rate;
    let decode = (bs / 2.0 + inp.fragment_size as f64) / inp.decode_rate;
    let breakdown = Breakdown {
        latency,
        transfer,
        decode,
    };
    Ok(Prediction {
        qps: 1.0 / breakdown.total(),
        breakdown,
    })
}

/// Random-query rate.
pub fn predict_random_qps(m: &MediaProfile, inp: &ModelInputs) -> Result<Prediction> {
    predict(m.random_read_latency, m, inp)
}

/// Query rate when address-sorted queries shorten the mean seek to
/// `batch_latency`.
///
/// [`ModelInputs::batch_latency_override`] is not consulted here; callers
/// pass the latency they want explicitly.
pub fn predict_batch_qps(m: &MediaProfile, inp: &ModelInputs, batch_latency: f64) -> Result<Prediction> {
    if !(0.0..=m.random_read_latency).contains(&batch_latency) {
        return Err(Error::param(format!(
            "batch latency {batch_latency} s must be between 0 and the random latency {} s",
            m.random_read_latency
        )));
    }
    predict(batch_latency, m, inp)
}

/// Fragments per second when reading the archive front to back: limited by
/// decoding, or by transfer when the data compresses poorly.
pub fn predict_sequential_rate(m: &MediaProfile, inp: &ModelInputs) -> Result<f64> {
    m.check()?;
    inp.check()?;
    let f = inp.fragment_size as f64;
    let decode_bound = inp.decode_rate / f;
    let transfer_bound = m.sequential_transfer_rate / (f * inp.compression_rate);
    Ok(decode_bound.min(transfer_bound))
}

/// Static-code size estimate for one block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaticCodeEstimate {
    pub bits_per_factor: u32,
    pub factors: f64,
    pub payload_bytes: f64,
    pub rate: f64,
}

/// Payload of a block of `block_size` bytes parsed into factors of mean
/// length `mean_factor_len`, each costing an `offset_bits` pointer and a
/// one-byte length.
pub fn estimate_static_code(block_size: u64, mean_factor_len: f64, offset_bits: u32) -> StaticCodeEstimate {
    let bits_per_factor = offset_bits + 8;
    let factors = block_size as f64 / mean_factor_len;
    let payload_bytes = factors * bits_per_factor as f64 / 8.0;
    StaticCodeEstimate {
        bits_per_factor,
        factors,
        payload_bytes,
        rate: payload_bytes / block_size as f64,
    }
}

/// Default inputs: 16 KiB fragments over 64 KiB blocks, 22% rate, 260 MB/s
/// decoding.
impl Default for ModelInputs {
    fn default() -> Self {
        ModelInputs::new(64 * KIB, 16 * KIB, 0.22, 260.0 * MB)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs()
    }

    #[test]
    fn breakdown_sums_to_inverse_rate() {
        let p = predict_random_qps(&MediaProfile::HDD, &ModelInputs::default()).unwrap();
        assert!(close(p.breakdown.total(), 1.0 / p.qps, 1e-12));
    }

    #[test]
    fn touched_blocks_expectation() {
        assert_eq!(ModelInputs::new(64 * KIB, 16 * KIB, 0.2, 1.0).touched_blocks(), 1);
        assert_eq!(ModelInputs::new(16 * KIB, 16 * KIB, 0.2, 1.0).touched_blocks(), 2);
        assert_eq!(ModelInputs::new(4 * KIB, 16 * KIB, 0.2, 1.0).touched_blocks(), 5);
    }

    #[test]
    fn monotone_in_each_input() {
        let base = ModelInputs::default();
        let q = |m: &MediaProfile, i: &ModelInputs| predict_random_qps(m, i).unwrap().qps;
        let hdd = MediaProfile::HDD;
        let slower = MediaProfile::custom(9e-3, hdd.sequential_transfer_rate).unwrap();
        assert!(q(&slower, &base) < q(&hdd, &base));
        let worse = ModelInputs {
            compression_rate: 0.3,
            ..base
        };
        assert!(q(&hdd, &worse) < q(&hdd, &base));
        let bigger = ModelInputs {
            block_size: 128 * KIB,
            ..base
        };
        assert!(q(&hdd, &bigger) < q(&hdd, &base));
    }

    #[test]
    fn batch_limits() {
        let m = MediaProfile::HDD;
        let i = ModelInputs::default();
        let r = predict_random_qps(&m, &i).unwrap();
        assert_eq!(predict_batch_qps(&m, &i, m.random_read_latency).unwrap(), r);
        let z = predict_batch_qps(&m, &i, 0.0).unwrap();
        assert!(close(z.qps, 1.0 / (r.breakdown.transfer + r.breakdown.decode), 1e-12));
        assert!(predict_batch_qps(&m, &i, 0.01).is_err());
    }

    #[test]
    fn copy_is_transfer_bound() {
        let i = ModelInputs::new(16 * KIB, 16 * KIB, 1.0, 300.0 * MB);
        let r = predict_sequential_rate(&MediaProfile::HDD, &i).unwrap();
        assert!(close(r, 150e6 / 16384.0, 1e-12));
    }

    #[test]
    fn bad_inputs() {
        let m = MediaProfile::HDD;
        for i in [
            ModelInputs::new(0, 1, 0.2, 1.0),
            ModelInputs::new(1, 1, 0.0, 1.0),
            ModelInputs::new(1, 1, 1.5, 1.0),
            ModelInputs::new(1, 1, 0.5, 0.0),
        ] {
            assert!(predict_random_qps(&m, &i).is_err());
        }
        assert!(MediaProfile::custom(0.0, 1.0).is_err());
        assert!(MediaProfile::preset("tape").is_err());
    }
}
