//! Fixed-width bit packing, least significant bit first.

use crate::{Error, Result};

/// Smallest `w` with `2^w >= n`.
pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        u64::BITS - (n - 1).leading_zeros()
    }
}

pub fn packed_len(count: usize, width: u32) -> usize {
    (count * width as usize).div_ceil(8)
}

pub fn pack_bits(values: &[u32], width: u32) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(packed_len(values.len(), width));
    pack_bits_into(values, width, &mut out)?;
    Ok(out)
}

pub fn pack_bits_into(values: &[u32], width: u32, out: &mut Vec<u8>) -> Result<()> {
    check_width(width)?;
    let limit = 1u64 << width;
    let mut acc: u64 = 0;
    let mut filled = 0u32;
    for &v in values {
        if v as u64 >= limit {
            return Err(Error::param(format!("value {v} does not fit in {width} bits")));
        }
        acc |= (v as u64) << filled;
        filled += width;
        while filled >= 8 {
            out.push(acc as u8);
            acc >>= 8;
            filled -= 8;
        }
    }
    if filled > 0 {
        out.push(acc as u8);
    }
    Ok(())
}

pub fn unpack_bits(bytes: &[u8], count: usize, width: u32) -> Result<Vec<u32>> {
    let mut out = Vec::with_capacity(count);
    unpack_bits_into(bytes, count, width, &mut out)?;
    Ok(out)
}

pub fn unpack_bits_into(bytes: &[u8], count: usize, width: u32, out: &mut Vec<u32>) -> Result<()> {
    check_width(width)?;
    let need = packed_len(count, width);
    if bytes.len() < need {
        return Err(Error::corrupt(format!(
            "{count} packed {width}-bit values need {need} bytes, have {}",
            bytes.len()
        )));
    }
    out.reserve(count);
    let mask = (1u64 << width) - 1;
    let mut acc: u64 = 0;
    let mut filled = 0u32;
    let mut src = bytes[..need].iter();
    for _ in 0..count {
        while filled < width {
            acc |= (*src.next().expect("length checked above") as u64) << filled;
            filled += 8;
        }
        out.push((acc & mask) as u32);
        acc >>= width;
        filled -= width;
    }
    Ok(())
}

fn check_width(width: u32) -> Result<()> {
    if (1..=32).contains(&width) {
        Ok(())
    } else {
        Err(Error::param(format!("bit width {width} outside 1..=32")))
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    // Independent bit-at-a-time packer.
    fn oracle_pack(values: &[u32], width: u32) -> Vec<u8> {
        let total = values.len() * width as usize;
        let mut out = vec![0u8; total.div_ceil(8)];
        let mut bit = 0;
        for &v in values {
            for b in 0..width {
                if (v >> b) & 1 == 1 {
                    out[bit / 8] |= 1 << (bit % 8);
                }
                bit += 1;
            }
        }
        out
    }

    #[test]
    fn reference_packings() {
        assert_eq!(pack_bits(&[1], 1).unwrap(), [0x01]);
        assert_eq!(pack_bits(&[5, 2, 7], 3).unwrap(), oracle_pack(&[5, 2, 7], 3));
        assert_eq!(pack_bits(&[5, 2, 7], 3).unwrap(), [0xd5, 0x01]);
        assert_eq!(ceil_log2(64 << 20), 26);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(5), 3);
    }

    #[test]
    fn errors() {
        assert!(matches!(pack_bits(&[8], 3), Err(Error::Param(_))));
        assert!(matches!(pack_bits(&[1], 0), Err(Error::Param(_))));
        assert!(matches!(pack_bits(&[1], 33), Err(Error::Param(_))));
        assert!(matches!(unpack_bits(&[0xff], 3, 3), Err(Error::Corrupt(_))));
    }

    proptest! {
        #[test]
        fn matches_oracle_and_inverts(width in 1u32..=32, raw in prop::collection::vec(any::<u32>(), 0..300)) {
            let values: Vec<u32> = raw.iter().map(|v| if width == 32 { *v } else { v & ((1 << width) - 1) }).collect();
            let packed = pack_bits(&values, width).unwrap();
            prop_assert_eq!(&packed, &oracle_pack(&values, width));
            prop_assert_eq!(unpack_bits(&packed, values.len(), width).unwrap(), values);
        }
    }
}
