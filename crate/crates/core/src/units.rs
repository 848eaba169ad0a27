//! Binary size suffixes (`16k`, `64MiB`, `1G`) and percentage formatting.

use crate::{Error, Result};

pub const KIB: u64 = 1 << 10;
pub const MIB: u64 = 1 << 20;
pub const GIB: u64 = 1 << 30;

/// Parses a byte count with an optional binary suffix.
///
/// Accepted suffixes are `k`, `m`, `g` in either case, optionally followed
/// by `b` or `ib` (`16k`, `16K`, `16KB`, `16KiB` all mean 16,384).
pub fn parse_size(text: &str) -> Result<u64> {
    let text = text.trim();
    let split = text
        .find(|c: char| !c.is_ascii_digit())
        .unwrap_or(text.len());
    let (digits, suffix) = text.split_at(split);
    if digits.is_empty() {
        return Err(Error::param(format!("size {text:?} has no digits")));
    }
    let value: u64 = digits
        .parse()
        .map_err(|_| Error::param(format!("size {text:?} does not fit in 64 bits")))?;
    let multiplier = match suffix.to_ascii_lowercase().as_str() {
        "" | "b" => 1,
        "k" | "kb" | "kib" => KIB,
        "m" | "mb" | "mib" => MIB,
        "g" | "gb" | "gib" => GIB,
        _ => return Err(Error::param(format!("unknown size suffix in {text:?}"))),
    };
    value
        .checked_mul(multiplier)
        .ok_or_else(|| Error::param(format!("size {text:?} does not fit in 64 bits")))
}

/// Renders `part / whole` as a percentage with one decimal place.
pub fn percent(part: f64, whole: f64) -> String {
    if whole == 0.0 {
        return "n/a".to_string();
    }
    format!("{:.1}%", 100.0 * part / whole)
}

/// Human-readable binary size, e.g. `64.0 MiB`.
pub fn format_size(bytes: u64) -> String {
    let b = bytes as f64;
    if bytes >= GIB {
        format!("{:.1} GiB", b / GIB as f64)
    } else if bytes >= MIB {
        format!("{:.1} MiB", b / MIB as f64)
    } else if bytes >= KIB {
        format!("{:.1} KiB", b / KIB as f64)
    } else {
        format!("{bytes} B")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffixes_are_binary() {
        assert_eq!(parse_size("4096").unwrap(), 4096);
        assert_eq!(parse_size("16k").unwrap(), 16_384);
        assert_eq!(parse_size("16KiB").unwrap(), 16_384);
        assert_eq!(parse_size("64M").unwrap(), 64 * MIB);
        assert_eq!(parse_size("1g").unwrap(), GIB);
        assert_eq!(parse_size(" 2mb ").unwrap(), 2 * MIB);
    }

    #[test]
    fn malformed_sizes_are_rejected() {
        for bad in ["", "k", "12q", "1.5M", "-3", "99999999999999999999", "17179869184G"] {
            assert!(parse_size(bad).is_err(), "{bad:?} accepted");
        }
    }

    #[test]
    fn dictionary_share_of_large_collection() {
        // 64 MiB of dictionary against 64 GiB of text.
        assert_eq!(percent((64 * MIB) as f64, (64 * GIB) as f64), "0.1%");
        assert_eq!(format_size(64 * MIB), "64.0 MiB");
    }
}
