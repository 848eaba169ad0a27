//! Greedy left-to-right factorization of a block against the dictionary.
//!
//! Two layouts are produced. In the interleaved layout a literal is the
//! pair `(byte, 0)` mixed in with copy factors. In the three-stream layout a
//! `(count, 0)` pair announces a run of `count` bytes held in a separate
//! literal stream, and matches shorter than `min_literal` are folded into
//! such runs.

use crate::dictionary::{Dictionary, DictionaryIndex};
use crate::{Error, Result};

pub const DEFAULT_MIN_LITERAL: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParseMode {
    Interleaved,
    ThreeStream { min_literal: u32 },
}

/// One `(offset, length)` pair. With `length == 0` the offset is a literal
/// byte (interleaved) or a literal run count (three-stream).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Factor {
    pub offset: u32,
    pub length: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorStreams {
    pub offsets: Vec<u32>,
    pub lengths: Vec<u32>,
    pub literals: Vec<u8>,
    pub mode: ParseMode,
    pub block_len: u32,
}

impl FactorStreams {
    pub fn new(mode: ParseMode, block_len: u32) -> Self {
        FactorStreams {
            offsets: Vec::new(),
            lengths: Vec::new(),
            literals: Vec::new(),
            mode,
            block_len,
        }
    }

    pub fn factor_count(&self) -> usize {
        self.lengths.len()
    }

    pub fn factors(&self) -> impl Iterator<Item = Factor> + '_ {
        self.offsets
            .iter()
            .zip(&self.lengths)
            .map(|(&offset, &length)| Factor { offset, length })
    }

    fn push(&mut self, offset: u32, length: u32) {
        self.offsets.push(offset);
        self.lengths.push(length);
    }

    /// Checks the structural invariants against a dictionary of `dict_len`
    /// bytes without materializing the block.
    pub fn validate(&self, dict_len: usize) -> Result<()> {
        if self.offsets.len() != self.lengths.len() {
            return Err(Error::corrupt(format!(
                "{} offsets but {} lengths",
                self.offsets.len(),
                self.lengths.len()
            )));
        }
        let mut covered: u64 = 0;
        let mut literals_used: u64 = 0;
        for f in self.factors() {
            match (f.length, self.mode) {
                (0, ParseMode::Interleaved) => {
                    if f.offset > 255 {
                        return Err(Error::corrupt(format!("literal code {} exceeds a byte", f.offset)));
                    }
                    covered += 1;
                }
                (0, ParseMode::ThreeStream { .. }) => {
                    if f.offset == 0 {
                        return Err(Error::corrupt("empty literal run"));
                    }
                    covered += f.offset as u64;
                    literals_used += f.offset as u64;
                }
                (len, _) => {
                    if f.offset as u64 + len as u64 > dict_len as u64 {
                        return Err(Error::corrupt(format!(
                            "factor {}+{} runs past dictionary of {} bytes",
                            f.offset, len, dict_len
                        )));
                    }
                    covered += len as u64;
                }
            }
        }
        if literals_used != self.literals.len() as u64 {
            return Err(Error::corrupt(format!(
                "literal runs need {} bytes but the literal stream holds {}",
                literals_used,
                self.literals.len()
            )));
        }
        if covered != self.block_len as u64 {
            return Err(Error::corrupt(format!(
                "factors cover {covered} bytes, block is {} bytes",
                self.block_len
            )));
        }
        Ok(())
    }
}

/// Greedy parse of `block`. The last factor simply stops at the block end.
pub fn factorize_block(index: &DictionaryIndex<'_>, block: &[u8], mode: ParseMode) -> Result<FactorStreams> {
    if block.is_empty() {
        return Err(Error::param("cannot factorize an empty block"));
    }
    let block_len = u32::try_from(block.len()).map_err(|_| Error::param("block longer than 4 GiB"))?;
    let mut fs = FactorStreams::new(mode, block_len);
    let mut pos = 0;
    match mode {
        ParseMode::Interleaved => {
            while pos < block.len() {
                let m = index.longest_match(&block[pos..]);
                if m.length == 0 {
                    fs.push(block[pos] as u32, 0);
                    pos += 1;
                } else {
                    fs.push(m.offset, m.length);
                    pos += m.length as usize;
                }
            }
        }
        ParseMode::ThreeStream { min_literal } => {
            if min_literal == 0 {
                return Err(Error::param("min_literal must be at least 1"));
            }
            let mut run_start = None;
            while pos < block.len() {
                let m = index.longest_match(&block[pos..]);
                if m.length < min_literal {
                    run_start.get_or_insert(pos);
                    pos += (m.length as usize).max(1);
                    continue;
                }
                if let Some(start) = run_start.take() {
                    fs.push((pos - start) as u32, 0);
                    fs.literals.extend_from_slice(&block[start..pos]);
                }
                fs.push(m.offset, m.length);
                pos += m.length as usize;
            }
            if let Some(start) = run_start {
                fs.push((pos - start) as u32, 0);
                fs.literals.extend_from_slice(&block[start..pos]);
            }
        }
    }
    Ok(fs)
}

/// Rebuilds the block described by `fs`.
pub fn defactorize(dict: &Dictionary, fs: &FactorStreams) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(fs.block_len as usize);
    defactorize_into(dict.data(), fs, &mut out)?;
    Ok(out)
}

/// Appends the block described by `fs` to `out`.
pub fn defactorize_into(dict: &[u8], fs: &FactorStreams, out: &mut Vec<u8>) -> Result<()> {
    if fs.offsets.len() != fs.lengths.len() {
        return Err(Error::corrupt("offset and length streams differ in length"));
    }
    let start = out.len();
    let mut literals = &fs.literals[..];
    for (&offset, &length) in fs.offsets.iter().zip(&fs.lengths) {
        if length > 0 {
            let src = dict
                .get(offset as usize..offset as usize + length as usize)
                .ok_or_else(|| {
                    Error::corrupt(format!("factor {offset}+{length} runs past dictionary of {} bytes", dict.len()))
                })?;
            out.extend_from_slice(src);
            continue;
        }
        match fs.mode {
            ParseMode::Interleaved => {
                let byte = u8::try_from(offset)
                    .map_err(|_| Error::corrupt(format!("literal code {offset} exceeds a byte")))?;
                out.push(byte);
            }
            ParseMode::ThreeStream { .. } => {
                let run = offset as usize;
                if run == 0 || run > literals.len() {
                    return Err(Error::corrupt(format!(
                        "literal run of {run} with {} literal bytes left",
                        literals.len()
                    )));
                }
                out.extend_from_slice(&literals[..run]);
                literals = &literals[run..];
            }
        }
        if out.len() - start > fs.block_len as usize {
            break;
        }
    }
    if !literals.is_empty() {
        return Err(Error::corrupt(format!("{} unused literal bytes", literals.len())));
    }
    let produced = out.len() - start;
    if produced != fs.block_len as usize {
        out.truncate(start);
        return Err(Error::corrupt(format!(
            "factors produced {produced} bytes, block is {} bytes",
            fs.block_len
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn dict(bytes: &[u8]) -> Dictionary {
        Dictionary::from_parts(bytes.to_vec(), 1, bytes.len() as u64).unwrap()
    }

    fn occurs(d: &[u8], s: &[u8]) -> bool {
        s.is_empty() || d.windows(s.len()).any(|w| w == s)
    }

    #[test]
    fn interleaved_greedy_parse() {
        let d = dict(b"abracadabra");
        let idx = DictionaryIndex::new(&d).unwrap();
        let fs = factorize_block(&idx, b"abrabra", ParseMode::Interleaved).unwrap();
        assert_eq!(fs.offsets, [0, 1]);
        assert_eq!(fs.lengths, [4, 3]);
        assert!(fs.literals.is_empty());
        assert_eq!(defactorize(&d, &fs).unwrap(), b"abrabra");
    }

    #[test]
    fn unmatched_bytes_become_literals() {
        let d = dict(b"aaaa");
        let idx = DictionaryIndex::new(&d).unwrap();
        let fs = factorize_block(&idx, b"bb", ParseMode::Interleaved).unwrap();
        assert_eq!(fs.offsets, [98, 98]);
        assert_eq!(fs.lengths, [0, 0]);
    }

    #[test]
    fn short_matches_join_the_literal_run() {
        let d = dict(b"abracadabra");
        let idx = DictionaryIndex::new(&d).unwrap();
        let fs = factorize_block(&idx, b"xxab", ParseMode::ThreeStream { min_literal: 4 }).unwrap();
        assert_eq!(fs.offsets, [4]);
        assert_eq!(fs.lengths, [0]);
        assert_eq!(fs.literals, b"xxab");
        assert_eq!(defactorize(&d, &fs).unwrap(), b"xxab");
    }

    #[test]
    fn runs_between_copies() {
        let d = dict(b"abracadabra");
        let idx = DictionaryIndex::new(&d).unwrap();
        let mode = ParseMode::ThreeStream { min_literal: 3 };
        let fs = factorize_block(&idx, b"zzcadabrazabr", mode).unwrap();
        // "zz" literal, "cadabra" copy, "z" literal, "abr" copy
        assert_eq!(fs.lengths, [0, 7, 0, 3]);
        assert_eq!(fs.offsets, [2, 4, 1, 0]);
        assert_eq!(fs.literals, b"zzz");
    }

    #[test]
    fn defactorize_reference() {
        let d = dict(b"abracadabra");
        let fs = FactorStreams {
            offsets: vec![0, 1],
            lengths: vec![4, 3],
            literals: vec![],
            mode: ParseMode::Interleaved,
            block_len: 7,
        };
        assert_eq!(defactorize(&d, &fs).unwrap(), b"abrabra");
    }

    #[test]
    fn exhausted_literal_stream_is_corruption() {
        let d = dict(b"abracadabra");
        let mut fs = FactorStreams {
            offsets: vec![3],
            lengths: vec![0],
            literals: b"xyz".to_vec(),
            mode: ParseMode::ThreeStream { min_literal: 4 },
            block_len: 3,
        };
        assert_eq!(defactorize(&d, &fs).unwrap(), b"xyz");
        fs.offsets = vec![4];
        fs.block_len = 4;
        assert!(matches!(defactorize(&d, &fs), Err(Error::Corrupt(_))));
        assert!(fs.validate(d.len()).is_err());
    }

    #[test]
    fn bad_streams_are_corruption() {
        let d = dict(b"abracadabra");
        let base = FactorStreams {
            offsets: vec![8],
            lengths: vec![4],
            literals: vec![],
            mode: ParseMode::Interleaved,
            block_len: 4,
        };
        assert!(matches!(defactorize(&d, &base), Err(Error::Corrupt(_))));
        let mut short = base.clone();
        short.offsets = vec![0];
        short.block_len = 5;
        assert!(matches!(defactorize(&d, &short), Err(Error::Corrupt(_))));
        let mut lit = base.clone();
        lit.offsets = vec![300];
        lit.lengths = vec![0];
        lit.block_len = 1;
        assert!(matches!(defactorize(&d, &lit), Err(Error::Corrupt(_))));
    }

    #[test]
    fn empty_block_rejected() {
        let d = dict(b"abc");
        let idx = DictionaryIndex::new(&d).unwrap();
        assert!(matches!(factorize_block(&idx, b"", ParseMode::Interleaved), Err(Error::Param(_))));
    }

    #[test]
    fn full_alphabet_dictionary_never_needs_literals() {
        let all: Vec<u8> = (0..=255u8).collect();
        let d = dict(&all);
        let idx = DictionaryIndex::new(&d).unwrap();
        let block: Vec<u8> = (0..1000u32).map(|i| (i * 7 + i / 3) as u8).collect();
        let fs = factorize_block(&idx, &block, ParseMode::ThreeStream { min_literal: 1 }).unwrap();
        assert!(fs.lengths.iter().all(|&l| l > 0));
        assert!(fs.literals.is_empty());
    }

    fn arb_mode() -> impl Strategy<Value = ParseMode> {
        prop_oneof![
            Just(ParseMode::Interleaved),
            (1u32..8).prop_map(|min_literal| ParseMode::ThreeStream { min_literal }),
        ]
    }

    proptest! {
        #[test]
        fn round_trip(
            d in prop::collection::vec(0u8..6, 1..400),
            block in prop::collection::vec(0u8..8, 1..300),
            mode in arb_mode(),
        ) {
            let d = dict(&d);
            let idx = DictionaryIndex::new(&d).unwrap();
            let fs = factorize_block(&idx, &block, mode).unwrap();
            fs.validate(d.len()).unwrap();
            prop_assert_eq!(defactorize(&d, &fs).unwrap(), block);
            if let ParseMode::ThreeStream { min_literal } = mode {
                prop_assert!(fs.lengths.iter().all(|&l| l == 0 || l >= min_literal));
            }
        }

        #[test]
        fn interleaved_factors_are_maximal(
            d in prop::collection::vec(0u8..4, 1..300),
            block in prop::collection::vec(0u8..5, 1..200),
        ) {
            let dd = dict(&d);
            let idx = DictionaryIndex::new(&dd).unwrap();
            let fs = factorize_block(&idx, &block, ParseMode::Interleaved).unwrap();
            let mut pos = 0;
            for f in fs.factors() {
                if f.length == 0 {
                    prop_assert!(!d.contains(&block[pos]));
                    pos += 1;
                    continue;
                }
                let end = pos + f.length as usize;
                prop_assert!(occurs(&d, &block[pos..end]));
                if end < block.len() {
                    prop_assert!(!occurs(&d, &block[pos..end + 1]));
                }
                pos = end;
            }
            prop_assert_eq!(pos, block.len());
        }
    }
}
