use std::cmp::Ordering;

use libsais::SuffixArrayConstruction;

use super::rmq::RangeMin;
use super::Dictionary;
use crate::{Error, Result};

// Bucket keys order suffixes by their first two bytes; a suffix holding only
// one byte sorts before every two-byte suffix with the same first byte.
const KEY_STRIDE: usize = 257;
const KEYS: usize = 256 * KEY_STRIDE;

/// Longest dictionary match for a prefix of the search string.
///
/// `length == 0` means not even the first byte occurs in the dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Match {
    pub offset: u32,
    pub length: u32,
}

/// Suffix array over a dictionary with a two-byte bucket table and a
/// range-minimum structure for smallest-offset tie-breaking.
pub struct DictionaryIndex<'d> {
    dict: &'d Dictionary,
    suffixes: Vec<u32>,
    buckets: Vec<u32>,
    rmq: RangeMin,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Rel {
    Less,
    Prefix,
    Greater,
}

impl<'d> DictionaryIndex<'d> {
    pub fn new(dict: &'d Dictionary) -> Result<Self> {
        let text = dict.data();
        if text.is_empty() {
            return Err(Error::param("cannot index an empty dictionary"));
        }
        let sa: Vec<i32> = SuffixArrayConstruction::for_text(text)
            .in_owned_buffer()
            .single_threaded()
            .run()
            .map_err(|e| Error::param(format!("suffix array construction failed: {e:?}")))?
            .into_vec();
        let suffixes: Vec<u32> = sa.into_iter().map(|p| p as u32).collect();

        let mut buckets = vec![0u32; KEYS + 1];
        for p in 0..text.len() {
            buckets[bucket_key(text, p) + 1] += 1;
        }
        for k in 1..buckets.len() {
            buckets[k] += buckets[k - 1];
        }
        let rmq = RangeMin::new(&suffixes);
        Ok(DictionaryIndex {
            dict,
            suffixes,
            buckets,
            rmq,
        })
    }

    pub fn dictionary(&self) -> &'d Dictionary {
        self.dict
    }

    /// Suffix start positions in lexicographic order.
    pub fn suffix_order(&self) -> &[u32] {
        &self.suffixes
    }

    /// Bytes held by the index in addition to the dictionary itself.
    pub fn heap_bytes(&self) -> usize {
        self.suffixes.len() * 4 + self.buckets.len() * 4 + self.rmq.heap_bytes()
    }

    /// Longest prefix of `pattern` occurring in the dictionary, at the
    /// smallest offset among all occurrences of that length.
    pub fn longest_match(&self, pattern: &[u8]) -> Match {
        let Some(&first) = pattern.first() else {
            return Match::default();
        };
        let first_lo = first as usize * KEY_STRIDE;
        if pattern.len() >= 2 {
            let key = first_lo + 1 + pattern[1] as usize;
            let (lo, hi) = (self.buckets[key] as usize, self.buckets[key + 1] as usize);
            if lo < hi {
                return self.search_bucket(pattern, lo, hi);
            }
        }
        let (lo, hi) = (
            self.buckets[first_lo] as usize,
            self.buckets[first_lo + KEY_STRIDE] as usize,
        );
        if lo == hi {
            return Match::default();
        }
        Match {
            offset: self.rmq.min(&self.suffixes, lo, hi),
            length: 1,
        }
    }

    // All suffixes in lo..hi share the first two bytes of the pattern.
    fn search_bucket(&self, pattern: &[u8], lo: usize, hi: usize) -> Match {
        const DEPTH: usize = 2;
        let (ins, left_lcp, right_lcp) =
            self.partition(pattern, lo, hi, DEPTH, DEPTH, |rel| rel == Rel::Less);
        let left = (ins > lo).then_some(left_lcp);
        let right = (ins < hi).then_some(right_lcp);
        let length = left.unwrap_or(0).max(right.unwrap_or(0));
        debug_assert!(length >= DEPTH);
        let prefix = &pattern[..length];

        // Occurrences of `prefix` form the contiguous run first..last
        // straddling `ins`.
        let first = if left == Some(length) {
            let r = right.map_or(DEPTH, |l| l.min(length));
            self.partition(prefix, lo, ins, DEPTH, r, |rel| rel == Rel::Less).0
        } else {
            ins
        };
        let last = if right == Some(length) {
            let l = left.map_or(DEPTH, |l| l.min(length));
            self.partition(prefix, ins, hi, l, DEPTH, |rel| rel != Rel::Greater).0
        } else {
            ins
        };
        debug_assert!(first < last);
        Match {
            offset: self.rmq.min(&self.suffixes, first, last),
            length: length as u32,
        }
    }

    /// Binary search for the first index in `lo..hi` whose suffix fails
    /// `goes_left`. `lo_lcp`/`hi_lcp` are known common-prefix lengths with
    /// the virtual boundaries `lo - 1` and `hi`.
    ///
    /// Returns the split point with the pattern's common-prefix length
    /// against the suffixes on either side of it.
    fn partition(
        &self,
        pattern: &[u8],
        lo: usize,
        hi: usize,
        lo_lcp: usize,
        hi_lcp: usize,
        goes_left: impl Fn(Rel) -> bool,
    ) -> (usize, usize, usize) {
        // Exclusive bounds, with `left` allowed to sit one below `lo`.
        let mut left = lo as isize - 1;
        let mut right = hi as isize;
        let (mut llcp, mut rlcp) = (lo_lcp, hi_lcp);
        while right - left > 1 {
            let mid = left + (right - left) / 2;
            let (rel, lcp) = self.compare(mid as usize, pattern, llcp.min(rlcp));
            if goes_left(rel) {
                left = mid;
                llcp = lcp;
            } else {
                right = mid;
                rlcp = lcp;
            }
        }
        (right as usize, llcp, rlcp)
    }

    fn compare(&self, rank: usize, pattern: &[u8], skip: usize) -> (Rel, usize) {
        let text = self.dict.data();
        let pos = self.suffixes[rank] as usize;
        let suffix = &text[pos..];
        let lcp = common_prefix(suffix, pattern, skip);
        let rel = if lcp == pattern.len() {
            Rel::Prefix
        } else if lcp == suffix.len() {
            Rel::Less
        } else {
            match suffix[lcp].cmp(&pattern[lcp]) {
                Ordering::Less => Rel::Less,
                _ => Rel::Greater,
            }
        };
        (rel, lcp)
    }
}

fn bucket_key(text: &[u8], p: usize) -> usize {
    let second = text.get(p + 1).map_or(0, |&b| 1 + b as usize);
    text[p] as usize * KEY_STRIDE + second
}

/// Length of the common prefix of `a` and `b`, given that the first `skip`
/// bytes are already known to match.
pub(crate) fn common_prefix(a: &[u8], b: &[u8], skip: usize) -> usize {
    let limit = a.len().min(b.len());
    let mut i = skip.min(limit);
    while i + 8 <= limit {
        let x = u64::from_le_bytes(a[i..i + 8].try_into().unwrap());
        let y = u64::from_le_bytes(b[i..i + 8].try_into().unwrap());
        let diff = x ^ y;
        if diff != 0 {
            return i + (diff.trailing_zeros() / 8) as usize;
        }
        i += 8;
    }
    while i < limit && a[i] == b[i] {
        i += 1;
    }
    i
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn dict(bytes: &[u8]) -> Dictionary {
        Dictionary::from_parts(bytes.to_vec(), 1, bytes.len() as u64).unwrap()
    }

    fn brute_force(d: &[u8], s: &[u8]) -> Match {
        let mut best = Match::default();
        for off in 0..d.len() {
            let l = d[off..].iter().zip(s).take_while(|(a, b)| a == b).count();
            if l > best.length as usize {
                best = Match { offset: off as u32, length: l as u32 };
            }
        }
        best
    }

    #[test]
    fn banana_suffix_order() {
        let d = dict(b"banana");
        let idx = DictionaryIndex::new(&d).unwrap();
        assert_eq!(idx.suffix_order(), &[5, 3, 1, 0, 4, 2]);
    }

    #[test]
    fn repeated_byte_suffix_order() {
        let d = dict(b"aaaa");
        let idx = DictionaryIndex::new(&d).unwrap();
        assert_eq!(idx.suffix_order(), &[3, 2, 1, 0]);
    }

    #[test]
    fn single_zero_byte() {
        let d = dict(&[0]);
        let idx = DictionaryIndex::new(&d).unwrap();
        assert_eq!(idx.suffix_order(), &[0]);
        assert_eq!(idx.longest_match(&[0, 0]), Match { offset: 0, length: 1 });
    }

    #[test]
    fn empty_dictionary_is_rejected() {
        let d = Dictionary::empty(0);
        assert!(matches!(DictionaryIndex::new(&d), Err(Error::Param(_))));
    }

    #[test]
    fn abracadabra_matches() {
        let d = dict(b"abracadabra");
        let idx = DictionaryIndex::new(&d).unwrap();
        assert_eq!(idx.longest_match(b"abrabra"), Match { offset: 0, length: 4 });
        assert_eq!(idx.longest_match(b"bra"), Match { offset: 1, length: 3 });
        assert_eq!(idx.longest_match(b"a"), Match { offset: 0, length: 1 });
        assert_eq!(idx.longest_match(b"ra!"), Match { offset: 2, length: 2 });
        assert_eq!(idx.longest_match(b""), Match::default());
    }

    #[test]
    fn absent_byte_is_a_literal() {
        let d = dict(b"aaaa");
        let idx = DictionaryIndex::new(&d).unwrap();
        assert_eq!(idx.longest_match(b"bcd"), Match { offset: 0, length: 0 });
        assert_eq!(idx.longest_match(b"b"), Match { offset: 0, length: 0 });
        assert_eq!(idx.longest_match(b"ab"), Match { offset: 0, length: 1 });
    }

    #[test]
    fn long_common_prefix_comparison() {
        let mut text = vec![b'x'; 100];
        text.extend_from_slice(b"y");
        text.extend(vec![b'x'; 50]);
        let d = dict(&text);
        let idx = DictionaryIndex::new(&d).unwrap();
        let mut pat = vec![b'x'; 100];
        pat.push(b'y');
        pat.push(b'x');
        assert_eq!(idx.longest_match(&pat), brute_force(&text, &pat));
        assert_eq!(idx.longest_match(&[b'x'; 120]), Match { offset: 0, length: 100 });
    }

    #[test]
    fn common_prefix_word_boundaries() {
        let a = b"0123456789abcdefXYZ";
        let b = b"0123456789abcdefXYz";
        for skip in 0..18 {
            assert_eq!(common_prefix(a, b, skip), 18);
        }
        assert_eq!(common_prefix(b"abc", b"abcd", 0), 3);
        assert_eq!(common_prefix(b"", b"abcd", 0), 0);
    }

    proptest! {
        #[test]
        fn suffix_order_is_sorted(text in prop::collection::vec(0u8..4, 1..300)) {
            let d = dict(&text);
            let idx = DictionaryIndex::new(&d).unwrap();
            let sa = idx.suffix_order();
            let mut seen = vec![false; text.len()];
            for &p in sa { seen[p as usize] = true; }
            prop_assert!(seen.iter().all(|&s| s));
            for w in sa.windows(2) {
                prop_assert!(text[w[0] as usize..] < text[w[1] as usize..]);
            }
        }

        #[test]
        fn agrees_with_brute_force(
            text in prop::collection::vec(0u8..4, 1..600),
            pat in prop::collection::vec(0u8..5, 0..80),
        ) {
            let d = dict(&text);
            let idx = DictionaryIndex::new(&d).unwrap();
            prop_assert_eq!(idx.longest_match(&pat), brute_force(&text, &pat));
        }

        #[test]
        fn substrings_of_the_dictionary_match_fully(
            text in prop::collection::vec(0u8..3, 2..800),
            start in 0usize..800,
            len in 1usize..200,
        ) {
            let d = dict(&text);
            let idx = DictionaryIndex::new(&d).unwrap();
            let start = start % text.len();
            let end = (start + len).min(text.len());
            let m = idx.longest_match(&text[start..end]);
            prop_assert_eq!(m.length as usize, end - start);
            prop_assert!(m.offset as usize <= start);
            prop_assert_eq!(m, brute_force(&text, &text[start..end]));
        }
    }
}
