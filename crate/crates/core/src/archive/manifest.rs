use std::collections::HashMap;

use crate::{Error, Result};

/// One named document: a byte range of the concatenated corpus.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ManifestEntry {
    pub id: String,
    pub start: u64,
    pub len: u64,
}

/// Document ids mapped to corpus byte ranges, sorted by start.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    entries: Vec<ManifestEntry>,
    by_id: HashMap<String, usize>,
}

const MAX_ID_LEN: usize = 64 * 1024;

impl Manifest {
    /// Builds a manifest from entries, checking that the ranges are sorted,
    /// disjoint and within a corpus of `source_length` bytes, and that ids
    /// are unique.
    pub fn new(entries: Vec<ManifestEntry>, source_length: u64) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(entries.len());
        let mut next = 0u64;
        for (i, e) in entries.iter().enumerate() {
            if e.id.len() > MAX_ID_LEN {
                return Err(Error::param(format!("document id of {} bytes is too long", e.id.len())));
            }
            let end = e.start.checked_add(e.len);
            if e.start < next || end.is_none_or(|end| end > source_length) {
                return Err(Error::param(format!(
                    "document {:?} range {}+{} overlaps its predecessor or leaves the corpus",
                    e.id, e.start, e.len
                )));
            }
            next = e.start + e.len;
            if by_id.insert(e.id.clone(), i).is_some() {
                return Err(Error::param(format!("duplicate document id {:?}", e.id)));
            }
        }
        Ok(Manifest { entries, by_id })
    }

    /// Manifest for documents stored back to back, given their lengths.
    pub fn from_lengths(docs: impl IntoIterator<Item = (String, u64)>) -> Result<Self> {
        let mut start = 0u64;
        let mut entries = Vec::new();
        for (id, len) in docs {
            entries.push(ManifestEntry { id, start, len });
            start = start
                .checked_add(len)
                .ok_or_else(|| Error::param("document lengths overflow"))?;
        }
        Manifest::new(entries, start)
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ManifestEntry> {
        self.by_id.get(id).map(|&i| &self.entries[i])
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.entries.len() as u64).to_le_bytes());
        for e in &self.entries {
            out.extend_from_slice(&(e.id.len() as u32).to_le_bytes());
            out.extend_from_slice(e.id.as_bytes());
            out.extend_from_slice(&e.start.to_le_bytes());
            out.extend_from_slice(&e.len.to_le_bytes());
        }
        out
    }

    /// Parses a serialized manifest; every byte must be used.
    pub fn from_bytes(mut b: &[u8], source_length: u64) -> Result<Self> {
        let count = take_u64(&mut b)?;
        // each entry needs at least 20 bytes
        if count > (b.len() / 20) as u64 {
            return Err(Error::corrupt(format!("manifest claims {count} entries in {} bytes", b.len())));
        }
        let mut entries = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let id_len = take(&mut b, 4).map(|s| u32::from_le_bytes(s.try_into().unwrap()))? as usize;
            let id = std::str::from_utf8(take(&mut b, id_len)?)
                .map_err(|_| Error::corrupt("document id is not UTF-8"))?
                .to_owned();
            let start = take_u64(&mut b)?;
            let len = take_u64(&mut b)?;
            entries.push(ManifestEntry { id, start, len });
        }
        if !b.is_empty() {
            return Err(Error::corrupt(format!("{} trailing manifest bytes", b.len())));
        }
        Manifest::new(entries, source_length).map_err(|e| Error::corrupt(e.to_string()))
    }
}

fn take<'a>(b: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
    if b.len() < n {
        return Err(Error::corrupt("manifest is truncated"));
    }
    let (head, tail) = b.split_at(n);
    *b = tail;
    Ok(head)
}

fn take_u64(b: &mut &[u8]) -> Result<u64> {
    take(b, 8).map(|s| u64::from_le_bytes(s.try_into().unwrap()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Manifest {
        Manifest::from_lengths([("a.txt".to_string(), 10), ("b/ü.html".to_string(), 0), ("c".to_string(), 5)]).unwrap()
    }

    #[test]
    fn round_trip() {
        let m = sample();
        assert_eq!(m.get("c").unwrap().start, 10);
        assert_eq!(m.get("b/ü.html").unwrap().len, 0);
        assert!(m.get("d").is_none());
        assert_eq!(Manifest::from_bytes(&m.to_bytes(), 15).unwrap(), m);
    }

    #[test]
    fn rejects_bad_ranges() {
        let e = |id: &str, start, len| ManifestEntry {
            id: id.into(),
            start,
            len,
        };
        assert!(Manifest::new(vec![e("a", 0, 10), e("b", 5, 2)], 20).is_err());
        assert!(Manifest::new(vec![e("a", 0, 10), e("a", 10, 2)], 20).is_err());
        assert!(Manifest::new(vec![e("a", 15, 10)], 20).is_err());
        assert!(Manifest::new(vec![e("a", 5, 1), e("b", 0, 1)], 20).is_err());
        assert!(Manifest::new(vec![e("a", 0, 10), e("b", 12, 2)], 20).is_ok());
    }

    #[test]
    fn rejects_damage() {
        let b = sample().to_bytes();
        for cut in 0..b.len() {
            assert!(Manifest::from_bytes(&b[..cut], 15).is_err(), "cut at {cut}");
        }
        assert!(Manifest::from_bytes(&b, 14).is_err());
        let mut extra = b.clone();
        extra.push(0);
        assert!(Manifest::from_bytes(&extra, 15).is_err());
        let mut huge = b.clone();
        huge[..8].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(Manifest::from_bytes(&huge, 15).is_err());
    }
}
