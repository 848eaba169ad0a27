use std::fs::File;
use std::io::{self, Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};

/// Several files read as one stream, in order.
pub struct ConcatFiles {
    files: Vec<(File, u64)>,
    /// Start offset of each file within the stream.
    starts: Vec<u64>,
    len: u64,
    pos: u64,
}

impl ConcatFiles {
    pub fn open(paths: &[PathBuf]) -> io::Result<Self> {
        let mut files = Vec::with_capacity(paths.len());
        let mut starts = Vec::with_capacity(paths.len());
        let mut len = 0u64;
        for p in paths {
            let f = File::open(p).map_err(|e| with_path(e, p))?;
            let n = f.metadata().map_err(|e| with_path(e, p))?.len();
            starts.push(len);
            len += n;
            files.push((f, n));
        }
        Ok(ConcatFiles {
            files,
            starts,
            len,
            pos: 0,
        })
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn file_lengths(&self) -> impl Iterator<Item = u64> + '_ {
        self.files.iter().map(|(_, n)| *n)
    }
}

fn with_path(e: io::Error, p: &Path) -> io::Error {
    io::Error::new(e.kind(), format!("{}: {e}", p.display()))
}

impl Read for ConcatFiles {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        while self.pos < self.len && !buf.is_empty() {
            let i = self.starts.partition_point(|&s| s <= self.pos) - 1;
            let (file, n) = &mut self.files[i];
            let within = self.pos - self.starts[i];
            if within >= *n {
                // empty file at this offset
                self.pos = self.starts[i] + *n;
                continue;
            }
            file.seek(SeekFrom::Start(within))?;
            let want = buf.len().min((*n - within) as usize);
            let got = file.read(&mut buf[..want])?;
            if got == 0 {
                return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "input file shrank while reading"));
            }
            self.pos += got as u64;
            return Ok(got);
        }
        Ok(0)
    }
}

impl Seek for ConcatFiles {
    fn seek(&mut self, to: SeekFrom) -> io::Result<u64> {
        let target = match to {
            SeekFrom::Start(p) => Some(p),
            SeekFrom::End(d) => self.len.checked_add_signed(d),
            SeekFrom::Current(d) => self.pos.checked_add_signed(d),
        };
        self.pos = target.ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "seek before start"))?;
        Ok(self.pos)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_across_files() {
        let dir = tempfile::tempdir().unwrap();
        let parts: [&[u8]; 4] = [b"hello ", b"", b"big ", b"world"];
        let paths: Vec<PathBuf> = parts
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let path = dir.path().join(format!("{i}"));
                std::fs::write(&path, p).unwrap();
                path
            })
            .collect();
        let mut c = ConcatFiles::open(&paths).unwrap();
        assert_eq!(c.len(), 15);
        let mut all = Vec::new();
        c.read_to_end(&mut all).unwrap();
        assert_eq!(all, b"hello big world");
        c.seek(SeekFrom::Start(5)).unwrap();
        let mut b = [0u8; 6];
        c.read_exact(&mut b).unwrap();
        assert_eq!(&b, b" big w");
        assert_eq!(c.seek(SeekFrom::End(0)).unwrap(), 15);
        assert_eq!(c.read(&mut b).unwrap(), 0);
        assert_eq!(c.file_lengths().collect::<Vec<_>>(), [6, 0, 4, 5]);
    }
}
