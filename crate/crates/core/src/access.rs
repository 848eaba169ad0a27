//! Byte-range extraction and the FULL / RANDOM / BATCH workload drivers.

use std::fmt;
use std::process::Command;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use xxhash_rust::xxh3::xxh3_64;

use crate::archive::{ArchiveReader, ByteSource};
use crate::units::KIB;
use crate::{Error, Result};

pub const DEFAULT_QUERY_COUNT: usize = 10_000;
pub const DEFAULT_FRAGMENT_SIZE: u64 = 16 * KIB;

/// Work done by one range query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RangeStats {
    pub blocks_fetched: u64,
    pub bytes_decoded: u64,
    pub fetch: Duration,
    pub decode: Duration,
}

impl RangeStats {
    fn add(&mut self, o: &RangeStats) {
        self.blocks_fetched += o.blocks_fetched;
        self.bytes_decoded += o.bytes_decoded;
        self.fetch += o.fetch;
        self.decode += o.decode;
    }
}

/// Range queries with reusable buffers. One per thread.
pub struct Extractor<'r, S: ByteSource> {
    reader: &'r ArchiveReader<S>,
    payloads: Vec<u8>,
    block: Vec<u8>,
}

impl<'r, S: ByteSource> Extractor<'r, S> {
    pub fn new(reader: &'r ArchiveReader<S>) -> Self {
        Extractor {
            reader,
            payloads: Vec::new(),
            block: Vec::with_capacity(reader.block_size() as usize),
        }
    }

    /// Appends corpus bytes `start..start + len` to `out`.
    ///
    /// The touched blocks are fetched with one read, then each is decoded
    /// from its start and the wanted slice copied out.
    pub fn get_range_into(&mut self, start: u64, len: u64, out: &mut Vec<u8>) -> Result<RangeStats> {
        let r = self.reader;
        let span = r.header().locate(start, len)?;
        let t0 = Instant::now();
        r.fetch_blocks(span.first_block, span.last_block, &mut self.payloads)?;
        let t1 = Instant::now();
        let bs = r.block_size() as u64;
        let end = start + len;
        let mut decoded = 0u64;
        out.reserve(len as usize);
        for i in span.first_block..=span.last_block {
            let payload = r.payload_in(&self.payloads, span.first_block, i);
            let block_start = i * bs;
            let block_len = r.header().block_len(i) as u64;
            let from = start.max(block_start) - block_start;
            let to = end.min(block_start + block_len) - block_start;
            if from == 0 && to == block_len {
                r.decode_payload_into(i, payload, out)?;
            } else {
                self.block.clear();
                r.decode_payload_into(i, payload, &mut self.block)?;
                out.extend_from_slice(&self.block[from as usize..to as usize]);
            }
            decoded += block_len;
        }
        Ok(RangeStats {
            blocks_fetched: span.block_count(),
            bytes_decoded: decoded,
            fetch: t1 - t0,
            decode: t1.elapsed(),
        })
    }
}

/// Corpus bytes `start..start + len`, fetching and decoding only the blocks
/// the range touches.
pub fn get_range<S: ByteSource>(reader: &ArchiveReader<S>, start: u64, len: u64) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(len as usize);
    Extractor::new(reader).get_range_into(start, len, &mut out)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkloadMode {
    /// Every aligned fragment in corpus order.
    Full,
    /// Uniform random unaligned fragments.
    Random,
    /// The RANDOM queries sorted by address.
    Batch,
}

impl WorkloadMode {
    pub fn name(self) -> &'static str {
        match self {
            WorkloadMode::Full => "full",
            WorkloadMode::Random => "random",
            WorkloadMode::Batch => "batch",
        }
    }
}

impl fmt::Display for WorkloadMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WorkloadMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(WorkloadMode::Full),
            "random" => Ok(WorkloadMode::Random),
            "batch" => Ok(WorkloadMode::Batch),
            _ => Err(Error::param(format!("unknown mode {s:?}; expected full, random or batch"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workload {
    pub mode: WorkloadMode,
    pub fragment_size: u64,
    pub seed: u64,
    pub source_length: u64,
    /// Start offsets, in execution order.
    pub queries: Vec<u64>,
}

impl Workload {
    pub fn query_count(&self) -> usize {
        self.queries.len()
    }

    /// Length of the fragment starting at `start` (only FULL's last one is short).
    pub fn fragment_len(&self, start: u64) -> u64 {
        self.fragment_size.min(self.source_length - start)
    }

    pub fn total_bytes(&self) -> u64 {
        self.queries.iter().map(|&q| self.fragment_len(q)).sum()
    }
}

/// Builds a workload. FULL ignores `query_count` and `seed`; BATCH uses the
/// RANDOM offsets for the same seed, sorted.
pub fn generate_workload(
    mode: WorkloadMode,
    source_length: u64,
    fragment_size: u64,
    query_count: usize,
    seed: u64,
) -> Result<Workload> {
    if fragment_size == 0 || fragment_size > source_length {
        return Err(Error::param(format!(
            "fragment size {fragment_size} must be between 1 and the corpus length {source_length}"
        )));
    }
    let queries = match mode {
        WorkloadMode::Full => (0..source_length).step_by(fragment_size as usize).collect(),
        WorkloadMode::Random | WorkloadMode::Batch => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let last = source_length - fragment_size;
            let mut q: Vec<u64> = (0..query_count).map(|_| rng.random_range(0..=last)).collect();
            if mode == WorkloadMode::Batch {
                q.sort_unstable();
            }
            q
        }
    };
    Ok(Workload {
        mode,
        fragment_size,
        seed,
        source_length,
        queries,
    })
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions<'a> {
    /// Shell command run before the timed section, e.g. to drop OS caches.
    pub drop_cache_hook: Option<String>,
    /// The uncompressed corpus; every fragment is checked against it.
    pub oracle: Option<&'a [u8]>,
    /// Independent query streams; 1 runs the queries in order on this thread.
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThroughputReport {
    pub mode: WorkloadMode,
    pub queries_sorted: bool,
    pub query_count: usize,
    pub fragment_size: u64,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_s: f64,
    pub fragments_per_sec: f64,
    pub bytes_returned: u64,
    pub bytes_decoded: u64,
    pub blocks_fetched: u64,
    /// Time in positional reads (mean per stream when threaded).
    pub fetch_time_s: f64,
    /// Time decoding and copying out (mean per stream when threaded).
    pub decode_time_s: f64,
    /// Hash over the fragment hashes in query order.
    pub result_hash: String,
    /// Order-independent hash of the fragment multiset.
    pub multiset_hash: String,
    pub verified: bool,
}

impl ThroughputReport {
    pub fn decoded_mib_per_sec(&self) -> f64 {
        self.bytes_returned as f64 / (1024.0 * 1024.0) / self.wall_time_s
    }

    /// One `key=value` line per field.
    pub fn to_key_value(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut out = String::new();
        for (k, v) in v.as_object().expect("report is an object") {
            let text = match v {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k}={text}\n"));
        }
        out
    }
}

fn fragment_hash(bytes: &[u8]) -> u64 {
    xxh3_64(bytes)
}

pub fn run_drop_cache_hook(command: &str) -> Result<()> {
    let status = if cfg!(windows) {
        Command::new("cmd").args(["/C", command]).status()?
    } else {
        Command::new("sh").args(["-c", command]).status()?
    };
    if !status.success() {
        return Err(Error::Io(std::io::Error::other(format!(
            "cache drop hook {command:?} failed with {status}"
        ))));
    }
    Ok(())
}

/// Runs every query of `w` and reports throughput.
pub fn run_workload<S: ByteSource>(
    reader: &ArchiveReader<S>,
    w: &Workload,
    opts: &RunOptions<'_>,
) -> Result<ThroughputReport> {
    if w.source_length != reader.source_length() {
        return Err(Error::param(format!(
            "workload is for a {}-byte corpus, archive holds {}",
            w.source_length,
            reader.source_length()
        )));
    }
    if let Some(oracle) = opts.oracle {
        if oracle.len() as u64 != reader.source_length() {
            return Err(Error::param("oracle length differs from the archive's corpus"));
        }
    }
    if let Some(cmd) = &opts.drop_cache_hook {
        run_drop_cache_hook(cmd)?;
    }
    let threads = opts.threads.max(1).min(w.query_count().max(1));
    let mut hashes = vec![0u64; w.query_count()];
    let began = Instant::now();
    let stats = if threads == 1 {
        run_stream(reader, w, opts.oracle, 0, &mut hashes)?
    } else {
        let chunk = w.query_count().div_ceil(threads);
        std::thread::scope(|scope| {
            let handles: Vec<_> = hashes
                .chunks_mut(chunk)
                .enumerate()
                .map(|(k, slot)| scope.spawn(move || run_stream(reader, w, opts.oracle, k * chunk, slot)))
                .collect();
            let mut total = RangeStats::default();
            for h in handles {
                total.add(&h.join().expect("query thread panicked")?);
            }
            Ok::<_, Error>(total)
        })?
    };
    let wall = began.elapsed().as_secs_f64();

    let ordered: Vec<u8> = hashes.iter().flat_map(|h| h.to_le_bytes()).collect();
    let multiset = hashes.iter().fold(0u64, |acc, h| acc.wrapping_add(*h));
    Ok(ThroughputReport {
        mode: w.mode,
        queries_sorted: w.mode != WorkloadMode::Random,
        query_count: w.query_count(),
        fragment_size: w.fragment_size,
        seed: w.seed,
        threads,
        wall_time_s: wall,
        fragments_per_sec: if wall > 0.0 { w.query_count() as f64 / wall } else { 0.0 },
        bytes_returned: w.total_bytes(),
        bytes_decoded: stats.bytes_decoded,
        blocks_fetched: stats.blocks_fetched,
        fetch_time_s: stats.fetch.as_secs_f64() / threads as f64,
        decode_time_s: stats.decode.as_secs_f64() / threads as f64,
        result_hash: format!("{:016x}", xxh3_64(&ordered)),
        multiset_hash: format!("{multiset:016x}"),
        verified: opts.oracle.is_some(),
    })
}

// Runs queries `first..first + hashes.len()` and records each fragment's hash.
fn run_stream<S: ByteSource>(
    reader: &ArchiveReader<S>,
    w: &Workload,
    oracle: Option<&[u8]>,
    first: usize,
    hashes: &mut [u64],
) -> Result<RangeStats> {
    let mut ex = Extractor::new(reader);
    let mut buf = Vec::with_capacity(w.fragment_size as usize);
    let mut total = RangeStats::default();
    for (slot, &start) in hashes.iter_mut().zip(&w.queries[first..]) {
        let len = w.fragment_len(start);
        buf.clear();
        let st = ex
            .get_range_into(start, len, &mut buf)
            .map_err(|e| Error::Query { start, source: Box::new(e) })?;
        total.add(&st);
        if let Some(o) = oracle {
            if buf[..] != o[start as usize..(start + len) as usize] {
                return Err(Error::Query {
                    start,
                    source: Box::new(Error::corrupt("fragment differs from the oracle")),
                });
            }
        }
        *slot = fragment_hash(&buf);
    }
    Ok(total)
}
