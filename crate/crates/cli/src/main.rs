//! `rlz-arc`: build, query, benchmark and model blocked RLZ archives.

mod concat;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;
use rlz_core::access::{self, RunOptions, WorkloadMode, DEFAULT_QUERY_COUNT};
use rlz_core::archive::{ArchiveReader, ArchiveWriter, Manifest};
use rlz_core::codecs::{Scheme, SchemeId};
use rlz_core::dictionary::{Dictionary, DictionaryIndex};
use rlz_core::factorize::DEFAULT_MIN_LITERAL;
use rlz_core::perfmodel::{self, MediaProfile, ModelInputs, MB};
use rlz_core::synth::{self, SynthConfig};
use rlz_core::units::{format_size, parse_size, percent};
use rlz_core::Error;
use serde_json::json;

use crate::concat::ConcatFiles;

/// Environment variable holding a shell command that drops OS caches before
/// a benchmark run.
const DROP_CACHE_ENV: &str = "RLZ_DROP_CACHES_CMD";

#[derive(Parser)]
#[command(name = "rlz-arc", version, about = "Blocked relative Lempel-Ziv archives with random access")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic corpus.
    Gen(GenArgs),
    /// Compress input files (concatenated in order) into an archive.
    Build(BuildArgs),
    /// Write a byte range or a document to standard output.
    Extract(ExtractArgs),
    /// Time a FULL, RANDOM or BATCH workload.
    Bench(BenchArgs),
    /// Space breakdown and factor statistics.
    Stat(StatArgs),
    /// Predict query rates from media and archive parameters.
    Model(ModelArgs),
    /// Decode every block, optionally comparing with the original inputs.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Text,
    Json,
}

fn size(s: &str) -> Result<u64, String> {
    parse_size(s).map_err(|e| e.to_string())
}

fn scheme_id(s: &str) -> Result<SchemeId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn mode(s: &str) -> Result<WorkloadMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = size, default_value = "64M")]
    size: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Fraction of segments that are fresh text.
    #[arg(long, default_value_t = 0.1)]
    novelty: f64,
    /// How far back repeated segments may be copied from.
    #[arg(long, value_parser = size, default_value = "4M")]
    repeat_distance: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BuildArgs {
    /// Input files, concatenated in the order given.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_parser = scheme_id, default_value = "rlz-pv")]
    scheme: SchemeId,
    #[arg(long, value_parser = size, default_value = "64M")]
    dict_size: u64,
    #[arg(long, value_parser = size, default_value = "1024")]
    sample_size: u64,
    #[arg(long, value_parser = size, default_value = "16K")]
    block_size: u64,
    #[arg(long, default_value_t = DEFAULT_MIN_LITERAL)]
    min_literal: u32,
    /// Do not record input file boundaries.
    #[arg(long)]
    no_manifest: bool,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct ExtractArgs {
    archive: PathBuf,
    #[arg(long, conflicts_with = "doc")]
    start: Option<u64>,
    #[arg(long, value_parser = size, requires = "start")]
    len: Option<u64>,
    /// Document id from the manifest.
    #[arg(long)]
    doc: Option<String>,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    archive: PathBuf,
    #[arg(long, value_parser = mode, default_value = "random")]
    mode: WorkloadMode,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_QUERY_COUNT)]
    queries: usize,
    #[arg(long, value_parser = size, default_value = "16K")]
    fragment: u64,
    /// Independent query streams (1 = the sequential measurement).
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Original input files; every fragment is checked against them.
    #[arg(long, num_args = 1..)]
    verify: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Also write the report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatArgs {
    archive: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct ModelArgs {
    /// Media preset: hdd or ssd.
    #[arg(long, default_value = "hdd")]
    media: String,
    /// Override the preset's random read latency (milliseconds).
    #[arg(long)]
    latency_ms: Option<f64>,
    /// Override the preset's sequential transfer rate (MB/s).
    #[arg(long)]
    transfer_mbps: Option<f64>,
    #[arg(long, value_parser = size, default_value = "64K")]
    block_size: u64,
    #[arg(long, value_parser = size, default_value = "16K")]
    fragment: u64,
    /// Compressed size over original size, e.g. 0.22.
    #[arg(long, default_value_t = 0.22)]
    rate: f64,
    /// Decoder output rate (MB/s).
    #[arg(long, default_value_t = 260.0)]
    decode_mbps: f64,
    /// Effective latency for address-sorted queries (milliseconds).
    #[arg(long)]
    batch_latency_ms: Option<f64>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    archive: PathBuf,
    /// Original input files to compare against.
    inputs: Vec<PathBuf>,
}

type CmdResult = Result<(), Error>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Build(a) => build(a),
        Command::Extract(a) => extract(a),
        Command::Bench(a) => bench(a),
        Command::Stat(a) => stat(a),
        Command::Model(a) => model(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rlz-arc: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        _ if e.is_corruption() => 3,
        Error::Io(_) => 4,
        Error::Query { source, .. } => exit_code(source),
        _ => 2,
    }
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, Error> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn open_reader(path: &PathBuf) -> Result<ArchiveReader, Error> {
    ArchiveReader::open(path).map_err(|e| match e {
        Error::Io(io) => Error::Io(io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    })
}

fn gen(a: GenArgs) -> CmdResult {
    let cfg = SynthConfig {
        size: a.size,
        seed: a.seed,
        novelty: a.novelty,
        repeat_distance: a.repeat_distance,
        ..Default::default()
    };
    let data = synth::generate(&cfg)?;
    let mut out = create(&a.out)?;
    out.write_all(&data)?;
    out.flush()?;
    Ok(())
}

fn build(a: BuildArgs) -> CmdResult {
    let mut corpus = ConcatFiles::open(&a.inputs)?;
    let source_length = corpus.len();
    if source_length == 0 {
        return Err(Error::Param("inputs are empty".into()));
    }
    let manifest = if a.no_manifest {
        None
    } else {
        let ids = a.inputs.iter().map(|p| p.to_string_lossy().into_owned());
        Some(Manifest::from_lengths(ids.zip(corpus.file_lengths()))?)
    };
    let dict_size = usize::try_from(a.dict_size).map_err(|_| Error::Param("dictionary size too large".into()))?;
    let sample_size = usize::try_from(a.sample_size).map_err(|_| Error::Param("sample size too large".into()))?;
    let dict = if a.scheme.uses_dictionary() {
        Dictionary::build(&mut corpus, dict_size, sample_size)?
    } else {
        Dictionary::empty(source_length)
    };
    let index = if a.scheme.is_rlz() {
        Some(DictionaryIndex::new(&dict)?)
    } else {
        None
    };
    let scheme = Scheme::for_dictionary(a.scheme, dict.len(), a.min_literal);
    let writer = ArchiveWriter::new(scheme, a.block_size)?;
    let file = File::options()
        .read(true)
        .write(true)
        .create(true)
        .truncate(true)
        .open(&a.out)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", a.out.display()))))?;
    let s = writer.write(&mut corpus, &dict, index.as_ref(), manifest.as_ref(), file)?;

    let c = source_length as f64;
    match a.format {
        Format::Json => {
            let v = json!({
                "scheme": a.scheme.name(),
                "block_size": a.block_size,
                "dictionary_length": dict.len(),
                "summary": s,
                "total_bytes": s.total_bytes(),
                "compression_rate": s.total_bytes() as f64 / c,
                "dictionary_share": dict.len() as f64 / c,
                "table_share": s.table_bytes as f64 / c,
            });
            println!("{v:#}");
        }
        Format::Text => {
            println!("scheme           {}", a.scheme);
            println!("corpus           {} ({} bytes)", format_size(source_length), source_length);
            println!("blocks           {} x {}", s.block_count, format_size(a.block_size));
            println!("archive          {} ({} bytes)", format_size(s.total_bytes()), s.total_bytes());
            println!("rate             {}", percent(s.total_bytes() as f64, c));
            println!("payload share    {}", percent(s.payload_bytes as f64, c));
            println!("dict share       {}", percent(dict.len() as f64, c));
            println!("dict stored      {}", percent(s.dictionary_bytes as f64, c));
            println!("table share      {}", percent(s.table_bytes as f64, c));
            if s.factor_count > 0 {
                println!("factors          {}", s.factor_count);
                println!("mean factor      {:.2} bytes", c / s.factor_count as f64);
            }
        }
    }
    Ok(())
}

fn extract(a: ExtractArgs) -> CmdResult {
    let r = open_reader(&a.archive)?;
    let bytes = match (&a.doc, a.start) {
        (Some(id), _) => r.document(id)?,
        (None, Some(start)) => {
            let len = a.len.unwrap_or_else(|| r.source_length().saturating_sub(start));
            r.get_range(start, len)?
        }
        (None, None) => r.get_range(0, r.source_length())?,
    };
    match &a.out {
        Some(p) => {
            let mut f = create(p)?;
            f.write_all(&bytes)?;
            f.flush()?;
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(&bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn read_inputs(paths: &[PathBuf]) -> Result<Vec<u8>, Error> {
    let mut all = Vec::new();
    for p in paths {
        let data = std::fs::read(p).map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", p.display()))))?;
        all.extend_from_slice(&data);
    }
    Ok(all)
}

fn bench(a: BenchArgs) -> CmdResult {
    let r = open_reader(&a.archive)?;
    let oracle = if a.verify.is_empty() {
        None
    } else {
        Some(read_inputs(&a.verify)?)
    };
    let w = access::generate_workload(a.mode, r.source_length(), a.fragment, a.queries, a.seed)?;
    let hook = std::env::var(DROP_CACHE_ENV).ok().filter(|s| !s.trim().is_empty());
    if hook.is_none() {
        warn!("{DROP_CACHE_ENV} is not set; running with whatever the page cache holds");
    }
    let opts = RunOptions {
        drop_cache_hook: hook,
        oracle: oracle.as_deref(),
        threads: a.threads,
    };
    let report = access::run_workload(&r, &w, &opts)?;
    let text = match a.format {
        Format::Json => format!("{:#}\n", serde_json::to_value(&report).expect("report serializes")),
        Format::Text => report.to_key_value(),
    };
    print!("{text}");
    if let Some(p) = &a.out {
        let mut f = create(p)?;
        f.write_all(text.as_bytes())?;
        f.flush()?;
    }
    Ok(())
}

fn stat(a: StatArgs) -> CmdResult {
    let r = open_reader(&a.archive)?;
    let s = r.stats()?;
    match a.format {
        Format::Json => {
            let mut v = serde_json::to_value(&s).expect("stats serialize");
            let obj = v.as_object_mut().expect("stats are an object");
            obj.insert("compression_rate".into(), json!(s.compression_rate()));
            obj.insert("payload_rate".into(), json!(s.payload_rate()));
            obj.insert("dictionary_rate".into(), json!(s.dictionary_rate()));
            obj.insert("table_rate".into(), json!(s.table_rate()));
            obj.insert("other_rate".into(), json!(s.other_rate()));
            obj.insert("dictionary_share".into(), json!(s.dictionary_share()));
            obj.insert("mean_factor_length".into(), json!(s.mean_factor_length()));
            println!("{v:#}");
        }
        Format::Text => {
            let c = s.source_length as f64;
            println!("scheme           {}", s.scheme);
            println!("corpus           {} bytes in {} blocks of {}", s.source_length, s.block_count, format_size(s.block_size as u64));
            println!("file             {} bytes", s.file_bytes);
            println!("rate             {}", percent(s.file_bytes as f64, c));
            println!("  payload        {} ({} bytes)", percent(s.payload_bytes as f64, c), s.payload_bytes);
            println!("  dictionary     {} ({} bytes)", percent(s.dictionary_bytes as f64, c), s.dictionary_bytes);
            println!("  table          {} ({} bytes)", percent(s.table_bytes as f64, c), s.table_bytes);
            println!("  other          {} ({} bytes)", percent((s.header_bytes + s.manifest_bytes) as f64, c), s.header_bytes + s.manifest_bytes);
            println!("dict share       {}", percent(s.dictionary_length as f64, c));
            let st = &s.streams;
            println!("streams          prelude {} offsets {} lengths {} literals {} text {}", st.prelude, st.offsets, st.lengths, st.literals, st.text);
            if s.factor_count > 0 {
                println!("factors          {} ({} copies, {} literal entries)", s.factor_count, s.copy_factors, s.literal_factors);
                println!("mean factor      {:.2} bytes (copies {:.2})", s.mean_factor_length(), s.mean_copy_length());
                println!("literal bytes    {}", s.literal_bytes);
            }
            println!("footprint        {} (dictionary {} + table {})", format_size(s.footprint.total()), format_size(s.footprint.dictionary_bytes), format_size(s.footprint.table_bytes));
        }
    }
    Ok(())
}

fn model(a: ModelArgs) -> CmdResult {
    let preset = MediaProfile::preset(&a.media)?;
    let media = MediaProfile {
        name: preset.name,
        random_read_latency: a.latency_ms.map_or(preset.random_read_latency, |ms| ms / 1e3),
        sequential_transfer_rate: a.transfer_mbps.map_or(preset.sequential_transfer_rate, |r| r * MB),
    };
    let media = if media == preset {
        preset
    } else {
        MediaProfile::custom(media.random_read_latency, media.sequential_transfer_rate)?
    };
    let inputs = ModelInputs {
        batch_latency_override: a.batch_latency_ms.map(|ms| ms / 1e3),
        ..ModelInputs::new(a.block_size, a.fragment, a.rate, a.decode_mbps * MB)
    };
    let random = perfmodel::predict_random_qps(&media, &inputs)?;
    let batch = inputs
        .batch_latency_override
        .map(|l| perfmodel::predict_batch_qps(&media, &inputs, l))
        .transpose()?;
    let sequential = perfmodel::predict_sequential_rate(&media, &inputs)?;
    match a.format {
        Format::Json => {
            let v = json!({
                "media": media,
                "inputs": inputs,
                "touched_blocks": inputs.touched_blocks(),
                "random": random,
                "random_decode_share": random.breakdown.decode_share(),
                "batch": batch,
                "sequential_fragments_per_sec": sequential,
            });
            println!("{v:#}");
        }
        Format::Text => {
            let ms = |s: f64| format!("{:.3} ms", s * 1e3);
            println!(
                "media            {} (latency {}, transfer {:.0} MB/s)",
                media.name,
                ms(media.random_read_latency),
                media.sequential_transfer_rate / MB
            );
            println!(
                "inputs           block {}, fragment {}, rate {}, decode {:.0} MB/s",
                format_size(a.block_size),
                format_size(a.fragment),
                percent(a.rate, 1.0),
                a.decode_mbps
            );
            let b = random.breakdown;
            println!(
                "random           {:.1} queries/s ({} per query: latency {}, transfer {}, decode {}; decode share {})",
                random.qps,
                ms(b.total()),
                ms(b.latency),
                ms(b.transfer),
                ms(b.decode),
                percent(b.decode, b.total())
            );
            if let Some(p) = batch {
                println!("batch            {:.1} queries/s ({} per query)", p.qps, ms(p.breakdown.total()));
            }
            println!("sequential       {sequential:.0} fragments/s");
        }
    }
    Ok(())
}

fn verify(a: VerifyArgs) -> CmdResult {
    let r = open_reader(&a.archive)?;
    let oracle = if a.inputs.is_empty() {
        None
    } else {
        Some(read_inputs(&a.inputs)?)
    };
    if let Some(o) = &oracle {
        if o.len() as u64 != r.source_length() {
            return Err(Error::Corrupt(format!(
                "archive holds {} bytes, inputs hold {}",
                r.source_length(),
                o.len()
            )));
        }
    }
    let bs = r.block_size() as usize;
    for i in 0..r.block_count() {
        let block = r.read_block(i).map_err(|e| Error::Query {
            start: i * bs as u64,
            source: Box::new(e),
        })?;
        if let Some(o) = &oracle {
            let at = i as usize * bs;
            if block[..] != o[at..at + block.len()] {
                return Err(Error::Query {
                    start: at as u64,
                    source: Box::new(Error::Corrupt("block differs from the inputs".into())),
                });
            }
        }
    }
    println!("ok               {} blocks, {} bytes", r.block_count(), r.source_length());
    Ok(())
}
