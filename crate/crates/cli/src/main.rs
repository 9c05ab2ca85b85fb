//! `mcr`: experiment runner for the mcr-core harnesses.
//!
//! Exit status is 0 on success, 2 for invalid arguments or configuration,
//! and 1 for runtime failures.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use mcr_core::capacity::{run_capacity_sweep, CapacityConfig};
use mcr_core::classifier::{run_benchmark, BenchmarkConfig, Dataset, ModelConfig};
use mcr_core::io::{read_hypervector, write_hypervector};
use mcr_core::latency::{Architecture, LatencyConfig};
use mcr_core::microbench::{run_microbench, BenchOp, MicrobenchConfig};
use mcr_core::{ArithmeticPath, Component, Hypervector, ModelKind, Modulus, RandomSource};

/// Bad input from the user; maps to exit status 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct ConfigError(String);

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Parser)]
#[command(name = "mcr", version, about = "Modular Composite Representation experiments")]
struct Cli {
    /// Worker threads for parallel sweeps (default: all cores). Results do
    /// not depend on this.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sequence decoding capacity sweep.
    Capacity(CapacityArgs),
    /// Prototype classification benchmark on CSV datasets.
    Classify(ClassifyArgs),
    /// Analytic accelerator cycle counts.
    Latency(LatencyArgs),
    /// Packed versus reference kernel timings.
    Microbench(MicrobenchArgs),
    /// Create, inspect and convert hypervector files.
    #[command(subcommand)]
    Hv(HvCommand),
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args)]
struct Output {
    /// Output file (default: stdout).
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct CapacityArgs {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Models, e.g. mcr16,bsc,mapi4,mapc32,fhrr.
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    /// Codebook sizes.
    #[arg(long, value_delimiter = ',')]
    d: Option<Vec<usize>>,
    /// Sequence lengths.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    codebooks: Option<usize>,
    #[arg(long)]
    sequences: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory of <name>.csv and <name>.json files.
    #[arg(long, env = "MCR_DATA_DIR", default_value = "data")]
    data_dir: PathBuf,
    #[arg(long, value_delimiter = ',')]
    datasets: Option<Vec<String>>,
    /// Models as kind:D, e.g. mcr16:256,bsc:1024.
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    /// LVQ learning rate.
    #[arg(long)]
    epsilon: Option<f64>,
    /// LVQ window width.
    #[arg(long)]
    omega: Option<f64>,
    /// MCR arithmetic: packed or reference.
    #[arg(long)]
    path: Option<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct LatencyArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// mcr or bsc.
    #[arg(long)]
    arch: Option<String>,
    #[arg(long, value_delimiter = ',')]
    simd: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    dim: Option<Vec<u32>>,
    #[arg(long)]
    r: Option<u32>,
    #[arg(long)]
    classes: Option<u32>,
    #[arg(long)]
    features: Option<u32>,
    /// Clock in MHz; defaults to the reference clock of each SIMD width.
    #[arg(long)]
    freq: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct MicrobenchArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// bind, unbind, distance, normalize.
    #[arg(long, value_delimiter = ',')]
    ops: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    reps: Option<usize>,
    /// Components processed per timed sample.
    #[arg(long)]
    work: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Subcommand)]
enum HvCommand {
    /// Write a uniformly random hypervector.
    Random {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Print the header and a component summary of a file.
    Inspect {
        file: PathBuf,
        /// Components to print.
        #[arg(long, default_value_t = 16)]
        head: usize,
    },
    /// Read whitespace or comma separated components and write a file.
    Pack {
        #[arg(long)]
        r: u32,
        /// Text input (default: stdin).
        #[arg(long, short)]
        input: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Print the components of a file, one line.
    Unpack {
        file: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else { return Ok(T::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_err(format!("bad config {}: {e}", path.display())))
}

fn parse_list<T: std::str::FromStr<Err = mcr_core::Error>>(items: &[String]) -> Result<Vec<T>> {
    items.iter().map(|s| s.trim().parse::<T>().map_err(anyhow::Error::from)).collect()
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit<T: Serialize>(
    output: &Output,
    results: &T,
    csv: impl FnOnce(&mut dyn Write) -> mcr_core::Result<()>,
) -> Result<()> {
    let mut w = sink(output.out.as_deref())?;
    match output.format {
        Format::Csv => csv(&mut w)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, results)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn capacity(a: CapacityArgs) -> Result<()> {
    let mut cfg: CapacityConfig = load_config(a.config.as_deref())?;
    if let Some(m) = &a.models {
        cfg.models = parse_list(m)?;
    }
    cfg.d = a.d.unwrap_or(cfg.d);
    cfg.m = a.m.unwrap_or(cfg.m);
    cfg.dim = a.dim.unwrap_or(cfg.dim);
    cfg.codebooks = a.codebooks.unwrap_or(cfg.codebooks);
    cfg.sequences = a.sequences.unwrap_or(cfg.sequences);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.validate()?;
    let res = run_capacity_sweep(&cfg)?;
    emit(&a.output, &res, |w| res.write_csv(w))
}

fn classify(a: ClassifyArgs) -> Result<()> {
    let mut cfg: BenchmarkConfig = load_config(a.config.as_deref())?;
    if let Some(d) = a.datasets {
        cfg.datasets = d;
    }
    if let Some(m) = &a.models {
        cfg.models = parse_list::<ModelConfig>(m)?;
    }
    cfg.runs = a.runs.unwrap_or(cfg.runs);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.train.levels = a.levels.unwrap_or(cfg.train.levels);
    cfg.train.epochs = a.epochs.unwrap_or(cfg.train.epochs);
    cfg.train.epsilon = a.epsilon.unwrap_or(cfg.train.epsilon);
    cfg.train.omega = a.omega.unwrap_or(cfg.train.omega);
    if let Some(p) = &a.path {
        cfg.train.path = Some(p.parse::<ArithmeticPath>()?);
    }
    cfg.train.validate()?;
    if cfg.runs == 0 {
        return Err(config_err("runs must be at least 1"));
    }
    if cfg.train.path == Some(ArithmeticPath::Packed) {
        for m in &cfg.models {
            if let ModelKind::Mcr(r) = m.kind {
                if !r.is_power_of_two() || r.r() < 4 {
                    return Err(config_err(format!("{m}: the packed path needs a power-of-two modulus of at least 4")));
                }
            }
        }
    }
    let datasets = cfg
        .datasets
        .iter()
        .map(|name| Dataset::load(&a.data_dir, name))
        .collect::<mcr_core::Result<Vec<_>>>()?;
    log::info!("{} datasets, {} models, {} runs", datasets.len(), cfg.models.len(), cfg.runs);
    let res = run_benchmark(&datasets, &cfg)?;
    emit(&a.output, &res, |w| res.write_csv(w))
}

fn latency(a: LatencyArgs) -> Result<()> {
    let mut cfg: LatencyConfig = load_config(a.config.as_deref())?;
    if let Some(arch) = &a.arch {
        cfg.arch = arch.parse::<Architecture>()?;
        if cfg.arch == Architecture::Bsc && a.r.is_none() {
            cfg.r = 2;
        }
    }
    cfg.simd = a.simd.unwrap_or(cfg.simd);
    cfg.dim = a.dim.unwrap_or(cfg.dim);
    cfg.r = a.r.unwrap_or(cfg.r);
    cfg.classes = a.classes.unwrap_or(cfg.classes);
    cfg.features = a.features.unwrap_or(cfg.features);
    cfg.freq_mhz = a.freq.or(cfg.freq_mhz);
    let res = cfg.run()?;
    emit(&a.output, &res, |w| res.write_csv(w))
}

fn microbench(a: MicrobenchArgs) -> Result<()> {
    let mut cfg: MicrobenchConfig = load_config(a.config.as_deref())?;
    if let Some(ops) = &a.ops {
        cfg.ops = parse_list::<BenchOp>(ops)?;
    }
    if let Some(m) = &a.models {
        cfg.models = parse_list(m)?;
    }
    cfg.dims = a.dims.unwrap_or(cfg.dims);
    cfg.repetitions = a.reps.unwrap_or(cfg.repetitions);
    cfg.work = a.work.unwrap_or(cfg.work);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.validate()?;
    let res = run_microbench(&cfg)?;
    emit(&a.output, &res, |w| res.write_csv(w))
}

fn read_hv_file(path: &Path) -> Result<Hypervector> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(read_hypervector(io::BufReader::new(f))?)
}

fn write_hv_file(path: &Path, hv: &Hypervector) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?);
    write_hypervector(&mut w, hv)?;
    w.flush()?;
    Ok(())
}

fn hv(cmd: HvCommand) -> Result<()> {
    match cmd {
        HvCommand::Random { r, dim, seed, out } => {
            let m = Modulus::new(r)?;
            let h = Hypervector::random(m, dim, &mut RandomSource::new(seed))?;
            write_hv_file(&out, &h)
        }
        HvCommand::Inspect { file, head } => {
            let h = read_hv_file(&file)?;
            let (modulus, dim) = (h.modulus(), h.dim());
            let comps = h.components();
            let mut hist = vec![0usize; modulus.r() as usize];
            comps.iter().for_each(|&c| hist[c as usize] += 1);
            let mut out = io::stdout().lock();
            writeln!(out, "r={} b={} D={} payload_bytes={}", modulus.r(), modulus.bits(), dim, h.payload_len())?;
            let shown: Vec<String> = comps.iter().take(head).map(|c| c.to_string()).collect();
            writeln!(out, "head: {}", shown.join(" "))?;
            if modulus.r() <= 64 {
                let counts: Vec<String> = hist.iter().map(|c| c.to_string()).collect();
                writeln!(out, "histogram: {}", counts.join(" "))?;
            }
            Ok(())
        }
        HvCommand::Pack { r, input, out } => {
            let m = Modulus::new(r)?;
            let mut text = String::new();
            match input {
                Some(p) => {
                    File::open(&p).with_context(|| format!("cannot open {}", p.display()))?.read_to_string(&mut text)?;
                }
                None => {
                    io::stdin().read_to_string(&mut text)?;
                }
            }
            let comps = text
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<Component>().map_err(|_| config_err(format!("not a component: {t:?}"))))
                .collect::<Result<Vec<_>>>()?;
            write_hv_file(&out, &Hypervector::from_components(m, &comps)?)
        }
        HvCommand::Unpack { file, out } => {
            let h = read_hv_file(&file)?;
            let mut w = sink(out.as_deref())?;
            let text: Vec<String> = h.iter().map(|c| c.to_string()).collect();
            writeln!(w, "{}", text.join(" "))?;
            w.flush()?;
            Ok(())
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let usage = err.chain().any(|e| {
        e.downcast_ref::<ConfigError>().is_some()
            || e.downcast_ref::<mcr_core::Error>().is_some_and(|e| e.is_usage_error())
    });
    if usage {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Capacity(a) => capacity(a),
        Command::Classify(a) => classify(a),
        Command::Latency(a) => latency(a),
        Command::Microbench(a) => microbench(a),
        Command::Hv(c) => hv(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
