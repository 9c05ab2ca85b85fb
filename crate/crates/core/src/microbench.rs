//! Wall-clock comparison of the packed and reference MCR kernels.

use std::fmt;
use std::hint::black_box;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcr::{ArithmeticPath, CartesianAccumulator};
use crate::models::ModelKind;
use crate::ring::{Hypervector, Modulus};
use crate::rng::RandomSource;
use crate::stats::{linear_fit, median, LinearFit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchOp {
    Bind,
    Unbind,
    Distance,
    /// WTA versus atan2 over a bundle of eight vectors.
    Normalize,
}

impl BenchOp {
    pub const ALL: [BenchOp; 4] = [BenchOp::Bind, BenchOp::Unbind, BenchOp::Distance, BenchOp::Normalize];

    fn name(self) -> &'static str {
        match self {
            BenchOp::Bind => "bind",
            BenchOp::Unbind => "unbind",
            BenchOp::Distance => "distance",
            BenchOp::Normalize => "normalize",
        }
    }
}

impl fmt::Display for BenchOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        BenchOp::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown benchmark operation {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MicrobenchConfig {
    pub ops: Vec<BenchOp>,
    /// MCR models only; the packed path needs a power-of-two modulus.
    pub models: Vec<ModelKind>,
    pub dims: Vec<usize>,
    /// Timed samples per cell; the median is reported.
    pub repetitions: usize,
    /// Components processed per timed sample, split into whole calls.
    pub work: usize,
    pub seed: u64,
}

impl Default for MicrobenchConfig {
    fn default() -> Self {
        MicrobenchConfig {
            ops: BenchOp::ALL.to_vec(),
            models: vec![ModelKind::mcr(16).expect("valid modulus")],
            dims: vec![256, 512, 1024, 2048, 4096, 8192, 16384],
            repetitions: 15,
            work: 1 << 18,
            seed: 0,
        }
    }
}

impl MicrobenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions must be at least 1"));
        }
        if self.ops.is_empty() || self.models.is_empty() || self.dims.is_empty() {
            return Err(Error::invalid("operation, model and dimension lists must be non-empty"));
        }
        if self.dims.contains(&0) {
            return Err(Error::invalid("dimensions must be positive"));
        }
        for m in &self.models {
            let r = match m {
                ModelKind::Mcr(r) => *r,
                _ => return Err(Error::Unsupported(format!("microbenchmarks cover MCR models only, got {m}"))),
            };
            if !r.is_power_of_two() {
                return Err(Error::Unsupported(format!("the packed path needs a power-of-two modulus, got {m}")));
            }
            if r.r() < 4 && self.ops.contains(&BenchOp::Normalize) {
                return Err(Error::Unsupported(format!("WTA normalization needs r >= 4, got {m}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MicrobenchRow {
    pub op: BenchOp,
    pub model: ModelKind,
    pub dim: usize,
    /// Median nanoseconds per call.
    pub packed_ns: f64,
    pub reference_ns: f64,
    /// Components per second.
    pub packed_throughput: f64,
    pub reference_throughput: f64,
    pub speedup: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MicrobenchResults {
    pub config: MicrobenchConfig,
    pub rows: Vec<MicrobenchRow>,
}

impl MicrobenchResults {
    pub fn row(&self, op: BenchOp, model: ModelKind, dim: usize) -> Option<&MicrobenchRow> {
        self.rows.iter().find(|r| r.op == op && r.model == model && r.dim == dim)
    }

    /// Line fit of median call time against `D` for one op and path.
    pub fn scaling(&self, op: BenchOp, model: ModelKind, path: ArithmeticPath) -> Option<LinearFit> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.op == op && r.model == model)
            .map(|r| {
                let ns = match path {
                    ArithmeticPath::Packed => r.packed_ns,
                    ArithmeticPath::Reference => r.reference_ns,
                };
                (r.dim as f64, ns)
            })
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        Some(linear_fit(&xs, &ys))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# config: {}", serde_json::to_string(&self.config)?)?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "op",
            "model",
            "D",
            "packed_ns",
            "reference_ns",
            "packed_components_per_s",
            "reference_components_per_s",
            "speedup",
        ])?;
        for r in &self.rows {
            out.write_record([
                r.op.to_string(),
                r.model.to_string(),
                r.dim.to_string(),
                format!("{:.1}", r.packed_ns),
                format!("{:.1}", r.reference_ns),
                format!("{:.4e}", r.packed_throughput),
                format!("{:.4e}", r.reference_throughput),
                format!("{:.3}", r.speedup),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

const BUNDLE: usize = 8;

struct Operands {
    a: Hypervector,
    b: Hypervector,
    acc: CartesianAccumulator<f64>,
}

impl Operands {
    fn new(m: Modulus, dim: usize, rng: &mut RandomSource) -> Result<Self> {
        let a = Hypervector::random(m, dim, rng)?;
        let b = Hypervector::random(m, dim, rng)?;
        let mut acc = CartesianAccumulator::new(m, dim)?;
        for _ in 0..BUNDLE {
            acc.accumulate(&Hypervector::random(m, dim, rng)?)?;
        }
        Ok(Operands { a, b, acc })
    }

    fn run(&self, op: BenchOp, path: ArithmeticPath) -> Result<u64> {
        Ok(match op {
            BenchOp::Bind => black_box(self.a.bind_with(&self.b, path)?).get(0) as u64,
            BenchOp::Unbind => black_box(self.a.unbind_with(&self.b, path)?).get(0) as u64,
            BenchOp::Distance => black_box(self.a.distance_with(&self.b, path)?),
            BenchOp::Normalize => black_box(self.acc.normalize_with(path)?).get(0) as u64,
        })
    }
}

/// Median nanoseconds per call over `reps` samples of `calls` calls each.
fn time_op(ops: &Operands, op: BenchOp, path: ArithmeticPath, calls: usize, reps: usize) -> Result<f64> {
    ops.run(op, path)?;
    let mut samples = Vec::with_capacity(reps);
    for _ in 0..reps {
        let t = Instant::now();
        let mut sink = 0u64;
        for _ in 0..calls {
            sink = sink.wrapping_add(ops.run(op, path)?);
        }
        black_box(sink);
        samples.push(t.elapsed().as_nanos() as f64 / calls as f64);
    }
    Ok(median(&samples))
}

/// Runs every (op, model, D) cell sequentially; timings are not
/// reproducible across machines, operands are.
pub fn run_microbench(cfg: &MicrobenchConfig) -> Result<MicrobenchResults> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &model in &cfg.models {
        let m = model.modulus().expect("validated MCR model");
        for &dim in &cfg.dims {
            let mut rng = RandomSource::derive(cfg.seed, &[m.r() as u64, dim as u64]);
            let operands = Operands::new(m, dim, &mut rng)?;
            let calls = (cfg.work / dim).max(1);
            for &op in &cfg.ops {
                let packed_ns = time_op(&operands, op, ArithmeticPath::Packed, calls, cfg.repetitions)?;
                let reference_ns = time_op(&operands, op, ArithmeticPath::Reference, calls, cfg.repetitions)?;
                let per_s = |ns: f64| dim as f64 / (ns.max(f64::MIN_POSITIVE) * 1e-9);
                rows.push(MicrobenchRow {
                    op,
                    model,
                    dim,
                    packed_ns,
                    reference_ns,
                    packed_throughput: per_s(packed_ns),
                    reference_throughput: per_s(reference_ns),
                    speedup: reference_ns / packed_ns,
                });
            }
        }
    }
    Ok(MicrobenchResults { config: cfg.clone(), rows })
}
