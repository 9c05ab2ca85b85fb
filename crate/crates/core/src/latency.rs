//! Analytic cycle counts for the functional units of an MCR accelerator and
//! of a binary (BSC) accelerator with the same memory layout.
//!
//! Every unit streams `ceil(D / S)` blocks of `S` components. Only
//! steady-state unit cycles are modeled. Instruction issue and memory
//! transfers from the host are not.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Mcr,
    Bsc,
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Architecture::Mcr => "mcr",
            Architecture::Bsc => "bsc",
        })
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mcr" => Ok(Architecture::Mcr),
            "bsc" => Ok(Architecture::Bsc),
            other => Err(Error::invalid(format!("unknown architecture {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Bind,
    Unbind,
    Distance,
    Superimpose,
    Normalize,
    Permute,
    Search,
}

impl Op {
    pub const ALL: [Op; 7] =
        [Op::Bind, Op::Unbind, Op::Distance, Op::Superimpose, Op::Normalize, Op::Permute, Op::Search];

    pub fn name(self) -> &'static str {
        match self {
            Op::Bind => "bind",
            Op::Unbind => "unbind",
            Op::Distance => "distance",
            Op::Superimpose => "superimpose",
            Op::Normalize => "normalize",
            Op::Permute => "permute",
            Op::Search => "search",
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Op {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        Op::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown operation {s:?}")))
    }
}

/// Accelerator configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatencySpec {
    pub arch: Architecture,
    /// Components processed per cycle.
    pub simd: u32,
    /// Fixed-point accumulator width. Carried for reporting only.
    pub fp_bits: u32,
    /// Ring modulus; 2 for BSC.
    pub modulus: u32,
    pub dim: u32,
    pub classes: u32,
    pub freq_mhz: Option<f64>,
}

impl LatencySpec {
    pub fn mcr(simd: u32, modulus: u32, dim: u32, classes: u32) -> Result<Self> {
        let spec = LatencySpec {
            arch: Architecture::Mcr,
            simd,
            fp_bits: 16,
            modulus,
            dim,
            classes,
            freq_mhz: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn bsc(simd: u32, dim: u32, classes: u32) -> Result<Self> {
        let spec = LatencySpec {
            arch: Architecture::Bsc,
            simd,
            fp_bits: 16,
            modulus: 2,
            dim,
            classes,
            freq_mhz: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_freq(mut self, mhz: f64) -> Result<Self> {
        if !(mhz > 0.0 && mhz.is_finite()) {
            return Err(Error::invalid(format!("clock frequency must be positive, got {mhz}")));
        }
        self.freq_mhz = Some(mhz);
        Ok(self)
    }

    /// SIMD wider than `dim` is not an error; see [`is_clamped`](Self::is_clamped).
    pub fn validate(&self) -> Result<()> {
        if !self.simd.is_power_of_two() {
            return Err(Error::invalid(format!("SIMD width must be a power of two, got {}", self.simd)));
        }
        if self.dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        match self.arch {
            Architecture::Mcr if !(self.modulus >= 4 && self.modulus.is_power_of_two()) => Err(
                Error::invalid(format!("modulus must be a power of two of at least 4, got {}", self.modulus)),
            ),
            Architecture::Bsc if self.modulus != 2 => {
                Err(Error::invalid(format!("a binary accelerator has modulus 2, got {}", self.modulus)))
            }
            _ => Ok(()),
        }
    }

    /// Lanes actually used: `min(SIMD, D)`.
    pub fn effective_simd(&self) -> u32 {
        self.simd.min(self.dim)
    }

    /// True when the requested SIMD width exceeds the dimension.
    pub fn is_clamped(&self) -> bool {
        self.simd > self.dim
    }

    /// `ceil(D / S)` with the effective `S`.
    pub fn blocks(&self) -> u64 {
        (self.dim as u64).div_ceil(self.effective_simd() as u64)
    }

    fn adder_tree(&self) -> u64 {
        self.effective_simd().trailing_zeros() as u64
    }

    pub fn cycles(&self, op: Op) -> u64 {
        let n = self.blocks();
        match (self.arch, op) {
            (_, Op::Bind | Op::Unbind | Op::Permute) => n,
            (_, Op::Distance) => n + self.adder_tree(),
            (_, Op::Search) => self.classes as u64 * (self.cycles(Op::Distance) + 1),
            (Architecture::Mcr, Op::Superimpose) => 2 * n,
            (Architecture::Mcr, Op::Normalize) => 2 * n * (self.modulus as u64 / 4 + 1),
            // Counter update and majority threshold, one block per cycle.
            (Architecture::Bsc, Op::Superimpose | Op::Normalize) => n,
        }
    }

    /// Microseconds at the configured clock.
    pub fn micros(&self, cycles: u64) -> Option<f64> {
        self.freq_mhz.map(|f| cycles as f64 / f)
    }

    /// One inference: bind and accumulate every feature, normalize once, then
    /// search over the class prototypes.
    pub fn inference(&self, features: u32) -> Result<InferenceBreakdown> {
        if features == 0 {
            return Err(Error::invalid("need at least one feature"));
        }
        let d = features as u64;
        let bind = d * self.cycles(Op::Bind);
        let superimpose = d * self.cycles(Op::Superimpose);
        let normalize = self.cycles(Op::Normalize);
        let search = self.cycles(Op::Search);
        Ok(InferenceBreakdown { bind, superimpose, normalize, search, total: bind + superimpose + normalize + search })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferenceBreakdown {
    pub bind: u64,
    pub superimpose: u64,
    pub normalize: u64,
    pub search: u64,
    pub total: u64,
}

/// Post-implementation clock of the reference FPGA build per SIMD width.
pub fn reference_frequency_mhz(simd: u32) -> Option<f64> {
    match simd {
        8 => Some(150.0),
        16 => Some(125.0),
        32 => Some(115.0),
        64 => Some(118.0),
        _ => None,
    }
}

/// Feature and class counts of a classification workload.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WorkloadShape {
    pub name: &'static str,
    pub features: u32,
    pub classes: u32,
}

/// The seven workloads used for the hardware comparison.
pub const REFERENCE_WORKLOADS: [WorkloadShape; 7] = [
    WorkloadShape { name: "HabermanSurvival", features: 3, classes: 2 },
    WorkloadShape { name: "Adult", features: 14, classes: 2 },
    WorkloadShape { name: "Letter", features: 16, classes: 26 },
    WorkloadShape { name: "Cardio10", features: 21, classes: 10 },
    WorkloadShape { name: "PlantMargin", features: 64, classes: 100 },
    WorkloadShape { name: "UCIHAR", features: 561, classes: 6 },
    WorkloadShape { name: "ISOLET", features: 617, classes: 26 },
];

/// One row of a latency sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatencyRow {
    pub arch: Architecture,
    pub simd: u32,
    pub effective_simd: u32,
    pub clamped: bool,
    pub dim: u32,
    pub r: u32,
    pub classes: u32,
    pub features: u32,
    pub bind: u64,
    pub unbind: u64,
    pub distance: u64,
    pub superimpose: u64,
    pub normalize: u64,
    pub permute: u64,
    pub search: u64,
    pub inference: u64,
    pub freq_mhz: Option<f64>,
    pub inference_us: Option<f64>,
}

impl LatencyRow {
    pub fn new(spec: &LatencySpec, features: u32) -> Result<Self> {
        let inf = spec.inference(features)?;
        Ok(LatencyRow {
            arch: spec.arch,
            simd: spec.simd,
            effective_simd: spec.effective_simd(),
            clamped: spec.is_clamped(),
            dim: spec.dim,
            r: spec.modulus,
            classes: spec.classes,
            features,
            bind: spec.cycles(Op::Bind),
            unbind: spec.cycles(Op::Unbind),
            distance: spec.cycles(Op::Distance),
            superimpose: spec.cycles(Op::Superimpose),
            normalize: spec.cycles(Op::Normalize),
            permute: spec.cycles(Op::Permute),
            search: spec.cycles(Op::Search),
            inference: inf.total,
            freq_mhz: spec.freq_mhz,
            inference_us: spec.micros(inf.total),
        })
    }
}

/// Sweep request; `freq_mhz` of `None` falls back to the reference clock of
/// each SIMD width, when there is one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatencyConfig {
    pub arch: Architecture,
    pub simd: Vec<u32>,
    pub dim: Vec<u32>,
    pub r: u32,
    pub classes: u32,
    pub features: u32,
    pub freq_mhz: Option<f64>,
}

impl Default for LatencyConfig {
    fn default() -> Self {
        LatencyConfig {
            arch: Architecture::Mcr,
            simd: vec![8, 16, 32, 64],
            dim: vec![64, 512, 2048],
            r: 16,
            classes: 1,
            features: 1,
            freq_mhz: None,
        }
    }
}

impl LatencyConfig {
    pub fn spec(&self, simd: u32, dim: u32) -> Result<LatencySpec> {
        let spec = match self.arch {
            Architecture::Mcr => LatencySpec::mcr(simd, self.r, dim, self.classes)?,
            Architecture::Bsc => LatencySpec::bsc(simd, dim, self.classes)?,
        };
        match self.freq_mhz.or_else(|| reference_frequency_mhz(simd)) {
            Some(f) => spec.with_freq(f),
            None => Ok(spec),
        }
    }

    pub fn run(&self) -> Result<LatencyResults> {
        Ok(LatencyResults { config: self.clone(), rows: self.rows()? })
    }

    pub fn rows(&self) -> Result<Vec<LatencyRow>> {
        if self.simd.is_empty() || self.dim.is_empty() {
            return Err(Error::invalid("SIMD and dimension grids must be non-empty"));
        }
        let mut rows = Vec::with_capacity(self.simd.len() * self.dim.len());
        for &s in &self.simd {
            for &d in &self.dim {
                let spec = self.spec(s, d)?;
                if spec.is_clamped() {
                    log::warn!("SIMD {s} exceeds dimension {d}; using {d} lanes");
                }
                rows.push(LatencyRow::new(&spec, self.features)?);
            }
        }
        Ok(rows)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LatencyResults {
    pub config: LatencyConfig,
    pub rows: Vec<LatencyRow>,
}

impl LatencyResults {
    /// CSV with a leading `# config: {json}` comment line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# config: {}", serde_json::to_string(&self.config)?)?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "arch",
            "simd",
            "effective_simd",
            "clamped",
            "D",
            "r",
            "classes",
            "features",
            "bind",
            "unbind",
            "distance",
            "superimpose",
            "normalize",
            "permute",
            "search",
            "inference",
            "freq_mhz",
            "inference_us",
        ])?;
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.4}")).unwrap_or_default();
        for r in &self.rows {
            out.write_record([
                r.arch.to_string(),
                r.simd.to_string(),
                r.effective_simd.to_string(),
                r.clamped.to_string(),
                r.dim.to_string(),
                r.r.to_string(),
                r.classes.to_string(),
                r.features.to_string(),
                r.bind.to_string(),
                r.unbind.to_string(),
                r.distance.to_string(),
                r.superimpose.to_string(),
                r.normalize.to_string(),
                r.permute.to_string(),
                r.search.to_string(),
                r.inference.to_string(),
                opt(r.freq_mhz),
                opt(r.inference_us),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}
