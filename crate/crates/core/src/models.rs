//! Baseline vector-symbolic models behind one interface.
//!
//! | family | component            | bind             | bundle normalization           | distance            |
//! |--------|----------------------|------------------|--------------------------------|---------------------|
//! | MCR    | `Z_r`                | modular add      | phasor sum, nearest ring phase | modular Manhattan   |
//! | BSC    | `{0, 1}`             | XOR              | majority, seeded random ties   | Hamming             |
//! | MAP-I  | `b`-bit signed int   | multiply, clip   | min/max rescale then quantize  | cosine distance     |
//! | MAP-C  | `f32`                | multiply         | none                           | cosine distance     |
//! | FHRR   | phase in `[0, 2π)`   | phase add        | unit phasor                    | mean angular        |
//!
//! Lower distance means more similar for every family.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcr::{ArithmeticPath, CartesianAccumulator};
use crate::ring::{Component, Hypervector, Modulus};
use crate::rng::RandomSource;
use crate::scalar::AccumScalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Mcr,
    Bsc,
    MapI,
    MapC,
    Fhrr,
}

/// Model family plus its precision parameter.
///
/// Text form: `mcr<r>` (modulus `r`, so `mcr16` stores 4 bits), `bsc`,
/// `mapi<b>` (`b` bits, 2..=32), `mapc32` and `fhrr`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ModelKind {
    Mcr(Modulus),
    Bsc,
    MapI { bits: u32 },
    MapC,
    Fhrr,
}

impl ModelKind {
    pub fn family(self) -> Family {
        match self {
            ModelKind::Mcr(_) => Family::Mcr,
            ModelKind::Bsc => Family::Bsc,
            ModelKind::MapI { .. } => Family::MapI,
            ModelKind::MapC => Family::MapC,
            ModelKind::Fhrr => Family::Fhrr,
        }
    }

    /// Storage bits per component.
    pub fn bits(self) -> u32 {
        match self {
            ModelKind::Mcr(m) => m.bits(),
            ModelKind::Bsc => 1,
            ModelKind::MapI { bits } => bits,
            ModelKind::MapC => 32,
            ModelKind::Fhrr => 128,
        }
    }

    pub fn modulus(self) -> Option<Modulus> {
        match self {
            ModelKind::Mcr(m) => Some(m),
            ModelKind::Bsc => Some(Modulus::new(2).expect("valid")),
            _ => None,
        }
    }

    pub fn is_mcr(self) -> bool {
        matches!(self, ModelKind::Mcr(_))
    }

    pub fn mcr(r: u32) -> Result<Self> {
        Ok(ModelKind::Mcr(Modulus::new(r)?))
    }

    pub fn map_i(bits: u32) -> Result<Self> {
        if !(2..=32).contains(&bits) {
            return Err(Error::invalid(format!("MAP-I needs 2..=32 bits, got {bits}")));
        }
        Ok(ModelKind::MapI { bits })
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Mcr(m) => write!(f, "mcr{}", m.r()),
            ModelKind::Bsc => f.write_str("bsc"),
            ModelKind::MapI { bits } => write!(f, "mapi{bits}"),
            ModelKind::MapC => f.write_str("mapc32"),
            ModelKind::Fhrr => f.write_str("fhrr"),
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let number = |rest: &str| -> Result<u32> {
            rest.parse()
                .map_err(|_| Error::invalid(format!("malformed model spec {s:?}")))
        };
        match s.as_str() {
            "bsc" => Ok(ModelKind::Bsc),
            "mapc" | "mapc32" => Ok(ModelKind::MapC),
            "fhrr" => Ok(ModelKind::Fhrr),
            _ => {
                if let Some(rest) = s.strip_prefix("mcr") {
                    ModelKind::mcr(number(rest)?)
                } else if let Some(rest) = s.strip_prefix("mapi") {
                    ModelKind::map_i(number(rest)?)
                } else {
                    Err(Error::invalid(format!("unknown model {s:?}")))
                }
            }
        }
    }
}

impl TryFrom<String> for ModelKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ModelKind> for String {
    fn from(k: ModelKind) -> String {
        k.to_string()
    }
}

/// Model kind and dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub kind: ModelKind,
    pub dim: usize,
}

impl ModelDescriptor {
    pub fn new(kind: ModelKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        Ok(ModelDescriptor { kind, dim })
    }

    pub fn family(&self) -> Family {
        self.kind.family()
    }

    pub fn bits_per_component(&self) -> u32 {
        self.kind.bits()
    }

    /// Storage of one hypervector, `b * D` bits.
    pub fn footprint_bits(&self) -> u64 {
        self.bits_per_component() as u64 * self.dim as u64
    }
}

/// Component storage of a [`GenericHv`].
#[derive(Clone, Debug, PartialEq)]
pub enum HvData {
    /// MCR, and BSC as `Z_2`.
    Ring(Hypervector),
    /// MAP-I.
    Int(Vec<i32>),
    /// MAP-C.
    Real(Vec<f32>),
    /// FHRR phases.
    Phase(Vec<f64>),
}

/// Hypervector of any model family.
#[derive(Clone, Debug, PartialEq)]
pub struct GenericHv {
    desc: ModelDescriptor,
    data: HvData,
}

pub(crate) fn int_range(bits: u32) -> (i64, i64) {
    (-(1i64 << (bits - 1)), (1i64 << (bits - 1)) - 1)
}

pub(crate) fn wrap_phase(x: f64) -> f64 {
    let p = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU
    if p >= TAU {
        0.0
    } else {
        p
    }
}

fn cosine_distance(a: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    (1.0 - dot / (na * nb).sqrt()).clamp(0.0, 2.0)
}

impl GenericHv {
    /// Maps latent uniforms `u` in `[0, 1)` to a random hypervector of the
    /// model. Sharing the latent values across models gives codebooks built
    /// from common random numbers.
    pub fn from_latent(desc: ModelDescriptor, latent: &[f64]) -> Result<Self> {
        if latent.len() != desc.dim {
            return Err(Error::invalid(format!(
                "{} latent values for D={}",
                latent.len(),
                desc.dim
            )));
        }
        let data = match desc.kind {
            ModelKind::Mcr(_) | ModelKind::Bsc => {
                let m = desc.kind.modulus().expect("ring model");
                let r = m.r() as f64;
                let comps: Vec<Component> = latent
                    .iter()
                    .map(|&u| ((u * r) as u32).min(m.r() - 1) as Component)
                    .collect();
                HvData::Ring(Hypervector::from_components(m, &comps)?)
            }
            ModelKind::MapI { .. } => {
                HvData::Int(latent.iter().map(|&u| if u < 0.5 { -1 } else { 1 }).collect())
            }
            ModelKind::MapC => {
                HvData::Real(latent.iter().map(|&u| if u < 0.5 { -1.0 } else { 1.0 }).collect())
            }
            ModelKind::Fhrr => HvData::Phase(latent.iter().map(|&u| wrap_phase(u * TAU)).collect()),
        };
        Ok(GenericHv { desc, data })
    }

    pub fn random(desc: ModelDescriptor, rng: &mut RandomSource) -> Result<Self> {
        let latent: Vec<f64> = (0..desc.dim).map(|_| rng.unit()).collect();
        Self::from_latent(desc, &latent)
    }

    /// Wraps an MCR (or `r = 2` BSC) hypervector.
    pub fn from_ring(kind: ModelKind, hv: Hypervector) -> Result<Self> {
        if kind.modulus() != Some(hv.modulus()) {
            return Err(Error::invalid(format!("{kind} cannot hold a vector over {:?}", hv.modulus())));
        }
        Ok(GenericHv { desc: ModelDescriptor::new(kind, hv.dim())?, data: HvData::Ring(hv) })
    }

    /// Builds a vector from raw data, validating it against the descriptor.
    pub fn from_data(desc: ModelDescriptor, data: HvData) -> Result<Self> {
        let ok = match (&desc.kind, &data) {
            (ModelKind::Mcr(_) | ModelKind::Bsc, HvData::Ring(h)) => {
                desc.kind.modulus() == Some(h.modulus()) && h.dim() == desc.dim
            }
            (ModelKind::MapI { bits }, HvData::Int(v)) => {
                let (lo, hi) = int_range(*bits);
                v.len() == desc.dim && v.iter().all(|&x| (lo..=hi).contains(&(x as i64)))
            }
            (ModelKind::MapC, HvData::Real(v)) => v.len() == desc.dim,
            (ModelKind::Fhrr, HvData::Phase(v)) => {
                v.len() == desc.dim && v.iter().all(|p| (0.0..TAU).contains(p))
            }
            _ => false,
        };
        if !ok {
            return Err(Error::invalid(format!("data does not fit {} with D={}", desc.kind, desc.dim)));
        }
        Ok(GenericHv { desc, data })
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        self.desc
    }

    pub fn data(&self) -> &HvData {
        &self.data
    }

    pub fn as_ring(&self) -> Option<&Hypervector> {
        match &self.data {
            HvData::Ring(h) => Some(h),
            _ => None,
        }
    }

    fn check(&self, other: &GenericHv) -> Result<()> {
        if self.desc != other.desc {
            return Err(Error::invalid(format!(
                "descriptor mismatch: {}/D={} vs {}/D={}",
                self.desc.kind, self.desc.dim, other.desc.kind, other.desc.dim
            )));
        }
        Ok(())
    }

    fn zip(&self, other: &GenericHv, inverse: bool, path: Option<ArithmeticPath>) -> Result<GenericHv> {
        self.check(other)?;
        let data = match (&self.data, &other.data) {
            (HvData::Ring(a), HvData::Ring(b)) => {
                let path = path.unwrap_or(ArithmeticPath::preferred(a.modulus()));
                HvData::Ring(if inverse { a.unbind_with(b, path)? } else { a.bind_with(b, path)? })
            }
            (HvData::Int(a), HvData::Int(b)) => {
                let ModelKind::MapI { bits } = self.desc.kind else { unreachable!() };
                let (lo, hi) = int_range(bits);
                HvData::Int(a.iter().zip(b).map(|(&x, &y)| (x as i64 * y as i64).clamp(lo, hi) as i32).collect())
            }
            (HvData::Real(a), HvData::Real(b)) => HvData::Real(a.iter().zip(b).map(|(x, y)| x * y).collect()),
            (HvData::Phase(a), HvData::Phase(b)) => HvData::Phase(
                a.iter()
                    .zip(b)
                    .map(|(x, y)| wrap_phase(if inverse { x - y } else { x + y }))
                    .collect(),
            ),
            _ => unreachable!("descriptor fixes the payload"),
        };
        Ok(GenericHv { desc: self.desc, data })
    }

    pub fn bind(&self, other: &GenericHv) -> Result<GenericHv> {
        self.zip(other, false, None)
    }

    /// Inverse of [`bind`](Self::bind). MAP binding is its own inverse for
    /// bipolar operands.
    pub fn unbind(&self, other: &GenericHv) -> Result<GenericHv> {
        self.zip(other, true, None)
    }

    /// Like [`bind`](Self::bind), with the arithmetic path fixed for ring
    /// models. Other families ignore `path`.
    pub fn bind_with(&self, other: &GenericHv, path: ArithmeticPath) -> Result<GenericHv> {
        self.zip(other, false, Some(path))
    }

    pub fn unbind_with(&self, other: &GenericHv, path: ArithmeticPath) -> Result<GenericHv> {
        self.zip(other, true, Some(path))
    }

    /// Cyclic shift, `out[i] = h[(i - shift) mod D]`.
    pub fn permute(&self, shift: i64) -> GenericHv {
        let s = shift.rem_euclid(self.desc.dim as i64) as usize;
        fn rot<T: Clone>(v: &[T], s: usize) -> Vec<T> {
            let mut out = v.to_vec();
            out.rotate_right(s);
            out
        }
        let data = match &self.data {
            HvData::Ring(h) => HvData::Ring(h.permute_cyclic(s as i64)),
            HvData::Int(v) => HvData::Int(rot(v, s)),
            HvData::Real(v) => HvData::Real(rot(v, s)),
            HvData::Phase(v) => HvData::Phase(rot(v, s)),
        };
        GenericHv { desc: self.desc, data }
    }

    pub fn distance(&self, other: &GenericHv) -> Result<f64> {
        self.distance_inner(other, None)
    }

    /// Like [`distance`](Self::distance), with the arithmetic path fixed for
    /// ring models.
    pub fn distance_with(&self, other: &GenericHv, path: ArithmeticPath) -> Result<f64> {
        self.distance_inner(other, Some(path))
    }

    fn distance_inner(&self, other: &GenericHv, path: Option<ArithmeticPath>) -> Result<f64> {
        self.check(other)?;
        Ok(match (&self.data, &other.data) {
            (HvData::Ring(a), HvData::Ring(b)) => {
                a.distance_with(b, path.unwrap_or(ArithmeticPath::preferred(a.modulus())))? as f64
            }
            (HvData::Int(a), HvData::Int(b)) => {
                cosine_distance(a.iter().zip(b).map(|(&x, &y)| (x as f64, y as f64)))
            }
            (HvData::Real(a), HvData::Real(b)) => {
                cosine_distance(a.iter().zip(b).map(|(&x, &y)| (x as f64, y as f64)))
            }
            (HvData::Phase(a), HvData::Phase(b)) => {
                let total: f64 = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| {
                        let d = (x - y).abs();
                        d.min(TAU - d)
                    })
                    .sum();
                total / self.desc.dim as f64
            }
            _ => unreachable!("descriptor fixes the payload"),
        })
    }
}

/// Index of the nearest vector; ties go to the lowest index.
pub fn nearest(query: &GenericHv, candidates: &[GenericHv]) -> Result<usize> {
    nearest_inner(query, candidates, None)
}

pub fn nearest_with(query: &GenericHv, candidates: &[GenericHv], path: ArithmeticPath) -> Result<usize> {
    nearest_inner(query, candidates, Some(path))
}

fn nearest_inner(query: &GenericHv, candidates: &[GenericHv], path: Option<ArithmeticPath>) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::invalid("search over an empty candidate set"));
    }
    let mut best = (f64::INFINITY, 0);
    for (k, c) in candidates.iter().enumerate() {
        let d = query.distance_inner(c, path)?;
        if d < best.0 {
            best = (d, k);
        }
    }
    Ok(best.1)
}

#[derive(Clone, Debug)]
enum SumState<S> {
    Mcr(CartesianAccumulator<S>),
    Bsc(Vec<u32>),
    MapI(Vec<i64>),
    MapC(Vec<f64>),
    Fhrr { re: Vec<f64>, im: Vec<f64> },
}

/// High-precision bundle of same-model hypervectors, normalized once at the
/// end.
#[derive(Clone, Debug)]
pub struct Superposition<S: AccumScalar = f64> {
    desc: ModelDescriptor,
    state: SumState<S>,
    count: u32,
    tie_seed: u64,
    path: ArithmeticPath,
}

impl<S: AccumScalar> Superposition<S> {
    /// `tie_seed` drives the random bits that break even BSC majorities.
    /// MCR bundles normalize through the reference path unless changed with
    /// [`with_path`](Self::with_path).
    pub fn new(desc: ModelDescriptor, tie_seed: u64) -> Result<Self> {
        let d = desc.dim;
        let state = match desc.kind {
            ModelKind::Mcr(m) => SumState::Mcr(CartesianAccumulator::new(m, d)?),
            ModelKind::Bsc => SumState::Bsc(vec![0; d]),
            ModelKind::MapI { .. } => SumState::MapI(vec![0; d]),
            ModelKind::MapC => SumState::MapC(vec![0.0; d]),
            ModelKind::Fhrr => SumState::Fhrr { re: vec![0.0; d], im: vec![0.0; d] },
        };
        Ok(Superposition { desc, state, count: 0, tie_seed, path: ArithmeticPath::Reference })
    }

    pub fn with_path(mut self, path: ArithmeticPath) -> Self {
        self.path = path;
        self
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    /// The MCR accumulator, if this is an MCR bundle.
    pub fn accumulator(&self) -> Option<&CartesianAccumulator<S>> {
        match &self.state {
            SumState::Mcr(acc) => Some(acc),
            _ => None,
        }
    }

    pub fn add(&mut self, h: &GenericHv) -> Result<()> {
        if h.desc != self.desc {
            return Err(Error::invalid("bundle operand has a different descriptor"));
        }
        match (&mut self.state, &h.data) {
            (SumState::Mcr(acc), HvData::Ring(v)) => acc.accumulate(v)?,
            (SumState::Bsc(counts), HvData::Ring(v)) => {
                for (c, bit) in counts.iter_mut().zip(v.iter()) {
                    *c += bit as u32;
                }
            }
            (SumState::MapI(sum), HvData::Int(v)) => {
                for (s, &x) in sum.iter_mut().zip(v) {
                    *s += x as i64;
                }
            }
            (SumState::MapC(sum), HvData::Real(v)) => {
                for (s, &x) in sum.iter_mut().zip(v) {
                    *s += x as f64;
                }
            }
            (SumState::Fhrr { re, im }, HvData::Phase(v)) => {
                for ((a, b), &p) in re.iter_mut().zip(im.iter_mut()).zip(v) {
                    *a += p.cos();
                    *b += p.sin();
                }
            }
            _ => unreachable!("descriptor fixes the payload"),
        }
        self.count += 1;
        Ok(())
    }

    pub fn normalize(&self) -> Result<GenericHv> {
        if self.count == 0 {
            return Err(Error::InvalidState("normalizing an empty bundle".into()));
        }
        let data = match &self.state {
            SumState::Mcr(acc) => HvData::Ring(acc.normalize_with(self.path)?),
            SumState::Bsc(counts) => {
                let mut rng = RandomSource::derive(self.tie_seed, &[0x6273_6374]);
                let m = self.count;
                let bits: Vec<Component> = counts
                    .iter()
                    .map(|&c| match (2 * c).cmp(&m) {
                        std::cmp::Ordering::Greater => 1,
                        std::cmp::Ordering::Less => 0,
                        std::cmp::Ordering::Equal => rng.bit() as Component,
                    })
                    .collect();
                HvData::Ring(Hypervector::from_components(Modulus::new(2)?, &bits)?)
            }
            SumState::MapI(sum) => {
                let ModelKind::MapI { bits } = self.desc.kind else { unreachable!() };
                HvData::Int(rescale_quantize(sum, bits))
            }
            SumState::MapC(sum) => HvData::Real(sum.iter().map(|&x| x as f32).collect()),
            SumState::Fhrr { re, im } => HvData::Phase(
                re.iter()
                    .zip(im)
                    .map(|(&a, &b)| if a == 0.0 && b == 0.0 { 0.0 } else { wrap_phase(b.atan2(a)) })
                    .collect(),
            ),
        };
        Ok(GenericHv { desc: self.desc, data })
    }
}

/// Linear map of `[min, max]` of `values` onto the signed `bits`-bit range,
/// rounded to integers. A constant input maps to all zeros.
pub fn rescale_quantize(values: &[i64], bits: u32) -> Vec<i32> {
    rescale_quantize_f64(&values.iter().map(|&x| x as f64).collect::<Vec<_>>(), bits)
}

pub fn rescale_quantize_f64(values: &[f64], bits: u32) -> Vec<i32> {
    let (lo, hi) = int_range(bits);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_nan() || min.is_nan() || max <= min {
        return vec![0; values.len()];
    }
    let scale = (hi - lo) as f64 / (max - min);
    values
        .iter()
        .map(|&x| ((lo as f64 + (x - min) * scale).round() as i64).clamp(lo, hi) as i32)
        .collect()
}

/// Bundles `items` with one final normalization.
pub fn superpose(items: &[GenericHv], tie_seed: u64) -> Result<GenericHv> {
    let first = items.first().ok_or_else(|| Error::invalid("superposition of an empty list"))?;
    let mut acc = Superposition::<f64>::new(first.descriptor(), tie_seed)?;
    for h in items {
        acc.add(h)?;
    }
    acc.normalize()
}
