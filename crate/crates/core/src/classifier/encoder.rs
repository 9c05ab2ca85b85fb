//! Key-value encoding of feature vectors.
//!
//! Feature `j` is quantized to one of `L` uniform levels and mapped to a
//! thermometer vector `ψ(ℓ)` whose first `round(D·ℓ/(L-1))` components hold
//! the family's "high" symbol and the rest the "low" symbol. Each value
//! vector is bound to a random key `r_j` and the bindings are bundled with a
//! single final normalization.

use std::f64::consts::PI;
use std::marker::PhantomData;

use crate::error::{Error, Result};
use crate::mcr::ArithmeticPath;
use crate::models::{GenericHv, HvData, ModelDescriptor, ModelKind, Superposition};
use crate::ring::{Component, Hypervector};
use crate::rng::{stream_id, RandomSource};
use crate::scalar::AccumScalar;
use crate::Q22_10;

const TAG_KEYS: u64 = 0x6b65_7973;
const TAG_TIES: u64 = 0x7469_6573;

/// Uniform quantizer over per-feature ranges. Values outside a range are
/// clipped; a constant feature always maps to level 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Quantizer {
    ranges: Vec<(f64, f64)>,
    levels: usize,
}

impl Quantizer {
    pub fn new(ranges: Vec<(f64, f64)>, levels: usize) -> Result<Self> {
        if levels < 2 {
            return Err(Error::invalid(format!("need at least 2 quantization levels, got {levels}")));
        }
        if ranges.iter().any(|(lo, hi)| !lo.is_finite() || !hi.is_finite() || lo > hi) {
            return Err(Error::invalid("feature ranges must be finite with min <= max"));
        }
        Ok(Quantizer { ranges, levels })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn n_features(&self) -> usize {
        self.ranges.len()
    }

    pub fn level(&self, feature: usize, x: f64) -> usize {
        let (lo, hi) = self.ranges[feature];
        if hi <= lo {
            return 0;
        }
        let t = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
        ((t * (self.levels - 1) as f64).round() as usize).min(self.levels - 1)
    }
}

/// Number of "high" components at `level`.
pub fn high_length(dim: usize, level: usize, levels: usize) -> usize {
    ((dim * level) as f64 / (levels - 1) as f64).round() as usize
}

/// Thermometer value vector `ψ(level)`.
pub fn thermometer(desc: ModelDescriptor, level: usize, levels: usize) -> Result<GenericHv> {
    if levels < 2 || level >= levels {
        return Err(Error::invalid(format!("level {level} outside 0..{levels}")));
    }
    let d = desc.dim;
    let h = high_length(d, level, levels);
    let data = match desc.kind {
        ModelKind::Mcr(_) | ModelKind::Bsc => {
            let m = desc.kind.modulus().expect("ring model");
            let high = (m.r() / 2) as Component;
            let comps: Vec<Component> = (0..d).map(|i| if i < h { high } else { 0 }).collect();
            HvData::Ring(Hypervector::from_components(m, &comps)?)
        }
        ModelKind::MapI { .. } => HvData::Int((0..d).map(|i| if i < h { 1 } else { -1 }).collect()),
        ModelKind::MapC => HvData::Real((0..d).map(|i| if i < h { 1.0 } else { -1.0 }).collect()),
        ModelKind::Fhrr => HvData::Phase((0..d).map(|i| if i < h { PI } else { 0.0 }).collect()),
    };
    GenericHv::from_data(desc, data)
}

/// Feature-vector encoder for one model and one set of random keys.
///
/// `S` is the accumulator scalar of MCR bundles. The default 32-bit Q22.10
/// format leaves room for thousands of features without saturating.
#[derive(Clone, Debug)]
pub struct Encoder<S: AccumScalar = Q22_10> {
    desc: ModelDescriptor,
    keys: Vec<GenericHv>,
    quantizer: Quantizer,
    path: ArithmeticPath,
    tie_seed: u64,
    _scalar: PhantomData<S>,
}

impl<S: AccumScalar> Encoder<S> {
    /// Keys are drawn from latent uniforms that depend only on `seed` and
    /// the feature index, so all models share the same underlying keys.
    pub fn new(desc: ModelDescriptor, quantizer: Quantizer, seed: u64) -> Result<Self> {
        let keys = (0..quantizer.n_features())
            .map(|j| {
                let mut rng = RandomSource::derive(seed, &[TAG_KEYS, j as u64]);
                let latent: Vec<f64> = (0..desc.dim).map(|_| rng.unit()).collect();
                GenericHv::from_latent(desc, &latent)
            })
            .collect::<Result<Vec<_>>>()?;
        let path = match desc.kind {
            ModelKind::Mcr(m) if m.is_power_of_two() && m.r() >= 4 => ArithmeticPath::Packed,
            ModelKind::Bsc => ArithmeticPath::Packed,
            _ => ArithmeticPath::Reference,
        };
        Ok(Encoder {
            desc,
            keys,
            quantizer,
            path,
            tie_seed: stream_id(&[TAG_TIES, seed]),
            _scalar: PhantomData,
        })
    }

    /// Selects the arithmetic of MCR binding and normalization.
    pub fn with_path(mut self, path: ArithmeticPath) -> Result<Self> {
        if let ModelKind::Mcr(m) = self.desc.kind {
            if path == ArithmeticPath::Packed && (!m.is_power_of_two() || m.r() < 4) {
                return Err(Error::Unsupported(format!(
                    "packed encoding needs a power-of-two modulus of at least 4, got r={}",
                    m.r()
                )));
            }
        }
        self.path = path;
        Ok(self)
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        self.desc
    }

    pub fn path(&self) -> ArithmeticPath {
        self.path
    }

    pub fn keys(&self) -> &[GenericHv] {
        &self.keys
    }

    pub fn quantizer(&self) -> &Quantizer {
        &self.quantizer
    }

    /// `ψ(x)` for feature `j`.
    pub fn value_vector(&self, feature: usize, x: f64) -> Result<GenericHv> {
        thermometer(self.desc, self.quantizer.level(feature, x), self.quantizer.levels())
    }

    /// `φ(x) = norm(Σ_j r_j ∘ ψ(x_j))`.
    pub fn encode(&self, x: &[f64]) -> Result<GenericHv> {
        self.encode_with(x, self.path)
    }

    /// [`encode`](Self::encode) through an explicit arithmetic path.
    pub fn encode_with(&self, x: &[f64], path: ArithmeticPath) -> Result<GenericHv> {
        if x.len() != self.keys.len() {
            return Err(Error::invalid(format!(
                "sample has {} features, encoder expects {}",
                x.len(),
                self.keys.len()
            )));
        }
        let mut acc = Superposition::<S>::new(self.desc, self.tie_seed)?.with_path(path);
        for (j, (key, &v)) in self.keys.iter().zip(x).enumerate() {
            acc.add(&key.bind_with(&self.value_vector(j, v)?, path)?)?;
        }
        acc.normalize()
    }
}
