//! Prototype training: one centroid epoch, then LVQ2.1 epochs, all in
//! floating point, with a model-specific discretization at the end.
//!
//! Each encoded sample is embedded as a real vector of unit L2 norm: MCR and
//! FHRR components become `(cos, sin)` pairs, BSC bits become `±1`, and MAP
//! values are used as they are. Class prototypes live in that space. During
//! an LVQ epoch distances are measured in the model's own metric against a
//! snapshot of the prototypes discretized at the start of the epoch.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::classifier::dataset::Dataset;
use crate::classifier::encoder::{Encoder, Quantizer};
use crate::error::{Error, Result};
use crate::mcr::{phase_to_component, wta_select, ArithmeticPath, TrigLut};
use crate::models::{
    nearest_with, rescale_quantize_f64, wrap_phase, GenericHv, HvData, ModelDescriptor, ModelKind,
};
use crate::ring::{Component, Hypervector};
use crate::rng::RandomSource;
use crate::scalar::AccumScalar;
use crate::Q22_10;

const TAG_ORDER: u64 = 0x6f72_6465;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Quantization levels per feature.
    pub levels: usize,
    pub epochs: usize,
    /// LVQ learning rate.
    pub epsilon: f64,
    /// LVQ window width.
    pub omega: f64,
    /// MCR arithmetic; the packed path when unset and possible.
    pub path: Option<ArithmeticPath>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { levels: 1024, epochs: 10, epsilon: 0.01, omega: 0.1, path: None }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::invalid("need at least one epoch"));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::invalid(format!("learning rate must be positive, got {}", self.epsilon)));
        }
        if !(self.omega > 0.0 && self.omega < 1.0) {
            return Err(Error::invalid(format!("window width must lie in (0, 1), got {}", self.omega)));
        }
        if self.levels < 2 {
            return Err(Error::invalid("need at least 2 quantization levels"));
        }
        Ok(())
    }
}

/// `s = (1 - ω) / (1 + ω)`.
pub fn window_threshold(omega: f64) -> f64 {
    (1.0 - omega) / (1.0 + omega)
}

/// Whether a sample with distances `d_plus` (own class) and `d_minus`
/// (nearest other class) falls inside the LVQ2.1 window. Two zero distances
/// count as ratio 1.
pub fn in_window(d_plus: f64, d_minus: f64, s: f64) -> bool {
    let ratio = if d_plus == 0.0 && d_minus == 0.0 {
        1.0
    } else if d_plus == 0.0 || d_minus == 0.0 {
        0.0
    } else {
        (d_minus / d_plus).min(d_plus / d_minus)
    };
    ratio > s
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

/// Real embedding of an encoded sample, scaled to unit L2 norm.
pub fn embed(h: &GenericHv) -> Vec<f64> {
    let v = match (h.descriptor().kind, h.data()) {
        (ModelKind::Bsc, HvData::Ring(v)) => v.iter().map(|b| 2.0 * b as f64 - 1.0).collect(),
        (_, HvData::Ring(v)) => {
            let r = v.modulus().r() as f64;
            v.iter()
                .flat_map(|c| {
                    let a = TAU * c as f64 / r;
                    [a.cos(), a.sin()]
                })
                .collect()
        }
        (_, HvData::Int(v)) => v.iter().map(|&x| x as f64).collect(),
        (_, HvData::Real(v)) => v.iter().map(|&x| x as f64).collect(),
        (_, HvData::Phase(v)) => v.iter().flat_map(|p| [p.cos(), p.sin()]).collect(),
    };
    unit(v)
}

/// Maps a real prototype back into the model's domain: sign for BSC,
/// rescale and quantize for MAP-I, a cast for MAP-C, nearest phase for MCR
/// and FHRR. A complex pair of exactly zero goes to component 0.
pub fn discretize(desc: ModelDescriptor, high: &[f64], path: ArithmeticPath) -> Result<GenericHv> {
    let data = match desc.kind {
        ModelKind::Bsc => {
            let bits: Vec<Component> = high.iter().map(|&x| (x > 0.0) as Component).collect();
            HvData::Ring(Hypervector::from_components(desc.kind.modulus().expect("ring"), &bits)?)
        }
        ModelKind::Mcr(m) => {
            let wta = path == ArithmeticPath::Packed && m.is_power_of_two() && m.r() >= 4;
            let lut = TrigLut::<f64>::new(m);
            let comps: Vec<Component> = high
                .chunks_exact(2)
                .map(|p| match (p[0], p[1]) {
                    (re, im) if re == 0.0 && im == 0.0 => 0,
                    (re, im) if wta => wta_select(&lut, re, im),
                    (re, im) => phase_to_component(re, im, m),
                })
                .collect();
            HvData::Ring(Hypervector::from_components(m, &comps)?)
        }
        ModelKind::MapI { bits } => HvData::Int(rescale_quantize_f64(high, bits)),
        ModelKind::MapC => HvData::Real(high.iter().map(|&x| x as f32).collect()),
        ModelKind::Fhrr => HvData::Phase(
            high.chunks_exact(2)
                .map(|p| if p[0] == 0.0 && p[1] == 0.0 { 0.0 } else { wrap_phase(p[1].atan2(p[0])) })
                .collect(),
        ),
    };
    GenericHv::from_data(desc, data)
}

/// Class prototypes, real-valued while training and discretized once
/// finalized.
#[derive(Clone, Debug)]
pub struct PrototypeSet {
    desc: ModelDescriptor,
    path: ArithmeticPath,
    high: Vec<Vec<f64>>,
    finalized: Option<Vec<GenericHv>>,
    updates: u64,
}

impl PrototypeSet {
    /// Sum of the embeddings of each class, scaled to unit norm.
    pub fn centroid(
        desc: ModelDescriptor,
        path: ArithmeticPath,
        embeddings: &[Vec<f64>],
        labels: &[usize],
        classes: usize,
    ) -> Result<Self> {
        let width = embeddings.first().ok_or_else(|| Error::invalid("no training samples"))?.len();
        let mut high = vec![vec![0.0; width]; classes];
        let mut seen = vec![false; classes];
        for (e, &y) in embeddings.iter().zip(labels) {
            if y >= classes {
                return Err(Error::invalid(format!("label {y} outside 0..{classes}")));
            }
            seen[y] = true;
            high[y].iter_mut().zip(e).for_each(|(p, x)| *p += x);
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::invalid(format!("class {c} has no training samples")));
        }
        let mut set = PrototypeSet { desc, path, high, finalized: None, updates: 0 };
        set.normalize();
        Ok(set)
    }

    pub fn classes(&self) -> usize {
        self.high.len()
    }

    pub fn high(&self) -> &[Vec<f64>] {
        &self.high
    }

    /// LVQ updates applied so far.
    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn normalize(&mut self) {
        for p in &mut self.high {
            *p = unit(std::mem::take(p));
        }
    }

    /// Discretized copy of the current prototypes.
    pub fn snapshot(&self) -> Result<Vec<GenericHv>> {
        self.high.iter().map(|p| discretize(self.desc, p, self.path)).collect()
    }

    /// One LVQ2.1 pass over `order`; prototypes are renormalized at the end.
    /// Returns the number of samples that triggered an update.
    pub fn lvq_epoch(
        &mut self,
        samples: &[GenericHv],
        embeddings: &[Vec<f64>],
        labels: &[usize],
        order: &[usize],
        epsilon: f64,
        omega: f64,
    ) -> Result<u64> {
        let s = window_threshold(omega);
        let snap = self.snapshot()?;
        let mut n = 0;
        if self.classes() > 1 {
            for &i in order {
                let y = labels[i];
                let dist = snap
                    .iter()
                    .map(|p| samples[i].distance_with(p, self.path))
                    .collect::<Result<Vec<f64>>>()?;
                let (minus, d_minus) = dist
                    .iter()
                    .enumerate()
                    .filter(|&(c, _)| c != y)
                    .fold((usize::MAX, f64::INFINITY), |best, (c, &d)| if d < best.1 { (c, d) } else { best });
                if !in_window(dist[y], d_minus, s) {
                    continue;
                }
                let e = &embeddings[i];
                self.high[y].iter_mut().zip(e).for_each(|(p, x)| *p += epsilon * (x - *p));
                self.high[minus].iter_mut().zip(e).for_each(|(p, x)| *p -= epsilon * (x - *p));
                n += 1;
            }
        }
        self.normalize();
        self.updates += n;
        Ok(n)
    }

    pub fn finalize(&mut self) -> Result<()> {
        self.finalized = Some(self.snapshot()?);
        Ok(())
    }

    pub fn prototypes(&self) -> Option<&[GenericHv]> {
        self.finalized.as_deref()
    }

    /// Nearest finalized prototype; ties go to the lowest class index.
    pub fn predict(&self, sample: &GenericHv) -> Result<usize> {
        self.predict_with(sample, self.path)
    }

    /// [`predict`](Self::predict) with distances through an explicit path.
    pub fn predict_with(&self, sample: &GenericHv, path: ArithmeticPath) -> Result<usize> {
        let protos = self
            .finalized
            .as_ref()
            .ok_or_else(|| Error::InvalidState("prototypes are not finalized".into()))?;
        nearest_with(sample, protos, path)
    }
}

/// Trains prototypes on already encoded samples.
pub fn train_prototypes(
    samples: &[GenericHv],
    labels: &[usize],
    classes: usize,
    path: ArithmeticPath,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<PrototypeSet> {
    cfg.validate()?;
    let desc = samples.first().ok_or_else(|| Error::invalid("no training samples"))?.descriptor();
    let embeddings: Vec<Vec<f64>> = samples.iter().map(embed).collect();
    let mut set = PrototypeSet::centroid(desc, path, &embeddings, labels, classes)?;
    for epoch in 1..cfg.epochs {
        let mut order: Vec<usize> = (0..samples.len()).collect();
        RandomSource::derive(seed, &[TAG_ORDER, epoch as u64]).shuffle(&mut order);
        set.lvq_epoch(samples, &embeddings, labels, &order, cfg.epsilon, cfg.omega)?;
    }
    set.finalize()?;
    Ok(set)
}

/// Encoder plus trained prototypes.
#[derive(Clone, Debug)]
pub struct Classifier<S: AccumScalar = Q22_10> {
    encoder: Encoder<S>,
    prototypes: PrototypeSet,
}

impl<S: AccumScalar> Classifier<S> {
    /// Fits the quantizer on the training split, draws keys from `seed`,
    /// and trains.
    pub fn train(ds: &Dataset, desc: ModelDescriptor, cfg: &TrainConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let quantizer = Quantizer::new(ds.feature_ranges(), cfg.levels)?;
        let mut encoder = Encoder::<S>::new(desc, quantizer, seed)?;
        if let Some(path) = cfg.path {
            encoder = encoder.with_path(path)?;
        }
        let samples = ds
            .train
            .iter()
            .map(|&i| encoder.encode(&ds.features[i]))
            .collect::<Result<Vec<_>>>()?;
        let labels: Vec<usize> = ds.train.iter().map(|&i| ds.labels[i]).collect();
        let prototypes = train_prototypes(&samples, &labels, ds.classes, encoder.path(), cfg, seed)?;
        Ok(Classifier { encoder, prototypes })
    }

    pub fn encoder(&self) -> &Encoder<S> {
        &self.encoder
    }

    pub fn prototypes(&self) -> &PrototypeSet {
        &self.prototypes
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        self.prototypes.predict(&self.encoder.encode(x)?)
    }

    /// Inference with encoding and search both forced onto `path`; the
    /// trained prototypes are shared.
    pub fn predict_with(&self, x: &[f64], path: ArithmeticPath) -> Result<usize> {
        self.prototypes.predict_with(&self.encoder.encode_with(x, path)?, path)
    }

    /// Fraction of `rows` of `ds` classified correctly.
    pub fn accuracy(&self, ds: &Dataset, rows: &[usize]) -> Result<f64> {
        if rows.is_empty() {
            return Err(Error::invalid("no rows to evaluate"));
        }
        let mut hits = 0;
        for &i in rows {
            hits += (self.predict(&ds.features[i])? == ds.labels[i]) as usize;
        }
        Ok(hits as f64 / rows.len() as f64)
    }
}
