//! Sequence capacity benchmark.
//!
//! A sequence `s` of `m` symbols drawn from a codebook of `d` random vectors
//! is stored as `φ(s) = Σ_j ρ^(m-1-j)(Φ[s_j])` (0-based `j`, so the last
//! symbol is unshifted), accumulated in full precision and normalized once.
//! Position `j` is decoded as the codebook entry nearest to
//! `ρ^-(m-1-j)(φ)`. Accuracy is turned into decoded information with the
//! usual symmetric-channel formula.

use std::io::Write;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{nearest, GenericHv, ModelDescriptor, ModelKind, Superposition};
use crate::rng::RandomSource;
use crate::stats;

const TAG_CODEBOOK: u64 = 0x636f_6465;
const TAG_SEQUENCE: u64 = 0x7365_7175;
const TAG_TIES: u64 = 0x7469_6573;

/// `d` random vectors of one model.
#[derive(Clone, Debug)]
pub struct Codebook {
    desc: ModelDescriptor,
    vectors: Vec<GenericHv>,
}

impl Codebook {
    pub fn new(vectors: Vec<GenericHv>) -> Result<Self> {
        let desc = vectors
            .first()
            .ok_or_else(|| Error::invalid("empty codebook"))?
            .descriptor();
        if vectors.iter().any(|v| v.descriptor() != desc) {
            return Err(Error::invalid("codebook vectors must share one descriptor"));
        }
        Ok(Codebook { desc, vectors })
    }

    /// Codebook number `index` for size `size` under `seed`. The latent
    /// uniforms depend only on `(seed, size, index)`, so every model sees
    /// the same underlying randomness.
    pub fn generate(desc: ModelDescriptor, size: usize, seed: u64, index: u64) -> Result<Self> {
        let mut rng = RandomSource::derive(seed, &[TAG_CODEBOOK, size as u64, index]);
        let vectors = (0..size)
            .map(|_| {
                let latent: Vec<f64> = (0..desc.dim).map(|_| rng.unit()).collect();
                GenericHv::from_latent(desc, &latent)
            })
            .collect::<Result<Vec<_>>>()?;
        Codebook::new(vectors)
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        self.desc
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[GenericHv] {
        &self.vectors
    }
}

fn check_symbols(cb: &Codebook, s: &[usize]) -> Result<()> {
    if s.is_empty() {
        return Err(Error::invalid("empty sequence"));
    }
    if let Some(&bad) = s.iter().find(|&&x| x >= cb.len()) {
        return Err(Error::invalid(format!("symbol {bad} outside a codebook of {}", cb.len())));
    }
    Ok(())
}

/// Full-precision superposition of the position-shifted symbols.
pub fn encode_sequence(cb: &Codebook, s: &[usize], tie_seed: u64) -> Result<Superposition<f64>> {
    check_symbols(cb, s)?;
    let m = s.len();
    let mut acc = Superposition::new(cb.desc, tie_seed)?;
    for (j, &sym) in s.iter().enumerate() {
        acc.add(&cb.vectors[sym].permute((m - 1 - j) as i64))?;
    }
    Ok(acc)
}

/// Encoded and normalized composite.
pub fn composite(cb: &Codebook, s: &[usize], tie_seed: u64) -> Result<GenericHv> {
    encode_sequence(cb, s, tie_seed)?.normalize()
}

/// Composite built as `φ_j = norm(ρ(φ_{j-1}) + Φ[s_j])`, normalizing after
/// every step instead of once.
pub fn encode_sequence_stepwise(cb: &Codebook, s: &[usize], tie_seed: u64) -> Result<GenericHv> {
    check_symbols(cb, s)?;
    let mut phi = cb.vectors[s[0]].clone();
    for (j, &sym) in s.iter().enumerate().skip(1) {
        let mut acc = Superposition::<f64>::new(cb.desc, tie_seed ^ j as u64)?;
        acc.add(&phi.permute(1))?;
        acc.add(&cb.vectors[sym])?;
        phi = acc.normalize()?;
    }
    Ok(phi)
}

/// Nearest codebook entry per position; ties go to the lowest index.
pub fn decode_sequence(cb: &Codebook, phi: &GenericHv, m: usize) -> Result<Vec<usize>> {
    if m == 0 {
        return Err(Error::invalid("sequence length must be at least 1"));
    }
    (0..m)
        .map(|j| nearest(&phi.permute(-((m - 1 - j) as i64)), &cb.vectors))
        .collect()
}

pub fn accuracy(truth: &[usize], decoded: &[usize]) -> f64 {
    let hits = truth.iter().zip(decoded).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}

/// Decoded information for one accuracy value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InformationMetrics {
    /// Bits per decoded symbol.
    pub i_symb: f64,
    /// Bits per sequence.
    pub i_tot: f64,
    /// Bits per component.
    pub i_dim: f64,
    /// Bits per stored bit.
    pub i_bit: f64,
}

/// Information decoded per symbol at accuracy `a` over `d` symbols. Below
/// chance the formula goes negative; the result is clamped to 0.
pub fn information_per_symbol(a: f64, d: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || d < 2 {
        return Err(Error::invalid(format!("need 0 <= a <= 1 and d >= 2, got a={a}, d={d}")));
    }
    let d = d as f64;
    if a <= 1.0 / d {
        if a < 1.0 / d {
            warn!("sub-chance accuracy {a} for d={d}; information clamped to 0");
        }
        return Ok(0.0);
    }
    let first = a * (d * a).log2();
    let second = if a < 1.0 { (1.0 - a) * (d / (d - 1.0) * (1.0 - a)).log2() } else { 0.0 };
    Ok((first + second).max(0.0))
}

pub fn information_metrics(a: f64, d: usize, m: usize, dim: usize, bits: u32) -> Result<InformationMetrics> {
    let i_symb = information_per_symbol(a, d)?;
    let i_tot = m as f64 * i_symb;
    let i_dim = i_tot / dim as f64;
    Ok(InformationMetrics { i_symb, i_tot, i_dim, i_bit: i_dim / bits as f64 })
}

/// Sweep grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacityConfig {
    pub models: Vec<ModelKind>,
    /// Codebook sizes.
    pub d: Vec<usize>,
    /// Sequence lengths.
    pub m: Vec<usize>,
    pub dim: usize,
    pub codebooks: usize,
    pub sequences: usize,
    pub seed: u64,
}

impl Default for CapacityConfig {
    /// Desk-scale grid.
    fn default() -> Self {
        let models = ["mcr16", "mcr8", "mcr4", "bsc", "mapi2", "mapi3", "mapi4", "mapi5", "mapi32", "mapc32", "fhrr"]
            .iter()
            .map(|s| s.parse().expect("static model list"))
            .collect();
        CapacityConfig {
            models,
            d: vec![15],
            m: vec![10, 50, 100, 200, 400],
            dim: 500,
            codebooks: 5,
            sequences: 20,
            seed: 0,
        }
    }
}

impl CapacityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() || self.d.is_empty() || self.m.is_empty() {
            return Err(Error::invalid("models, d and m must be nonempty"));
        }
        if self.d.iter().any(|&d| d < 2) {
            return Err(Error::invalid("codebook sizes must be at least 2"));
        }
        if self.m.contains(&0) {
            return Err(Error::invalid("sequence lengths must be at least 1"));
        }
        if self.dim == 0 || self.codebooks == 0 || self.sequences == 0 {
            return Err(Error::invalid("dim, codebooks and sequences must be positive"));
        }
        Ok(())
    }
}

/// One `(model, d, m)` cell of the sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityRow {
    pub model: ModelKind,
    pub bits: u32,
    pub d: usize,
    pub m: usize,
    pub dim: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub i_tot: f64,
    pub i_dim: f64,
    pub i_bit: f64,
    pub trials: usize,
    /// Per-trial accuracies, ordered by (codebook, sequence).
    #[serde(skip)]
    pub accuracies: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CapacityResults {
    pub config: CapacityConfig,
    pub rows: Vec<CapacityRow>,
}

pub fn sequence_for(seed: u64, d: usize, m: usize, codebook: u64, sequence: u64) -> Vec<usize> {
    let mut rng = RandomSource::derive(seed, &[TAG_SEQUENCE, d as u64, m as u64, codebook, sequence]);
    (0..m).map(|_| rng.below(d as u32) as usize).collect()
}

/// Runs every `(model, d, m, codebook, sequence)` trial. Symbol sequences
/// depend only on `(seed, d, m, codebook, sequence)`, so trials are paired
/// across models.
pub fn run_capacity_sweep(config: &CapacityConfig) -> Result<CapacityResults> {
    config.validate()?;
    let cfg = config;

    let mut codebooks = Vec::new();
    for &model in &cfg.models {
        let desc = ModelDescriptor::new(model, cfg.dim)?;
        for &d in &cfg.d {
            for c in 0..cfg.codebooks {
                codebooks.push(((model, d, c), Codebook::generate(desc, d, cfg.seed, c as u64)?));
            }
        }
    }
    let lookup = |model: ModelKind, d: usize, c: usize| {
        &codebooks
            .iter()
            .find(|(key, _)| *key == (model, d, c))
            .expect("codebook generated above")
            .1
    };

    let mut cells = Vec::new();
    for &model in &cfg.models {
        for &d in &cfg.d {
            for &m in &cfg.m {
                cells.push((model, d, m));
            }
        }
    }

    let rows = cells
        .into_par_iter()
        .map(|(model, d, m)| -> Result<CapacityRow> {
            let trials: Vec<(usize, usize)> = (0..cfg.codebooks)
                .flat_map(|c| (0..cfg.sequences).map(move |q| (c, q)))
                .collect();
            let accuracies = trials
                .par_iter()
                .map(|&(c, q)| {
                    let cb = lookup(model, d, c);
                    let s = sequence_for(cfg.seed, d, m, c as u64, q as u64);
                    let tie = crate::rng::stream_id(&[TAG_TIES, cfg.seed, d as u64, m as u64, c as u64, q as u64]);
                    let phi = composite(cb, &s, tie)?;
                    Ok(accuracy(&s, &decode_sequence(cb, &phi, m)?))
                })
                .collect::<Result<Vec<f64>>>()?;
            let mean = stats::mean(&accuracies);
            let info = information_metrics(mean, d, m, cfg.dim, model.bits())?;
            Ok(CapacityRow {
                model,
                bits: model.bits(),
                d,
                m,
                dim: cfg.dim,
                mean_accuracy: mean,
                std_accuracy: stats::std_dev(&accuracies),
                i_tot: info.i_tot,
                i_dim: info.i_dim,
                i_bit: info.i_bit,
                trials: accuracies.len(),
                accuracies,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CapacityResults { config: cfg.clone(), rows })
}

impl CapacityResults {
    pub fn row(&self, model: ModelKind, d: usize, m: usize) -> Option<&CapacityRow> {
        self.rows.iter().find(|r| r.model == model && r.d == d && r.m == m)
    }

    /// Largest `I_bit` over the sequence-length grid, i.e. the model's
    /// capacity per stored bit at codebook size `d`.
    pub fn peak_i_bit(&self, model: ModelKind, d: usize) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.model == model && r.d == d)
            .map(|r| r.i_bit)
            .reduce(f64::max)
    }

    /// CSV with a leading `# config: {json}` comment line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# config: {}", serde_json::to_string(&self.config)?)?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["model", "b", "d", "m", "D", "mean_a", "std_a", "I_tot", "I_dim", "I_bit", "trials"])?;
        for r in &self.rows {
            out.write_record([
                r.model.to_string(),
                r.bits.to_string(),
                r.d.to_string(),
                r.m.to_string(),
                r.dim.to_string(),
                format!("{:.6}", r.mean_accuracy),
                format!("{:.6}", r.std_accuracy),
                format!("{:.6}", r.i_tot),
                format!("{:.6}", r.i_dim),
                format!("{:.6}", r.i_bit),
                r.trials.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cb(model: &str, d: usize, dim: usize, index: u64) -> Codebook {
        let desc = ModelDescriptor::new(model.parse().unwrap(), dim).unwrap();
        Codebook::generate(desc, d, 42, index).unwrap()
    }

    #[test]
    fn metric_endpoints() {
        assert_eq!(information_per_symbol(1.0, 16).unwrap(), 4.0);
        assert_eq!(information_per_symbol(1.0 / 16.0, 16).unwrap(), 0.0);
        assert_eq!(information_per_symbol(0.0, 16).unwrap(), 0.0);
        let m = information_metrics(1.0, 16, 100, 500, 4).unwrap();
        assert_eq!((m.i_tot, m.i_dim, m.i_bit), (400.0, 0.8, 0.2));
        assert!(information_per_symbol(1.5, 4).is_err());
        assert!(information_per_symbol(0.5, 1).is_err());
    }

    #[test]
    fn metric_is_monotone_above_chance() {
        let d = 15;
        let mut prev = -1.0;
        for k in 0..=100 {
            let a = 1.0 / d as f64 + k as f64 / 100.0 * (1.0 - 1.0 / d as f64);
            let v = information_per_symbol(a.min(1.0), d).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn single_symbol_decodes_exactly() {
        for model in ["mcr16", "mcr4", "bsc", "mapi3", "mapi32", "mapc32", "fhrr"] {
            let book = cb(model, 100, 500, 0);
            for k in [0, 17, 99] {
                let phi = composite(&book, &[k], 1).unwrap();
                assert_eq!(decode_sequence(&book, &phi, 1).unwrap(), vec![k], "{model}");
            }
        }
    }

    #[test]
    fn bsc_two_by_two_brute_force() {
        let book = cb("bsc", 2, 500, 0);
        for s in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            let tie = 5;
            let phi = composite(&book, &s, tie).unwrap();
            // independent oracle: majority per component with the same tie stream
            let a = book.vectors()[s[0]].permute(1);
            let b = &book.vectors()[s[1]];
            let mut rng = RandomSource::derive(tie, &[0x6273_6374]);
            let bits: Vec<u16> = a
                .as_ring()
                .unwrap()
                .iter()
                .zip(b.as_ring().unwrap().iter())
                .map(|(x, y)| if x == y { x } else { rng.bit() as u16 })
                .collect();
            assert_eq!(phi.as_ring().unwrap().components(), bits);
            let expected: Vec<usize> = (0..2)
                .map(|j| {
                    let probe = phi.permute(-(1 - j as i64));
                    let d0 = probe.distance(&book.vectors()[0]).unwrap();
                    let d1 = probe.distance(&book.vectors()[1]).unwrap();
                    if d1 < d0 { 1 } else { 0 }
                })
                .collect();
            let decoded = decode_sequence(&book, &phi, 2).unwrap();
            assert_eq!(decoded, expected);
            assert_eq!(decoded, s.to_vec(), "{s:?}");
        }
    }

    #[test]
    fn position_alignment() {
        let book = cb("mcr16", 15, 500, 1);
        let mut s = vec![3; 9];
        s[4] = 11;
        let phi = composite(&book, &s, 0).unwrap();
        assert_eq!(decode_sequence(&book, &phi, 9).unwrap()[4], 11);
    }

    #[test]
    fn constant_sequence() {
        let book = cb("mcr16", 15, 500, 2);
        for m in 1..=10 {
            let s = vec![6; m];
            let phi = composite(&book, &s, 0).unwrap();
            assert!(decode_sequence(&book, &phi, m).unwrap().iter().all(|&x| x == 6));
        }
    }

    #[test]
    fn long_sequences_beat_chance() {
        let book = cb("mcr16", 15, 500, 3);
        let s = sequence_for(42, 15, 400, 3, 0);
        let phi = composite(&book, &s, 0).unwrap();
        let a = accuracy(&s, &decode_sequence(&book, &phi, 400).unwrap());
        assert!(a > 1.0 / 15.0, "{a}");
    }

    #[test]
    fn out_of_range_symbols() {
        let book = cb("bsc", 4, 16, 0);
        assert!(encode_sequence(&book, &[0, 4], 0).is_err());
        assert!(encode_sequence(&book, &[], 0).is_err());
    }

    #[test]
    fn grid_validation() {
        let cfg = CapacityConfig { m: vec![], ..Default::default() };
        assert!(run_capacity_sweep(&cfg).is_err());
        let cfg = CapacityConfig { d: vec![1], ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn degenerate_grid_is_exact_and_deterministic() {
        let cfg = CapacityConfig {
            m: vec![1],
            dim: 200,
            codebooks: 2,
            sequences: 3,
            ..CapacityConfig::default()
        };
        let res = run_capacity_sweep(&cfg).unwrap();
        assert_eq!(res.rows.len(), cfg.models.len());
        assert!(res.rows.iter().all(|r| r.mean_accuracy == 1.0 && r.trials == 6));
        let mut a = Vec::new();
        let mut b = Vec::new();
        res.write_csv(&mut a).unwrap();
        run_capacity_sweep(&cfg).unwrap().write_csv(&mut b).unwrap();
        assert_eq!(a, b);
        assert!(String::from_utf8(a).unwrap().starts_with("# config: {"));
    }
}
