//! Accuracy table over datasets, models and independent runs.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::dataset::Dataset;
use crate::classifier::train::{Classifier, TrainConfig};
use crate::error::{Error, Result};
use crate::models::{ModelDescriptor, ModelKind};
use crate::rng::stream_id;
use crate::stats;
use crate::Q22_10;

/// Model and dimension, written `kind:D` (for example `mcr16:256`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub dim: usize,
}

impl ModelConfig {
    pub fn descriptor(&self) -> Result<ModelDescriptor> {
        ModelDescriptor::new(self.kind, self.dim)
    }
}

impl fmt::Display for ModelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.dim)
    }
}

impl FromStr for ModelConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, dim) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("model spec {s:?} should look like kind:D")))?;
        let dim: usize = dim
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad dimension in {s:?}")))?;
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        Ok(ModelConfig { kind: kind.parse()?, dim })
    }
}

impl TryFrom<String> for ModelConfig {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ModelConfig> for String {
    fn from(m: ModelConfig) -> String {
        m.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub datasets: Vec<String>,
    pub models: Vec<ModelConfig>,
    pub train: TrainConfig,
    pub runs: usize,
    pub seed: u64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            datasets: ["iris", "wine", "breast_cancer", "heart_disease", "zoo", "digits"]
                .map(String::from)
                .to_vec(),
            models: ["mcr16:64", "mcr16:256", "mcr16:1024", "bsc:1024", "mapi4:1024", "mapc32:1024"]
                .iter()
                .map(|s| s.parse().expect("static model list"))
                .collect(),
            train: TrainConfig::default(),
            runs: 20,
            seed: 0,
        }
    }
}

/// Seed of run `run`; shared by every model so that runs are paired.
pub fn run_seed(seed: u64, run: usize) -> u64 {
    stream_id(&[seed, run as u64])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub dataset: String,
    pub model: ModelConfig,
    pub bits: u32,
    /// Bits per class prototype, `b * D`.
    pub footprint_bits: u64,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub runs: usize,
    #[serde(skip)]
    pub accuracies: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchmarkResults {
    pub config: BenchmarkConfig,
    pub rows: Vec<BenchmarkRow>,
}

/// Test accuracy of one training run.
pub fn run_once(ds: &Dataset, model: ModelConfig, train: &TrainConfig, seed: u64) -> Result<f64> {
    let clf = Classifier::<Q22_10>::train(ds, model.descriptor()?, train, seed)?;
    clf.accuracy(ds, &ds.test)
}

/// Trains and tests every `(dataset, model, run)`. Runs execute in parallel;
/// results do not depend on scheduling.
pub fn run_benchmark(datasets: &[Dataset], cfg: &BenchmarkConfig) -> Result<BenchmarkResults> {
    cfg.train.validate()?;
    if cfg.runs == 0 || cfg.models.is_empty() || datasets.is_empty() {
        return Err(Error::invalid("need at least one dataset, model and run"));
    }
    let mut jobs = Vec::new();
    for (di, _) in datasets.iter().enumerate() {
        for (mi, _) in cfg.models.iter().enumerate() {
            for run in 0..cfg.runs {
                jobs.push((di, mi, run));
            }
        }
    }
    let accs = jobs
        .par_iter()
        .map(|&(di, mi, run)| run_once(&datasets[di], cfg.models[mi], &cfg.train, run_seed(cfg.seed, run)))
        .collect::<Result<Vec<f64>>>()?;
    let rows = accs
        .chunks(cfg.runs)
        .zip(jobs.chunks(cfg.runs))
        .map(|(a, j)| {
            let (di, mi, _) = j[0];
            let model = cfg.models[mi];
            BenchmarkRow {
                dataset: datasets[di].name.clone(),
                model,
                bits: model.kind.bits(),
                footprint_bits: model.kind.bits() as u64 * model.dim as u64,
                mean_accuracy: stats::mean(a),
                std_accuracy: stats::std_dev(a),
                runs: a.len(),
                accuracies: a.to_vec(),
            }
        })
        .collect();
    Ok(BenchmarkResults { config: cfg.clone(), rows })
}

impl BenchmarkResults {
    /// Mean accuracy of `model` across all datasets.
    pub fn average(&self, model: ModelConfig) -> Option<f64> {
        let xs: Vec<f64> = self.rows.iter().filter(|r| r.model == model).map(|r| r.mean_accuracy).collect();
        (!xs.is_empty()).then(|| stats::mean(&xs))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# config: {}", serde_json::to_string(&self.config)?)?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["dataset", "model", "b", "D", "footprint_bits", "mean_acc", "std_acc", "runs"])?;
        for r in &self.rows {
            out.write_record([
                r.dataset.clone(),
                r.model.kind.to_string(),
                r.bits.to_string(),
                r.model.dim.to_string(),
                r.footprint_bits.to_string(),
                format!("{:.6}", r.mean_accuracy),
                format!("{:.6}", r.std_accuracy),
                r.runs.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}
