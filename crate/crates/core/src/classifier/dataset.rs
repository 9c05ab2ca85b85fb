//! Tabular datasets: headerless CSV rows of features followed by an integer
//! label, with a JSON manifest alongside.

use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Sidecar `<name>.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub n: usize,
    /// Number of features.
    pub d: usize,
    /// Number of classes.
    pub c: usize,
    pub split_seed: u64,
    pub test_fraction: f64,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub name: String,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub classes: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl Dataset {
    /// Reads `<dir>/<name>.json` and `<dir>/<name>.csv`.
    pub fn load(dir: &Path, name: &str) -> Result<Self> {
        let manifest: Manifest = serde_json::from_reader(File::open(dir.join(format!("{name}.json")))?)?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_path(dir.join(format!("{name}.csv")))?;
        let mut features = Vec::with_capacity(manifest.n);
        let mut labels = Vec::with_capacity(manifest.n);
        for (line, rec) in reader.records().enumerate() {
            let rec = rec?;
            if rec.len() != manifest.d + 1 {
                return Err(Error::Format(format!(
                    "{name}.csv row {}: {} fields, expected {}",
                    line + 1,
                    rec.len(),
                    manifest.d + 1
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Format(format!("{name}.csv row {}: bad number {s:?}", line + 1)))
            };
            let row = rec.iter().take(manifest.d).map(parse).collect::<Result<Vec<_>>>()?;
            let label = rec[manifest.d]
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::Format(format!("{name}.csv row {}: bad label", line + 1)))?;
            features.push(row);
            labels.push(label);
        }
        if features.len() != manifest.n {
            return Err(Error::Format(format!(
                "{name}: manifest says {} rows, file has {}",
                manifest.n,
                features.len()
            )));
        }
        Dataset::from_parts(&manifest.name, features, labels, manifest.c, manifest.split_seed, manifest.test_fraction)
    }

    /// Validates the data and draws a stratified train/test split.
    pub fn from_parts(
        name: &str,
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
        classes: usize,
        split_seed: u64,
        test_fraction: f64,
    ) -> Result<Self> {
        if features.is_empty() || features.len() != labels.len() {
            return Err(Error::invalid("need one label per nonempty feature row"));
        }
        let d = features[0].len();
        if d == 0 || features.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("feature rows must share a positive width"));
        }
        if features.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("{name}: non-finite feature value")));
        }
        if classes == 0 || labels.iter().any(|&y| y >= classes) {
            return Err(Error::invalid(format!("{name}: label outside 0..{classes}")));
        }
        if !(0.0..1.0).contains(&test_fraction) {
            return Err(Error::invalid("test fraction must lie in [0, 1)"));
        }
        let mut train = Vec::new();
        let mut test = Vec::new();
        for c in 0..classes {
            let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
            RandomSource::derive(split_seed, &[c as u64]).shuffle(&mut idx);
            let mut n_test = (idx.len() as f64 * test_fraction).round() as usize;
            if n_test == idx.len() && n_test > 0 {
                n_test -= 1;
            }
            test.extend_from_slice(&idx[..n_test]);
            train.extend_from_slice(&idx[n_test..]);
        }
        train.sort_unstable();
        test.sort_unstable();
        Ok(Dataset { name: name.to_string(), features, labels, classes, train, test })
    }

    pub fn n_features(&self) -> usize {
        self.features[0].len()
    }

    /// Per-feature `(min, max)` over the training split.
    pub fn feature_ranges(&self) -> Vec<(f64, f64)> {
        (0..self.n_features())
            .map(|j| {
                self.train.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                    let x = self.features[i][j];
                    (lo.min(x), hi.max(x))
                })
            })
            .collect()
    }
}
