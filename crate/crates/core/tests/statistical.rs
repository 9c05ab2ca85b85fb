use std::path::PathBuf;

use mcr_core::capacity::{
    accuracy, composite, decode_sequence, encode_sequence_stepwise, information_per_symbol, run_capacity_sweep,
    sequence_for, CapacityConfig, Codebook,
};
use mcr_core::classifier::train::{embed, PrototypeSet};
use mcr_core::classifier::{Classifier, Dataset, Encoder, Quantizer, TrainConfig};
use mcr_core::mcr::component_distance;
use mcr_core::stats::paired_bootstrap_lower;
use mcr_core::{ArithmeticPath, Hypervector, ModelDescriptor, Modulus, RandomSource, Q22_10};

fn data_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data"))
}

fn desc(s: &str, dim: usize) -> ModelDescriptor {
    ModelDescriptor::new(s.parse().unwrap(), dim).unwrap()
}

#[test]
fn expected_component_distance_is_a_quarter_turn() {
    for r in (2..=32u32).step_by(2) {
        let m = Modulus::new(r).unwrap();
        let total: u64 = (0..r as u16)
            .flat_map(|a| (0..r as u16).map(move |b| component_distance(m, a, b) as u64))
            .sum();
        assert_eq!(total as f64 / (r * r) as f64, r as f64 / 4.0, "r={r}");
    }

    let m = Modulus::new(16).unwrap();
    let mut rng = RandomSource::new(5);
    let d = 10_000;
    let a = Hypervector::random(m, d, &mut rng).unwrap();
    let b = Hypervector::random(m, d, &mut rng).unwrap();
    let per: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| component_distance(m, x, y) as f64).collect();
    let mean = per.iter().sum::<f64>() / d as f64;
    let var = per.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (d - 1) as f64;
    let se = (var / d as f64).sqrt();
    assert!((mean - 4.0).abs() <= 3.0 * se, "mean {mean}, se {se}");
}

#[test]
fn deferred_normalization_is_no_worse_than_stepwise() {
    let (d, m, dim) = (15, 30, 256);
    let mut deferred = 0.0;
    let mut stepwise = 0.0;
    for trial in 0..20u64 {
        let cb = Codebook::generate(desc("mcr8", dim), d, 9, trial).unwrap();
        let s = sequence_for(9, d, m, trial, 0);
        deferred += accuracy(&s, &decode_sequence(&cb, &composite(&cb, &s, trial).unwrap(), m).unwrap());
        stepwise += accuracy(&s, &decode_sequence(&cb, &encode_sequence_stepwise(&cb, &s, trial).unwrap(), m).unwrap());
    }
    assert!(deferred >= stepwise, "deferred {deferred} vs stepwise {stepwise}");
}

#[test]
fn information_grows_with_accuracy() {
    for d in [2usize, 5, 15, 100] {
        let mut prev = -1.0;
        for i in 0..=100 {
            let a = 1.0 / d as f64 + (1.0 - 1.0 / d as f64) * i as f64 / 100.0;
            let v = information_per_symbol(a, d).unwrap();
            assert!(v >= prev, "d={d} a={a}");
            prev = v;
        }
    }
}

#[test]
fn large_modulus_approaches_phasors_from_below() {
    let cfg = CapacityConfig {
        models: ["fhrr", "mcr64", "mcr16"].iter().map(|s| s.parse().unwrap()).collect(),
        d: vec![15],
        m: vec![100],
        dim: 256,
        codebooks: 5,
        sequences: 20,
        seed: 3,
    };
    let res = run_capacity_sweep(&cfg).unwrap();
    let acc = |s: &str| res.row(s.parse().unwrap(), 15, 100).unwrap().accuracies.clone();
    // MCR-64 must not be confirmed above FHRR, while FHRR is confirmed above MCR-16.
    let above = paired_bootstrap_lower(&acc("mcr64"), &acc("fhrr"), 10_000, 0.05, 1);
    assert!(above <= 0.0, "mcr64 exceeds fhrr by at least {above}");
    let gap = paired_bootstrap_lower(&acc("fhrr"), &acc("mcr16"), 10_000, 0.05, 2);
    assert!(gap > 0.0, "fhrr vs mcr16 lower bound {gap}");
}

#[test]
fn capacity_sweep_is_reproducible() {
    let cfg = CapacityConfig {
        models: vec!["mcr8".parse().unwrap(), "bsc".parse().unwrap()],
        m: vec![5, 20],
        dim: 128,
        codebooks: 2,
        sequences: 3,
        ..Default::default()
    };
    let (mut a, mut b) = (Vec::new(), Vec::new());
    run_capacity_sweep(&cfg).unwrap().write_csv(&mut a).unwrap();
    run_capacity_sweep(&cfg).unwrap().write_csv(&mut b).unwrap();
    assert_eq!(a, b);
}

#[test]
fn prototypes_stay_unit_norm_every_epoch() {
    let ds = Dataset::load(&data_dir(), "wine").unwrap();
    let dd = desc("mcr16", 256);
    let q = Quantizer::new(ds.feature_ranges(), 64).unwrap();
    let enc = Encoder::<Q22_10>::new(dd, q, 1).unwrap();
    let emb: Vec<Vec<f64>> = ds.train.iter().map(|&i| embed(&enc.encode(&ds.features[i]).unwrap())).collect();
    let samples: Vec<_> = ds.train.iter().map(|&i| enc.encode(&ds.features[i]).unwrap()).collect();
    let labels: Vec<usize> = ds.train.iter().map(|&i| ds.labels[i]).collect();
    let mut set = PrototypeSet::centroid(dd, ArithmeticPath::Packed, &emb, &labels, ds.classes).unwrap();
    let order: Vec<usize> = (0..samples.len()).collect();
    let norms_ok = |set: &PrototypeSet| {
        set.high().iter().all(|p| (p.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() < 1e-9)
    };
    assert!(norms_ok(&set));
    for _ in 0..5 {
        set.lvq_epoch(&samples, &emb, &labels, &order, 0.01, 0.1).unwrap();
        assert!(norms_ok(&set));
    }
}

#[test]
fn training_is_deterministic() {
    let ds = Dataset::load(&data_dir(), "iris").unwrap();
    let cfg = TrainConfig { epochs: 3, ..Default::default() };
    for model in ["mcr16", "bsc", "mapi4", "fhrr"] {
        let a = Classifier::<Q22_10>::train(&ds, desc(model, 256), &cfg, 4).unwrap().accuracy(&ds, &ds.test).unwrap();
        let b = Classifier::<Q22_10>::train(&ds, desc(model, 256), &cfg, 4).unwrap().accuracy(&ds, &ds.test).unwrap();
        assert_eq!(a.to_bits(), b.to_bits(), "{model}");
    }
}

#[test]
fn encoding_is_local() {
    let features = 8;
    let levels = 1024;
    let q = Quantizer::new(vec![(0.0, (levels - 1) as f64); features], levels).unwrap();
    let enc = Encoder::<Q22_10>::new(desc("mcr16", 1024), q, 8).unwrap();
    let mut rng = RandomSource::new(12);
    let mut holds = 0;
    for _ in 0..100 {
        let j = rng.below(features as u32) as usize;
        let mut x: Vec<f64> = (0..features).map(|_| rng.below(levels as u32) as f64).collect();
        x[j] = 0.0;
        let (mut near, mut far) = (x.clone(), x.clone());
        near[j] = 1.0;
        far[j] = (levels - 1) as f64;
        let phi = enc.encode(&x).unwrap();
        let dn = phi.distance(&enc.encode(&near).unwrap()).unwrap();
        let df = phi.distance(&enc.encode(&far).unwrap()).unwrap();
        holds += usize::from(dn <= df);
    }
    assert!(holds >= 95, "locality held for {holds}/100 pairs");
}
