//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed. Pass criterion numbers as arguments to run a
//! subset, e.g. `cargo test -p mcr-core --test acceptance -- 4 5`.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use mcr_core::capacity::{information_per_symbol, run_capacity_sweep, CapacityConfig, CapacityResults};
use mcr_core::classifier::{run_benchmark, BenchmarkConfig, Classifier, Dataset, ModelConfig, TrainConfig};
use mcr_core::latency::{reference_frequency_mhz, LatencySpec, Op, REFERENCE_WORKLOADS};
use mcr_core::mcr::component_distance;
use mcr_core::mcr::superpose::{normalize_component_reference, normalize_component_wta};
use mcr_core::microbench::{run_microbench, BenchOp, MicrobenchConfig};
use mcr_core::stats::paired_bootstrap_lower;
use mcr_core::{
    AccumScalar, ArithmeticPath, Component, FixedTrigLut, Hypervector, ModelDescriptor, ModelKind, Modulus,
    RandomSource, Q22_10, Q6_10,
};

// Pinned tolerances.
const C2_MIN_AGREEMENT: f64 = 0.999;
const C4_ALPHA: f64 = 0.05;
const C4_RESAMPLES: usize = 10_000;
const C4_M_FLOOR: usize = 100;
const C6_SLACK: f64 = 0.01;
const C6_MIN_DATASETS: usize = 5;
const C6_RUNS: usize = 5;
const C7_SAMPLES: usize = 1000;
const C8_ORDER_FACTOR: f64 = 10.0;
/// Instruction issue allowance added to the model before the order-of-
/// magnitude comparison; the measured bind rows carry a constant 14 cycles.
const C8_ISSUE_CYCLES: u64 = 16;
const C9_DEFAULT_SPEEDUP: f64 = 5.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn data_dir() -> PathBuf {
    std::env::var_os("MCR_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data")))
}

fn load_all_datasets() -> Vec<Dataset> {
    let dir = data_dir();
    let mut names: Vec<String> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", dir.display()))
        .filter_map(|e| {
            let p = e.ok()?.path();
            if p.extension()? != "json" {
                return None;
            }
            Some(p.file_stem()?.to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    names.iter().map(|n| Dataset::load(&dir, n).expect("dataset loads")).collect()
}

fn mk(s: &str) -> ModelKind {
    s.parse().expect("model")
}

// 1. With r = 2, bind is XOR and distance is Hamming.
fn c1_bsc_equivalence() -> Outcome {
    let m = Modulus::new(2).unwrap();
    let mut rng = RandomSource::new(101);
    let mut bad = 0;
    for _ in 0..10_000 {
        let a = Hypervector::random(m, 1024, &mut rng).unwrap();
        let b = Hypervector::random(m, 1024, &mut rng).unwrap();
        let xor: Vec<Component> = a.iter().zip(b.iter()).map(|(x, y)| x ^ y).collect();
        let hamming = xor.iter().filter(|&&x| x == 1).count() as u64;
        for path in [ArithmeticPath::Packed, ArithmeticPath::Reference] {
            let ok = a.bind_with(&b, path).unwrap().components() == xor
                && a.unbind_with(&b, path).unwrap().components() == xor
                && a.distance_with(&b, path).unwrap() == hamming;
            bad += usize::from(!ok);
        }
    }
    outcome(bad == 0, format!("10000 pairs at D=1024 on both paths, {bad} disagreements"))
}

// 2. WTA agrees with atan2 except where the two winning directions cannot
// be separated at LUT precision.
fn c2_normalization_oracle() -> Outcome {
    let lsb = Q6_10::resolution();
    let mut details = Vec::new();
    let mut pass = true;
    for r in [4u32, 8, 16] {
        let m = Modulus::new(r).unwrap();
        let lut = FixedTrigLut::new(m);
        let mut rng = RandomSource::derive(202, &[r as u64]);
        let (mut mismatches, mut exact_ties, mut unexplained) = (0u64, 0u64, 0u64);
        let n = 1_000_000u64;
        for _ in 0..n {
            let span = (Q6_10::MAX_RAW as i64 - Q6_10::MIN_RAW as i64 + 1) as u32;
            let re = Q6_10::from_raw(Q6_10::MIN_RAW + rng.below(span) as i32);
            let im = Q6_10::from_raw(Q6_10::MIN_RAW + rng.below(span) as i32);
            let count = 1 + rng.below(16);
            let intsum = (0..count).map(|_| rng.below(r) as i64).sum();
            let w = normalize_component_wta(&lut, re, im, intsum, count);
            let f = normalize_component_reference(re, im, intsum, count, m);
            if w == f {
                continue;
            }
            mismatches += 1;
            let (x, y) = (re.to_f64(), im.to_f64());
            let ip = |k: Component| {
                let t = std::f64::consts::TAU * k as f64 / r as f64;
                x * t.cos() + y * t.sin()
            };
            let gap = (ip(w) - ip(f)).abs();
            if gap < 1e-9 * (x.abs() + y.abs()) {
                exact_ties += 1;
            } else if gap > (x.abs() + y.abs()) * lsb {
                unexplained += 1;
            }
        }
        let agreement = 1.0 - mismatches as f64 / n as f64;
        pass &= agreement >= C2_MIN_AGREEMENT && unexplained == 0;
        details.push(format!(
            "r={r}: agreement {agreement:.5}, {mismatches} mismatches ({exact_ties} exact ties, {} within LUT precision, {unexplained} other)",
            mismatches - exact_ties - unexplained
        ));
    }
    outcome(pass, details.join("; "))
}

// 3. Metric axioms.
fn c3_metric_axioms() -> Outcome {
    let mut violations = 0u64;
    for r in 2..=16u32 {
        let m = Modulus::new(r).unwrap();
        for a in 0..r as Component {
            for b in 0..r as Component {
                let dab = component_distance(m, a, b);
                violations += u64::from(dab != component_distance(m, b, a));
                violations += u64::from((dab == 0) != (a == b));
                for c in 0..r as Component {
                    violations += u64::from(dab > component_distance(m, a, c) + component_distance(m, c, b));
                }
            }
        }
    }
    let mut rng = RandomSource::new(303);
    for i in 0..10_000u32 {
        let m = Modulus::new(2 + i % 15).unwrap();
        let v: Vec<Hypervector> = (0..3).map(|_| Hypervector::random(m, 256, &mut rng).unwrap()).collect();
        let d = |x: &Hypervector, y: &Hypervector| x.distance_with(y, ArithmeticPath::Reference).unwrap();
        violations += u64::from(d(&v[0], &v[0]) != 0);
        violations += u64::from(d(&v[0], &v[1]) != d(&v[1], &v[0]));
        violations += u64::from(d(&v[0], &v[1]) > d(&v[0], &v[2]) + d(&v[2], &v[1]));
        if m.is_power_of_two() {
            violations += u64::from(v[0].distance(&v[1]).unwrap() != d(&v[0], &v[1]));
        }
    }
    outcome(violations == 0, format!("exhaustive r=2..16 and 10000 vector triples at D=256, {violations} violations"))
}

fn pooled(res: &CapacityResults, model: ModelKind) -> Vec<f64> {
    res.config
        .m
        .iter()
        .filter(|&&m| m >= C4_M_FLOOR)
        .flat_map(|&m| res.row(model, res.config.d[0], m).expect("row").accuracies.clone())
        .collect()
}

// 4. Capacity ordering, with paired bootstrap confirmation of each gap.
fn c4_capacity_ordering(res: &CapacityResults) -> Outcome {
    let chain = ["fhrr", "mcr16", "mcr8", "mcr4", "bsc"];
    let mut pairs: Vec<(&str, &str)> = chain.windows(2).map(|w| (w[0], w[1])).collect();
    pairs.extend([("mcr4", "mapi2"), ("mcr8", "mapi3"), ("mcr16", "mapi4")]);
    let mut pass = true;
    let mut details = Vec::new();
    for (i, (hi, lo)) in pairs.iter().enumerate() {
        let (a, b) = (pooled(res, mk(hi)), pooled(res, mk(lo)));
        let lower = paired_bootstrap_lower(&a, &b, C4_RESAMPLES, C4_ALPHA, 404 + i as u64);
        let means_ok = res
            .config
            .m
            .iter()
            .filter(|&&m| m >= C4_M_FLOOR)
            .all(|&m| res.row(mk(hi), res.config.d[0], m).unwrap().mean_accuracy >= res.row(mk(lo), res.config.d[0], m).unwrap().mean_accuracy);
        let ok = means_ok && lower > 0.0;
        pass &= ok;
        details.push(format!("{hi}>{lo} lower={lower:+.4}{}", if ok { "" } else { " (not confirmed)" }));
    }
    outcome(pass, details.join(", "))
}

// 5. Information endpoints and per-bit ranking.
fn c5_information(res: &CapacityResults) -> Outcome {
    let mut endpoints_ok = true;
    for d in [2usize, 3, 10, 15, 27, 1000] {
        endpoints_ok &= information_per_symbol(1.0, d).unwrap() == (d as f64).log2();
        endpoints_ok &= information_per_symbol(1.0 / d as f64, d).unwrap() == 0.0;
    }
    let d = res.config.d[0];
    let peak = |s: &str| res.peak_i_bit(mk(s), d).expect("model in sweep");
    let others = ["bsc", "mapi2", "mapi3", "mapi4", "mapi5", "mapi32", "mapc32", "fhrr"];
    let best_other = others.iter().map(|s| (peak(s), *s)).fold((f64::MIN, ""), |a, b| if b.0 > a.0 { b } else { a });
    let mut losers = Vec::new();
    for mcr in ["mcr4", "mcr8", "mcr16"] {
        if peak(mcr) <= best_other.0 {
            losers.push(format!("{mcr}={:.4}", peak(mcr)));
        }
    }
    let detail = format!(
        "endpoints {}; peak I_bit mcr4={:.4} mcr8={:.4} mcr16={:.4}, best other {}={:.4}{}",
        if endpoints_ok { "exact" } else { "WRONG" },
        peak("mcr4"),
        peak("mcr8"),
        peak("mcr16"),
        best_other.1,
        best_other.0,
        if losers.is_empty() { String::new() } else { format!("; not above: {}", losers.join(" ")) }
    );
    outcome(endpoints_ok && losers.is_empty(), detail)
}

// 6. Classification on the bundled datasets.
fn c6_classification(datasets: &[Dataset]) -> Outcome {
    let models: Vec<ModelConfig> = ["mcr16:1024", "mcr16:256", "bsc:1024"].iter().map(|s| s.parse().unwrap()).collect();
    let cfg = BenchmarkConfig {
        datasets: datasets.iter().map(|d| d.name.clone()).collect(),
        models: models.clone(),
        train: TrainConfig::default(),
        runs: C6_RUNS,
        seed: 0,
    };
    let res = run_benchmark(datasets, &cfg).expect("benchmark runs");
    let avg: Vec<f64> = models.iter().map(|m| res.average(*m).unwrap()).collect();
    let (a, b) = (avg[0] >= avg[2], avg[1] >= avg[2] - C6_SLACK);
    outcome(
        datasets.len() >= C6_MIN_DATASETS && a && b,
        format!(
            "{} datasets x {} seeds: mcr16:1024={:.4} mcr16:256={:.4} bsc:1024={:.4}; (a) {} (b) {}",
            datasets.len(),
            C6_RUNS,
            avg[0],
            avg[1],
            avg[2],
            if a { "ok" } else { "FAIL" },
            if b { "ok" } else { "FAIL" }
        ),
    )
}

// 7. Packed and reference inference give the same predictions. The three
// largest datasets by sample count supply the samples.
fn c7_dual_path(datasets: &[Dataset]) -> Outcome {
    let mut by_size: Vec<&Dataset> = datasets.iter().collect();
    by_size.sort_by(|a, b| b.features.len().cmp(&a.features.len()).then(a.name.cmp(&b.name)));
    let chosen = &by_size[..3];
    let desc = ModelDescriptor::new(mk("mcr16"), 1024).unwrap();
    let classifiers: Vec<Classifier<Q22_10>> = chosen
        .iter()
        .map(|ds| Classifier::train(ds, desc, &TrainConfig::default(), 0).expect("training"))
        .collect();
    let mut pool: Vec<(usize, usize)> = chosen
        .iter()
        .enumerate()
        .flat_map(|(i, ds)| (0..ds.features.len()).map(move |row| (i, row)))
        .collect();
    RandomSource::new(707).shuffle(&mut pool);
    let mut mismatches = 0;
    let mut total = 0;
    for &(i, row) in pool.iter().take(C7_SAMPLES) {
        let x = &chosen[i].features[row];
        let fast = classifiers[i].predict_with(x, ArithmeticPath::Packed).unwrap();
        let slow = classifiers[i].predict_with(x, ArithmeticPath::Reference).unwrap();
        mismatches += usize::from(fast != slow);
        total += 1;
    }
    let names: Vec<&str> = chosen.iter().map(|d| d.name.as_str()).collect();
    outcome(mismatches == 0 && total == C7_SAMPLES, format!("{mismatches}/{total} differing predictions on {}", names.join(", ")))
}

/// Measured accelerated op times in microseconds on the reference FPGA build
/// (r = 16): bind, superimpose, normalize, permute, distance.
const MEASURED_US: [(u32, u32, [f64; 5]); 12] = [
    (8, 64, [0.15, 0.36, 0.65, 0.15, 0.24]),
    (8, 512, [0.52, 1.85, 4.38, 0.52, 0.99]),
    (8, 2048, [1.80, 6.97, 17.18, 1.80, 3.55]),
    (16, 64, [0.14, 0.31, 0.46, 0.14, 0.23]),
    (16, 512, [0.37, 1.21, 2.70, 0.37, 0.68]),
    (16, 2048, [1.14, 4.28, 10.38, 1.14, 2.22]),
    (32, 64, [0.14, 0.28, 0.32, 0.14, 0.23]),
    (32, 512, [0.26, 0.77, 1.54, 0.26, 0.47]),
    (32, 2048, [0.68, 2.44, 5.71, 0.68, 1.30]),
    (64, 64, [0.13, 0.24, 0.23, 0.13, 0.20]),
    (64, 512, [0.19, 0.48, 0.82, 0.19, 0.33]),
    (64, 2048, [0.39, 1.30, 2.86, 0.39, 0.74]),
];

// 8. Latency formulas, time bounds, and the MCR vs BSC inference direction.
fn c8_latency() -> Outcome {
    let mut formula_errors = 0;
    let mut bound_errors = Vec::new();
    let mut max_ratio: f64 = 0.0;
    let ops = [Op::Bind, Op::Superimpose, Op::Normalize, Op::Permute, Op::Distance];
    for (simd, dim, measured) in MEASURED_US {
        let spec = LatencySpec::mcr(simd, 16, dim, 1).unwrap();
        let n = (dim / simd) as u64;
        let log = (simd as f64).log2().ceil() as u64;
        let expect = [n, 2 * n, 2 * n * 5, n, n + log];
        let f = reference_frequency_mhz(simd).unwrap();
        for ((op, want), t) in ops.iter().zip(expect).zip(measured) {
            let got = spec.cycles(*op);
            formula_errors += usize::from(got != want);
            let model_us = got as f64 / f;
            let ceiling = C8_ORDER_FACTOR * (got + C8_ISSUE_CYCLES) as f64 / f;
            max_ratio = max_ratio.max(t / model_us);
            if !(model_us <= t && t <= ceiling) {
                bound_errors.push(format!("{op}@{simd}x{dim}"));
            }
        }
        formula_errors += usize::from(spec.cycles(Op::Unbind) != n);
    }
    formula_errors += usize::from(LatencySpec::mcr(8, 16, 2048, 1).unwrap().cycles(Op::Bind) != 256);

    let mut slower = Vec::new();
    let mut speedups = Vec::new();
    for (ms, bs) in [(8, 32), (16, 64), (32, 128), (64, 256)] {
        for w in REFERENCE_WORKLOADS {
            let mcr = LatencySpec::mcr(ms, 16, 64, w.classes).unwrap().inference(w.features).unwrap().total;
            let bsc = LatencySpec::bsc(bs, 1024, w.classes).unwrap().inference(w.features).unwrap().total;
            speedups.push(bsc as f64 / mcr as f64);
            if mcr >= bsc {
                slower.push(format!("{}@{ms}", w.name));
            }
        }
    }
    let mean_speedup = speedups.iter().sum::<f64>() / speedups.len() as f64;
    let pass = formula_errors == 0 && bound_errors.is_empty() && slower.is_empty();
    outcome(
        pass,
        format!(
            "{formula_errors} formula errors; {} cells outside [model, {C8_ORDER_FACTOR}x(model+{C8_ISSUE_CYCLES} cycles)] (max raw ratio {max_ratio:.1}){}; MCR D=64 faster than BSC D=1024 in {}/28 workload-SIMD pairs, mean {mean_speedup:.2}x",
            bound_errors.len(),
            if bound_errors.is_empty() { String::new() } else { format!(" {}", bound_errors.join(" ")) },
            28 - slower.len()
        ),
    )
}

// 9. Packed kernels beat the reference kernels.
fn c9_microbench() -> Outcome {
    let threshold = std::env::var("MCR_SPEEDUP_THRESHOLD")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(C9_DEFAULT_SPEEDUP);
    let cfg = MicrobenchConfig {
        ops: vec![BenchOp::Bind, BenchOp::Distance],
        models: vec![mk("mcr16")],
        dims: vec![2048],
        repetitions: 21,
        ..Default::default()
    };
    let res = run_microbench(&cfg).expect("microbench");
    let bind = res.row(BenchOp::Bind, mk("mcr16"), 2048).unwrap().speedup;
    let dist = res.row(BenchOp::Distance, mk("mcr16"), 2048).unwrap().speedup;
    outcome(
        bind >= threshold && dist >= threshold,
        format!("D=2048 r=16 speedup bind {bind:.1}x, distance {dist:.1}x (threshold {threshold}x)"),
    )
}

fn main() -> ExitCode {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let run = |n: u32| wanted.is_empty() || wanted.contains(&n);

    let mut results: Vec<(u32, &str, Outcome, f64)> = Vec::new();
    let mut record = |n: u32, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        if run(n) {
            let t = Instant::now();
            let o = f();
            let secs = t.elapsed().as_secs_f64();
            println!("criterion {n} {} {name}: {} [{secs:.1}s]", if o.pass { "PASS" } else { "FAIL" }, o.detail);
            results.push((n, name, o, secs));
        }
    };

    record(1, "bsc equivalence", &mut c1_bsc_equivalence);
    record(2, "normalization oracle", &mut c2_normalization_oracle);
    record(3, "metric axioms", &mut c3_metric_axioms);
    if run(4) || run(5) {
        let sweep = run_capacity_sweep(&CapacityConfig::default()).expect("capacity sweep");
        record(4, "capacity ordering", &mut || c4_capacity_ordering(&sweep));
        record(5, "information metrics", &mut || c5_information(&sweep));
    }
    if run(6) || run(7) {
        let datasets = load_all_datasets();
        record(6, "classification", &mut || c6_classification(&datasets));
        record(7, "dual-path equivalence", &mut || c7_dual_path(&datasets));
    }
    record(8, "latency model", &mut c8_latency);
    record(9, "packed speedup", &mut c9_microbench);

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} passed{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() { String::new() } else { format!(", failed {failed:?}") }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
