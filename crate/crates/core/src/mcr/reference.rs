//! Reference kernels: unpack, reduce with an explicit Euclidean remainder,
//! repack. Valid for every modulus and used as the oracle for the packed path.

use crate::ring::Hypervector;

fn zip(a: &Hypervector, b: &Hypervector, f: impl Fn(i64, i64) -> i64) -> Hypervector {
    let m = a.modulus();
    let r = m.r() as i64;
    let values: Vec<i64> = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| f(x as i64, y as i64).rem_euclid(r))
        .collect();
    Hypervector::from_integers(m, &values).expect("operands are nonempty")
}

pub(crate) fn bind(a: &Hypervector, b: &Hypervector) -> Hypervector {
    zip(a, b, |x, y| x + y)
}

pub(crate) fn unbind(a: &Hypervector, b: &Hypervector) -> Hypervector {
    zip(a, b, |x, y| x - y)
}

pub(crate) fn distance(a: &Hypervector, b: &Hypervector) -> u64 {
    let r = a.modulus().r() as i64;
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| {
            let (x, y) = (x as i64, y as i64);
            (x - y).rem_euclid(r).min((y - x).rem_euclid(r)) as u64
        })
        .sum()
}
