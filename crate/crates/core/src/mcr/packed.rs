//! Packed kernels for power-of-two moduli.
//!
//! With `r = 2^b`, a `b`-bit lane wraps exactly like `mod r`, so binding is a
//! lane-wise add and unbinding a lane-wise subtract with the carries confined
//! to each lane. When `b` divides 64 no lane straddles a word and a whole
//! `u64` is processed per step (SWAR); other widths fall back to per-lane
//! masking.

use crate::ring::{Hypervector, Modulus};

#[derive(Clone, Copy)]
struct Lanes {
    /// Lowest bit of every lane.
    low: u64,
    /// Highest bit of every lane.
    high: u64,
    bits: u32,
}

impl Lanes {
    fn new(bits: u32) -> Option<Lanes> {
        if 64 % bits != 0 {
            return None;
        }
        let low = if bits == 64 { 1 } else { u64::MAX / ((1u64 << bits) - 1) };
        Some(Lanes { low, high: low << (bits - 1), bits })
    }

    #[inline(always)]
    fn add(self, a: u64, b: u64) -> u64 {
        ((a & !self.high).wrapping_add(b & !self.high)) ^ ((a ^ b) & self.high)
    }

    #[inline(always)]
    fn sub(self, a: u64, b: u64) -> u64 {
        ((a | self.high).wrapping_sub(b & !self.high)) ^ ((a ^ !b) & self.high)
    }

    /// Lane-wise `min(d, r - d)` for lanes holding `d = (a - b) mod r`.
    #[inline(always)]
    fn fold(self, d: u64) -> u64 {
        let upper = (d & self.high) >> (self.bits - 1);
        let fill = upper.wrapping_mul((1u64 << self.bits) - 1);
        let neg = self.sub(0, d);
        (neg & fill) | (d & !fill)
    }

    /// Sum of all lane values.
    #[inline(always)]
    fn horizontal_sum(self, x: u64) -> u64 {
        if self.bits == 1 {
            return x.count_ones() as u64;
        }
        (0..self.bits)
            .map(|k| ((x & (self.low << k)).count_ones() as u64) << k)
            .sum()
    }
}

fn zip_words(a: &Hypervector, b: &Hypervector, f: impl Fn(u64, u64) -> u64) -> Hypervector {
    let words = a.words().iter().zip(b.words()).map(|(&x, &y)| f(x, y)).collect();
    Hypervector::from_words(a.modulus(), a.dim(), words)
}

fn zip_lanes(a: &Hypervector, b: &Hypervector, f: impl Fn(i64, i64) -> i64) -> Hypervector {
    let m = a.modulus();
    let mut out = Hypervector::zeros(m, a.dim()).expect("nonzero dim");
    for i in 0..a.dim() {
        out.set(i, m.reduce_overflow(f(a.get(i) as i64, b.get(i) as i64)));
    }
    out
}

fn require_pow2(m: Modulus) {
    assert!(m.is_power_of_two(), "packed kernels need a power-of-two modulus, got {m:?}");
}

pub(crate) fn bind(a: &Hypervector, b: &Hypervector) -> Hypervector {
    require_pow2(a.modulus());
    match Lanes::new(a.modulus().bits()) {
        Some(l) => zip_words(a, b, |x, y| l.add(x, y)),
        None => zip_lanes(a, b, |x, y| x + y),
    }
}

pub(crate) fn unbind(a: &Hypervector, b: &Hypervector) -> Hypervector {
    require_pow2(a.modulus());
    match Lanes::new(a.modulus().bits()) {
        Some(l) => zip_words(a, b, |x, y| l.sub(x, y)),
        None => zip_lanes(a, b, |x, y| x - y),
    }
}

pub(crate) fn distance(a: &Hypervector, b: &Hypervector) -> u64 {
    let m = a.modulus();
    require_pow2(m);
    match Lanes::new(m.bits()) {
        Some(l) => a
            .words()
            .iter()
            .zip(b.words())
            .map(|(&x, &y)| l.horizontal_sum(l.fold(l.sub(x, y))))
            .sum(),
        None => {
            let r = m.r() as u64;
            (0..a.dim())
                .map(|i| {
                    let d = m.reduce_overflow(a.get(i) as i64 - b.get(i) as i64) as u64;
                    d.min(r - d)
                })
                .sum()
        }
    }
}

/// Lane-wise sum of raw packed words; exposed for the per-lane kernel tests.
#[cfg(test)]
pub(crate) fn lane_add(bits: u32, a: u64, b: u64) -> Option<u64> {
    Lanes::new(bits).map(|l| l.add(a, b))
}
