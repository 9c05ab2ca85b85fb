//! Superposition in the complex plane and normalization back onto `Z_r`.
//!
//! Each component `k` is read as the phasor `(cos 2πk/r, sin 2πk/r)` from a
//! lookup table and summed into a [`CartesianAccumulator`]. Normalization maps
//! every resultant to the nearest ring element, either through a
//! floating-point `atan2` (reference) or by a winner-take-all over the
//! `r/4 + 1` table directions of the resultant's quadrant (WTA). Resultants
//! whose real and imaginary parts are both below the scalar's zero epsilon
//! have no usable phase and fall back to the rounded arithmetic mean of the
//! raw integer components.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::mcr::ArithmeticPath;
use crate::ring::{Component, Hypervector, Modulus};
use crate::scalar::AccumScalar;

/// Cosine and sine of every ring element, rounded into `S`.
///
/// Entries are generated from one octant-free quadrant and rotated, so the
/// table is exactly symmetric under quarter turns when `4 | r`.
#[derive(Clone, Debug)]
pub struct TrigLut<S> {
    modulus: Modulus,
    cos: Vec<S>,
    sin: Vec<S>,
}

fn exact_phasor(k: u32, r: u32) -> (f64, f64) {
    let angle = |j: u32| TAU * j as f64 / r as f64;
    let (c, s) = if r.is_multiple_of(4) {
        let quarter = r / 4;
        let a = angle(k % quarter);
        let (c, s) = (a.cos(), a.sin());
        match k / quarter {
            0 => (c, s),
            1 => (-s, c),
            2 => (-c, -s),
            _ => (s, -c),
        }
    } else if r.is_multiple_of(2) && k >= r / 2 {
        let a = angle(k - r / 2);
        (-a.cos(), -a.sin())
    } else {
        let a = angle(k);
        (a.cos(), a.sin())
    };
    // drop negative zeros so sign bits only mark genuinely negative values
    (c + 0.0, s + 0.0)
}

impl<S: AccumScalar> TrigLut<S> {
    pub fn new(modulus: Modulus) -> Self {
        let r = modulus.r();
        let (cos, sin) = (0..r)
            .map(|k| {
                let (c, s) = exact_phasor(k, r);
                (S::from_f64(c), S::from_f64(s))
            })
            .unzip();
        TrigLut { modulus, cos, sin }
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.cos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cos.is_empty()
    }

    #[inline]
    pub fn cos(&self, k: Component) -> S {
        self.cos[k as usize]
    }

    #[inline]
    pub fn sin(&self, k: Component) -> S {
        self.sin[k as usize]
    }

    /// `re * cos(2πk/r) + im * sin(2πk/r)` in the scalar's wide product type.
    #[inline]
    pub fn inner_product(&self, k: Component, re: S, im: S) -> S::Wide {
        re.widening_mul(self.cos(k)) + im.widening_mul(self.sin(k))
    }

    /// Table entry minus the exact value, per coordinate.
    pub fn rounding_error(&self, k: Component) -> (f64, f64) {
        let (c, s) = exact_phasor(k as u32, self.modulus.r());
        (self.cos(k).to_f64() - c, self.sin(k).to_f64() - s)
    }
}

/// Rounds half away from zero.
#[inline]
pub(crate) fn round_half_away(x: f64) -> i64 {
    x.round() as i64
}

/// Nearest ring element to the phase of `(re, im)`, computed with `atan2`.
pub fn phase_to_component(re: f64, im: f64, modulus: Modulus) -> Component {
    let mut angle = im.atan2(re);
    if angle < 0.0 {
        angle += TAU;
    }
    let k = round_half_away(modulus.r() as f64 / TAU * angle);
    modulus.reduce(k)
}

/// Rounded mean of the raw integer components, for resultants with no phase.
pub fn mean_fallback(intsum: i64, count: u32, modulus: Modulus) -> Component {
    modulus.reduce(round_half_away(intsum as f64 / count as f64))
}

#[inline]
fn below_epsilon<S: AccumScalar>(re: S, im: S) -> bool {
    let eps = S::zero_epsilon();
    re.abs() < eps && im.abs() < eps
}

/// Reference normalization of one accumulated component.
pub fn normalize_component_reference<S: AccumScalar>(
    re: S,
    im: S,
    intsum: i64,
    count: u32,
    modulus: Modulus,
) -> Component {
    if below_epsilon(re, im) {
        mean_fallback(intsum, count, modulus)
    } else {
        phase_to_component(re.to_f64(), im.to_f64(), modulus)
    }
}

/// Winner-take-all choice among the `r/4 + 1` directions of the quadrant
/// given by the sign bits of `(re, im)`. Equal inner products go to the
/// numerically lowest `k`.
pub fn wta_select<S: AccumScalar>(lut: &TrigLut<S>, re: S, im: S) -> Component {
    let r = lut.modulus().r();
    debug_assert!(r.is_multiple_of(4));
    let quarter = r / 4;
    let quadrant = match (re.is_sign_negative(), im.is_sign_negative()) {
        (false, false) => 0,
        (true, false) => 1,
        (true, true) => 2,
        (false, true) => 3,
    };
    let first = quadrant * quarter;
    let mut best_k = (first % r) as Component;
    let mut best = lut.inner_product(best_k, re, im);
    for j in 1..=quarter {
        let k = ((first + j) % r) as Component;
        let ip = lut.inner_product(k, re, im);
        if ip > best || (ip == best && k < best_k) {
            best = ip;
            best_k = k;
        }
    }
    best_k
}

/// WTA normalization of one accumulated component, with the same zero
/// fallback as the reference path.
pub fn normalize_component_wta<S: AccumScalar>(
    lut: &TrigLut<S>,
    re: S,
    im: S,
    intsum: i64,
    count: u32,
) -> Component {
    if below_epsilon(re, im) {
        mean_fallback(intsum, count, lut.modulus())
    } else {
        wta_select(lut, re, im)
    }
}

/// Running Cartesian sum of phasor-mapped hypervectors, plus the integer sum
/// of raw components and the operand count.
#[derive(Clone, Debug)]
pub struct CartesianAccumulator<S> {
    lut: TrigLut<S>,
    dim: usize,
    re: Vec<S>,
    im: Vec<S>,
    intsum: Vec<i64>,
    count: u32,
    saturations: u64,
}

impl<S: AccumScalar> CartesianAccumulator<S> {
    pub fn new(modulus: Modulus, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        Ok(CartesianAccumulator {
            lut: TrigLut::new(modulus),
            dim,
            re: vec![S::zero(); dim],
            im: vec![S::zero(); dim],
            intsum: vec![0; dim],
            count: 0,
            saturations: 0,
        })
    }

    /// Accumulator state given directly, e.g. read back from hardware.
    pub fn from_parts(
        modulus: Modulus,
        re: Vec<S>,
        im: Vec<S>,
        intsum: Vec<i64>,
        count: u32,
    ) -> Result<Self> {
        let dim = re.len();
        if dim == 0 || im.len() != dim || intsum.len() != dim {
            return Err(Error::invalid("accumulator parts must be nonempty and equally long"));
        }
        Ok(CartesianAccumulator {
            lut: TrigLut::new(modulus),
            dim,
            re,
            im,
            intsum,
            count,
            saturations: 0,
        })
    }

    pub fn modulus(&self) -> Modulus {
        self.lut.modulus()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of hypervectors accumulated since construction or reset.
    pub fn count(&self) -> u32 {
        self.count
    }

    /// Component additions that had to be clamped.
    pub fn saturations(&self) -> u64 {
        self.saturations
    }

    pub fn re(&self) -> &[S] {
        &self.re
    }

    pub fn im(&self) -> &[S] {
        &self.im
    }

    pub fn intsum(&self) -> &[i64] {
        &self.intsum
    }

    pub fn lut(&self) -> &TrigLut<S> {
        &self.lut
    }

    pub fn reset(&mut self) {
        self.re.fill(S::zero());
        self.im.fill(S::zero());
        self.intsum.fill(0);
        self.count = 0;
        self.saturations = 0;
    }

    pub fn accumulate(&mut self, h: &Hypervector) -> Result<()> {
        if h.modulus() != self.modulus() || h.dim() != self.dim {
            return Err(Error::invalid(format!(
                "cannot accumulate ({:?}, D={}) into ({:?}, D={})",
                h.modulus(),
                h.dim(),
                self.modulus(),
                self.dim
            )));
        }
        for (i, c) in h.iter().enumerate() {
            self.add_component(i, c);
        }
        self.count += 1;
        Ok(())
    }

    /// Accumulates an unpacked hypervector.
    pub fn accumulate_components(&mut self, comps: &[Component]) -> Result<()> {
        let r = self.modulus().r();
        if comps.len() != self.dim || comps.iter().any(|&c| c as u32 >= r) {
            return Err(Error::invalid("components do not match the accumulator domain"));
        }
        for (i, &c) in comps.iter().enumerate() {
            self.add_component(i, c);
        }
        self.count += 1;
        Ok(())
    }

    #[inline]
    fn add_component(&mut self, i: usize, c: Component) {
        let (re, sat_re) = self.re[i].saturating_add(self.lut.cos(c));
        let (im, sat_im) = self.im[i].saturating_add(self.lut.sin(c));
        self.re[i] = re;
        self.im[i] = im;
        self.saturations += sat_re as u64 + sat_im as u64;
        self.intsum[i] += c as i64;
    }

    fn require_nonempty(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidState("normalizing an empty accumulator".into()));
        }
        Ok(())
    }

    /// Normalization through floating-point `atan2`.
    pub fn normalize_reference(&self) -> Result<Hypervector> {
        self.require_nonempty()?;
        let m = self.modulus();
        let comps: Vec<Component> = (0..self.dim)
            .map(|i| normalize_component_reference(self.re[i], self.im[i], self.intsum[i], self.count, m))
            .collect();
        Hypervector::from_components(m, &comps)
    }

    /// Winner-take-all normalization; needs a power-of-two `r >= 4`.
    pub fn normalize_wta(&self) -> Result<Hypervector> {
        self.require_nonempty()?;
        let m = self.modulus();
        if !m.is_power_of_two() || m.r() < 4 {
            return Err(Error::Unsupported(format!(
                "WTA normalization needs a power-of-two modulus of at least 4, got r={}",
                m.r()
            )));
        }
        let comps: Vec<Component> = (0..self.dim)
            .map(|i| normalize_component_wta(&self.lut, self.re[i], self.im[i], self.intsum[i], self.count))
            .collect();
        Hypervector::from_components(m, &comps)
    }

    pub fn normalize_with(&self, path: ArithmeticPath) -> Result<Hypervector> {
        match path {
            ArithmeticPath::Packed => self.normalize_wta(),
            ArithmeticPath::Reference => self.normalize_reference(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Fixed;

    type Q6_10 = Fixed<16, 10>;

    fn md(r: u32) -> Modulus {
        Modulus::new(r).unwrap()
    }

    fn acc_of<S: AccumScalar>(r: u32, vectors: &[&[Component]]) -> CartesianAccumulator<S> {
        let mut acc = CartesianAccumulator::new(md(r), vectors[0].len()).unwrap();
        for v in vectors {
            acc.accumulate_components(v).unwrap();
        }
        acc
    }

    #[test]
    fn lut_axes_are_exact() {
        let lut = TrigLut::<Q6_10>::new(md(16));
        assert_eq!(lut.len(), 16);
        assert_eq!(lut.cos(0).raw(), 1024);
        assert_eq!(lut.sin(0).raw(), 0);
        assert_eq!(lut.cos(4).raw(), 0);
        assert_eq!(lut.sin(4).raw(), 1024);
        assert_eq!(lut.cos(8).raw(), -1024);
        assert_eq!(lut.cos(2).raw(), lut.sin(2).raw());
        let flut = TrigLut::<f64>::new(md(4));
        assert_eq!(flut.cos(1), 0.0);
        assert!(!flut.cos(1).is_sign_negative());
        assert_eq!(flut.sin(2), 0.0);
    }

    #[test]
    fn lut_matches_rounded_trig() {
        for r in [3u32, 4, 6, 8, 16, 64] {
            let lut = TrigLut::<Q6_10>::new(md(r));
            for k in 0..r {
                let a = TAU * k as f64 / r as f64;
                assert!((lut.cos(k as Component).to_f64() - a.cos()).abs() <= 0.5 / 1024.0 + 1e-12);
                assert!((lut.sin(k as Component).to_f64() - a.sin()).abs() <= 0.5 / 1024.0 + 1e-12);
            }
        }
    }

    #[test]
    fn linear_accumulation() {
        let acc = acc_of::<Q6_10>(16, &[&[3], &[3]]);
        let lut = acc.lut();
        assert_eq!(acc.re()[0].raw(), 2 * lut.cos(3).raw());
        assert_eq!(acc.im()[0].raw(), 2 * lut.sin(3).raw());
        assert_eq!(acc.count(), 2);
    }

    #[test]
    fn antipodal_pair_cancels() {
        let acc = acc_of::<Q6_10>(16, &[&[2], &[10]]);
        assert_eq!(acc.re()[0].raw(), 0);
        assert_eq!(acc.im()[0].raw(), 0);
        assert_eq!(acc.intsum()[0], 12);
        assert_eq!(acc.count(), 2);
        // Integer-mean fallback: round((2 + 10) / 2) = 6
        assert_eq!(acc.normalize_reference().unwrap().get(0), 6);
        assert_eq!(acc.normalize_wta().unwrap().get(0), 6);
    }

    #[test]
    fn quarter_turn_sum_is_exact() {
        let acc = acc_of::<Q6_10>(4, &[&[0], &[1]]);
        assert_eq!(acc.re()[0].to_f64(), 1.0);
        assert_eq!(acc.im()[0].to_f64(), 1.0);
    }

    #[test]
    fn single_operand_is_identity() {
        let comps: Vec<Component> = (0..16).collect();
        let acc = acc_of::<Q6_10>(16, &[&comps]);
        assert_eq!(acc.normalize_reference().unwrap().components(), comps);
        assert_eq!(acc.normalize_wta().unwrap().components(), comps);
        let facc = acc_of::<f64>(16, &[&comps]);
        assert_eq!(facc.normalize_reference().unwrap().components(), comps);
        assert_eq!(facc.normalize_wta().unwrap().components(), comps);
    }

    #[test]
    fn midpoint_of_two_phases() {
        let acc = acc_of::<Q6_10>(16, &[&[0], &[4]]);
        assert_eq!(acc.normalize_reference().unwrap().get(0), 2);
        assert_eq!(acc.normalize_wta().unwrap().get(0), 2);
    }

    #[test]
    fn wta_axis_and_diagonal() {
        let lut = TrigLut::<f64>::new(md(16));
        assert_eq!(wta_select(&lut, 1.0, 0.0), 0);
        assert_eq!(wta_select(&lut, 0.7, 0.7), 2);
        assert_eq!(wta_select(&lut, -0.7, -0.7), 10);
        assert_eq!(wta_select(&lut, 0.7, -0.7), 14);
        assert_eq!(wta_select(&lut, 0.999, -0.001), 0);
    }

    #[test]
    fn wta_tie_goes_to_lowest_k() {
        // (1, 1) sits exactly between directions 0 and 1 of Z_4
        let lut = TrigLut::<Q6_10>::new(md(4));
        let one = Q6_10::from_f64(1.0);
        assert_eq!(wta_select(&lut, one, one), 0);
        // reference rounding sends the half step up
        assert_eq!(phase_to_component(1.0, 1.0, md(4)), 1);
    }

    #[test]
    fn empty_and_unsupported() {
        let acc = CartesianAccumulator::<f64>::new(md(16), 4).unwrap();
        assert!(matches!(acc.normalize_reference(), Err(Error::InvalidState(_))));
        let acc = acc_of::<f64>(2, &[&[1]]);
        assert!(matches!(acc.normalize_wta(), Err(Error::Unsupported(_))));
        assert_eq!(acc.normalize_reference().unwrap().get(0), 1);
        let acc = acc_of::<f64>(12, &[&[1]]);
        assert!(matches!(acc.normalize_wta(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn saturation_is_counted() {
        let v: &[Component] = &[0];
        let many: Vec<&[Component]> = vec![v; 40];
        let acc = acc_of::<Q6_10>(16, &many);
        assert_eq!(acc.re()[0].raw(), Q6_10::MAX_RAW);
        assert_eq!(acc.saturations(), 40 - 31);
        assert_eq!(acc.normalize_wta().unwrap().get(0), 0);
    }
}
