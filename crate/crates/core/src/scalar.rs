//! Scalar types usable as the Cartesian accumulator of MCR superposition.
//!
//! The same accumulation and normalization code runs over IEEE floats (the
//! full-precision software path) and over saturating two's-complement fixed
//! point (the hardware path, [`Fixed`]).

use std::fmt;
use std::ops::Add;

use num_traits::Float;

/// Accumulator scalar: a signed value that supports saturating addition and
/// exact widening products for the winner-take-all inner products.
pub trait AccumScalar: Copy + PartialOrd + fmt::Debug + Default + Send + Sync + 'static {
    /// Product type. Exact for fixed point, `Self` for floats.
    type Wide: Copy + PartialOrd + fmt::Debug + Add<Output = Self::Wide>;

    fn zero() -> Self;
    /// Nearest representable value, saturating at the range limits.
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    /// Returns the sum and whether it had to be clamped.
    fn saturating_add(self, rhs: Self) -> (Self, bool);
    fn widening_mul(self, rhs: Self) -> Self::Wide;
    fn is_sign_negative(self) -> bool;
    fn abs(self) -> Self;
    /// Magnitude below which a resultant is treated as having no phase.
    fn zero_epsilon() -> Self;
    /// Spacing of representable values near zero (0 for floats).
    fn resolution() -> f64;
}

/// Default zero-magnitude threshold for float accumulators, equal to the
/// threshold of the default Q6.10 format.
pub const FLOAT_ZERO_EPSILON: f64 = 1.0 / 256.0;

impl<F> AccumScalar for F
where
    F: Float + fmt::Debug + Default + Send + Sync + 'static,
{
    type Wide = F;

    fn zero() -> Self {
        F::zero()
    }

    fn from_f64(x: f64) -> Self {
        F::from(x).unwrap_or_else(F::nan)
    }

    fn to_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn saturating_add(self, rhs: Self) -> (Self, bool) {
        (self + rhs, false)
    }

    fn widening_mul(self, rhs: Self) -> F {
        self * rhs
    }

    fn is_sign_negative(self) -> bool {
        Float::is_sign_negative(self)
    }

    fn abs(self) -> Self {
        Float::abs(self)
    }

    fn zero_epsilon() -> Self {
        F::from(FLOAT_ZERO_EPSILON).unwrap()
    }

    fn resolution() -> f64 {
        0.0
    }
}

/// Saturating signed fixed point with `BITS` total bits (sign included) and
/// `FRAC` fraction bits, stored in an `i32`.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fixed<const BITS: u32, const FRAC: u32>(i32);

impl<const BITS: u32, const FRAC: u32> Fixed<BITS, FRAC> {
    const VALID: () = assert!(BITS >= 4 && BITS <= 32 && FRAC >= 2 && FRAC < BITS);

    pub const MIN_RAW: i32 = (-(1i64 << (BITS - 1))) as i32;
    pub const MAX_RAW: i32 = ((1i64 << (BITS - 1)) - 1) as i32;
    pub const ONE_RAW: i32 = 1 << FRAC;

    pub fn from_raw(raw: i32) -> Self {
        #[allow(clippy::let_unit_value)]
        let _ = Self::VALID;
        Fixed(raw.clamp(Self::MIN_RAW, Self::MAX_RAW))
    }

    pub fn raw(self) -> i32 {
        self.0
    }

    /// Largest representable magnitude as a real number.
    pub fn max_value() -> f64 {
        Self::MAX_RAW as f64 / Self::ONE_RAW as f64
    }
}

impl<const BITS: u32, const FRAC: u32> fmt::Debug for Fixed<BITS, FRAC> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(Q{}.{})", self.to_f64(), BITS - FRAC, FRAC)
    }
}

impl<const BITS: u32, const FRAC: u32> fmt::Display for Fixed<BITS, FRAC> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

impl<const BITS: u32, const FRAC: u32> AccumScalar for Fixed<BITS, FRAC> {
    type Wide = i64;

    fn zero() -> Self {
        Fixed(0)
    }

    fn from_f64(x: f64) -> Self {
        let scaled = (x * Self::ONE_RAW as f64).round();
        let clamped = scaled.clamp(Self::MIN_RAW as f64, Self::MAX_RAW as f64);
        Self::from_raw(clamped as i32)
    }

    fn to_f64(self) -> f64 {
        self.0 as f64 / Self::ONE_RAW as f64
    }

    fn saturating_add(self, rhs: Self) -> (Self, bool) {
        let sum = self.0 as i64 + rhs.0 as i64;
        if sum > Self::MAX_RAW as i64 {
            (Fixed(Self::MAX_RAW), true)
        } else if sum < Self::MIN_RAW as i64 {
            (Fixed(Self::MIN_RAW), true)
        } else {
            (Fixed(sum as i32), false)
        }
    }

    fn widening_mul(self, rhs: Self) -> i64 {
        self.0 as i64 * rhs.0 as i64
    }

    fn is_sign_negative(self) -> bool {
        self.0 < 0
    }

    fn abs(self) -> Self {
        Self::from_raw(self.0.saturating_abs())
    }

    /// `2^-(FRAC-2)`, i.e. four LSBs.
    fn zero_epsilon() -> Self {
        Fixed(4)
    }

    fn resolution() -> f64 {
        1.0 / Self::ONE_RAW as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Q6_10 = Fixed<16, 10>;

    #[test]
    fn fixed_round_trip_and_saturation() {
        assert_eq!(Q6_10::from_f64(1.0).raw(), 1024);
        assert_eq!(Q6_10::from_f64(-0.5).raw(), -512);
        assert_eq!(Q6_10::from_f64(100.0).raw(), Q6_10::MAX_RAW);
        assert_eq!(Q6_10::from_f64(-100.0).raw(), Q6_10::MIN_RAW);
        assert!((Q6_10::max_value() - 31.999).abs() < 1e-3);

        let (s, sat) = Q6_10::from_f64(31.0).saturating_add(Q6_10::from_f64(1.5));
        assert!(sat);
        assert_eq!(s.raw(), Q6_10::MAX_RAW);
        let (s, sat) = Q6_10::from_f64(3.0).saturating_add(Q6_10::from_f64(-1.25));
        assert!(!sat);
        assert_eq!(s.to_f64(), 1.75);
    }

    #[test]
    fn fixed_epsilon_is_a_few_lsbs() {
        assert_eq!(Q6_10::zero_epsilon().raw(), 4);
        assert_eq!(<f64 as AccumScalar>::zero_epsilon(), Q6_10::zero_epsilon().to_f64());
    }

    #[test]
    fn widening_products_are_exact() {
        let a = Q6_10::from_raw(Q6_10::MAX_RAW);
        assert_eq!(a.widening_mul(a), (Q6_10::MAX_RAW as i64).pow(2));
    }
}
