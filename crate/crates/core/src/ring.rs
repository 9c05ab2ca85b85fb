//! The modular component domain Z_r and bit-packed hypervector storage.
//!
//! A hypervector of dimension `D` over `Z_r` stores each component in
//! `b = ceil(log2 r)` bits. Components are laid out in index order as one
//! contiguous little-endian bit stream: component `i` occupies stream bits
//! `[i*b, i*b + b)`, and stream bit `j` is bit `j % 64` of word `j / 64`.
//! Unused bits of the final word are always zero.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// One unpacked component value in `[0, r)`.
pub type Component = u16;

/// The modulus `r` of the component ring together with its storage width.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Modulus {
    r: u32,
    bits: u32,
}

impl Modulus {
    /// Largest supported modulus.
    pub const MAX: u32 = 1 << 16;

    pub fn new(r: u32) -> Result<Self> {
        if !(2..=Self::MAX).contains(&r) {
            return Err(Error::invalid(format!(
                "modulus must lie in [2, {}], got {r}",
                Self::MAX
            )));
        }
        let bits = u32::BITS - (r - 1).leading_zeros();
        Ok(Modulus { r, bits })
    }

    pub fn r(self) -> u32 {
        self.r
    }

    /// Bits per stored component, `ceil(log2 r)`.
    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn is_power_of_two(self) -> bool {
        self.r == 1 << self.bits
    }

    /// Low-`b`-bit mask of one component.
    pub fn mask(self) -> u64 {
        (1u64 << self.bits) - 1
    }

    /// `x mod r` in `[0, r)`. Power-of-two moduli use the overflow path.
    #[inline]
    pub fn reduce(self, x: i64) -> Component {
        if self.is_power_of_two() {
            self.reduce_overflow(x)
        } else {
            self.reduce_division(x)
        }
    }

    /// Reduction by keeping the low `b` bits of the two's-complement value,
    /// which is what a `b`-bit register does on overflow. Only meaningful for
    /// power-of-two moduli.
    #[inline]
    pub fn reduce_overflow(self, x: i64) -> Component {
        debug_assert!(self.is_power_of_two());
        (x as u64 & self.mask()) as Component
    }

    /// Reduction through integer division (Euclidean remainder).
    #[inline]
    pub fn reduce_division(self, x: i64) -> Component {
        x.rem_euclid(self.r as i64) as Component
    }

    /// Shorter way around the ring between two components.
    #[inline]
    pub fn circular_distance(self, a: Component, b: Component) -> u32 {
        let d = self.reduce(a as i64 - b as i64) as u32;
        d.min(self.r - d)
    }
}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z_{}", self.r)
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.r)
    }
}

impl TryFrom<u32> for Modulus {
    type Error = Error;

    fn try_from(r: u32) -> Result<Self> {
        Modulus::new(r)
    }
}

impl From<Modulus> for u32 {
    fn from(m: Modulus) -> u32 {
        m.r
    }
}

/// `x mod r`, bit-identical between the overflow and division paths.
pub fn mod_reduce(x: i64, modulus: Modulus) -> Component {
    modulus.reduce(x)
}

/// Payload bytes needed for `dim` components, `ceil(dim * b / 8)`.
pub fn payload_len(modulus: Modulus, dim: usize) -> usize {
    (dim * modulus.bits() as usize).div_ceil(8)
}

fn word_len(modulus: Modulus, dim: usize) -> usize {
    (dim * modulus.bits() as usize).div_ceil(64)
}

/// Packs components into the little-endian payload byte stream.
pub fn pack(modulus: Modulus, components: &[Component]) -> Result<Vec<u8>> {
    Ok(Hypervector::from_components(modulus, components)?.to_payload())
}

/// Inverse of [`pack`].
pub fn unpack(modulus: Modulus, dim: usize, payload: &[u8]) -> Result<Vec<Component>> {
    Ok(Hypervector::from_payload(modulus, dim, payload)?.components())
}

/// A dense hypervector over `Z_r`, bit-packed at `ceil(log2 r)` bits per
/// component. Immutable once built.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Hypervector {
    modulus: Modulus,
    dim: usize,
    words: Vec<u64>,
}

impl Hypervector {
    /// The all-zero vector (binding identity).
    pub fn zeros(modulus: Modulus, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        Ok(Hypervector {
            modulus,
            dim,
            words: vec![0; word_len(modulus, dim)],
        })
    }

    pub fn from_components(modulus: Modulus, components: &[Component]) -> Result<Self> {
        let mut hv = Self::zeros(modulus, components.len())?;
        for (i, &c) in components.iter().enumerate() {
            if c as u32 >= modulus.r() {
                return Err(Error::invalid(format!(
                    "component {i} = {c} is outside Z_{}",
                    modulus.r()
                )));
            }
            hv.set(i, c);
        }
        Ok(hv)
    }

    /// Builds a vector from arbitrary integers, reducing each modulo `r`.
    pub fn from_integers(modulus: Modulus, values: &[i64]) -> Result<Self> {
        let comps: Vec<Component> = values.iter().map(|&v| modulus.reduce(v)).collect();
        Self::from_components(modulus, &comps)
    }

    /// Components i.i.d. uniform over `Z_r`.
    pub fn random(modulus: Modulus, dim: usize, rng: &mut RandomSource) -> Result<Self> {
        let mut hv = Self::zeros(modulus, dim)?;
        for i in 0..dim {
            let c = rng.below(modulus.r()) as Component;
            hv.set(i, c);
        }
        Ok(hv)
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn from_words(modulus: Modulus, dim: usize, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), word_len(modulus, dim));
        Hypervector { modulus, dim, words }
    }

    #[inline]
    pub fn get(&self, i: usize) -> Component {
        assert!(i < self.dim, "component index {i} out of range");
        let b = self.modulus.bits() as usize;
        let bit = i * b;
        let (w, s) = (bit / 64, bit % 64);
        let mut v = self.words[w] >> s;
        if s + b > 64 {
            v |= self.words[w + 1] << (64 - s);
        }
        (v & self.modulus.mask()) as Component
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, value: Component) {
        let b = self.modulus.bits() as usize;
        let mask = self.modulus.mask();
        let v = value as u64 & mask;
        let bit = i * b;
        let (w, s) = (bit / 64, bit % 64);
        self.words[w] = (self.words[w] & !(mask << s)) | (v << s);
        if s + b > 64 {
            let spill = s + b - 64;
            let hi_mask = (1u64 << spill) - 1;
            self.words[w + 1] = (self.words[w + 1] & !hi_mask) | (v >> (64 - s));
        }
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = Component> + '_ {
        (0..self.dim).map(move |i| self.get(i))
    }

    /// Unpacked components in index order.
    pub fn components(&self) -> Vec<Component> {
        self.iter().collect()
    }

    /// Size of the packed payload in bytes.
    pub fn payload_len(&self) -> usize {
        payload_len(self.modulus, self.dim)
    }

    pub fn to_payload(&self) -> Vec<u8> {
        let mut bytes: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        bytes.truncate(self.payload_len());
        bytes
    }

    pub fn from_payload(modulus: Modulus, dim: usize, payload: &[u8]) -> Result<Self> {
        let expected = payload_len(modulus, dim);
        if payload.len() != expected {
            return Err(Error::Format(format!(
                "payload has {} bytes, expected {expected}",
                payload.len()
            )));
        }
        let mut words = vec![0u64; word_len(modulus, dim)];
        for (k, chunk) in payload.chunks(8).enumerate() {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            words[k] = u64::from_le_bytes(buf);
        }
        let used = dim * modulus.bits() as usize;
        if !used.is_multiple_of(64) {
            let last = words.len() - 1;
            if words[last] >> (used % 64) != 0 {
                return Err(Error::Format("nonzero padding bits in payload".into()));
            }
        }
        let hv = Hypervector { modulus, dim, words };
        if !modulus.is_power_of_two() {
            if let Some((i, c)) = hv.iter().enumerate().find(|&(_, c)| c as u32 >= modulus.r()) {
                return Err(Error::Format(format!(
                    "component {i} = {c} is outside Z_{}",
                    modulus.r()
                )));
            }
        }
        Ok(hv)
    }

    pub(crate) fn check_compatible(&self, other: &Hypervector) -> Result<()> {
        if self.modulus != other.modulus || self.dim != other.dim {
            return Err(Error::invalid(format!(
                "operand mismatch: ({:?}, D={}) vs ({:?}, D={})",
                self.modulus, self.dim, other.modulus, other.dim
            )));
        }
        Ok(())
    }
}

impl fmt::Debug for Hypervector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOWN: usize = 16;
        let head: Vec<Component> = self.iter().take(SHOWN).collect();
        write!(f, "Hypervector({:?}, D={}, {:?}", self.modulus, self.dim, head)?;
        if self.dim > SHOWN {
            write!(f, "..")?;
        }
        write!(f, ")")
    }
}
