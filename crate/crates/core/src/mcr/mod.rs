//! MCR algebra: binding, unbinding, modular Manhattan distance,
//! permutations, nearest-prototype search, and complex-domain superposition
//! with its two normalization paths.

mod packed;
mod reference;
pub mod superpose;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{Component, Hypervector, Modulus};

pub use superpose::{
    normalize_component_reference, phase_to_component, wta_select, CartesianAccumulator, TrigLut,
};

/// Which arithmetic implements an operation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithmeticPath {
    /// Bit-packed lanes with implicit overflow, WTA normalization. Requires a
    /// power-of-two modulus.
    #[default]
    Packed,
    /// Explicit `mod r` on unpacked integers, floating-point atan2
    /// normalization. Works for every modulus.
    Reference,
}

impl ArithmeticPath {
    /// Packed when the modulus allows it, reference otherwise.
    pub fn preferred(modulus: Modulus) -> Self {
        if modulus.is_power_of_two() {
            ArithmeticPath::Packed
        } else {
            ArithmeticPath::Reference
        }
    }

    fn check(self, modulus: Modulus) -> Result<()> {
        if self == ArithmeticPath::Packed && !modulus.is_power_of_two() {
            return Err(Error::Unsupported(format!(
                "packed arithmetic needs a power-of-two modulus, got r={}",
                modulus.r()
            )));
        }
        Ok(())
    }
}

impl std::str::FromStr for ArithmeticPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "packed" | "fast" => Ok(ArithmeticPath::Packed),
            "reference" | "ref" => Ok(ArithmeticPath::Reference),
            _ => Err(Error::invalid(format!("unknown arithmetic path {s:?}"))),
        }
    }
}

impl Hypervector {
    /// Component-wise `mod_r(h_i + u_i)`.
    pub fn bind(&self, other: &Hypervector) -> Result<Hypervector> {
        self.bind_with(other, ArithmeticPath::preferred(self.modulus()))
    }

    pub fn bind_with(&self, other: &Hypervector, path: ArithmeticPath) -> Result<Hypervector> {
        self.check_compatible(other)?;
        path.check(self.modulus())?;
        Ok(match path {
            ArithmeticPath::Packed => packed::bind(self, other),
            ArithmeticPath::Reference => reference::bind(self, other),
        })
    }

    /// Component-wise `mod_r(c_i - u_i)`; exact inverse of [`bind`](Self::bind).
    pub fn unbind(&self, other: &Hypervector) -> Result<Hypervector> {
        self.unbind_with(other, ArithmeticPath::preferred(self.modulus()))
    }

    pub fn unbind_with(&self, other: &Hypervector, path: ArithmeticPath) -> Result<Hypervector> {
        self.check_compatible(other)?;
        path.check(self.modulus())?;
        Ok(match path {
            ArithmeticPath::Packed => packed::unbind(self, other),
            ArithmeticPath::Reference => reference::unbind(self, other),
        })
    }

    /// Modular Manhattan distance, in `[0, D * floor(r/2)]`.
    pub fn distance(&self, other: &Hypervector) -> Result<u64> {
        self.distance_with(other, ArithmeticPath::preferred(self.modulus()))
    }

    pub fn distance_with(&self, other: &Hypervector, path: ArithmeticPath) -> Result<u64> {
        self.check_compatible(other)?;
        path.check(self.modulus())?;
        Ok(match path {
            ArithmeticPath::Packed => packed::distance(self, other),
            ArithmeticPath::Reference => reference::distance(self, other),
        })
    }

    /// Cyclic shift: `out[i] = h[(i - shift) mod D]`.
    pub fn permute_cyclic(&self, shift: i64) -> Hypervector {
        let d = self.dim();
        let s = shift.rem_euclid(d as i64) as usize;
        if s == 0 {
            return self.clone();
        }
        let mut comps = self.components();
        comps.rotate_right(s);
        Hypervector::from_components(self.modulus(), &comps).expect("same domain")
    }

    /// Block-cyclic shift: block `j` of `block_size` components moves to
    /// block position `(j + shift) mod (D / block_size)`.
    pub fn permute_block(&self, block_size: usize, shift: i64) -> Result<Hypervector> {
        if block_size == 0 || !self.dim().is_multiple_of(block_size) {
            return Err(Error::invalid(format!(
                "block size {block_size} does not divide D={}",
                self.dim()
            )));
        }
        let blocks = (self.dim() / block_size) as i64;
        Ok(self.permute_cyclic(shift.rem_euclid(blocks) * block_size as i64))
    }
}

/// Index of the prototype nearest to `query`; ties go to the lowest index.
pub fn search(query: &Hypervector, prototypes: &[Hypervector]) -> Result<usize> {
    search_with(query, prototypes, ArithmeticPath::preferred(query.modulus()))
}

pub fn search_with(
    query: &Hypervector,
    prototypes: &[Hypervector],
    path: ArithmeticPath,
) -> Result<usize> {
    if prototypes.is_empty() {
        return Err(Error::invalid("search over an empty prototype set"));
    }
    let mut best = (u64::MAX, 0);
    for (k, p) in prototypes.iter().enumerate() {
        let d = query.distance_with(p, path)?;
        if d < best.0 {
            best = (d, k);
        }
    }
    Ok(best.1)
}

/// Component-wise circular distance, the summand of the modular Manhattan
/// distance.
pub fn component_distance(modulus: Modulus, a: Component, b: Component) -> u32 {
    modulus.circular_distance(a, b)
}
