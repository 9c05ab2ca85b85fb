//! Modular Composite Representation (MCR) hypervectors over `Z_r`, with
//! baseline vector-symbolic models, a sequence capacity harness, a
//! thermometer-encoded LVQ classifier, and an accelerator latency model.
//!
//! Arithmetic is generic over the accumulator scalar ([`AccumScalar`]):
//! `f32`/`f64`, or saturating fixed point ([`Fixed`]). Concrete aliases for the
//! common choices live at the crate root.

pub mod capacity;
pub mod classifier;
pub mod error;
pub mod io;
pub mod latency;
pub mod mcr;
pub mod microbench;
pub mod models;
pub mod ring;
pub mod rng;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use models::{GenericHv, ModelDescriptor, ModelKind};
pub use mcr::{search, search_with, ArithmeticPath, CartesianAccumulator, TrigLut};
pub use ring::{Component, Hypervector, Modulus};
pub use rng::RandomSource;
pub use scalar::{AccumScalar, Fixed};

/// Signed 16-bit fixed point with 10 fractional bits, as in narrow hardware
/// accumulators.
pub type Q6_10 = Fixed<16, 10>;
/// 32-bit fixed point with 10 fractional bits; headroom for wide bundles.
pub type Q22_10 = Fixed<32, 10>;

pub type FixedAccumulator = CartesianAccumulator<Q6_10>;
pub type FloatAccumulator = CartesianAccumulator<f64>;
pub type FixedTrigLut = TrigLut<Q6_10>;
