//! Prototype classifier for tabular data: thermometer-coded key-value
//! encoding, centroid plus LVQ2.1 training, nearest-prototype inference.

pub mod benchmark;
pub mod dataset;
pub mod encoder;
pub mod train;

pub use benchmark::{run_benchmark, BenchmarkConfig, BenchmarkResults, BenchmarkRow, ModelConfig};
pub use dataset::{Dataset, Manifest};
pub use encoder::{thermometer, Encoder, Quantizer};
pub use train::{train_prototypes, Classifier, PrototypeSet, TrainConfig};
