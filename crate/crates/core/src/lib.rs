//! Sigmoid feed-forward pipeline for district-level rice area/production data.
//!
//! The pipeline converts six raw variables per district (area and production for
//! the Kuruvai, Samba and Kodai seasons) into sigmoid inputs, pushes them through a
//! 6-6-1 network with a constant bias, and scales the original record by the output
//! sigmoid. Training adds a fixed increment to every weight until the output
//! sigmoid of every district saturates to exactly `1.0`, at which point the
//! network reproduces its input bit-for-bit.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`). The `*64` aliases at
//! the crate root fix the scalar to `f64`, which is what the CLI and the shipped
//! fixture use.
//!
//! Modules:
//!
//! - [`dataset`]: CSV ingestion, validation and zero replacement.
//! - [`activation`]: the sigmoid and its finite-precision saturation point.
//! - [`network`]: one forward pass (input transform, hidden sum, output stage).
//! - [`trainer`]: the fixed-increment training loop, prediction and weight sweeps.
//! - [`report`]: frequency tables, error/zs curves, comparison tables and SVG plots.
//! - [`cli`]: the `ffbp` command-line tool.

pub mod activation;
pub mod cli;
pub mod dataset;
mod error;
pub mod network;
pub mod report;
mod scalar;
pub mod trainer;
pub mod weights_file;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type DistrictRecord64 = dataset::DistrictRecord<f64>;
pub type Dataset64 = dataset::Dataset<f64>;
pub type WeightState64 = network::WeightState<f64>;
pub type ForwardTrace64 = network::ForwardTrace<f64>;
pub type TrainConfig64 = trainer::TrainConfig<f64>;
pub type TrainReport64 = trainer::TrainReport<f64>;

pub type Dataset32 = dataset::Dataset<f32>;
pub type WeightState32 = network::WeightState<f32>;
pub type TrainConfig32 = trainer::TrainConfig<f32>;
pub type TrainReport32 = trainer::TrainReport<f32>;
