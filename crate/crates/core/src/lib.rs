//! Classification of genuine vs. posed emotional stimuli from observers'
//! pupillary time series.
//!
//! The crate provides the full pipeline: variable-length two-eye diameter
//! recordings (loaded from CSV or synthesized), zero padding to a fixed
//! feature length, a one-hidden-layer baseline classifier and a two-stream
//! fused variant trained with full-batch Adam, confusion-matrix metrics, and
//! a tournament-based genetic algorithm that selects feature positions by
//! validation accuracy.
//!
//! All numerical code is generic over the floating-point type through
//! [`Scalar`]; concrete `f64`/`f32` aliases live at the crate root. Every
//! operation is a deterministic function of its inputs and seeds.

pub mod data;
pub mod error;
pub mod experiment;
pub mod ga;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod scalar;
pub(crate) mod seeds;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Fixed width every feature vector is padded to.
pub const FEATURE_LEN: usize = 186;
/// Shortest raw recording accepted.
pub const MIN_SEQ_LEN: usize = 60;
/// Longest raw recording accepted (equals [`FEATURE_LEN`]).
pub const MAX_SEQ_LEN: usize = 186;
/// Recording rate of the eye tracker, in Hz.
pub const SAMPLING_RATE_HZ: u32 = 60;

pub type Dataset64 = data::Dataset<f64>;
pub type Dataset32 = data::Dataset<f32>;
pub type FeatureVector64 = data::FeatureVector<f64>;
pub type FeatureVector32 = data::FeatureVector<f32>;
pub type ModelParams64 = model::ModelParams<f64>;
pub type ModelParams32 = model::ModelParams<f32>;
pub type StreamInput64 = model::input::StreamInput<f64>;
pub type StreamInput32 = model::input::StreamInput<f32>;
