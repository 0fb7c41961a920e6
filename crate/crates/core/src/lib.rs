//! Analytics for diagnostic multiple-choice questions.
//!
//! The crate covers four problems over a sparse student × question answer
//! matrix: predicting whether a student answers correctly, predicting which
//! option they choose, ranking questions by quality against expert pairwise
//! judgments, and choosing questions adaptively for a new student. A seeded
//! 2PL simulator provides ground truth for all of them.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the common `f64` instantiations.

pub mod adaptive;
pub mod dataset;
pub mod error;
pub mod io;
pub mod predict;
pub mod quality;
pub mod scalar;
pub mod submission;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type IrtModel64 = predict::IrtModel<f64>;
pub type IrtModel32 = predict::IrtModel<f32>;
pub type MfModel64 = predict::MfModel<f64>;
pub type MfModel32 = predict::MfModel<f32>;
pub type MajorityModel64 = predict::MajorityModel<f64>;
pub type SvdFeatures64 = predict::SvdFeatures<f64>;
pub type Checkpoint64 = predict::Checkpoint<f64>;
pub type QualityFeatures64 = quality::QualityFeatures<f64>;
pub type IrtAbilityTracker64 = adaptive::IrtAbilityTracker<f64>;
