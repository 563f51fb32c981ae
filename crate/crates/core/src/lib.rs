//! Surface-code simulation under bit-flip noise with syndrome resampling.
//!
//! Codes and detection graphs live in [`code_model`] and [`graph`]; sampling
//! in [`noise`] and [`batch`]; exact matching and trellis decoders in
//! [`decoders`]; exact distributions in [`exact_dist`]; estimators in
//! [`resampling`] and [`postselect`]; fits in [`analysis`].
//!
//! Combinatorial code is generic over [`scalar::Probability`] (floats and
//! exact rationals); anything needing logarithms is generic over
//! [`scalar::Real`]. The aliases below fix the usual concrete choices.

pub mod analysis;
pub mod batch;
pub mod code_model;
pub mod decoders;
pub mod error;
pub mod exact_dist;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod noise;
pub mod postselect;
pub mod resampling;
pub mod scalar;

pub use error::{Error, Result};

use num_rational::BigRational;

pub type JointDistribution = exact_dist::JointDistribution<f64>;
pub type ExactJointDistribution = exact_dist::JointDistribution<BigRational>;
pub type PowerDistribution = exact_dist::PowerDistribution<f64>;
pub type EmpiricalPowerDistribution = resampling::EmpiricalPowerDistribution<noise::SyndromeKey, f64>;
pub type Estimate = resampling::Estimate<f64>;
pub type ScalingPoint = analysis::ScalingPoint<f64>;
pub type ScalingFit = analysis::ScalingFit<f64>;
