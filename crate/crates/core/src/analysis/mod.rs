//! Statistical post-processing.

mod bootstrap;
mod collapse;
mod crossing;

pub use bootstrap::{bootstrap_ci, percentile, BootstrapConfig, Interval};
pub use collapse::{scaling_collapse, CollapseConfig, ScalingFit, ScalingPoint};
pub use crossing::crossing_point;
