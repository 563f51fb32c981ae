//! Decoders: exact MWPM, class-constrained minimum weights, the
//! complementary gap and maximum-likelihood class decisions.

pub mod blossom;
mod mwpm;
pub mod trellis;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::noise::{ErrorPattern, NoiseModel, Syndrome};

pub use blossom::max_weight_matching;
pub use mwpm::decode_mwpm;
pub use trellis::{MinPlus, Semiring, SumProduct, SweepResult, Trellis};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LogicalClass {
    I,
    X,
}

impl LogicalClass {
    pub const ALL: [LogicalClass; 2] = [LogicalClass::I, LogicalClass::X];

    pub fn index(self) -> usize {
        match self {
            LogicalClass::I => 0,
            LogicalClass::X => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            LogicalClass::I
        } else {
            LogicalClass::X
        }
    }

    pub fn other(self) -> Self {
        match self {
            LogicalClass::I => LogicalClass::X,
            LogicalClass::X => LogicalClass::I,
        }
    }
}

impl fmt::Display for LogicalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogicalClass::I => "I",
            LogicalClass::X => "X",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    pub correction: ErrorPattern,
    pub weight: u32,
    pub class: LogicalClass,
}

/// Exact minimum weight over patterns with syndrome `s` and class `l`.
/// `u32::MAX` means no such pattern exists.
pub fn min_weight_in_class(trellis: &Trellis, s: &Syndrome, l: LogicalClass) -> Result<u32> {
    Ok(trellis.class_min_weights(s)?[l.index()])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    pub delta: u32,
    pub best: LogicalClass,
    pub weights: [u32; 2],
}

/// Weight difference between the lightest pattern in the other class and the
/// lightest overall. Equal minima give Δ = 0 with best = I.
pub fn complementary_gap(trellis: &Trellis, s: &Syndrome) -> Result<Gap> {
    let w = trellis.class_min_weights(s)?;
    let best = if w[1] < w[0] { LogicalClass::X } else { LogicalClass::I };
    let delta = w[best.other().index()].saturating_sub(w[best.index()]);
    Ok(Gap { delta, best, weights: w })
}

/// Class of maximal coset probability; exact ties go to I.
pub fn decode_mld(trellis: &Trellis, noise: &NoiseModel, s: &Syndrome) -> Result<LogicalClass> {
    let r = trellis.coset_weights(noise.p(), s)?;
    Ok(if r.values[1] > r.values[0] { LogicalClass::X } else { LogicalClass::I })
}
