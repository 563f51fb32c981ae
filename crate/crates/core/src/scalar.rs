//! Scalar abstractions.
//!
//! Combinatorial routines (enumeration, sum-product trellis, Good's power
//! estimator) only need field arithmetic and run on [`Probability`], which
//! includes exact rationals. Anything touching logarithms or powers with a
//! real exponent needs [`Real`].

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

pub trait Probability: Clone + Debug + PartialOrd + Num + FromPrimitive + ToPrimitive + Send + Sync + 'static {
    /// Rescales `values` in place so their magnitude stays representable and
    /// returns the natural log of the factor that was divided out. Exact
    /// types never need this and return 0.
    fn rescale(_values: &mut [Self]) -> f64 {
        0.0
    }

    /// Exact conversion from a (numerator, denominator) pair.
    fn ratio(num: u64, den: u64) -> Self {
        Self::from_u64(num).expect("u64 fits") / Self::from_u64(den).expect("u64 fits")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

pub trait Real: Probability + Float + std::iter::Sum + Copy {}

macro_rules! float_probability {
    ($t:ty) => {
        impl Probability for $t {
            fn rescale(values: &mut [Self]) -> f64 {
                let max = values.iter().copied().fold(0.0, <$t>::max);
                if max <= 0.0 || !max.is_finite() {
                    return 0.0;
                }
                let inv = 1.0 / max;
                for v in values.iter_mut() {
                    *v *= inv;
                }
                (max as f64).ln()
            }
        }
        impl Real for $t {}
    };
}

float_probability!(f32);
float_probability!(f64);

impl Probability for BigRational {
    fn ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

/// Compensated (Kahan–Babuška) summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum<T> {
    sum: T,
    comp: T,
}

impl<T: Float> KahanSum<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), comp: T::zero() }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

/// Running sum of `exp(ln_x)` terms kept relative to the largest exponent seen.
#[derive(Clone, Copy, Debug)]
pub struct LogSum {
    max: f64,
    acc: KahanSum<f64>,
}

impl Default for LogSum {
    fn default() -> Self {
        Self { max: f64::NEG_INFINITY, acc: KahanSum::new() }
    }
}

impl LogSum {
    pub fn add_ln(&mut self, ln_x: f64) {
        if ln_x == f64::NEG_INFINITY {
            return;
        }
        if ln_x > self.max {
            let shift = (self.max - ln_x).exp();
            let old = self.acc.value() * shift;
            self.acc = KahanSum::new();
            self.acc.add(old);
            self.max = ln_x;
        }
        self.acc.add((ln_x - self.max).exp());
    }

    pub fn ln_value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.acc.value().ln()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_beats_naive_on_cancellation() {
        let mut k = KahanSum::new();
        k.add(1.0e16);
        for _ in 0..10 {
            k.add(1.0);
        }
        k.add(-1.0e16);
        assert_eq!(k.value(), 10.0);
    }

    #[test]
    fn logsum_matches_direct() {
        let xs = [1e-300f64, 3e-301, 2e-299];
        let mut s = LogSum::default();
        for x in xs {
            s.add_ln(x.ln());
        }
        let direct: f64 = xs.iter().sum();
        assert!((s.ln_value() - direct.ln()).abs() < 1e-12);
    }

    #[test]
    fn rational_ratio_is_exact() {
        let r = BigRational::ratio(1, 10);
        assert_eq!(r * BigRational::from_u64(10).unwrap(), BigRational::from_u64(1).unwrap());
    }

    #[test]
    fn float_rescale_returns_log_factor() {
        let mut v = [2.0f64, 4.0];
        let ln = f64::rescale(&mut v);
        assert_eq!(v, [0.5, 1.0]);
        assert!((ln - 4.0f64.ln()).abs() < 1e-15);
    }
}
