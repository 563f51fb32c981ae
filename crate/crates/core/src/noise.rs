//! Bit-flip noise, error patterns, syndromes and residual classes.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use crate::code_model::CodeSpec;
use crate::decoders::LogicalClass;
use crate::error::{Error, Result};

/// Independent X flips with probability `p` per qubit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    p: f64,
}

impl NoiseModel {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("flip probability {p} outside [0, 1]")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ErrorPattern {
    pub bits: Vec<bool>,
}

impl ErrorPattern {
    pub fn zeros(n: usize) -> Self {
        Self { bits: vec![false; n] }
    }

    pub fn from_support(n: usize, support: &[usize]) -> Self {
        let mut e = Self::zeros(n);
        for &q in support {
            e.bits[q] ^= true;
        }
        e
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn support(&self) -> Vec<usize> {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }

    pub fn xor(&self, other: &ErrorPattern) -> ErrorPattern {
        ErrorPattern { bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a ^ b).collect() }
    }
}

/// Packed little-endian syndrome bits: bit `j` lives in byte `j / 8` at
/// position `j % 8`. Width is `ceil(m / 8)` bytes, stored inline up to 128 checks.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SyndromeKey(SmallVec<[u8; 16]>);

impl SyndromeKey {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        Self(SmallVec::from_vec(bytes))
    }

    pub fn trivial(m: usize) -> Self {
        Self(smallvec::smallvec![0u8; m.div_ceil(8)])
    }

    pub fn bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn bit(&self, j: usize) -> bool {
        (self.0[j / 8] >> (j % 8)) & 1 == 1
    }

    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        hex::decode(s.trim()).map(Self::from_bytes).map_err(|e| Error::Format(format!("bad syndrome hex `{s}`: {e}")))
    }
}

impl fmt::Debug for SyndromeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SyndromeKey({})", self.to_hex())
    }
}

impl Serialize for SyndromeKey {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for SyndromeKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        SyndromeKey::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Syndrome {
    pub bits: Vec<bool>,
}

impl Syndrome {
    pub fn trivial(m: usize) -> Self {
        Self { bits: vec![false; m] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.bits.iter().all(|&b| !b)
    }

    pub fn defects(&self) -> Vec<usize> {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }

    pub fn key(&self) -> SyndromeKey {
        let mut bytes = vec![0u8; self.bits.len().div_ceil(8)];
        for (j, &b) in self.bits.iter().enumerate() {
            if b {
                bytes[j / 8] |= 1 << (j % 8);
            }
        }
        SyndromeKey::from_bytes(bytes)
    }

    /// Decodes a key of `m` checks; padding bits beyond `m` must be zero.
    pub fn from_key(key: &SyndromeKey, m: usize) -> Result<Self> {
        let width = m.div_ceil(8);
        if key.bytes().len() != width {
            return Err(Error::Dimension { expected: width, got: key.bytes().len() });
        }
        let bits: Vec<bool> = (0..m).map(|j| key.bit(j)).collect();
        if (m..width * 8).any(|j| key.bit(j)) {
            return Err(Error::Format(format!("syndrome {} sets bits beyond {m} checks", key.to_hex())));
        }
        Ok(Self { bits })
    }
}

pub fn sample_error<R: Rng + ?Sized>(code: &CodeSpec, noise: &NoiseModel, rng: &mut R) -> ErrorPattern {
    let p = noise.p();
    ErrorPattern { bits: (0..code.n).map(|_| rng.gen::<f64>() < p).collect() }
}

pub fn syndrome_of(code: &CodeSpec, e: &ErrorPattern) -> Result<Syndrome> {
    if e.len() != code.n {
        return Err(Error::Dimension { expected: code.n, got: e.len() });
    }
    Ok(Syndrome { bits: code.z_checks.iter().map(|check| check.iter().filter(|&&q| e.bits[q]).count() % 2 == 1).collect() })
}

/// Logical class of an X pattern relative to the identity: its overlap parity
/// with `z_logical`.
pub fn class_of(code: &CodeSpec, e: &ErrorPattern) -> LogicalClass {
    let odd = code.z_logical.iter().filter(|&&q| e.bits[q]).count() % 2 == 1;
    if odd {
        LogicalClass::X
    } else {
        LogicalClass::I
    }
}

pub fn residual_class(code: &CodeSpec, e: &ErrorPattern, correction: &ErrorPattern) -> Result<LogicalClass> {
    if correction.len() != code.n {
        return Err(Error::Dimension { expected: code.n, got: correction.len() });
    }
    let residual = syndrome_of(code, &e.xor(correction))?;
    if !residual.is_trivial() {
        return Err(Error::Contract(format!("correction leaves a nontrivial residual syndrome with {} defects", residual.defects().len())));
    }
    Ok(class_of(code, &e.xor(correction)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_model::{build_rotated, build_unrotated};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn extreme_probabilities() {
        let code = build_rotated(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = sample_error(&code, &NoiseModel::new(0.0).unwrap(), &mut rng);
        assert_eq!(e.weight(), 0);
        let e = sample_error(&code, &NoiseModel::new(1.0).unwrap(), &mut rng);
        assert_eq!(e.weight(), 9);
        assert!(NoiseModel::new(1.5).is_err());
    }

    #[test]
    fn mean_weight_matches_binomial() {
        let code = build_rotated(3).unwrap();
        let noise = NoiseModel::new(0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 1_000_000;
        let total: usize = (0..draws).map(|_| sample_error(&code, &noise, &mut rng).weight()).sum();
        let mean = total as f64 / draws as f64;
        let se = (9.0 * 0.1 * 0.9 / draws as f64).sqrt();
        assert!((mean - 0.9).abs() < 3.0 * se, "mean weight {mean}");
    }

    #[test]
    fn logical_and_zero_have_trivial_syndrome() {
        let code = build_unrotated(4).unwrap();
        assert!(syndrome_of(&code, &ErrorPattern::zeros(code.n)).unwrap().is_trivial());
        let l = ErrorPattern::from_support(code.n, &code.x_logical);
        assert!(syndrome_of(&code, &l).unwrap().is_trivial());
        assert_eq!(class_of(&code, &l), LogicalClass::X);
    }

    #[test]
    fn bulk_flip_gives_two_defects() {
        let code = build_unrotated(3).unwrap();
        let inc = code.z_incidence();
        let q = inc.iter().position(|c| c.len() == 2).unwrap();
        let s = syndrome_of(&code, &ErrorPattern::from_support(code.n, &[q])).unwrap();
        assert_eq!(s.defects(), inc[q]);
    }

    #[test]
    fn length_mismatch() {
        let code = build_rotated(3).unwrap();
        assert!(matches!(syndrome_of(&code, &ErrorPattern::zeros(4)), Err(Error::Dimension { .. })));
    }

    #[test]
    fn residual_classes() {
        let code = build_rotated(5).unwrap();
        let e = ErrorPattern::from_support(code.n, &[0, 7, 13]);
        assert_eq!(residual_class(&code, &e, &e).unwrap(), LogicalClass::I);
        let shifted = e.xor(&ErrorPattern::from_support(code.n, &code.x_logical));
        assert_eq!(residual_class(&code, &e, &shifted).unwrap(), LogicalClass::X);
        let bad = ErrorPattern::zeros(code.n);
        assert!(matches!(residual_class(&code, &e, &bad), Err(Error::Contract(_))));
    }

    #[test]
    fn key_roundtrip_and_padding() {
        let s = Syndrome { bits: vec![true, false, false, true, false, false, false, false, true, true] };
        let key = s.key();
        assert_eq!(key.bytes(), &[0b0000_1001, 0b0000_0011]);
        assert_eq!(key.to_hex(), "0903");
        assert_eq!(Syndrome::from_key(&key, 10).unwrap(), s);
        assert!(Syndrome::from_key(&SyndromeKey::from_hex("0907").unwrap(), 10).is_err());
    }

    fn stabilizer_element(code: &CodeSpec, mask: u64) -> ErrorPattern {
        let mut g = ErrorPattern::zeros(code.n);
        for (i, check) in code.x_checks.iter().enumerate() {
            if mask >> (i % 64) & 1 == 1 {
                g = g.xor(&ErrorPattern::from_support(code.n, check));
            }
        }
        g
    }

    #[test]
    fn stabilizers_exhaustively_invisible_d3() {
        let code = build_rotated(3).unwrap();
        for e_bits in 0u32..(1 << code.n) {
            let e = ErrorPattern { bits: (0..code.n).map(|q| e_bits >> q & 1 == 1).collect() };
            let s = syndrome_of(&code, &e).unwrap();
            for mask in 0..(1u64 << code.x_checks.len()) {
                let g = stabilizer_element(&code, mask);
                let eg = e.xor(&g);
                assert_eq!(syndrome_of(&code, &eg).unwrap(), s);
                assert_eq!(class_of(&code, &eg), class_of(&code, &e));
            }
        }
    }

    proptest! {
        #[test]
        fn stabilizers_leave_syndrome_and_class(d in 2usize..=6, rotated: bool, seed: u64, mask: u64) {
            let code = if rotated { build_rotated(d).unwrap() } else { build_unrotated(d).unwrap() };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e = sample_error(&code, &NoiseModel::new(0.3).unwrap(), &mut rng);
            let g = stabilizer_element(&code, mask);
            prop_assert_eq!(syndrome_of(&code, &e.xor(&g)).unwrap(), syndrome_of(&code, &e).unwrap());
            prop_assert_eq!(residual_class(&code, &e, &e.xor(&g)).unwrap(), LogicalClass::I);
        }

        #[test]
        fn key_encoding_roundtrip(bits in proptest::collection::vec(any::<bool>(), 1..80)) {
            let s = Syndrome { bits };
            let key = s.key();
            prop_assert_eq!(key.bytes().len(), s.len().div_ceil(8));
            prop_assert_eq!(Syndrome::from_key(&SyndromeKey::from_hex(&key.to_hex()).unwrap(), s.len()).unwrap(), s);
        }
    }
}
