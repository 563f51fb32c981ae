//! Exact syndrome/class distributions, power distributions, Rényi coherent
//! information and exact resampled failure rates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::code_model::CodeSpec;
use crate::decoders::{LogicalClass, SumProduct, Trellis};
use crate::error::{Error, Result};
use crate::noise::{NoiseModel, Syndrome, SyndromeKey};
use crate::scalar::{KahanSum, LogSum, Probability, Real};

/// Largest qubit count accepted by brute-force enumeration.
pub const ENUMERATION_MAX_QUBITS: usize = 26;
/// Largest check count for which a full joint table is materialised.
pub const JOINT_MAX_CHECKS: usize = 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    Enumeration,
    Trellis,
}

/// Exact table P(s, l), keyed by syndrome. Only syndromes with P(s) > 0 are
/// stored.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution<T> {
    pub code_id: String,
    pub p: T,
    pub num_checks: usize,
    pub construction: Construction,
    pub entries: BTreeMap<SyndromeKey, [T; 2]>,
}

impl<T: Probability> JointDistribution<T> {
    pub fn get(&self, key: &SyndromeKey) -> Option<&[T; 2]> {
        self.entries.get(key)
    }

    pub fn marginal(&self, key: &SyndromeKey) -> T {
        self.entries.get(key).map_or_else(T::zero, |v| v[0].clone() + v[1].clone())
    }

    /// P(l | s) for a supported syndrome.
    pub fn conditional(&self, key: &SyndromeKey) -> Option<[T; 2]> {
        let v = self.entries.get(key)?;
        let total = v[0].clone() + v[1].clone();
        Some([v[0].clone() / total.clone(), v[1].clone() / total])
    }

    pub fn total(&self) -> T {
        self.entries.values().fold(T::zero(), |acc, v| acc + v[0].clone() + v[1].clone())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Maximum-likelihood class per syndrome (ties go to I).
    pub fn mld_class(&self, key: &SyndromeKey) -> Option<LogicalClass> {
        self.entries.get(key).map(|v| if v[1] > v[0] { LogicalClass::X } else { LogicalClass::I })
    }

    pub fn to_f64(&self) -> JointDistribution<f64> {
        JointDistribution {
            code_id: self.code_id.clone(),
            p: self.p.to_f64_lossy(),
            num_checks: self.num_checks,
            construction: self.construction,
            entries: self.entries.iter().map(|(k, v)| (k.clone(), [v[0].to_f64_lossy(), v[1].to_f64_lossy()])).collect(),
        }
    }
}

/// Number of X patterns per (syndrome, class, weight), from a Gray-code walk
/// over all 2^n patterns. Independent of p, so one walk serves any p.
#[derive(Clone, Debug)]
pub struct WeightEnumerator {
    code_id: String,
    n: usize,
    m: usize,
    counts: Vec<u32>,
}

impl WeightEnumerator {
    pub fn new(code: &CodeSpec) -> Result<Self> {
        let (n, m) = (code.n, code.num_checks());
        if n > ENUMERATION_MAX_QUBITS {
            return Err(Error::Resource(format!("enumeration over 2^{n} patterns exceeds the 2^{ENUMERATION_MAX_QUBITS} budget")));
        }
        let cells = (2usize << m) * (n + 1);
        if m >= usize::BITS as usize - 8 || cells > 1 << 27 {
            return Err(Error::Resource(format!("enumeration table for {m} checks is too large")));
        }
        let mut check_mask = vec![0u64; n];
        for (j, check) in code.z_checks.iter().enumerate() {
            for &q in check {
                check_mask[q] ^= 1 << j;
            }
        }
        let mut logical = vec![0usize; n];
        for &q in &code.z_logical {
            logical[q] ^= 1;
        }
        let mut counts = vec![0u32; cells];
        let (mut syn, mut cls, mut weight, mut pattern) = (0u64, 0usize, 0usize, 0u64);
        counts[0] = 1;
        for i in 1u64..1 << n {
            let q = i.trailing_zeros() as usize;
            pattern ^= 1 << q;
            if pattern >> q & 1 == 1 {
                weight += 1;
            } else {
                weight -= 1;
            }
            syn ^= check_mask[q];
            cls ^= logical[q];
            counts[((syn as usize) * 2 + cls) * (n + 1) + weight] += 1;
        }
        Ok(Self { code_id: code.id(), n, m, counts })
    }

    pub fn count(&self, syndrome: u64, class: LogicalClass, weight: usize) -> u32 {
        self.counts[((syndrome as usize) * 2 + class.index()) * (self.n + 1) + weight]
    }

    pub fn joint<T: Probability>(&self, p: T) -> JointDistribution<T> {
        let q = T::one() - p.clone();
        let mut pw = Vec::with_capacity(self.n + 1);
        for w in 0..=self.n {
            let mut term = T::one();
            for _ in 0..w {
                term = term * p.clone();
            }
            for _ in w..self.n {
                term = term * q.clone();
            }
            pw.push(term);
        }
        let width = self.m.div_ceil(8);
        let mut entries = BTreeMap::new();
        for syn in 0..1usize << self.m {
            let mut v = [T::zero(), T::zero()];
            for (l, slot) in v.iter_mut().enumerate() {
                let base = (syn * 2 + l) * (self.n + 1);
                for (w, term) in pw.iter().enumerate() {
                    let c = self.counts[base + w];
                    if c > 0 {
                        *slot = slot.clone() + T::from_u32(c).expect("count fits") * term.clone();
                    }
                }
            }
            if !(v[0].is_zero() && v[1].is_zero()) {
                let key = SyndromeKey::from_bytes(syn.to_le_bytes()[..width].to_vec());
                entries.insert(key, v);
            }
        }
        JointDistribution { code_id: self.code_id.clone(), p, num_checks: self.m, construction: Construction::Enumeration, entries }
    }
}

/// Brute-force joint distribution over all 2^n X patterns.
pub fn enumerate_joint<T: Probability>(code: &CodeSpec, p: T) -> Result<JointDistribution<T>> {
    check_p(&p)?;
    Ok(WeightEnumerator::new(code)?.joint(p))
}

/// Joint distribution from the sum-product trellis, one sweep per syndrome
/// prefix.
pub fn trellis_joint<T: Probability>(code: &CodeSpec, trellis: &Trellis, p: T) -> Result<JointDistribution<T>> {
    check_p(&p)?;
    let m = code.num_checks();
    if m > JOINT_MAX_CHECKS {
        return Err(Error::Resource(format!("a joint table over 2^{m} syndromes exceeds the 2^{JOINT_MAX_CHECKS} budget")));
    }
    let mut entries = BTreeMap::new();
    let stay = T::one() - p.clone();
    trellis.for_each_syndrome(&SumProduct::<T>::default(), &stay, &p, |bits, v, ln| {
        let key = Syndrome { bits: bits.to_vec() }.key();
        let value = if ln == 0.0 {
            v.clone()
        } else {
            let f = T::from_f64(ln.exp()).expect("finite scale");
            [v[0].clone() * f.clone(), v[1].clone() * f]
        };
        entries.insert(key, value);
    });
    Ok(JointDistribution { code_id: code.id(), p, num_checks: m, construction: Construction::Trellis, entries })
}

/// Exact (P(s, I), P(s, X)) for one syndrome.
pub fn coset_probability<T: Probability>(trellis: &Trellis, p: T, s: &Syndrome) -> Result<[T; 2]> {
    check_p(&p)?;
    let r = trellis.coset_weights(p, s)?;
    if r.ln_scale == 0.0 {
        return Ok(r.values);
    }
    let f = T::from_f64(r.ln_scale.exp()).expect("finite scale");
    let [a, b] = r.values;
    Ok([a * f.clone(), b * f])
}

/// Noise-model convenience wrapper for double precision.
pub fn coset_probability_f64(trellis: &Trellis, noise: &NoiseModel, s: &Syndrome) -> Result<[f64; 2]> {
    coset_probability(trellis, noise.p(), s)
}

fn check_p<T: Probability>(p: &T) -> Result<()> {
    if *p < T::zero() || *p > T::one() {
        return Err(Error::Domain(format!("flip probability {p:?} outside [0, 1]")));
    }
    Ok(())
}

/// Q_α(s) = P^α(s) / Z_α with Z_α = Σ_s P^α(s).
#[derive(Clone, Debug, PartialEq)]
pub struct PowerDistribution<T> {
    pub alpha: f64,
    /// Z_α; may underflow for floats, `ln_normalizer` does not.
    pub normalizer: T,
    pub ln_normalizer: f64,
    pub q: BTreeMap<SyndromeKey, T>,
}

impl<T: Probability> PowerDistribution<T> {
    pub fn get(&self, key: &SyndromeKey) -> T {
        self.q.get(key).cloned().unwrap_or_else(T::zero)
    }
}

/// Power distribution for real α, accumulated in the log domain.
pub fn power_distribution<T: Real>(joint: &JointDistribution<T>, alpha: f64) -> Result<PowerDistribution<T>> {
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::Domain(format!("alpha must be nonnegative, got {alpha}")));
    }
    let ln_terms: Vec<(SyndromeKey, f64)> = joint.entries.iter().map(|(k, v)| (k.clone(), alpha * (v[0] + v[1]).to_f64_lossy().ln())).collect();
    let mut acc = LogSum::default();
    for (_, t) in &ln_terms {
        acc.add_ln(*t);
    }
    let ln_z = acc.ln_value();
    let q = ln_terms.into_iter().map(|(k, t)| (k, T::from_f64((t - ln_z).exp()).expect("finite"))).collect();
    Ok(PowerDistribution { alpha, normalizer: T::from_f64(ln_z.exp()).expect("finite"), ln_normalizer: ln_z, q })
}

/// Power distribution for integer α in exact arithmetic when `T` is exact.
pub fn power_distribution_integer<T: Probability>(joint: &JointDistribution<T>, alpha: u32) -> PowerDistribution<T> {
    let powered: Vec<(SyndromeKey, T)> = joint
        .entries
        .iter()
        .map(|(k, v)| {
            let ps = v[0].clone() + v[1].clone();
            (k.clone(), (0..alpha).fold(T::one(), |acc, _| acc * ps.clone()))
        })
        .collect();
    let z = powered.iter().fold(T::zero(), |acc, (_, t)| acc + t.clone());
    let q = powered.into_iter().map(|(k, t)| (k, t / z.clone())).collect();
    PowerDistribution { alpha: alpha as f64, ln_normalizer: z.to_f64_lossy().ln(), normalizer: z, q }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RciValue {
    pub alpha: f64,
    /// Coherent information in bits, shifted by k so that p = 0 gives k.
    pub bits: f64,
    /// The same quantity without the +k shift.
    pub raw: f64,
}

/// Streams (ln P(s, I), ln P(s, X)) pairs into the sums RCI needs.
#[derive(Clone, Debug)]
pub struct RciAccumulator {
    alphas: Vec<f64>,
    marginal: Vec<LogSum>,
    joint: Vec<LogSum>,
    entropy: KahanSum<f64>,
}

impl RciAccumulator {
    pub fn new(alphas: &[f64]) -> Result<Self> {
        if let Some(a) = alphas.iter().find(|a| a.is_nan() || **a < 0.0) {
            return Err(Error::Domain(format!("alpha must be nonnegative, got {a}")));
        }
        Ok(Self {
            alphas: alphas.to_vec(),
            marginal: vec![LogSum::default(); alphas.len()],
            joint: vec![LogSum::default(); alphas.len()],
            entropy: KahanSum::new(),
        })
    }

    pub fn add_ln(&mut self, ln_i: f64, ln_x: f64) {
        let ln_s = ln_add(ln_i, ln_x);
        if ln_s == f64::NEG_INFINITY {
            return;
        }
        for (idx, &a) in self.alphas.iter().enumerate() {
            self.marginal[idx].add_ln(a * ln_s);
            for ln_l in [ln_i, ln_x] {
                if ln_l > f64::NEG_INFINITY {
                    self.joint[idx].add_ln(a * ln_l);
                }
            }
        }
        let mut h = 0.0;
        for ln_l in [ln_i, ln_x] {
            if ln_l > f64::NEG_INFINITY {
                let c = (ln_l - ln_s).exp();
                h -= c * (ln_l - ln_s);
            }
        }
        self.entropy.add(ln_s.exp() * h / std::f64::consts::LN_2);
    }

    pub fn finish(&self, k: u32) -> Vec<RciValue> {
        self.alphas
            .iter()
            .enumerate()
            .map(|(idx, &a)| {
                let raw = if (a - 1.0).abs() < 1e-12 {
                    -self.entropy.value()
                } else {
                    (self.marginal[idx].ln_value() - self.joint[idx].ln_value()) / ((1.0 - a) * std::f64::consts::LN_2)
                };
                RciValue { alpha: a, bits: raw + k as f64, raw }
            })
            .collect()
    }
}

fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn ln_of<T: Probability>(x: &T) -> f64 {
    let v = x.to_f64_lossy();
    if v > 0.0 {
        v.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Rényi coherent information of order α (α = 1 is the von Neumann limit).
pub fn rci<T: Probability>(joint: &JointDistribution<T>, alpha: f64) -> Result<RciValue> {
    Ok(rci_multi(joint, &[alpha])?[0])
}

pub fn rci_multi<T: Probability>(joint: &JointDistribution<T>, alphas: &[f64]) -> Result<Vec<RciValue>> {
    let mut acc = RciAccumulator::new(alphas)?;
    for v in joint.entries.values() {
        acc.add_ln(ln_of(&v[0]), ln_of(&v[1]));
    }
    Ok(acc.finish(1))
}

/// RCI for several α straight from the trellis without materialising the
/// joint table; works for codes with too many checks to store.
pub fn rci_streaming(trellis: &Trellis, p: f64, alphas: &[f64]) -> Result<Vec<RciValue>> {
    check_p(&p)?;
    let mut acc = RciAccumulator::new(alphas)?;
    trellis.for_each_syndrome(&SumProduct::<f64>::default(), &(1.0 - p), &p, |_, v, ln| {
        let lnv = |x: f64| if x > 0.0 { x.ln() + ln } else { f64::NEG_INFINITY };
        acc.add_ln(lnv(v[0]), lnv(v[1]));
    });
    Ok(acc.finish(1))
}

/// Σ_s Q_α(s) (1 − P(class_map(s) | s)).
pub fn exact_resampled_failure<T, F>(joint: &JointDistribution<T>, alpha: f64, class_map: F) -> Result<f64>
where
    T: Probability,
    F: Fn(&SyndromeKey) -> Option<LogicalClass>,
{
    let mut acc = FailureAccumulator::new(alpha)?;
    for (key, v) in &joint.entries {
        let l = class_map(key).ok_or_else(|| Error::Contract(format!("class map has no entry for syndrome {}", key.to_hex())))?;
        acc.add_ln(ln_of(&v[0]), ln_of(&v[1]), l);
    }
    Ok(acc.value())
}

/// Streaming form: `class_map` receives the syndrome bits of every
/// supported syndrome.
pub fn exact_resampled_failure_streaming<F>(trellis: &Trellis, p: f64, alphas: &[f64], mut class_map: F) -> Result<Vec<f64>>
where
    F: FnMut(&Syndrome, [f64; 2]) -> Result<LogicalClass>,
{
    check_p(&p)?;
    let mut accs = alphas.iter().map(|&a| FailureAccumulator::new(a)).collect::<Result<Vec<_>>>()?;
    let mut first_err = None;
    trellis.for_each_syndrome(&SumProduct::<f64>::default(), &(1.0 - p), &p, |bits, v, ln| {
        if first_err.is_some() {
            return;
        }
        let s = Syndrome { bits: bits.to_vec() };
        let scale = ln.exp();
        match class_map(&s, [v[0] * scale, v[1] * scale]) {
            Ok(l) => {
                let lnv = |x: f64| if x > 0.0 { x.ln() + ln } else { f64::NEG_INFINITY };
                for acc in &mut accs {
                    acc.add_ln(lnv(v[0]), lnv(v[1]), l);
                }
            }
            Err(e) => first_err = Some(e),
        }
    });
    if let Some(e) = first_err {
        return Err(e);
    }
    Ok(accs.iter().map(FailureAccumulator::value).collect())
}

#[derive(Clone, Debug)]
struct FailureAccumulator {
    alpha: f64,
    num: LogSum,
    den: LogSum,
}

impl FailureAccumulator {
    fn new(alpha: f64) -> Result<Self> {
        if alpha.is_nan() || alpha < 0.0 {
            return Err(Error::Domain(format!("alpha must be nonnegative, got {alpha}")));
        }
        Ok(Self { alpha, num: LogSum::default(), den: LogSum::default() })
    }

    fn add_ln(&mut self, ln_i: f64, ln_x: f64, l: LogicalClass) {
        let ln_s = ln_add(ln_i, ln_x);
        if ln_s == f64::NEG_INFINITY {
            return;
        }
        self.den.add_ln(self.alpha * ln_s);
        let wrong = if l == LogicalClass::I { ln_x } else { ln_i };
        if wrong > f64::NEG_INFINITY {
            self.num.add_ln((self.alpha - 1.0) * ln_s + wrong);
        }
    }

    fn value(&self) -> f64 {
        let ln_num = self.num.ln_value();
        if ln_num == f64::NEG_INFINITY {
            return 0.0;
        }
        (ln_num - self.den.ln_value()).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_model::{build_rotated, build_unrotated};
    use crate::decoders::decode_mwpm;
    use crate::graph::DetectionGraph;
    use num_rational::BigRational;
    use num_traits::{One, Zero};

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn enumeration_is_normalised_and_exact() {
        let code = build_rotated(3).unwrap();
        let p = BigRational::new(1.into(), 10.into());
        let joint = enumerate_joint(&code, p.clone()).unwrap();
        assert_eq!(joint.total(), BigRational::one());
        assert_eq!(joint.len(), 16);
        // The trivial syndrome collects the 16 stabilizer patterns and 16 logical ones.
        let en = WeightEnumerator::new(&code).unwrap();
        let trivial: u32 = (0..=9).map(|w| en.count(0, LogicalClass::I, w) + en.count(0, LogicalClass::X, w)).sum();
        assert_eq!(trivial, 32);
        let tj = trellis_joint(&code, &Trellis::new(&code).unwrap(), p).unwrap();
        assert_eq!(tj.entries, joint.entries);
    }

    #[test]
    fn zero_noise_concentrates_on_trivial_syndrome() {
        let code = build_unrotated(3).unwrap();
        let joint = enumerate_joint(&code, 0.0).unwrap();
        assert_eq!(joint.len(), 1);
        assert_eq!(joint.get(&SyndromeKey::trivial(6)), Some(&[1.0, 0.0]));
        assert!(close(rci(&joint, 1.0).unwrap().bits, 1.0, 1e-12));
        assert!(close(rci(&joint, 2.0).unwrap().bits, 1.0, 1e-12));
    }

    #[test]
    fn half_noise_has_zero_rci() {
        let code = build_rotated(3).unwrap();
        let joint = enumerate_joint(&code, 0.5).unwrap();
        for a in [0.5, 1.0, 2.0, 3.0] {
            let r = rci(&joint, a).unwrap();
            assert!(r.bits.abs() < 1e-12, "alpha {a}: {}", r.bits);
            assert!(close(r.raw, -1.0, 1e-12));
        }
    }

    #[test]
    fn trellis_agrees_with_enumeration() {
        for code in [build_rotated(5).unwrap(), build_unrotated(3).unwrap(), build_rotated(4).unwrap()] {
            let enumerated = enumerate_joint(&code, 0.13).unwrap();
            let t = Trellis::new(&code).unwrap();
            let tj = trellis_joint(&code, &t, 0.13).unwrap();
            assert_eq!(tj.len(), enumerated.len());
            for (k, v) in &enumerated.entries {
                let w = tj.get(k).unwrap();
                assert!(close(v[0], w[0], 1e-10) && close(v[1], w[1], 1e-10));
                let s = Syndrome::from_key(k, code.num_checks()).unwrap();
                let c = coset_probability(&t, 0.13, &s).unwrap();
                assert!(close(v[0], c[0], 1e-10) && close(v[1], c[1], 1e-10));
            }
            assert!((tj.total() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn power_distribution_examples() {
        let code = build_rotated(3).unwrap();
        let joint = enumerate_joint(&code, 0.1).unwrap();
        let q1 = power_distribution(&joint, 1.0).unwrap();
        for k in joint.entries.keys() {
            assert!(close(q1.get(k), joint.marginal(k), 1e-12));
        }
        let two = JointDistribution {
            code_id: "two-point".into(),
            p: BigRational::zero(),
            num_checks: 1,
            construction: Construction::Enumeration,
            entries: [
                (SyndromeKey::from_bytes(vec![0]), [BigRational::new(4.into(), 5.into()), BigRational::zero()]),
                (SyndromeKey::from_bytes(vec![1]), [BigRational::new(1.into(), 5.into()), BigRational::zero()]),
            ]
            .into_iter()
            .collect(),
        };
        let q2 = power_distribution_integer(&two, 2);
        assert_eq!(q2.get(&SyndromeKey::from_bytes(vec![0])), BigRational::new(16.into(), 17.into()));
        assert_eq!(q2.get(&SyndromeKey::from_bytes(vec![1])), BigRational::new(1.into(), 17.into()));
        let qf = power_distribution(&two.to_f64(), 2.0).unwrap();
        assert!(close(qf.get(&SyndromeKey::from_bytes(vec![0])), 16.0 / 17.0, 1e-14));
        assert!(close(qf.normalizer, 0.68, 1e-14));
    }

    #[test]
    fn uniform_power_distribution_stays_uniform() {
        let joint = JointDistribution {
            code_id: "u".into(),
            p: 0.5,
            num_checks: 2,
            construction: Construction::Enumeration,
            entries: (0u8..4).map(|s| (SyndromeKey::from_bytes(vec![s]), [0.125, 0.125])).collect(),
        };
        for a in [0.0, 0.5, 2.0, 7.0] {
            let q = power_distribution(&joint, a).unwrap();
            assert!(q.q.values().all(|&v| close(v, 0.25, 1e-14)));
        }
        assert!(power_distribution(&joint, -1.0).is_err());
    }

    #[test]
    fn trivial_syndrome_sharpens_with_alpha() {
        let code = build_unrotated(3).unwrap();
        let joint = enumerate_joint(&code, 0.2).unwrap();
        let key = SyndromeKey::trivial(code.num_checks());
        let q: Vec<f64> = [1.0, 2.0, 3.0].iter().map(|&a| power_distribution(&joint, a).unwrap().get(&key)).collect();
        assert!(q[0] < q[1] && q[1] < q[2]);
    }

    #[test]
    fn streaming_rci_matches_table() {
        let code = build_rotated(5).unwrap();
        let t = Trellis::new(&code).unwrap();
        let joint = enumerate_joint(&code, 0.11).unwrap();
        let alphas = [1.0, 2.0, 3.0];
        let a = rci_multi(&joint, &alphas).unwrap();
        let b = rci_streaming(&t, 0.11, &alphas).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(close(x.bits, y.bits, 1e-10));
        }
    }

    #[test]
    fn rci_alpha_one_is_limit() {
        let code = build_rotated(3).unwrap();
        let joint = enumerate_joint(&code, 0.12).unwrap();
        let at_one = rci(&joint, 1.0).unwrap().bits;
        let near = (rci(&joint, 1.0 - 1e-5).unwrap().bits + rci(&joint, 1.0 + 1e-5).unwrap().bits) / 2.0;
        assert!((at_one - near).abs() < 1e-6);
    }

    #[test]
    fn rci_decreases_with_p() {
        let code = build_rotated(3).unwrap();
        let en = WeightEnumerator::new(&code).unwrap();
        for a in [1.0, 2.0, 3.0] {
            let mut last = f64::INFINITY;
            for i in 0..=25 {
                let v = rci(&en.joint(0.02 * i as f64), a).unwrap().bits;
                assert!(v <= last + 1e-12);
                last = v;
            }
        }
    }

    #[test]
    fn resampled_failure_properties() {
        let code = build_rotated(3).unwrap();
        let joint = enumerate_joint(&code, 0.1).unwrap();
        let mld = |k: &SyndromeKey| joint.mld_class(k);
        let g = DetectionGraph::new(&code);
        let mwpm = |k: &SyndromeKey| Some(decode_mwpm(&g, &code, &Syndrome::from_key(k, 4).unwrap()).unwrap().class);
        for a in [1.0, 2.0, 3.0] {
            let f_mld = exact_resampled_failure(&joint, a, mld).unwrap();
            assert!(f_mld <= exact_resampled_failure(&joint, a, mwpm).unwrap() + 1e-15);
            for flip in 0..16u8 {
                let other = |k: &SyndromeKey| joint.mld_class(k).map(|l| if k.bytes()[0] == flip { l.other() } else { l });
                assert!(f_mld <= exact_resampled_failure(&joint, a, other).unwrap() + 1e-15);
            }
        }
        let zero = enumerate_joint(&code, 0.0).unwrap();
        assert_eq!(exact_resampled_failure(&zero, 2.0, |_| Some(LogicalClass::I)).unwrap(), 0.0);
        assert!(matches!(exact_resampled_failure(&joint, 2.0, |_| None), Err(Error::Contract(_))));

        let t = Trellis::new(&code).unwrap();
        let streamed = exact_resampled_failure_streaming(&t, 0.1, &[2.0], |s, _| Ok(decode_mwpm(&g, &code, s)?.class)).unwrap();
        assert!(close(streamed[0], exact_resampled_failure(&joint, 2.0, mwpm).unwrap(), 1e-12));
    }

    #[test]
    fn mld_failure_non_increasing_in_alpha() {
        for code in [build_rotated(3).unwrap(), build_rotated(5).unwrap(), build_unrotated(3).unwrap()] {
            let en = WeightEnumerator::new(&code).unwrap();
            for p in [0.05, 0.1, 0.15, 0.2, 0.24] {
                let joint = en.joint(p);
                let f: Vec<f64> = [1.0, 2.0, 3.0].iter().map(|&a| exact_resampled_failure(&joint, a, |k| joint.mld_class(k)).unwrap()).collect();
                assert!(f[1] <= f[0] + 1e-15 && f[2] <= f[1] + 1e-15, "{} p={p}: {f:?}", code.id());
            }
        }
    }

    #[test]
    fn over_budget() {
        assert!(matches!(enumerate_joint(&build_unrotated(5).unwrap(), 0.1), Err(Error::Resource(_))));
        assert!(matches!(enumerate_joint(&build_rotated(3).unwrap(), 1.5), Err(Error::Domain(_))));
    }
}
