//! Syndrome-resampling estimators: the exact-weight estimator and its
//! variance, Good's power estimator, the finite-data resampling workflow and
//! sample-size bounds.

use std::collections::BTreeMap;
use std::fmt;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::batch::SampleBatch;
use crate::code_model::CodeSpec;
use crate::error::{Error, Result};
use crate::noise::{NoiseModel, SyndromeKey};
use crate::scalar::{KahanSum, Probability, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Plain,
    SrExact,
    SrEmpirical,
    Ps,
    Cgps,
    Combined,
}

impl Method {
    pub const ALL: [Method; 6] = [Method::Plain, Method::SrExact, Method::SrEmpirical, Method::Ps, Method::Cgps, Method::Combined];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Plain => "plain",
            Method::SrExact => "sr-exact",
            Method::SrEmpirical => "sr-empirical",
            Method::Ps => "ps",
            Method::Cgps => "cgps",
            Method::Combined => "combined",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| Error::Format(format!("unknown method `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub value: T,
    pub std_error: T,
    pub method: Method,
    pub alpha: f64,
    pub acceptance: f64,
    pub effective_samples: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

impl Estimate<f64> {
    /// Sample mean of 0/1 outcomes with its binomial standard error.
    pub fn from_outcomes(xs: impl IntoIterator<Item = bool>, method: Method, alpha: f64, acceptance: f64) -> Option<Self> {
        let (mut n, mut k) = (0usize, 0usize);
        for x in xs {
            n += 1;
            k += usize::from(x);
        }
        if n == 0 {
            return None;
        }
        let p = k as f64 / n as f64;
        Some(Self { value: p, std_error: (p * (1.0 - p) / n as f64).sqrt(), method, alpha, acceptance, effective_samples: n, metadata: BTreeMap::new() })
    }
}

fn weights_and_mean<T: Real>(records: &[(T, bool)], alpha: T) -> Result<(Vec<T>, T)> {
    if records.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if alpha < T::one() {
        return Err(Error::Domain(format!("alpha must be at least 1, got {alpha:?}")));
    }
    let mut ln_w = Vec::with_capacity(records.len());
    for (p, _) in records {
        if p.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::Domain(format!("syndrome probability must be positive, got {p:?}")));
        }
        ln_w.push((alpha - T::one()) * p.ln());
    }
    let max = ln_w.iter().copied().fold(T::neg_infinity(), T::max);
    let w: Vec<T> = ln_w.into_iter().map(|l| (l - max).exp()).collect();
    let mut hits = 0usize;
    for (_, x) in records {
        hits += usize::from(*x);
    }
    let mean = T::from_usize(hits).expect("count") / T::from_usize(records.len()).expect("count");
    Ok((w, mean))
}

fn kahan<T: Real>(xs: impl Iterator<Item = T>) -> T {
    let mut acc = KahanSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Σ P^{α−1} X / Σ P^{α−1} over (P(s_i), X_i) pairs.
pub fn sr_estimate<T: Real>(records: &[(T, bool)], alpha: T) -> Result<Estimate<T>> {
    let (w, mean) = weights_and_mean(records, alpha)?;
    let num = kahan(w.iter().zip(records).filter(|(_, r)| r.1).map(|(w, _)| *w));
    let den = kahan(w.iter().copied());
    let sq = kahan(w.iter().map(|&x| x * x));
    let var = mean * (T::one() - mean) * sq / (den * den);
    Ok(Estimate {
        value: num / den,
        std_error: var.sqrt(),
        method: Method::SrExact,
        alpha: alpha.to_f64_lossy(),
        acceptance: 1.0,
        effective_samples: records.len(),
        metadata: BTreeMap::new(),
    })
}

/// p̂(1 − p̂) Σ P^{2α−2} / (Σ P^{α−1})², with p̂ the unweighted mean of X.
pub fn sr_variance<T: Real>(records: &[(T, bool)], alpha: T) -> Result<T> {
    Ok(sr_estimate(records, alpha)?.std_error.powi(2))
}

/// Delta-method variance of the ratio estimator, Σ w²(X − p̂_α)² / (Σ w)²,
/// centred on the weighted estimate rather than the unweighted mean.
pub fn sr_variance_delta<T: Real>(records: &[(T, bool)], alpha: T) -> Result<T> {
    let (w, _) = weights_and_mean(records, alpha)?;
    let den = kahan(w.iter().copied());
    let mu = kahan(w.iter().zip(records).filter(|(_, r)| r.1).map(|(w, _)| *w)) / den;
    let num = kahan(w.iter().zip(records).map(|(&w, r)| {
        let x = if r.1 { T::one() } else { T::zero() };
        w * w * (x - mu) * (x - mu)
    }));
    Ok(num / (den * den))
}

/// (P(s), X) pairs of a batch whose records carry exact probabilities.
pub fn sr_records(batch: &SampleBatch) -> Result<Vec<(f64, bool)>> {
    batch
        .records()
        .iter()
        .enumerate()
        .map(|(i, r)| r.p_s.map(|p| (p, r.failed())).ok_or_else(|| Error::Contract(format!("record {i} has no exact syndrome probability"))))
        .collect()
}

/// Good's estimate of P^α from counts: C(c_s, α) / C(N, α).
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalPowerDistribution<K, T> {
    pub alpha: u32,
    pub n: usize,
    pub p_hat: BTreeMap<K, T>,
    pub z_hat: T,
    /// Empty when `z_hat` is zero.
    pub q_hat: BTreeMap<K, T>,
}

impl<K: Ord, T: Probability> EmpiricalPowerDistribution<K, T> {
    pub fn is_degenerate(&self) -> bool {
        self.z_hat.is_zero()
    }

    pub fn q(&self, key: &K) -> T {
        self.q_hat.get(key).cloned().unwrap_or_else(T::zero)
    }
}

/// C(c, α) / C(N, α) as a product of α ratios.
pub fn good_ratio<T: Probability>(c: usize, n: usize, alpha: u32) -> T {
    let alpha = alpha as usize;
    if c < alpha {
        return T::zero();
    }
    (0..alpha).fold(T::one(), |acc, i| acc * T::ratio((c - i) as u64, (n - i) as u64))
}

pub fn empirical_power<K: Ord + Clone, T: Probability>(counts: &BTreeMap<K, usize>, n: usize, alpha: u32) -> Result<EmpiricalPowerDistribution<K, T>> {
    if alpha == 0 {
        return Err(Error::Domain("alpha must be a positive integer".into()));
    }
    let total: usize = counts.values().sum();
    if total != n {
        return Err(Error::Contract(format!("counts sum to {total}, expected {n}")));
    }
    let p_hat: BTreeMap<K, T> = counts.iter().map(|(k, &c)| (k.clone(), good_ratio(c, n, alpha))).collect();
    let z_hat = p_hat.values().fold(T::zero(), |acc, v| acc + v.clone());
    let q_hat = if z_hat.is_zero() {
        BTreeMap::new()
    } else {
        p_hat.iter().filter(|(_, v)| !v.is_zero()).map(|(k, v)| (k.clone(), v.clone() / z_hat.clone())).collect()
    };
    Ok(EmpiricalPowerDistribution { alpha, n, p_hat, z_hat, q_hat })
}

/// Fraction of samples whose syndrome occurs at least α times.
pub fn acceptance_rate(batch: &SampleBatch, alpha: u32) -> f64 {
    if batch.is_empty() {
        return 0.0;
    }
    let kept: usize = batch.counts().values().filter(|&&c| c >= alpha as usize).sum();
    kept as f64 / batch.len() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct Resampled {
    pub estimate: Estimate<f64>,
    /// Record index picked by each draw.
    pub drawn: Vec<usize>,
}

/// Finite-data resampling:
/// discard syndromes seen fewer than α times, build Q̂_α from the survivors,
/// draw Ñ syndromes from it with replacement, pick one stored occurrence of
/// each drawn syndrome uniformly at random, and average X over the picks.
/// Ñ defaults to the number of kept samples.
pub fn resample_workflow<R: Rng + ?Sized>(batch: &SampleBatch, alpha: u32, n_tilde: Option<usize>, rng: &mut R) -> Result<Resampled> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let power: EmpiricalPowerDistribution<SyndromeKey, f64> = empirical_power(batch.counts(), batch.len(), alpha)?;
    if power.is_degenerate() {
        return Err(Error::EmptyAfterDiscard { stage: "sr" });
    }
    let occurrences = batch.occurrences();
    let kept: usize = batch.counts().values().filter(|&&c| c >= alpha as usize).sum();
    let acceptance = kept as f64 / batch.len() as f64;
    let n_tilde = n_tilde.unwrap_or(kept);
    if n_tilde == 0 {
        return Err(Error::Domain("number of draws must be positive".into()));
    }
    let keys: Vec<&SyndromeKey> = power.q_hat.keys().collect();
    let sampler = WeightedIndex::new(power.q_hat.values().copied()).map_err(|e| Error::Domain(e.to_string()))?;
    let mut drawn = Vec::with_capacity(n_tilde);
    for _ in 0..n_tilde {
        let occ = &occurrences[keys[sampler.sample(rng)]];
        drawn.push(occ[rng.gen_range(0..occ.len())]);
    }
    let records = batch.records();
    let mut estimate =
        Estimate::from_outcomes(drawn.iter().map(|&i| records[i].failed()), Method::SrEmpirical, alpha as f64, acceptance).expect("at least one draw");
    estimate.metadata.insert("n_tilde".into(), n_tilde.to_string());
    estimate.metadata.insert("draws".into(), "with-replacement".into());
    estimate.metadata.insert("occurrence_pick".into(), "uniform-per-draw".into());
    Ok(Resampled { estimate, drawn })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBounds {
    pub p_max: f64,
    pub generic: f64,
    pub low_p: f64,
    pub high_p: f64,
}

/// α / P_max
pub fn generic_bound(alpha: f64, p_max: f64) -> f64 {
    alpha / p_max
}

/// Sample-count bounds with P_max = (1 − p)^n, the trivial syndrome's
/// probability lower bound.
pub fn sample_bounds(alpha: f64, code: &CodeSpec, noise: &NoiseModel) -> SampleBounds {
    let (n, p) = (code.n as f64, noise.p());
    let p_max = (1.0 - p).powf(n);
    SampleBounds { p_max, generic: generic_bound(alpha, p_max), low_p: alpha * (n * p).exp(), high_p: alpha * 2f64.powf(n - code.k as f64) }
}
