//! Post-selection: trivial-syndrome PS, complementary-gap PS and the
//! combination of resampling followed by gap post-selection.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::batch::{SampleBatch, SampleRecord};
use crate::error::{Error, Result};
use crate::resampling::{resample_workflow, Estimate, Method};

/// Keeps only samples with a trivial syndrome.
pub fn ps_estimate(batch: &SampleBatch) -> Result<Estimate<f64>> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let kept: Vec<&SampleRecord> = batch.records().iter().filter(|r| r.syndrome.is_trivial()).collect();
    let acceptance = kept.len() as f64 / batch.len() as f64;
    Estimate::from_outcomes(kept.iter().map(|r| r.failed()), Method::Ps, f64::INFINITY, acceptance).ok_or(Error::EmptyAfterDiscard { stage: "ps" })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CgpsConfig {
    pub c: f64,
    pub d: usize,
}

impl CgpsConfig {
    pub fn new(c: f64, d: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::Domain(format!("confidence c must lie in [0, 1], got {c}")));
        }
        if d == 0 {
            return Err(Error::InvalidDistance(d));
        }
        Ok(Self { c, d })
    }

    /// Discard iff 1 − Δ/d > c; equality keeps.
    pub fn keeps(&self, gap: u32) -> bool {
        let d = self.d as f64;
        d - gap as f64 <= self.c * d + 1e-9
    }
}

pub struct CgpsOutcome {
    pub kept: Vec<usize>,
    pub estimate: Estimate<f64>,
}

fn gap_of(r: &SampleRecord, i: usize) -> Result<u32> {
    r.gap.ok_or_else(|| Error::Contract(format!("record {i} carries no complementary gap")))
}

pub fn cgps_filter(batch: &SampleBatch, cfg: &CgpsConfig) -> Result<CgpsOutcome> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut kept = Vec::new();
    for (i, r) in batch.records().iter().enumerate() {
        if cfg.keeps(gap_of(r, i)?) {
            kept.push(i);
        }
    }
    let records = batch.records();
    let acceptance = kept.len() as f64 / batch.len() as f64;
    let mut estimate =
        Estimate::from_outcomes(kept.iter().map(|&i| records[i].failed()), Method::Cgps, 1.0, acceptance).ok_or(Error::EmptyAfterDiscard { stage: "cgps" })?;
    estimate.metadata.insert("c".into(), cfg.c.to_string());
    Ok(CgpsOutcome { kept, estimate })
}

/// Resampling first, then gap post-selection over the drawn samples.
/// Acceptance is the product of the two stage acceptances. With α = 1 the
/// resampling stage is skipped.
pub fn combined_sr_cgps<R: Rng + ?Sized>(batch: &SampleBatch, alpha: u32, cfg: &CgpsConfig, n_tilde: Option<usize>, rng: &mut R) -> Result<Estimate<f64>> {
    if alpha <= 1 {
        let mut e = cgps_filter(batch, cfg)?.estimate;
        e.method = Method::Combined;
        return Ok(e);
    }
    let records = batch.records();
    for (i, r) in records.iter().enumerate() {
        gap_of(r, i)?;
    }
    let sr = resample_workflow(batch, alpha, n_tilde, rng)?;
    let kept: Vec<usize> = sr.drawn.iter().copied().filter(|&i| cfg.keeps(records[i].gap.unwrap_or(0))).collect();
    let stage2 = kept.len() as f64 / sr.drawn.len() as f64;
    let mut e = Estimate::from_outcomes(kept.iter().map(|&i| records[i].failed()), Method::Combined, alpha as f64, sr.estimate.acceptance * stage2)
        .ok_or(Error::EmptyAfterDiscard { stage: "cgps" })?;
    e.metadata = sr.estimate.metadata;
    e.metadata.insert("c".into(), cfg.c.to_string());
    e.metadata.insert("sr_acceptance".into(), sr.estimate.acceptance.to_string());
    e.metadata.insert("cgps_acceptance".into(), stage2.to_string());
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::SyndromeKey;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rec(s: u8, x: u8, gap: Option<u32>) -> SampleRecord {
        SampleRecord { syndrome: SyndromeKey::from_bytes(vec![s]), x, decoder_class: None, w_mwpm: None, w_comp: None, gap, p_s: None }
    }

    fn sample() -> SampleBatch {
        let rows = [(0, 0, 5), (0, 0, 5), (0, 1, 5), (1, 0, 3), (1, 0, 3), (2, 1, 1), (2, 1, 1), (3, 1, 0)];
        SampleBatch::new("t", Some(5), None, None, rows.iter().map(|&(s, x, g)| rec(s, x, Some(g))).collect())
    }

    #[test]
    fn ps_basic() {
        let e = ps_estimate(&sample()).unwrap();
        assert!((e.value - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(e.acceptance, 3.0 / 8.0);
        let none = SampleBatch::new("t", None, None, None, vec![rec(1, 0, None)]);
        assert!(matches!(ps_estimate(&none), Err(Error::EmptyAfterDiscard { stage: "ps" })));
    }

    #[test]
    fn cgps_limits() {
        let b = sample();
        assert_eq!(cgps_filter(&b, &CgpsConfig::new(1.0, 5).unwrap()).unwrap().kept.len(), 8);
        let zero = cgps_filter(&b, &CgpsConfig::new(0.0, 5).unwrap()).unwrap();
        assert_eq!(zero.kept, vec![0, 1, 2]);
        // 1 − 3/5 = 2/5: equality keeps.
        let eq = cgps_filter(&b, &CgpsConfig::new(0.4, 5).unwrap()).unwrap();
        assert_eq!(eq.kept, vec![0, 1, 2, 3, 4]);
        assert!(CgpsConfig::new(1.5, 5).is_err());
    }

    #[test]
    fn cgps_needs_gaps() {
        let b = SampleBatch::new("t", None, None, None, vec![rec(0, 0, None)]);
        assert!(matches!(cgps_filter(&b, &CgpsConfig::new(0.5, 3).unwrap()), Err(Error::Contract(_))));
    }

    #[test]
    fn combined_reduces_to_each_stage() {
        let b = sample();
        let all = CgpsConfig::new(1.0, 5).unwrap();
        let c = combined_sr_cgps(&b, 2, &all, None, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let sr = resample_workflow(&b, 2, None, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!((c.value, c.acceptance), (sr.estimate.value, sr.estimate.acceptance));
        let cfg = CgpsConfig::new(0.4, 5).unwrap();
        let one = combined_sr_cgps(&b, 1, &cfg, None, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let plain = cgps_filter(&b, &cfg).unwrap().estimate;
        assert_eq!((one.value, one.acceptance), (plain.value, plain.acceptance));
        let zero = CgpsConfig::new(0.0, 5).unwrap();
        let only_unique = SampleBatch::new("t", None, None, None, vec![rec(1, 0, Some(1)), rec(1, 0, Some(1))]);
        assert!(matches!(combined_sr_cgps(&only_unique, 2, &zero, None, &mut ChaCha8Rng::seed_from_u64(0)), Err(Error::EmptyAfterDiscard { stage: "cgps" })));
    }
}
