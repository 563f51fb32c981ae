//! Seeded Monte Carlo batches of sampled syndromes with decoder outcomes.

use std::collections::BTreeMap;
use std::fmt;

use dashmap::DashMap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code_model::CodeSpec;
use crate::decoders::{complementary_gap, decode_mwpm, Gap, LogicalClass, Trellis};
use crate::error::{Error, Result};
use crate::graph::DetectionGraph;
use crate::noise::{class_of, sample_error, syndrome_of, NoiseModel, Syndrome, SyndromeKey};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Mwpm,
    Mld,
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderKind::Mwpm => "mwpm",
            DecoderKind::Mld => "mld",
        })
    }
}

impl std::str::FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mwpm" => Ok(DecoderKind::Mwpm),
            "mld" => Ok(DecoderKind::Mld),
            other => Err(Error::Format(format!("unknown decoder `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub decoder: DecoderKind,
    pub with_gap: bool,
    pub with_exact_prob: bool,
}

impl DecoderConfig {
    pub fn new(decoder: DecoderKind) -> Self {
        Self { decoder, with_gap: false, with_exact_prob: false }
    }

    pub fn with_gap(mut self) -> Self {
        self.with_gap = true;
        self
    }

    pub fn with_exact_prob(mut self) -> Self {
        self.with_exact_prob = true;
        self
    }
}

/// Probabilities travel as fixed-precision decimal strings.
pub mod prob_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn format(p: f64) -> String {
        format!("{p:.16e}")
    }

    pub fn serialize<S: Serializer>(p: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match p {
            Some(v) => s.serialize_str(&format(*v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Number(f64),
        }
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Number(v)) => Ok(Some(v)),
            Some(Repr::Text(t)) => t.trim().parse().map(Some).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub syndrome: SyndromeKey,
    pub x: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoder_class: Option<LogicalClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_mwpm: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_comp: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "prob_string")]
    pub p_s: Option<f64>,
}

impl SampleRecord {
    pub fn failed(&self) -> bool {
        self.x == 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub code_id: String,
    pub distance: Option<usize>,
    pub p: Option<f64>,
    pub seed: Option<u64>,
    records: Vec<SampleRecord>,
    counts: BTreeMap<SyndromeKey, usize>,
}

impl SampleBatch {
    pub fn new(code_id: impl Into<String>, distance: Option<usize>, p: Option<f64>, seed: Option<u64>, records: Vec<SampleRecord>) -> Self {
        let mut counts = BTreeMap::new();
        for r in &records {
            *counts.entry(r.syndrome.clone()).or_insert(0) += 1;
        }
        Self { code_id: code_id.into(), distance, p, seed, records, counts }
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Occurrence count c_s of each distinct syndrome.
    pub fn counts(&self) -> &BTreeMap<SyndromeKey, usize> {
        &self.counts
    }

    /// Record indices of each distinct syndrome, in batch order.
    pub fn occurrences(&self) -> BTreeMap<&SyndromeKey, Vec<usize>> {
        let mut occ: BTreeMap<&SyndromeKey, Vec<usize>> = BTreeMap::new();
        for (i, r) in self.records.iter().enumerate() {
            occ.entry(&r.syndrome).or_default().push(i);
        }
        occ
    }

    pub fn mean_failure(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().filter(|r| r.failed()).count() as f64 / self.records.len() as f64
    }
}

#[derive(Clone, Copy, Debug)]
struct Outcome {
    class: LogicalClass,
    w_mwpm: Option<u32>,
    gap: Option<Gap>,
    p_s: Option<f64>,
}

struct Context<'a> {
    code: &'a CodeSpec,
    noise: NoiseModel,
    cfg: DecoderConfig,
    graph: Option<DetectionGraph>,
    trellis: Option<Trellis>,
}

impl Context<'_> {
    fn decode(&self, s: &Syndrome) -> Result<Outcome> {
        let mut w_mwpm = None;
        let mut p_s = None;
        let class = match self.cfg.decoder {
            DecoderKind::Mwpm => {
                let r = decode_mwpm(self.graph.as_ref().expect("graph"), self.code, s)?;
                w_mwpm = Some(r.weight);
                r.class
            }
            DecoderKind::Mld => {
                let sweep = self.trellis.as_ref().expect("trellis").coset_weights(self.noise.p(), s)?;
                let scale = sweep.ln_scale.exp();
                p_s = Some((sweep.values[0] + sweep.values[1]) * scale);
                if sweep.values[1] > sweep.values[0] {
                    LogicalClass::X
                } else {
                    LogicalClass::I
                }
            }
        };
        let gap = if self.cfg.with_gap {
            let g = complementary_gap(self.trellis.as_ref().expect("trellis"), s)?;
            w_mwpm.get_or_insert(g.weights[g.best.index()]);
            Some(g)
        } else {
            None
        };
        if self.cfg.with_exact_prob && p_s.is_none() {
            let sweep = self.trellis.as_ref().expect("trellis").coset_weights(self.noise.p(), s)?;
            p_s = Some((sweep.values[0] + sweep.values[1]) * sweep.ln_scale.exp());
        }
        Ok(Outcome { class, w_mwpm, gap, p_s })
    }
}

/// Samples `n` errors, decodes their syndromes and records outcomes.
///
/// Sample `i` uses its own stream, so the batch does not depend on the number
/// of worker threads. Decoder outcomes are memoised per syndrome.
pub fn run_batch(code: &CodeSpec, noise: &NoiseModel, n: usize, cfg: DecoderConfig, seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    let needs_trellis = cfg.decoder == DecoderKind::Mld || cfg.with_gap || cfg.with_exact_prob;
    let ctx = Context {
        code,
        noise: *noise,
        cfg,
        graph: (cfg.decoder == DecoderKind::Mwpm).then(|| DetectionGraph::new(code)),
        trellis: if needs_trellis { Some(Trellis::new(code)?) } else { None },
    };
    let cache: DashMap<SyndromeKey, Outcome> = DashMap::new();
    let base = ChaCha8Rng::seed_from_u64(seed);

    let records = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = base.clone();
            rng.set_stream(i as u64);
            let e = sample_error(code, noise, &mut rng);
            let s = syndrome_of(code, &e)?;
            let key = s.key();
            let outcome = match cache.get(&key) {
                Some(hit) => *hit,
                None => {
                    let o = ctx.decode(&s).map_err(|err| Error::Decoder { index: i, source: Box::new(err) })?;
                    cache.insert(key.clone(), o);
                    o
                }
            };
            let x = u8::from(class_of(code, &e) != outcome.class);
            Ok(SampleRecord {
                syndrome: key,
                x,
                decoder_class: Some(outcome.class),
                w_mwpm: outcome.w_mwpm,
                w_comp: outcome.gap.map(|g| g.weights[g.best.other().index()]),
                gap: outcome.gap.map(|g| g.delta),
                p_s: outcome.p_s,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleBatch::new(code.id(), Some(code.distance), Some(noise.p()), Some(seed), records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_model::{build_rotated, build_unrotated};

    #[test]
    fn zero_noise() {
        let code = build_rotated(3).unwrap();
        let b = run_batch(&code, &NoiseModel::new(0.0).unwrap(), 50, DecoderConfig::new(DecoderKind::Mwpm).with_gap(), 1).unwrap();
        assert_eq!(b.len(), 50);
        assert!(b.records().iter().all(|r| r.syndrome.is_trivial() && r.x == 0 && r.gap == Some(3)));
        assert_eq!(b.counts().len(), 1);
    }

    #[test]
    fn deterministic_and_thread_invariant() {
        let code = build_unrotated(3).unwrap();
        let noise = NoiseModel::new(0.1).unwrap();
        let cfg = DecoderConfig::new(DecoderKind::Mwpm).with_gap().with_exact_prob();
        let a = run_batch(&code, &noise, 2000, cfg, 9).unwrap();
        let b = run_batch(&code, &noise, 2000, cfg, 9).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let c = pool.install(|| run_batch(&code, &noise, 2000, cfg, 9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_ne!(a, run_batch(&code, &noise, 2000, cfg, 10).unwrap());
    }

    #[test]
    fn counts_sum_to_n_and_gap_fields_consistent() {
        let code = build_rotated(5).unwrap();
        let b = run_batch(&code, &NoiseModel::new(0.12).unwrap(), 3000, DecoderConfig::new(DecoderKind::Mwpm).with_gap(), 3).unwrap();
        assert_eq!(b.counts().values().sum::<usize>(), 3000);
        for r in b.records() {
            assert_eq!(r.w_comp.unwrap() - r.w_mwpm.unwrap(), r.gap.unwrap());
        }
    }

    #[test]
    fn mld_records_carry_probability() {
        let code = build_rotated(3).unwrap();
        let b = run_batch(&code, &NoiseModel::new(0.1).unwrap(), 100, DecoderConfig::new(DecoderKind::Mld), 3).unwrap();
        assert!(b.records().iter().all(|r| r.p_s.unwrap() > 0.0));
    }

    #[test]
    fn empty_batch_rejected() {
        let code = build_rotated(3).unwrap();
        let noise = NoiseModel::new(0.1).unwrap();
        assert!(matches!(run_batch(&code, &noise, 0, DecoderConfig::new(DecoderKind::Mwpm), 0), Err(Error::EmptyBatch)));
    }

    #[test]
    fn record_serialization_roundtrip() {
        let r = SampleRecord {
            syndrome: SyndromeKey::from_hex("0a01").unwrap(),
            x: 1,
            decoder_class: Some(LogicalClass::X),
            w_mwpm: Some(3),
            w_comp: Some(4),
            gap: Some(1),
            p_s: Some(0.1 + 0.2),
        };
        let line = serde_json::to_string(&r).unwrap();
        assert!(line.contains("\"p_s\":\"3.0000000000000004e-1\""), "{line}");
        assert_eq!(serde_json::from_str::<SampleRecord>(&line).unwrap(), r);
        let bare: SampleRecord = serde_json::from_str(r#"{"syndrome":"00","x":0}"#).unwrap();
        assert_eq!(bare.gap, None);
    }
}
