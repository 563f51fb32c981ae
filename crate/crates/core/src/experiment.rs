//! Config-driven grids over (d, p, method, α, c) producing a results CSV
//! and a JSON manifest.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::batch::{run_batch, DecoderConfig, DecoderKind, SampleBatch};
use crate::code_model::{build, Layout};
use crate::error::{Error, Result};
use crate::io::csv_error;
use crate::noise::NoiseModel;
use crate::postselect::{cgps_filter, combined_sr_cgps, ps_estimate, CgpsConfig};
use crate::resampling::{resample_workflow, sr_estimate, sr_records, Estimate, Method};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub layout: Layout,
    pub distances: Vec<usize>,
    pub p_grid: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    #[serde(default = "default_decoder")]
    pub decoder: DecoderKind,
    pub methods: Vec<Method>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub c_values: Vec<f64>,
    #[serde(default)]
    pub output: OutputPaths,
}

fn default_decoder() -> DecoderKind {
    DecoderKind::Mwpm
}

fn default_alphas() -> Vec<f64> {
    vec![1.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    /// Directory for per-point batch files; none are written when unset.
    #[serde(default)]
    pub batches: Option<PathBuf>,
}

impl Default for OutputPaths {
    fn default() -> Self {
        Self { csv: "results.csv".into(), manifest: "manifest.json".into(), batches: None }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        rebase(&mut cfg.output.csv);
        rebase(&mut cfg.output.manifest);
        if let Some(b) = cfg.output.batches.as_mut() {
            rebase(b);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |what: &str| Err(Error::EmptyInput(format!("config field `{what}`")));
        if self.distances.is_empty() {
            return empty("distances");
        }
        if self.p_grid.is_empty() {
            return empty("p_grid");
        }
        if self.methods.is_empty() {
            return empty("methods");
        }
        if self.alphas.is_empty() {
            return empty("alphas");
        }
        if self.samples == 0 {
            return Err(Error::EmptyBatch);
        }
        for &p in &self.p_grid {
            NoiseModel::new(p)?;
        }
        if self.methods.iter().any(|m| matches!(m, Method::Cgps | Method::Combined)) && self.c_values.is_empty() {
            return empty("c_values");
        }
        for &c in &self.c_values {
            CgpsConfig::new(c, 1)?;
        }
        let empirical = self.methods.iter().any(|m| matches!(m, Method::SrEmpirical | Method::Combined));
        for &a in &self.alphas {
            if a.is_nan() || a < 1.0 {
                return Err(Error::Domain(format!("alpha must be at least 1, got {a}")));
            }
            if empirical && a.fract() != 0.0 {
                return Err(Error::Domain(format!("empirical resampling needs integer alpha, got {a}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub d: usize,
    pub p: f64,
    pub method: Method,
    pub alpha: Option<f64>,
    pub c: Option<f64>,
    pub p_l: f64,
    pub std_error: f64,
    pub acceptance: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub d: usize,
    pub p: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub jobs: Vec<JobRecord>,
    pub rows: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub manifest: Manifest,
}

/// Seed of stream `index` under a master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

fn row(d: usize, p: f64, c: Option<f64>, e: &Estimate<f64>, n: usize) -> ResultRow {
    let alpha = if e.method == Method::Ps { None } else { Some(e.alpha) };
    ResultRow { d, p, method: e.method, alpha, c, p_l: e.value, std_error: e.std_error, acceptance: e.acceptance, n }
}

fn evaluate(cfg: &ExperimentConfig, d: usize, p: f64, batch: &SampleBatch, job_seed: u64) -> Result<Vec<ResultRow>> {
    let n = batch.len();
    let mut rows = Vec::new();
    let stage = |method: Method, alpha: Option<f64>, c: Option<f64>| {
        move |e: Error| Error::Stage { stage: method.to_string(), params: format!("d={d} p={p} alpha={alpha:?} c={c:?}"), source: Box::new(e) }
    };
    let rng_for = |tag: u64| ChaCha8Rng::seed_from_u64(derive_seed(job_seed, tag));
    for &method in &cfg.methods {
        match method {
            Method::Plain => {
                let e = Estimate::from_outcomes(batch.records().iter().map(|r| r.failed()), Method::Plain, 1.0, 1.0).expect("nonempty batch");
                rows.push(row(d, p, None, &e, n));
            }
            Method::SrExact => {
                let recs = sr_records(batch).map_err(stage(method, None, None))?;
                for &a in &cfg.alphas {
                    let e = sr_estimate(&recs, a).map_err(stage(method, Some(a), None))?;
                    rows.push(row(d, p, None, &e, n));
                }
            }
            Method::SrEmpirical => {
                for (ai, &a) in cfg.alphas.iter().enumerate() {
                    let e = resample_workflow(batch, a as u32, None, &mut rng_for(1 + ai as u64)).map_err(stage(method, Some(a), None))?;
                    rows.push(row(d, p, None, &e.estimate, n));
                }
            }
            Method::Ps => {
                let e = ps_estimate(batch).map_err(stage(method, None, None))?;
                rows.push(row(d, p, None, &e, n));
            }
            Method::Cgps => {
                for &c in &cfg.c_values {
                    let gc = CgpsConfig::new(c, d)?;
                    let e = cgps_filter(batch, &gc).map_err(stage(method, None, Some(c)))?.estimate;
                    rows.push(row(d, p, Some(c), &e, n));
                }
            }
            Method::Combined => {
                for (ai, &a) in cfg.alphas.iter().enumerate() {
                    for (ci, &c) in cfg.c_values.iter().enumerate() {
                        let gc = CgpsConfig::new(c, d)?;
                        let tag = 1000 + (ai * cfg.c_values.len() + ci) as u64;
                        let e = combined_sr_cgps(batch, a as u32, &gc, None, &mut rng_for(tag)).map_err(stage(method, Some(a), Some(c)))?;
                        rows.push(row(d, p, Some(c), &e, n));
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// Runs every (d, p) job, evaluating each configured method on the job's
/// batch. Jobs run concurrently; rows come back in grid order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let needs_gap = cfg.methods.iter().any(|m| matches!(m, Method::Cgps | Method::Combined));
    let needs_prob = cfg.methods.contains(&Method::SrExact);
    let mut dec = DecoderConfig::new(cfg.decoder);
    dec.with_gap = needs_gap;
    dec.with_exact_prob = needs_prob;

    let jobs: Vec<JobRecord> = cfg
        .distances
        .iter()
        .flat_map(|&d| cfg.p_grid.iter().map(move |&p| (d, p)))
        .enumerate()
        .map(|(i, (d, p))| JobRecord { d, p, seed: derive_seed(cfg.seed, i as u64) })
        .collect();

    let per_job = jobs
        .par_iter()
        .map(|job| {
            let ctx = |stage: &str| {
                let params = format!("d={} p={}", job.d, job.p);
                let stage = stage.to_string();
                move |e: Error| Error::Stage { stage, params, source: Box::new(e) }
            };
            let code = build(cfg.layout, job.d).map_err(ctx("code"))?;
            let noise = NoiseModel::new(job.p)?;
            let batch = run_batch(&code, &noise, cfg.samples, dec, job.seed).map_err(ctx("simulate"))?;
            if let Some(dir) = &cfg.output.batches {
                fs::create_dir_all(dir)?;
                let name = format!("{}-p{}.jsonl", code.id(), job.p);
                crate::io::save_batch(&batch, &dir.join(name)).map_err(ctx("write-batch"))?;
            }
            evaluate(cfg, job.d, job.p, &batch, job.seed)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<ResultRow> = per_job.into_iter().flatten().collect();
    let manifest = Manifest { tool: env!("CARGO_PKG_NAME").into(), version: env!("CARGO_PKG_VERSION").into(), config: cfg.clone(), jobs, rows: rows.len() };
    Ok(ExperimentOutput { rows, manifest })
}

pub fn write_rows<W: std::io::Write>(rows: &[ResultRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_rows<R: std::io::Read>(r: R) -> Result<Vec<ResultRow>> {
    csv::Reader::from_reader(r).deserialize().enumerate().map(|(i, row)| row.map_err(|e| Error::Parse { line: i + 2, message: e.to_string() })).collect()
}

/// Runs the experiment and writes the CSV and manifest named in the config.
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let out = run_experiment(cfg)?;
    for path in [&cfg.output.csv, &cfg.output.manifest] {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
    }
    write_rows(&out.rows, fs::File::create(&cfg.output.csv)?)?;
    fs::write(&cfg.output.manifest, serde_json::to_string_pretty(&out.manifest)?)?;
    Ok(out)
}
