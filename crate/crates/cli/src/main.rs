use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use synres::analysis::{crossing_point, scaling_collapse, CollapseConfig};
use synres::batch::{run_batch, DecoderConfig, DecoderKind};
use synres::code_model::{build, validate_code, CodeSpec, Layout};
use synres::decoders::{complementary_gap, decode_mld, decode_mwpm, Trellis};
use synres::exact_dist::{
    enumerate_joint, exact_resampled_failure, exact_resampled_failure_streaming, power_distribution, rci_multi, rci_streaming, trellis_joint,
    ENUMERATION_MAX_QUBITS, JOINT_MAX_CHECKS,
};
use synres::experiment::{run_and_write, ExperimentConfig};
use synres::graph::DetectionGraph;
use synres::io;
use synres::noise::{NoiseModel, Syndrome, SyndromeKey};
use synres::postselect::{cgps_filter, combined_sr_cgps, ps_estimate, CgpsConfig};
use synres::resampling::{acceptance_rate, resample_workflow, sample_bounds, sr_estimate, sr_records, Method};
use synres::{Estimate, JointDistribution};

/// Surface-code simulation with syndrome resampling and post-selection.
///
/// The worker count follows RAYON_NUM_THREADS; results do not depend on it.
#[derive(Parser)]
#[command(name = "synres", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a code as JSON.
    Codegen {
        #[arg(long)]
        layout: Layout,
        #[arg(long)]
        distance: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a code's invariants.
    Validate {
        #[arg(long)]
        code: String,
    },
    /// Sample and decode a batch of syndromes.
    Simulate {
        #[arg(long)]
        code: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        n_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "mwpm")]
        decoder: DecoderKind,
        #[arg(long)]
        with_gap: bool,
        #[arg(long)]
        with_exact_prob: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode one syndrome given as hex.
    Decode {
        #[arg(long)]
        code: String,
        #[arg(long, default_value_t = 0.1)]
        p: f64,
        #[arg(long)]
        syndrome: String,
        #[arg(long, default_value = "mwpm")]
        method: DecodeMethod,
    },
    /// Exact distributions, RCI and resampled failure rates.
    Exact {
        #[arg(long)]
        code: String,
        #[arg(long)]
        p: f64,
        /// Comma-separated list of orders.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        alpha: Vec<f64>,
        #[arg(long, default_value = "joint")]
        what: ExactWhat,
        #[arg(long, default_value = "mld")]
        decoder: DecoderKind,
        /// Report RCI without the +k shift.
        #[arg(long)]
        raw_eq2: bool,
        #[arg(long, default_value = "json")]
        format: TableFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Resampling estimate from a batch file.
    Resample {
        #[arg(long)]
        batch: PathBuf,
        #[arg(long)]
        alpha: f64,
        /// Use recorded exact probabilities instead of counts.
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        n_tilde: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample-count bounds for resampling.
    Bounds {
        #[arg(long)]
        code: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        alpha: f64,
    },
    /// Post-selection estimates from a batch file.
    Postselect {
        #[arg(long)]
        batch: PathBuf,
        #[arg(long)]
        method: PsMethod,
        #[arg(long, default_value_t = 2)]
        alpha: u32,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Code distance; taken from the batch header when omitted.
        #[arg(long)]
        distance: Option<usize>,
        #[arg(long)]
        n_tilde: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a finite-size-scaling collapse to p, d, p_L, sigma rows.
    Collapse {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        p_th0: f64,
        #[arg(long, default_value_t = 1.5)]
        nu0: f64,
        #[arg(long, default_value_t = 200)]
        bootstrap: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Crossing point of two p, value curves.
    Crossing {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Read externally recorded samples and report estimates.
    Ingest {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        alpha: Vec<u32>,
        #[arg(long, value_delimiter = ',')]
        c: Vec<f64>,
        #[arg(long)]
        distance: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a TOML experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DecodeMethod {
    Mwpm,
    Mld,
    Gap,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExactWhat {
    Joint,
    Powerdist,
    Rci,
    Failure,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum PsMethod {
    Ps,
    Cgps,
    Combined,
}

/// A code file, or a `rotated-d5` style name.
fn load_code(arg: &str) -> Result<CodeSpec> {
    let path = Path::new(arg);
    if path.exists() {
        let file = File::open(path).with_context(|| format!("opening {arg}"))?;
        return serde_json::from_reader(file).with_context(|| format!("parsing code file {arg}"));
    }
    if let Some((layout, d)) = arg.split_once("-d") {
        if let (Ok(layout), Ok(d)) = (layout.parse::<Layout>(), d.parse::<usize>()) {
            return Ok(build(layout, d)?);
        }
    }
    bail!("no code file `{arg}` and not a name like rotated-d5")
}

fn output(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn emit_json(out: &Option<PathBuf>, value: &impl serde::Serialize) -> Result<()> {
    let mut w = output(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn joint_for(code: &CodeSpec, p: f64) -> Result<JointDistribution> {
    if code.n <= ENUMERATION_MAX_QUBITS && code.num_checks() <= 16 {
        Ok(enumerate_joint(code, p)?)
    } else {
        Ok(trellis_joint(code, &Trellis::new(code)?, p)?)
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Codegen { layout, distance, out } => emit_json(&out, &build(layout, distance)?),
        Command::Validate { code } => {
            let report = validate_code(&load_code(&code)?);
            print!("{report}");
            if !report.passed() {
                bail!("validation failed");
            }
            Ok(())
        }
        Command::Simulate { code, p, n_samples, seed, decoder, with_gap, with_exact_prob, out } => {
            let code = load_code(&code)?;
            let cfg = DecoderConfig { decoder, with_gap, with_exact_prob };
            let batch = run_batch(&code, &NoiseModel::new(p)?, n_samples, cfg, seed)?;
            io::write_batch(&batch, output(&out)?)?;
            Ok(())
        }
        Command::Decode { code, p, syndrome, method } => {
            let code = load_code(&code)?;
            let s = Syndrome::from_key(&SyndromeKey::from_hex(&syndrome)?, code.num_checks())?;
            let value = match method {
                DecodeMethod::Mwpm => {
                    let r = decode_mwpm(&DetectionGraph::new(&code), &code, &s)?;
                    json!({ "class": r.class, "weight": r.weight, "correction": r.correction.support() })
                }
                DecodeMethod::Mld => {
                    let t = Trellis::new(&code)?;
                    let class = decode_mld(&t, &NoiseModel::new(p)?, &s)?;
                    let probs = synres::exact_dist::coset_probability(&t, p, &s)?;
                    json!({ "class": class, "p_i": probs[0], "p_x": probs[1] })
                }
                DecodeMethod::Gap => {
                    let g = complementary_gap(&Trellis::new(&code)?, &s)?;
                    json!({ "class": g.best, "weights": g.weights, "gap": g.delta })
                }
            };
            emit_json(&None, &value)
        }
        Command::Exact { code, p, alpha, what, decoder, raw_eq2, format, out } => exact(&load_code(&code)?, p, &alpha, what, decoder, raw_eq2, format, &out),
        Command::Resample { batch, alpha, exact, n_tilde, seed, out } => {
            let batch = io::ingest_records(&batch)?;
            let estimate = if exact {
                sr_estimate(&sr_records(&batch)?, alpha)?
            } else {
                if alpha.fract() != 0.0 || alpha < 1.0 {
                    bail!("count-based resampling needs a positive integer alpha");
                }
                resample_workflow(&batch, alpha as u32, n_tilde, &mut ChaCha8Rng::seed_from_u64(seed))?.estimate
            };
            emit_json(&out, &estimate)
        }
        Command::Bounds { code, p, alpha } => emit_json(&None, &sample_bounds(alpha, &load_code(&code)?, &NoiseModel::new(p)?)),
        Command::Postselect { batch, method, alpha, c, distance, n_tilde, seed, out } => {
            let batch = io::ingest_records(&batch)?;
            let d = || distance.or(batch.distance).context("code distance unknown; pass --distance");
            let estimate = match method {
                PsMethod::Ps => ps_estimate(&batch)?,
                PsMethod::Cgps => cgps_filter(&batch, &CgpsConfig::new(c, d()?)?)?.estimate,
                PsMethod::Combined => combined_sr_cgps(&batch, alpha, &CgpsConfig::new(c, d()?)?, n_tilde, &mut ChaCha8Rng::seed_from_u64(seed))?,
            };
            emit_json(&out, &estimate)
        }
        Command::Collapse { input, p_th0, nu0, bootstrap, seed, out } => {
            let points = io::read_scaling_points(File::open(&input)?)?;
            let cfg = CollapseConfig { bootstrap, seed, ..CollapseConfig::default() };
            emit_json(&out, &scaling_collapse(&points, (p_th0, nu0), &cfg)?)
        }
        Command::Crossing { a, b } => {
            let x = crossing_point(&io::read_curve(File::open(a)?)?, &io::read_curve(File::open(b)?)?)?;
            emit_json(&None, &json!({ "p": x }))
        }
        Command::Ingest { input, alpha, c, distance, seed, out } => {
            let batch = io::ingest_records(&input)?;
            let mut rows: Vec<Estimate> = Vec::new();
            rows.push(Estimate::from_outcomes(batch.records().iter().map(|r| r.failed()), Method::Plain, 1.0, 1.0).expect("nonempty"));
            if let Ok(e) = ps_estimate(&batch) {
                rows.push(e);
            }
            for (i, &a) in alpha.iter().enumerate() {
                match resample_workflow(&batch, a, None, &mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64))) {
                    Ok(r) => rows.push(r.estimate),
                    Err(e) => eprintln!("alpha {a}: {e} (acceptance {})", acceptance_rate(&batch, a)),
                }
            }
            if !c.is_empty() {
                let d = distance.or(batch.distance).context("code distance unknown; pass --distance")?;
                for &cv in &c {
                    rows.push(cgps_filter(&batch, &CgpsConfig::new(cv, d)?)?.estimate);
                }
            }
            emit_json(&out, &rows)
        }
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let result = run_and_write(&cfg)?;
            eprintln!("{} rows -> {}, manifest -> {}", result.rows.len(), cfg.output.csv.display(), cfg.output.manifest.display());
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn exact(code: &CodeSpec, p: f64, alphas: &[f64], what: ExactWhat, decoder: DecoderKind, raw: bool, format: TableFormat, out: &Option<PathBuf>) -> Result<()> {
    let storable = code.num_checks() <= JOINT_MAX_CHECKS;
    match what {
        ExactWhat::Joint => {
            let joint = joint_for(code, p)?;
            match format {
                TableFormat::Json => io::write_joint_json(&joint, output(out)?)?,
                TableFormat::Csv => io::write_joint_csv(&joint, output(out)?)?,
            }
            Ok(())
        }
        ExactWhat::Powerdist => {
            let joint = joint_for(code, p)?;
            let dists = alphas
                .iter()
                .map(|&a| {
                    let q = power_distribution(&joint, a)?;
                    let table: Vec<_> = q.q.iter().map(|(k, v)| json!({ "syndrome": k, "q": format!("{v:.16e}") })).collect();
                    Ok(json!({ "alpha": a, "ln_normalizer": q.ln_normalizer, "q": table }))
                })
                .collect::<Result<Vec<_>>>()?;
            emit_json(out, &dists)
        }
        ExactWhat::Rci => {
            let values = if storable { rci_multi(&joint_for(code, p)?, alphas)? } else { rci_streaming(&Trellis::new(code)?, p, alphas)? };
            let rows: Vec<_> = values.iter().map(|v| json!({ "alpha": v.alpha, "p": p, "rci": if raw { v.raw } else { v.bits } })).collect();
            emit_json(out, &rows)
        }
        ExactWhat::Failure => {
            let trellis = Trellis::new(code)?;
            let graph = DetectionGraph::new(code);
            let values = if storable {
                let joint = joint_for(code, p)?;
                alphas
                    .iter()
                    .map(|&a| match decoder {
                        DecoderKind::Mld => exact_resampled_failure(&joint, a, |k| joint.mld_class(k)),
                        DecoderKind::Mwpm => exact_resampled_failure(&joint, a, |k| {
                            let s = Syndrome::from_key(k, code.num_checks()).ok()?;
                            decode_mwpm(&graph, code, &s).ok().map(|r| r.class)
                        }),
                    })
                    .collect::<synres::Result<Vec<f64>>>()?
            } else {
                exact_resampled_failure_streaming(&trellis, p, alphas, |s, v| match decoder {
                    DecoderKind::Mld => Ok(if v[1] > v[0] { synres::decoders::LogicalClass::X } else { synres::decoders::LogicalClass::I }),
                    DecoderKind::Mwpm => Ok(decode_mwpm(&graph, code, s)?.class),
                })?
            };
            let rows: Vec<_> = alphas.iter().zip(values).map(|(a, f)| json!({ "alpha": a, "p": p, "decoder": decoder, "failure": f })).collect();
            emit_json(out, &rows)
        }
    }
}
