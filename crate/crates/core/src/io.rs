//! File formats: JSONL sample batches, CSV/JSON joint tables, CSV curves.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::ScalingPoint;
use crate::batch::{prob_string, SampleBatch, SampleRecord};
use crate::error::{Error, Result};
use crate::exact_dist::{Construction, JointDistribution};
use crate::noise::SyndromeKey;

pub const BATCH_FORMAT: &str = "synres-batch/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchHeader {
    pub format: String,
    pub code_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "prob_string")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub n: usize,
}

pub fn write_batch<W: Write>(batch: &SampleBatch, w: W) -> Result<()> {
    let mut w = BufWriter::new(w);
    let header =
        BatchHeader { format: BATCH_FORMAT.into(), code_id: batch.code_id.clone(), distance: batch.distance, p: batch.p, seed: batch.seed, n: batch.len() };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for r in batch.records() {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_batch(batch: &SampleBatch, path: &Path) -> Result<()> {
    write_batch(batch, File::create(path)?)
}

/// One record line; `d` is accepted for external data that carries it.
#[derive(Deserialize)]
struct ExternalRecord {
    #[serde(flatten)]
    record: SampleRecord,
    #[serde(default)]
    d: Option<usize>,
}

/// Reads a batch from JSONL. The header line is optional, so bare
/// externally recorded `{syndrome, x, gap?, d?}` lines are accepted.
pub fn read_batch<R: Read>(r: R) -> Result<SampleBatch> {
    let mut header: Option<BatchHeader> = None;
    let mut records = Vec::new();
    let mut width: Option<usize> = None;
    let mut distance: Option<usize> = None;
    for (idx, line) in BufReader::new(r).lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if records.is_empty() && header.is_none() && trimmed.contains("\"format\"") {
            let h: BatchHeader = serde_json::from_str(trimmed).map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
            if h.format != BATCH_FORMAT {
                return Err(Error::Format(format!("unsupported batch format `{}`", h.format)));
            }
            header = Some(h);
            continue;
        }
        let ext: ExternalRecord = serde_json::from_str(trimmed).map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
        if ext.record.x > 1 {
            return Err(Error::Parse { line: line_no, message: format!("failure bit must be 0 or 1, got {}", ext.record.x) });
        }
        let w = ext.record.syndrome.bytes().len();
        match width {
            None => width = Some(w),
            Some(expected) if expected != w => {
                return Err(Error::Format(format!("line {line_no}: syndrome width {w} bytes, earlier lines use {expected}")));
            }
            _ => {}
        }
        if let Some(d) = ext.d {
            match distance {
                Some(prev) if prev != d => return Err(Error::Format(format!("line {line_no}: distance {d} differs from {prev}"))),
                _ => distance = Some(d),
            }
        }
        records.push(ext.record);
    }
    if records.is_empty() {
        return Err(Error::EmptyInput("no sample records".into()));
    }
    Ok(match header {
        Some(h) => {
            if h.n != records.len() {
                return Err(Error::Format(format!("header declares {} records, found {}", h.n, records.len())));
            }
            SampleBatch::new(h.code_id, h.distance.or(distance), h.p, h.seed, records)
        }
        None => SampleBatch::new("external", distance, None, None, records),
    })
}

pub fn ingest_records(path: &Path) -> Result<SampleBatch> {
    read_batch(File::open(path)?)
}

#[derive(Serialize, Deserialize)]
struct JointRow {
    syndrome: SyndromeKey,
    p_i: String,
    p_x: String,
}

pub fn write_joint_csv<W: Write>(joint: &JointDistribution<f64>, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for (k, v) in &joint.entries {
        out.serialize(JointRow { syndrome: k.clone(), p_i: prob_string::format(v[0]), p_x: prob_string::format(v[1]) }).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_joint_csv<R: Read>(r: R, code_id: &str, p: f64, num_checks: usize) -> Result<JointDistribution<f64>> {
    let mut entries = std::collections::BTreeMap::new();
    for (i, row) in csv::Reader::from_reader(r).deserialize::<JointRow>().enumerate() {
        let row = row.map_err(|e| Error::Parse { line: i + 2, message: e.to_string() })?;
        let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse { line: i + 2, message: e.to_string() });
        entries.insert(row.syndrome, [parse(&row.p_i)?, parse(&row.p_x)?]);
    }
    Ok(JointDistribution { code_id: code_id.into(), p, num_checks, construction: Construction::Enumeration, entries })
}

#[derive(Serialize, Deserialize)]
struct JointFile {
    code_id: String,
    p: String,
    num_checks: usize,
    construction: Construction,
    entries: Vec<JointRow>,
}

pub fn write_joint_json<W: Write>(joint: &JointDistribution<f64>, w: W) -> Result<()> {
    let file = JointFile {
        code_id: joint.code_id.clone(),
        p: prob_string::format(joint.p),
        num_checks: joint.num_checks,
        construction: joint.construction,
        entries: joint.entries.iter().map(|(k, v)| JointRow { syndrome: k.clone(), p_i: prob_string::format(v[0]), p_x: prob_string::format(v[1]) }).collect(),
    };
    serde_json::to_writer_pretty(w, &file)?;
    Ok(())
}

pub fn read_joint_json<R: Read>(r: R) -> Result<JointDistribution<f64>> {
    let file: JointFile = serde_json::from_reader(r)?;
    let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Format(format!("bad probability `{s}`: {e}")));
    let mut entries = std::collections::BTreeMap::new();
    for row in file.entries {
        entries.insert(row.syndrome, [num(&row.p_i)?, num(&row.p_x)?]);
    }
    Ok(JointDistribution { code_id: file.code_id, p: num(&file.p)?, num_checks: file.num_checks, construction: file.construction, entries })
}

#[derive(Deserialize)]
struct PointRow {
    p: f64,
    d: usize,
    #[serde(alias = "p_L")]
    p_l: f64,
    sigma: f64,
}

/// Collapse input: CSV with columns p, d, p_L, sigma.
pub fn read_scaling_points<R: Read>(r: R) -> Result<Vec<ScalingPoint<f64>>> {
    csv::Reader::from_reader(r)
        .deserialize::<PointRow>()
        .enumerate()
        .map(|(i, row)| {
            row.map(|r| ScalingPoint { p: r.p, d: r.d, p_l: r.p_l, sigma: r.sigma }).map_err(|e| Error::Parse { line: i + 2, message: e.to_string() })
        })
        .collect()
}

/// Curve CSV with columns p, value.
pub fn read_curve<R: Read>(r: R) -> Result<Vec<(f64, f64)>> {
    csv::Reader::from_reader(r)
        .deserialize::<(f64, f64)>()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| Error::Parse { line: i + 2, message: e.to_string() }))
        .collect()
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("{other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::batch::{run_batch, DecoderConfig, DecoderKind};
    use crate::code_model::build_rotated;
    use crate::exact_dist::enumerate_joint;
    use crate::noise::NoiseModel;

    #[test]
    fn batch_roundtrip() {
        let code = build_rotated(3).unwrap();
        let b = run_batch(&code, &NoiseModel::new(0.1).unwrap(), 500, DecoderConfig::new(DecoderKind::Mwpm).with_gap().with_exact_prob(), 2).unwrap();
        let mut buf = Vec::new();
        write_batch(&b, &mut buf).unwrap();
        let back = read_batch(&buf[..]).unwrap();
        assert_eq!(back, b);
        assert!(String::from_utf8(buf).unwrap().starts_with("{\"format\":\"synres-batch/1\""));
    }

    #[test]
    fn external_lines() {
        let text = "{\"syndrome\":\"00\",\"x\":0,\"gap\":3,\"d\":3}\n\n{\"syndrome\":\"05\",\"x\":1,\"d\":3}\n";
        let b = read_batch(text.as_bytes()).unwrap();
        assert_eq!((b.len(), b.distance, b.code_id.as_str()), (2, Some(3), "external"));
        assert_eq!(b.records()[0].gap, Some(3));
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(read_batch(&b""[..]), Err(Error::EmptyInput(_))));
        let bad = "{\"syndrome\":\"00\",\"x\":0}\n{\"syndrome\":\"0g\",\"x\":0}\n";
        assert!(matches!(read_batch(bad.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let widths = "{\"syndrome\":\"00\",\"x\":0}\n{\"syndrome\":\"0000\",\"x\":0}\n";
        assert!(matches!(read_batch(widths.as_bytes()), Err(Error::Format(_))));
        let x = "{\"syndrome\":\"00\",\"x\":2}\n";
        assert!(matches!(read_batch(x.as_bytes()), Err(Error::Parse { line: 1, .. })));
        let count = "{\"format\":\"synres-batch/1\",\"code_id\":\"c\",\"n\":2}\n{\"syndrome\":\"00\",\"x\":0}\n";
        assert!(matches!(read_batch(count.as_bytes()), Err(Error::Format(_))));
    }

    #[test]
    fn joint_roundtrips_are_lossless() {
        let joint = enumerate_joint(&build_rotated(3).unwrap(), 0.1).unwrap();
        let mut csv_buf = Vec::new();
        write_joint_csv(&joint, &mut csv_buf).unwrap();
        let back = read_joint_csv(&csv_buf[..], &joint.code_id, joint.p, joint.num_checks).unwrap();
        assert_eq!(back.entries, joint.entries);
        let mut json_buf = Vec::new();
        write_joint_json(&joint, &mut json_buf).unwrap();
        assert_eq!(read_joint_json(&json_buf[..]).unwrap(), joint);
    }

    #[test]
    fn curves_and_points() {
        let pts = read_scaling_points("p,d,p_L,sigma\n0.1,5,0.2,0.01\n".as_bytes()).unwrap();
        assert_eq!(pts[0].d, 5);
        let c = read_curve("p,value\n0.1,0.5\n0.2,0.4\n".as_bytes()).unwrap();
        assert_eq!(c, vec![(0.1, 0.5), (0.2, 0.4)]);
        assert!(matches!(read_curve("p,value\n0.1,x\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
    }
}
