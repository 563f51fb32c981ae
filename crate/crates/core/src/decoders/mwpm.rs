use crate::code_model::CodeSpec;
use crate::decoders::{blossom::max_weight_matching, DecodeResult};
use crate::error::{Error, Result};
use crate::graph::DetectionGraph;
use crate::noise::{class_of, ErrorPattern, Syndrome};

/// Minimum-weight perfect matching on the defect graph.
///
/// Vertices are the k defects plus one private boundary copy per defect;
/// boundary copies are pairwise joined at zero cost. Defect pairs whose
/// distance is no shorter than both going to the boundary are dropped,
/// which never changes the optimum.
pub fn decode_mwpm(graph: &DetectionGraph, code: &CodeSpec, s: &Syndrome) -> Result<DecodeResult> {
    if s.len() != code.num_checks() {
        return Err(Error::Dimension { expected: code.num_checks(), got: s.len() });
    }
    let defects = s.defects();
    let k = defects.len();
    let mut correction = ErrorPattern::zeros(code.n);
    if k == 0 {
        return Ok(DecodeResult { correction, weight: 0, class: crate::decoders::LogicalClass::I });
    }
    let boundary = graph.boundary();
    let to_boundary: Vec<u32> = defects.iter().map(|&a| graph.distance(a, boundary)).collect();

    let mut edges: Vec<(usize, usize, u32)> = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in i + 1..k {
            let dij = graph.distance(defects[i], defects[j]);
            if dij != u32::MAX && (dij as u64) < to_boundary[i] as u64 + to_boundary[j] as u64 {
                edges.push((i, j, dij));
            }
        }
        if to_boundary[i] != u32::MAX {
            edges.push((i, k + i, to_boundary[i]));
        }
        for j in i + 1..k {
            edges.push((k + i, k + j, 0));
        }
    }
    let top = edges.iter().map(|e| e.2 as i64).max().unwrap_or(0) + 1;
    let weighted: Vec<(usize, usize, i64)> = edges.iter().map(|&(a, b, w)| (a, b, top - w as i64)).collect();
    let mate = max_weight_matching(&weighted, true);

    for i in 0..k {
        let Some(Some(partner)) = mate.get(i).copied() else {
            return Err(Error::Contract(format!("defect {} left unmatched", defects[i])));
        };
        let path = if partner < k {
            if partner < i {
                continue;
            }
            graph.path(defects[i], defects[partner])
        } else {
            graph.path(defects[i], boundary)
        };
        for q in path {
            correction.bits[q] ^= true;
        }
    }
    let weight = correction.weight() as u32;
    let class = class_of(code, &correction);
    Ok(DecodeResult { correction, weight, class })
}
