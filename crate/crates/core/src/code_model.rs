//! Rotated and unrotated planar surface codes under bit-flip noise.
//!
//! Qubits and checks are indexed row-major over their lattice coordinates.
//! Z checks detect X errors. `x_logical` is a minimum-weight X string between
//! the two boundaries where X chains may terminate; the logical class of an
//! X-only pattern is its overlap parity with `z_logical`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Rotated,
    Unrotated,
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Layout::Rotated => f.write_str("rotated"),
            Layout::Unrotated => f.write_str("unrotated"),
        }
    }
}

impl std::str::FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rotated" => Ok(Layout::Rotated),
            "unrotated" => Ok(Layout::Unrotated),
            other => Err(Error::Format(format!("unknown layout `{other}`"))),
        }
    }
}

/// Lattice positions. Rotated-code check coordinates sit at plaquette centres.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub qubits: Vec<[f64; 2]>,
    /// Subset of `top`, `bottom`, `left`, `right` per qubit.
    pub qubit_tags: Vec<Vec<String>>,
    pub z_checks: Vec<[f64; 2]>,
    pub x_checks: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub distance: usize,
    pub layout: Layout,
    pub n: usize,
    pub k: usize,
    pub z_checks: Vec<Vec<usize>>,
    pub x_checks: Vec<Vec<usize>>,
    pub x_logical: Vec<usize>,
    pub z_logical: Vec<usize>,
    pub geometry: Geometry,
    /// Qubit order used by the trellis sweep.
    pub column_order: Vec<usize>,
}

impl CodeSpec {
    pub fn id(&self) -> String {
        format!("{}-d{}", self.layout, self.distance)
    }

    /// Number of Z checks, i.e. syndrome length.
    pub fn num_checks(&self) -> usize {
        self.z_checks.len()
    }

    /// Z checks containing each qubit.
    pub fn z_incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.n];
        for (j, check) in self.z_checks.iter().enumerate() {
            for &q in check {
                if q < self.n {
                    inc[q].push(j);
                }
            }
        }
        inc
    }
}

pub fn build(layout: Layout, d: usize) -> Result<CodeSpec> {
    match layout {
        Layout::Rotated => build_rotated(d),
        Layout::Unrotated => build_unrotated(d),
    }
}

fn tags(r: i64, c: i64, last_r: i64, last_c: i64) -> Vec<String> {
    let mut t = Vec::new();
    if r == 0 {
        t.push("top".to_string());
    }
    if r == last_r {
        t.push("bottom".to_string());
    }
    if c == 0 {
        t.push("left".to_string());
    }
    if c == last_c {
        t.push("right".to_string());
    }
    t
}

fn column_major(coords: &[[f64; 2]]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..coords.len()).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (coords[a], coords[b]);
        ca[1].total_cmp(&cb[1]).then(ca[0].total_cmp(&cb[0]))
    });
    order
}

/// Unrotated planar code on a (2d−1)×(2d−1) grid: qubits on sites with even
/// coordinate sum, Z checks on (odd row, even column), X checks on
/// (even row, odd column). X chains terminate on the top and bottom rows.
pub fn build_unrotated(d: usize) -> Result<CodeSpec> {
    if d < 2 {
        return Err(Error::InvalidDistance(d));
    }
    let size = 2 * d as i64 - 1;
    let mut index = vec![vec![usize::MAX; size as usize]; size as usize];
    let mut geometry = Geometry::default();
    for r in 0..size {
        for c in 0..size {
            if (r + c) % 2 == 0 {
                index[r as usize][c as usize] = geometry.qubits.len();
                geometry.qubits.push([r as f64, c as f64]);
                geometry.qubit_tags.push(tags(r, c, size - 1, size - 1));
            }
        }
    }
    let neighbours = |r: i64, c: i64| -> Vec<usize> {
        let mut s: Vec<usize> = [(r - 1, c), (r, c - 1), (r, c + 1), (r + 1, c)]
            .into_iter()
            .filter(|&(a, b)| a >= 0 && b >= 0 && a < size && b < size)
            .map(|(a, b)| index[a as usize][b as usize])
            .collect();
        s.sort_unstable();
        s
    };
    let mut z_checks = Vec::new();
    let mut x_checks = Vec::new();
    for r in 0..size {
        for c in 0..size {
            if r % 2 == 1 && c % 2 == 0 {
                z_checks.push(neighbours(r, c));
                geometry.z_checks.push([r as f64, c as f64]);
            } else if r % 2 == 0 && c % 2 == 1 {
                x_checks.push(neighbours(r, c));
                geometry.x_checks.push([r as f64, c as f64]);
            }
        }
    }
    let x_logical: Vec<usize> = (0..size).step_by(2).map(|r| index[r as usize][0]).collect();
    let z_logical: Vec<usize> = (0..size).step_by(2).map(|c| index[0][c as usize]).collect();
    let column_order = column_major(&geometry.qubits);
    Ok(CodeSpec { distance: d, layout: Layout::Unrotated, n: geometry.qubits.len(), k: 1, z_checks, x_checks, x_logical, z_logical, geometry, column_order })
}

/// Rotated code on a d×d qubit grid. Plaquette (i, j) covers qubits
/// (i..=i+1, j..=j+1); bulk plaquettes alternate Z/X by parity of i+j,
/// weight-two Z plaquettes sit on the top and bottom edges, X ones on the
/// left and right. For even d this yields d²/2 X and (d²−2)/2 Z checks.
pub fn build_rotated(d: usize) -> Result<CodeSpec> {
    if d < 2 {
        return Err(Error::InvalidDistance(d));
    }
    let di = d as i64;
    let mut geometry = Geometry::default();
    for r in 0..di {
        for c in 0..di {
            geometry.qubits.push([r as f64, c as f64]);
            geometry.qubit_tags.push(tags(r, c, di - 1, di - 1));
        }
    }
    let at = |r: i64, c: i64| (r * di + c) as usize;
    let plaquette = |i: i64, j: i64| -> Vec<usize> {
        let mut s = Vec::with_capacity(4);
        for (r, c) in [(i, j), (i, j + 1), (i + 1, j), (i + 1, j + 1)] {
            if r >= 0 && c >= 0 && r < di && c < di {
                s.push(at(r, c));
            }
        }
        s.sort_unstable();
        s
    };
    let mut z_checks = Vec::new();
    let mut x_checks = Vec::new();
    for i in -1..di {
        for j in -1..di {
            let bulk = (0..di - 1).contains(&i) && (0..di - 1).contains(&j);
            let horizontal_edge = (i == -1 || i == di - 1) && (0..di - 1).contains(&j);
            let vertical_edge = (j == -1 || j == di - 1) && (0..di - 1).contains(&i);
            let even = (i + j).rem_euclid(2) == 0;
            let centre = [i as f64 + 0.5, j as f64 + 0.5];
            if even && (bulk || horizontal_edge) {
                z_checks.push(plaquette(i, j));
                geometry.z_checks.push(centre);
            } else if !even && (bulk || vertical_edge) {
                x_checks.push(plaquette(i, j));
                geometry.x_checks.push(centre);
            }
        }
    }
    let x_logical: Vec<usize> = (0..di).map(|c| at(0, c)).collect();
    let z_logical: Vec<usize> = (0..di).map(|r| at(r, 0)).collect();
    let column_order = column_major(&geometry.qubits);
    Ok(CodeSpec { distance: d, layout: Layout::Rotated, n: d * d, k: 1, z_checks, x_checks, x_logical, z_logical, geometry, column_order })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationEntry {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub entries: Vec<ValidationEntry>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != CheckStatus::Fail)
    }

    pub fn status(&self, name: &str) -> Option<CheckStatus> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.status)
    }

    fn push(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        self.entries.push(ValidationEntry { name: name.to_string(), status: if ok { CheckStatus::Pass } else { CheckStatus::Fail }, detail: detail.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let tag = match e.status {
                CheckStatus::Pass => "PASS",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Skipped => "SKIP",
            };
            writeln!(f, "{tag:4} {:<24} {}", e.name, e.detail)?;
        }
        Ok(())
    }
}

/// Largest n for which the distance is verified by brute force.
pub const BRUTE_FORCE_MAX_QUBITS: usize = 26;

fn overlap(a: &[usize], b: &[usize]) -> usize {
    let set: BTreeSet<usize> = a.iter().copied().collect();
    b.iter().filter(|q| set.contains(q)).count()
}

fn to_mask(support: &[usize]) -> u128 {
    support.iter().fold(0u128, |m, &q| m ^ (1u128 << q))
}

/// Minimum weight over `x_logical ⊕ g` for `g` in the X-stabilizer group.
pub fn min_logical_weight(code: &CodeSpec) -> Option<usize> {
    if code.n > 128 || code.x_checks.len() > 30 {
        return None;
    }
    let gens: Vec<u128> = code.x_checks.iter().map(|c| to_mask(c)).collect();
    let mut current = to_mask(&code.x_logical);
    let mut best = current.count_ones() as usize;
    // Gray-code walk over the 2^m group elements.
    for i in 1u64..(1u64 << gens.len()) {
        current ^= gens[i.trailing_zeros() as usize];
        best = best.min(current.count_ones() as usize);
    }
    Some(best)
}

pub fn validate_code(code: &CodeSpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    let d = code.distance;
    let (expect_n, expect_z, expect_total) = match code.layout {
        Layout::Unrotated => (d * d + (d - 1) * (d - 1), d * (d - 1), 2 * d * (d - 1)),
        Layout::Rotated => (d * d, (d * d - 2 + d % 2) / 2, d * d - 1),
    };
    report.push("qubit_count", code.n == expect_n && code.geometry.qubits.len() == code.n, format!("n = {} (expected {expect_n})", code.n));
    report.push(
        "check_count",
        code.z_checks.len() == expect_z && code.z_checks.len() + code.x_checks.len() == expect_total,
        format!("{} Z checks, {} X checks", code.z_checks.len(), code.x_checks.len()),
    );
    report.push("logical_qubits", code.k == 1, format!("k = {}", code.k));

    let in_range = code.z_checks.iter().chain(code.x_checks.iter()).chain([&code.x_logical, &code.z_logical]).all(|s| s.iter().all(|&q| q < code.n));
    report.push("supports_in_range", in_range, "all supports index valid qubits");

    let mut bad = Vec::new();
    for (a, z) in code.z_checks.iter().enumerate() {
        for (b, x) in code.x_checks.iter().enumerate() {
            if overlap(z, x) % 2 == 1 {
                bad.push(format!("Z{a}/X{b}"));
            }
        }
    }
    report.push("check_commutation", bad.is_empty(), detail_list(&bad));

    let bad: Vec<String> = code.z_checks.iter().enumerate().filter(|(_, z)| overlap(z, &code.x_logical) % 2 == 1).map(|(a, _)| format!("Z{a}")).collect();
    report.push("x_logical_commutation", bad.is_empty(), detail_list(&bad));

    let bad: Vec<String> = code.x_checks.iter().enumerate().filter(|(_, x)| overlap(x, &code.z_logical) % 2 == 1).map(|(b, _)| format!("X{b}")).collect();
    report.push("z_logical_commutation", bad.is_empty(), detail_list(&bad));

    let ov = overlap(&code.x_logical, &code.z_logical);
    report.push("logical_anticommutation", ov % 2 == 1, format!("overlap {ov}"));

    if code.n <= BRUTE_FORCE_MAX_QUBITS && in_range {
        match min_logical_weight(code) {
            Some(w) => report.push("distance", w == d, format!("minimum logical weight {w}")),
            None => report.entries.push(skipped("distance", "too many X checks")),
        }
    } else {
        report.entries.push(skipped("distance", &format!("n = {} exceeds brute-force budget {BRUTE_FORCE_MAX_QUBITS}", code.n)));
    }
    report
}

fn skipped(name: &str, detail: &str) -> ValidationEntry {
    ValidationEntry { name: name.to_string(), status: CheckStatus::Skipped, detail: detail.to_string() }
}

fn detail_list(bad: &[String]) -> String {
    if bad.is_empty() {
        "ok".to_string()
    } else {
        format!("violations: {}", bad.join(", "))
    }
}
