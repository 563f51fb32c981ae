use crate::error::{Error, Result};
use crate::scalar::Real;

/// Abscissa where two curves on a shared grid intersect, by linear
/// interpolation of their difference. Grid points where the curves touch
/// are skipped so a touch is not counted twice.
pub fn crossing_point<T: Real>(a: &[(T, T)], b: &[(T, T)]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::Dimension { expected: a.len(), got: b.len() });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("curve".into()));
    }
    let mut diff = Vec::with_capacity(a.len());
    for (pa, pb) in a.iter().zip(b) {
        if pa.0 != pb.0 {
            return Err(Error::Format(format!("curves use different grids ({:?} vs {:?})", pa.0, pb.0)));
        }
        let d = pa.1 - pb.1;
        if d != T::zero() {
            diff.push((pa.0, d));
        }
    }
    let crossings: Vec<T> = diff
        .windows(2)
        .filter(|w| (w[0].1 > T::zero()) != (w[1].1 > T::zero()))
        .map(|w| {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            x0 + (x1 - x0) * y0 / (y0 - y1)
        })
        .collect();
    match crossings.len() {
        0 => Err(Error::NoCrossing),
        1 => Ok(crossings[0]),
        _ => Err(Error::AmbiguousCrossing(crossings.iter().map(|c| c.to_f64_lossy()).collect())),
    }
}
