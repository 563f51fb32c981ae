//! Finite-size-scaling collapse: p_L ≈ f((p − p_th) d^{1/ν}) with f a
//! quadratic. Coefficients come from weighted least squares; (p_th, ν) from
//! Nelder–Mead with random restarts.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint<T> {
    pub p: T,
    pub d: usize,
    pub p_l: T,
    pub sigma: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseConfig {
    pub restarts: usize,
    /// Case-resampling replicates for the uncertainties; 0 disables them.
    pub bootstrap: usize,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for CollapseConfig {
    fn default() -> Self {
        Self { restarts: 20, bootstrap: 200, seed: 0, max_iter: 4000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit<T> {
    pub p_th: T,
    pub nu: T,
    pub p_th_err: T,
    pub nu_err: T,
    pub coefficients: [T; 3],
    /// Weighted sum of squared residuals at the optimum.
    pub residual: T,
    pub reduced_chi2: T,
}

fn c<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("representable constant")
}

/// Weighted quadratic fit at fixed (p_th, ν): returns (χ², coefficients).
fn chi2<T: Real>(points: &[ScalingPoint<T>], p_th: T, nu: T) -> (T, [T; 3]) {
    if !(p_th > T::zero() && p_th < c(0.5) && nu > c(0.05) && nu < c(20.0)) {
        return (T::infinity(), [T::zero(); 3]);
    }
    let mut a = [[T::zero(); 3]; 3];
    let mut rhs = [T::zero(); 3];
    let xs: Vec<T> = points.iter().map(|pt| (pt.p - p_th) * T::from_usize(pt.d).expect("d").powf(T::one() / nu)).collect();
    for (pt, &x) in points.iter().zip(&xs) {
        let w = T::one() / (pt.sigma * pt.sigma);
        let phi = [T::one(), x, x * x];
        for i in 0..3 {
            rhs[i] = rhs[i] + w * phi[i] * pt.p_l;
            for j in 0..3 {
                a[i][j] = a[i][j] + w * phi[i] * phi[j];
            }
        }
    }
    let Some(coef) = solve3(a, rhs) else {
        return (T::infinity(), [T::zero(); 3]);
    };
    let mut total = T::zero();
    for (pt, &x) in points.iter().zip(&xs) {
        let r = (pt.p_l - (coef[0] + coef[1] * x + coef[2] * x * x)) / pt.sigma;
        total = total + r * r;
    }
    (total, coef)
}

/// Gaussian elimination with partial pivoting.
fn solve3<T: Real>(mut a: [[T; 3]; 3], mut b: [T; 3]) -> Option<[T; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).expect("finite"))?;
        if a[pivot][col].abs() <= T::epsilon() * a[pivot][col].abs().max(T::one()) * c(1e-6) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let top = a[col];
            let f = a[row][col] / top[col];
            for (v, &t) in a[row].iter_mut().zip(&top).skip(col) {
                *v = *v - f * t;
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = [T::zero(); 3];
    for row in (0..3).rev() {
        let mut s = b[row];
        for k in row + 1..3 {
            s = s - a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

struct Minimum<T> {
    x: [T; 2],
    f: T,
    converged: bool,
}

fn nelder_mead<T: Real, F: Fn([T; 2]) -> T>(f: F, start: [T; 2], step: [T; 2], max_iter: usize) -> Minimum<T> {
    let mut simplex = [start, [start[0] + step[0], start[1]], [start[0], start[1] + step[1]]];
    let mut values = simplex.map(&f);
    let (half, two) = (c::<T>(0.5), c::<T>(2.0));
    let mut converged = false;
    for _ in 0..max_iter {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j)));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);

        let spread = (values[2] - values[0]).abs();
        let size = (0..2).map(|k| (simplex[1][k] - simplex[0][k]).abs().max((simplex[2][k] - simplex[0][k]).abs())).fold(T::zero(), T::max);
        if values[0].is_finite() && spread <= c::<T>(1e-12) * (values[0].abs() + c(1e-12)) && size <= c(1e-9) {
            converged = true;
            break;
        }

        let centroid = [(simplex[0][0] + simplex[1][0]) * half, (simplex[0][1] + simplex[1][1]) * half];
        let along = |t: T| [centroid[0] + t * (simplex[2][0] - centroid[0]), centroid[1] + t * (simplex[2][1] - centroid[1])];
        let reflected = along(-T::one());
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = along(-two);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = if fr < values[2] { along(-half) } else { along(half) };
            let fc = f(contracted);
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = [simplex[0][0] + half * (simplex[i][0] - simplex[0][0]), simplex[0][1] + half * (simplex[i][1] - simplex[0][1])];
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(std::cmp::Ordering::Equal)).expect("three vertices");
    Minimum { x: simplex[best], f: values[best], converged }
}

fn check_points<T: Real>(points: &[ScalingPoint<T>]) -> Result<()> {
    let distances: BTreeSet<usize> = points.iter().map(|pt| pt.d).collect();
    if distances.len() < 3 {
        return Err(Error::DegenerateInput(format!("need at least 3 distances, got {}", distances.len())));
    }
    for &d in &distances {
        let count = points.iter().filter(|pt| pt.d == d).count();
        if count < 4 {
            return Err(Error::DegenerateInput(format!("distance {d} has {count} points, need at least 4")));
        }
    }
    if let Some(pt) = points.iter().find(|pt| pt.sigma.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater)) {
        return Err(Error::DegenerateInput(format!("nonpositive sigma at p = {:?}, d = {}", pt.p, pt.d)));
    }
    Ok(())
}

fn fit_once<T: Real>(points: &[ScalingPoint<T>], init: (T, T), cfg: &CollapseConfig, restarts: usize) -> Result<(T, T, T)> {
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let runs: Vec<Minimum<T>> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                [init.0, init.1]
            } else {
                let mut rng = base.clone();
                rng.set_stream(r as u64);
                let dp: f64 = rng.gen_range(-0.01..0.01);
                let dn: f64 = rng.gen_range(-0.3..0.3);
                [init.0 + c(dp), init.1 * c::<T>(dn.exp())]
            };
            nelder_mead(|x| chi2(points, x[0], x[1]).0, start, [c(0.004), start[1] * c(0.1)], cfg.max_iter)
        })
        .collect();
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.f.partial_cmp(&b.f).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(j)))
        .map(|(_, m)| m)
        .expect("at least one restart");
    if !best.converged || !best.f.is_finite() {
        return Err(Error::FitFailure { residual: best.f.to_f64_lossy() });
    }
    Ok((best.x[0], best.x[1], best.f))
}

pub fn scaling_collapse<T: Real>(points: &[ScalingPoint<T>], init: (T, T), cfg: &CollapseConfig) -> Result<ScalingFit<T>> {
    check_points(points)?;
    let (p_th, nu, residual) = fit_once(points, init, cfg, cfg.restarts)?;
    let (_, coefficients) = chi2(points, p_th, nu);

    let (mut p_th_err, mut nu_err) = (T::zero(), T::zero());
    if cfg.bootstrap > 0 {
        let base = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
        let reps: Vec<(T, T)> = (0..cfg.bootstrap)
            .into_par_iter()
            .filter_map(|b| {
                let mut rng = base.clone();
                rng.set_stream(b as u64);
                let sample: Vec<ScalingPoint<T>> = (0..points.len()).map(|_| points[rng.gen_range(0..points.len())]).collect();
                check_points(&sample).ok()?;
                let sub = CollapseConfig { seed: cfg.seed.wrapping_add(b as u64), ..*cfg };
                fit_once(&sample, (p_th, nu), &sub, 1).ok().map(|(a, b, _)| (a, b))
            })
            .collect();
        if reps.len() >= 2 {
            let sd = |vals: Vec<T>| {
                let n = T::from_usize(vals.len()).expect("count");
                let mean = vals.iter().copied().sum::<T>() / n;
                (vals.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / (n - T::one())).sqrt()
            };
            p_th_err = sd(reps.iter().map(|r| r.0).collect());
            nu_err = sd(reps.iter().map(|r| r.1).collect());
        }
    }
    let dof = T::from_usize(points.len().saturating_sub(5).max(1)).expect("dof");
    Ok(ScalingFit { p_th, nu, p_th_err, nu_err, coefficients, residual, reduced_chi2: residual / dof })
}
