//! Minimum-norm point of a convex hull (Wolfe's algorithm) and the
//! criticality distance built on it.

use rand::Rng;

use crate::error::{Error, Result};
use crate::objectives::PiecewiseSmoothFunction;
use crate::vecops;

const DEFAULT_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 10_000;

/// Distance from the origin to `co(generators)` to absolute tolerance 1e-10.
pub fn min_norm_distance(generators: &[Vec<f64>]) -> Result<f64> {
    min_norm_point(generators).map(|p| vecops::norm(&p))
}

/// The minimum-norm point of `co(generators)`.
///
/// Wolfe's algorithm: maintain an affinely independent "corral" of
/// generators, move to the min-norm point of its affine hull, restrict back
/// to the convex hull along the way, and add the most violating generator
/// until no generator improves on the current point.
pub fn min_norm_point(generators: &[Vec<f64>]) -> Result<Vec<f64>> {
    if generators.is_empty() {
        return Err(Error::EmptyInput("min-norm-point generators"));
    }
    let dim = generators[0].len();
    for g in generators {
        if g.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: g.len(),
            });
        }
    }
    // Scale-aware tolerance.
    let scale = generators
        .iter()
        .map(|g| vecops::norm(g))
        .fold(0.0f64, f64::max)
        .max(1.0);
    let tol = DEFAULT_TOL * scale;

    // Start from the generator of least norm.
    let start = (0..generators.len())
        .min_by(|&a, &b| vecops::norm(&generators[a]).total_cmp(&vecops::norm(&generators[b])))
        .unwrap();
    let mut corral: Vec<usize> = vec![start];
    let mut weights: Vec<f64> = vec![1.0];
    let mut point = generators[start].clone();

    for _ in 0..MAX_ITERATIONS {
        // Most violating generator: minimizes <point, g>.
        let (best_idx, best_val) = (0..generators.len())
            .map(|i| (i, vecops::dot(&point, &generators[i])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let norm_sq = vecops::norm_sq(&point);
        if best_val >= norm_sq - tol * scale {
            return Ok(point);
        }
        if !corral.contains(&best_idx) {
            corral.push(best_idx);
            weights.push(0.0);
        }

        // Inner loop: project onto the affine hull of the corral, clipping
        // back into the convex hull while any weight would go negative.
        loop {
            let affine = affine_min_norm(generators, &corral)?;
            if affine.iter().all(|&w| w > -1e-14) {
                weights = affine;
                break;
            }
            // Largest feasible step from `weights` toward `affine`.
            let mut step = 1.0f64;
            for (w, a) in weights.iter().zip(&affine) {
                if a < w {
                    let limit = w / (w - a);
                    if limit < step {
                        step = limit;
                    }
                }
            }
            for (w, a) in weights.iter_mut().zip(&affine) {
                *w += step * (*a - *w);
            }
            // Drop members with (numerically) zero weight.
            let keep: Vec<bool> = weights.iter().map(|&w| w > 1e-12).collect();
            if keep.iter().all(|&k| k) {
                // Numerical safeguard: force the smallest weight out.
                let drop = weights
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(i, _)| i)
                    .unwrap();
                corral.remove(drop);
                weights.remove(drop);
            } else {
                let mut i = 0;
                corral.retain(|_| {
                    let k = keep[i];
                    i += 1;
                    k
                });
                let mut i = 0;
                weights.retain(|_| {
                    let k = keep[i];
                    i += 1;
                    k
                });
            }
            let total: f64 = weights.iter().sum();
            for w in weights.iter_mut() {
                *w /= total;
            }
        }

        point = vecops::zeros(dim);
        for (&i, &w) in corral.iter().zip(&weights) {
            vecops::axpy(&mut point, w, &generators[i]);
        }
    }
    let gap = {
        let best = (0..generators.len())
            .map(|i| vecops::dot(&point, &generators[i]))
            .fold(f64::INFINITY, f64::min);
        vecops::norm_sq(&point) - best
    };
    Err(Error::SolverStall {
        iterations: MAX_ITERATIONS,
        gap,
    })
}

/// Min-norm point of the affine hull of the selected generators, returned as
/// barycentric weights. Solves the KKT system
/// `sum_j w_j <g_i, g_j> + mu = 0, sum w = 1` by Gaussian elimination.
fn affine_min_norm(generators: &[Vec<f64>], corral: &[usize]) -> Result<Vec<f64>> {
    let m = corral.len();
    let mut a = vec![vec![0.0f64; m + 2]; m + 1];
    for (r, &i) in corral.iter().enumerate() {
        for (c, &j) in corral.iter().enumerate() {
            a[r][c] = vecops::dot(&generators[i], &generators[j]);
        }
        a[r][m] = 1.0; // multiplier column
        a[r][m + 1] = 0.0; // rhs
    }
    for c in 0..m {
        a[m][c] = 1.0;
    }
    a[m][m] = 0.0;
    a[m][m + 1] = 1.0;
    solve_in_place(&mut a).map(|sol| sol[..m].to_vec())
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_in_place(a: &mut [Vec<f64>]) -> Result<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::SolverStall {
                iterations: 0,
                gap: f64::NAN,
            });
        }
        a.swap(col, pivot);
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for c in col..=n {
                    let v = a[col][c];
                    a[row][c] -= factor * v;
                }
            }
        }
    }
    Ok((0..n).map(|r| a[r][n] / a[r][r]).collect())
}

/// Distance from the origin to the convex hull of `m` Clarke generators
/// sampled in `B(x, r)`; `r = 0` uses the exact generator set at `x`.
pub fn criticality_distance(
    f: &PiecewiseSmoothFunction,
    x: &[f64],
    r: f64,
    m: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    assert!(r >= 0.0);
    assert!(m >= 1);
    f.check_dim(x)?;
    let generators = sample_generators(f, x, r, m, rng)?;
    min_norm_distance(&generators)
}

/// Clarke generators at `m` uniform points of `B(x, r)` (the exact set at
/// `x` when `r = 0`).
pub fn sample_generators(
    f: &PiecewiseSmoothFunction,
    x: &[f64],
    r: f64,
    m: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Vec<f64>>> {
    if r == 0.0 {
        let tol = f.activity_tol(f.evaluate(x)?);
        return Ok(f.clarke_generators(x, tol)?.generators);
    }
    let mut generators = Vec::with_capacity(m);
    for _ in 0..m {
        let p = crate::objectives::uniform_in_ball(x, r, rng);
        let tol = f.activity_tol(f.evaluate(&p)?);
        generators.push(f.clarke_generators(&p, tol)?.generators[0].clone());
    }
    Ok(generators)
}
