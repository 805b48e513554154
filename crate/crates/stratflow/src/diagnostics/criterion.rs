//! Convergence-criterion residuals: for a potential `L` and index pairs
//! `k1 < k2`, the quantity
//! `r(k1, k2) = diam(x_{[k1, k2]}) + L(x_{k2}) - L(x_{k1})`.
//!
//! A sequence whose residuals are eventually nonpositive (in the limsup
//! sense) is Cauchy; a residual bounded away from zero for late windows
//! certifies non-convergence.

use serde::{Deserialize, Serialize};

use crate::diagnostics::diameter::{diameter_of, planar_diameter_sorted};
use crate::trajectory::Trajectory;

/// Pair-sampling policy for the residual profile: `k1` on a geometric grid,
/// `k2` geometrically subsampled up to `max_k2_samples` per `k1` (the final
/// index is always included).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairGrid {
    pub ratio: f64,
    pub max_k2_samples: usize,
}

impl Default for PairGrid {
    fn default() -> Self {
        Self {
            ratio: 1.3,
            max_k2_samples: 200,
        }
    }
}

impl PairGrid {
    fn geometric(&self, from: usize, to: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut k = from.max(1) as f64;
        while (k as usize) < to {
            out.push(k as usize);
            k = (k * self.ratio).max(k + 1.0);
        }
        out
    }

    fn k2_samples(&self, k1: usize, k_end: usize) -> Vec<usize> {
        let span = k_end - k1;
        let mut out: Vec<usize> = if span <= self.max_k2_samples {
            ((k1 + 1)..=k_end).collect()
        } else {
            // Geometric spacing of the offset k2 - k1.
            let mut offsets = Vec::with_capacity(self.max_k2_samples);
            let growth = (span as f64).powf(1.0 / self.max_k2_samples as f64);
            let mut off = 1.0f64;
            while (off as usize) < span {
                offsets.push(off as usize);
                off = (off * growth).max(off + 1.0);
            }
            offsets.push(span);
            offsets.dedup();
            offsets.into_iter().map(|o| k1 + o).collect()
        };
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CriterionCell {
    pub k1: usize,
    pub k2: usize,
    pub diam: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionProfile {
    pub cells: Vec<CriterionCell>,
    /// Max residual over all sampled cells with `k1 >= k_min`.
    pub max_tail: f64,
    /// Per-`k1` maxima over the sampled `k2`.
    pub per_k1_max: Vec<(usize, f64)>,
}

/// Residual profile of a trajectory under the given potential evaluator.
pub fn criterion_residual(
    t: &Trajectory,
    potential: &dyn Fn(&[f64]) -> f64,
    k_min: usize,
    grid: &PairGrid,
) -> CriterionProfile {
    let k_end = t.k_steps();
    assert!(k_min < k_end, "k_min must precede the final index");
    let planar = t.dim() == 2;
    // Points sorted once by (x, y); each cell filters this order.
    let sorted: Vec<(usize, (f64, f64))> = if planar {
        let mut v: Vec<(usize, (f64, f64))> = t
            .x
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (p[0], p[1])))
            .collect();
        v.sort_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.1 .1.total_cmp(&b.1 .1)));
        v
    } else {
        Vec::new()
    };

    let mut cells = Vec::new();
    let mut per_k1_max = Vec::new();
    let mut max_tail = f64::NEG_INFINITY;
    for k1 in grid.geometric(k_min.max(1), k_end) {
        let l1 = potential(&t.x[k1]);
        let mut k1_max = f64::NEG_INFINITY;
        for k2 in grid.k2_samples(k1, k_end) {
            let diam = if planar {
                let cell: Vec<(f64, f64)> = sorted
                    .iter()
                    .filter(|(i, _)| *i >= k1 && *i <= k2)
                    .map(|(_, p)| *p)
                    .collect();
                planar_diameter_sorted(&cell)
            } else {
                diameter_of(k2 - k1 + 1, |i| t.x[k1 + i].as_slice())
            };
            let residual = diam + potential(&t.x[k2]) - l1;
            cells.push(CriterionCell {
                k1,
                k2,
                diam,
                residual,
            });
            k1_max = k1_max.max(residual);
            max_tail = max_tail.max(residual);
        }
        per_k1_max.push((k1, k1_max));
    }
    CriterionProfile {
        cells,
        max_tail,
        per_k1_max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecops;

    /// `x_k = (1/k)(cos log k, sin log k)` for `k = 1..=count`.
    pub(crate) fn inward_spiral(count: usize) -> Trajectory {
        let x: Vec<Vec<f64>> = (1..=count)
            .map(|k| {
                let k = k as f64;
                vec![k.ln().cos() / k, k.ln().sin() / k]
            })
            .collect();
        Trajectory::synthetic(x, vec![1.0; count - 1]).unwrap()
    }

    /// Unit-circle walker with angle increments `1/j`: non-Cauchy since the
    /// angle diverges while steps vanish.
    pub(crate) fn circle_walker(count: usize) -> Trajectory {
        let mut theta = 0.0f64;
        let mut x = Vec::with_capacity(count);
        for j in 1..=count {
            x.push(vec![theta.cos(), theta.sin()]);
            theta += 1.0 / j as f64;
        }
        Trajectory::synthetic(x, vec![1.0; count - 1]).unwrap()
    }

    #[test]
    fn constant_sequence_zero_residual() {
        let t = Trajectory::synthetic(vec![vec![1.0, 2.0]; 50], vec![1.0; 49]).unwrap();
        let profile = criterion_residual(&t, &|_| 0.0, 1, &PairGrid::default());
        for c in &profile.cells {
            assert_eq!(c.residual, 0.0);
        }
    }

    #[test]
    fn convergent_spiral_has_nonpositive_tail() {
        // Potential L = 2 ||x|| dominates the tail diameter.
        let t = inward_spiral(20_000);
        let profile = criterion_residual(
            &t,
            &|x| 2.0 * vecops::norm(x),
            99, // trajectory index 99 holds x_100
            &PairGrid::default(),
        );
        assert!(
            profile.max_tail <= 1e-9,
            "max tail residual {}",
            profile.max_tail
        );
    }

    #[test]
    fn circle_walker_residual_stays_large() {
        let t = circle_walker(20_000);
        let profile = criterion_residual(&t, &|_| 0.0, 100, &PairGrid::default());
        // Residual at least 1 keeps recurring for late k1.
        let late: Vec<&(usize, f64)> = profile
            .per_k1_max
            .iter()
            .filter(|(k1, _)| *k1 <= 20_000 / 3)
            .collect();
        assert!(!late.is_empty());
        for (k1, r) in late {
            assert!(*r >= 1.0, "k1 = {k1}: residual {r}");
        }
    }
}
