//! Trajectory records: the iterates, step sizes, noise, and chosen update
//! directions of one run, immutable once the run completes.
//!
//! The stored quantities always satisfy the sign convention
//! `x_{k+1} = x_k - alpha_k * v_k + e_k`, whatever method produced them.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::StepSchedule;
use crate::vecops;

/// Method descriptor stored alongside a trajectory so a record can be
/// re-interpreted (and replayed) without the original config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MethodMeta {
    Inexact {
        c_b: f64,
        xi: f64,
        tau: f64,
        noise: String,
        samples: usize,
    },
    Stochastic {
        sigma: f64,
        distribution: String,
    },
    Momentum {
        kappa: f64,
        iota_m: f64,
    },
    /// Hand-built sequences used by the diagnostics (no generating method).
    Synthetic,
}

/// Sidecar metadata serialized as JSON next to the CSV record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub method: MethodMeta,
    pub function: String,
    pub schedule: Option<StepSchedule>,
    pub seed: u64,
    pub dim: usize,
    pub k_steps: usize,
}

/// Record of one run: iterates `x_0..x_K`, step sizes, noise terms, and
/// chosen directions `v_0..v_{K-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub x: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    pub e: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    /// Number of steps `K` (one less than the number of iterates).
    pub fn k_steps(&self) -> usize {
        self.alpha.len()
    }

    pub fn dim(&self) -> usize {
        self.x[0].len()
    }

    pub fn last(&self) -> &[f64] {
        self.x.last().expect("nonempty")
    }

    /// Builds a synthetic record from explicit iterates; `v` and `e` are
    /// derived so the sign convention holds exactly with the given alphas
    /// (`e = 0`, `v_k = (x_k - x_{k+1}) / alpha_k`).
    pub fn synthetic(x: Vec<Vec<f64>>, alpha: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyInput("synthetic trajectory"));
        }
        if x.len() != alpha.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "need len(x) = len(alpha) + 1, got {} and {}",
                x.len(),
                alpha.len()
            )));
        }
        let dim = x[0].len();
        let v: Vec<Vec<f64>> = (0..alpha.len())
            .map(|k| {
                vecops::scale(&vecops::sub(&x[k], &x[k + 1]), 1.0 / alpha[k])
            })
            .collect();
        let e = vec![vecops::zeros(dim); alpha.len()];
        Ok(Self {
            x,
            alpha,
            e,
            v,
            meta: TrajectoryMeta {
                method: MethodMeta::Synthetic,
                function: String::new(),
                schedule: None,
                seed: 0,
                dim,
                k_steps: 0,
            },
        })
    }

    /// Checks the structural length invariants.
    pub fn validate(&self) -> Result<()> {
        let k = self.alpha.len();
        if self.x.len() != k + 1 || self.e.len() != k || self.v.len() != k {
            return Err(Error::InvalidParameter(format!(
                "length invariant broken: x={}, alpha={}, e={}, v={}",
                self.x.len(),
                k,
                self.e.len(),
                self.v.len()
            )));
        }
        let n = self.dim();
        for (i, p) in self.x.iter().enumerate() {
            if p.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: p.len(),
                });
            }
            if !vecops::is_finite(p) {
                return Err(Error::BlowUp {
                    step: i,
                    norm: f64::NAN,
                });
            }
        }
        Ok(())
    }

    /// Largest residual of `x_{k+1} = x_k - alpha_k v_k + e_k` over all steps,
    /// relative to `1 + |x_{k+1}|`.
    pub fn record_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.k_steps() {
            let mut pred = self.x[k].clone();
            vecops::axpy(&mut pred, -self.alpha[k], &self.v[k]);
            for (p, e) in pred.iter_mut().zip(&self.e[k]) {
                *p += e;
            }
            let r = vecops::dist(&pred, &self.x[k + 1]) / (1.0 + vecops::norm(&self.x[k + 1]));
            worst = worst.max(r);
        }
        worst
    }

    /// Indices kept when thinning: every `stride`-th iterate plus a dense
    /// tail of `tail` iterates. `stride = 1` keeps everything.
    pub fn thinned_indices(&self, stride: usize, tail: usize) -> Vec<usize> {
        let n = self.x.len();
        let stride = stride.max(1);
        let tail_start = n.saturating_sub(tail);
        let mut keep: Vec<usize> = (0..tail_start).step_by(stride).collect();
        keep.extend(tail_start..n);
        keep
    }

    /// Writes the iterate record as CSV: header `k,alpha,e_norm,x_0..x_{n-1}`,
    /// one row per iterate; the terminal row has no step data.
    pub fn to_csv(&self) -> String {
        let n = self.dim();
        let mut out = String::new();
        out.push_str("k,alpha,e_norm");
        for j in 0..n {
            let _ = write!(out, ",x_{j}");
        }
        out.push('\n');
        for (k, point) in self.x.iter().enumerate() {
            if k < self.alpha.len() {
                let _ = write!(out, "{},{},{}", k, self.alpha[k], vecops::norm(&self.e[k]));
            } else {
                let _ = write!(out, "{k},,");
            }
            for c in point {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the CSV produced by [`Trajectory::to_csv`]. The result carries
    /// synthetic metadata and zeroed noise/direction records (the CSV stores
    /// only noise magnitudes).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or(Error::EmptyInput("trajectory csv"))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 4 || cols[0] != "k" || cols[1] != "alpha" || cols[2] != "e_norm" {
            return Err(Error::TrajectoryParse {
                line: 1,
                message: "expected header k,alpha,e_norm,x_0..".into(),
            });
        }
        let dim = cols.len() - 3;
        let mut x = Vec::new();
        let mut alpha = Vec::new();
        for (idx, line) in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != dim + 3 {
                return Err(Error::TrajectoryParse {
                    line: idx + 1,
                    message: format!("expected {} fields, got {}", dim + 3, fields.len()),
                });
            }
            let k: usize = fields[0].parse().map_err(|_| Error::TrajectoryParse {
                line: idx + 1,
                message: format!("bad index {:?}", fields[0]),
            })?;
            if k != x.len() {
                return Err(Error::TrajectoryParse {
                    line: idx + 1,
                    message: format!("non-contiguous index {k}"),
                });
            }
            if !fields[1].is_empty() {
                let a: f64 = fields[1].parse().map_err(|_| Error::TrajectoryParse {
                    line: idx + 1,
                    message: format!("bad alpha {:?}", fields[1]),
                })?;
                if !(a > 0.0) || !a.is_finite() {
                    return Err(Error::TrajectoryParse {
                        line: idx + 1,
                        message: format!("alpha must be positive and finite, got {a}"),
                    });
                }
                alpha.push(a);
            }
            let mut point = Vec::with_capacity(dim);
            for f in &fields[3..] {
                let c: f64 = f.parse().map_err(|_| Error::TrajectoryParse {
                    line: idx + 1,
                    message: format!("bad coordinate {f:?}"),
                })?;
                if !c.is_finite() {
                    return Err(Error::TrajectoryParse {
                        line: idx + 1,
                        message: "non-finite coordinate".into(),
                    });
                }
                point.push(c);
            }
            x.push(point);
        }
        if x.is_empty() {
            return Err(Error::EmptyInput("trajectory csv"));
        }
        if alpha.len() + 1 != x.len() {
            return Err(Error::TrajectoryParse {
                line: x.len() + 1,
                message: format!(
                    "expected {} step rows with alpha, found {}",
                    x.len() - 1,
                    alpha.len()
                ),
            });
        }
        Trajectory::synthetic(x, alpha)
    }

    /// Writes `<stem>.csv` and `<stem>.meta.json`.
    pub fn save(&self, stem: &Path) -> Result<()> {
        let csv_path = stem.with_extension("csv");
        let meta_path = stem.with_extension("meta.json");
        std::fs::write(csv_path, self.to_csv())?;
        std::fs::write(meta_path, serde_json::to_string_pretty(&self.meta)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Trajectory {
        Trajectory::synthetic(
            vec![vec![0.0, 1.0], vec![1.0, 0.5], vec![1.5, 0.25]],
            vec![1.0, 0.5],
        )
        .unwrap()
    }

    #[test]
    fn synthetic_record_is_consistent() {
        let t = sample();
        t.validate().unwrap();
        assert!(t.record_residual() < 1e-15);
    }

    #[test]
    fn csv_round_trip_preserves_points() {
        let t = sample();
        let parsed = Trajectory::from_csv(&t.to_csv()).unwrap();
        assert_eq!(parsed.x, t.x);
        assert_eq!(parsed.alpha, t.alpha);
    }

    #[test]
    fn csv_rejects_bad_header() {
        assert!(Trajectory::from_csv("a,b,c,d\n").is_err());
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        let text = "k,alpha,e_norm,x_0\n0,1.0,0.0,1.0,9.9\n";
        assert!(Trajectory::from_csv(text).is_err());
    }

    #[test]
    fn thinning_keeps_stride_and_tail() {
        let t = Trajectory::synthetic(
            (0..11).map(|i| vec![i as f64]).collect(),
            vec![1.0; 10],
        )
        .unwrap();
        let keep = t.thinned_indices(3, 2);
        assert_eq!(keep, vec![0, 3, 6, 9, 10]);
        assert_eq!(t.thinned_indices(1, 0), (0..11).collect::<Vec<_>>());
    }
}
