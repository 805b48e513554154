//! Tail-sum error functionals over a (zero-extended) trajectory:
//! `g1_k = Q (S_k + E_k)` and `g2_k = Q (alpha_k^{1+beta} + alpha_k g1_k^theta + |e_k|)`
//! with `S_k = sum_{j>=k} alpha_j^{1+beta}` and `E_k = sum_{j>=k} |e_j|`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::Trajectory;
use crate::vecops;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailErrorModel {
    pub q: f64,
    pub beta: f64,
    pub theta: f64,
}

impl TailErrorModel {
    pub fn new(q: f64, beta: f64, theta: f64) -> Result<Self> {
        if !(q > 0.0) || !(beta > 0.0) {
            return Err(Error::InvalidParameter(
                "tail model needs q > 0 and beta > 0".into(),
            ));
        }
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in (0, 1), got {theta}"
            )));
        }
        Ok(Self { q, beta, theta })
    }

    /// `(g1_k, g2_k)` for the data zero-extended beyond `k_end`.
    pub fn tail_errors(&self, t: &Trajectory, k: usize, k_end: usize) -> (f64, f64) {
        let table = self.precompute(t, k_end);
        (table.g1[k], table.g2(k))
    }

    /// Suffix tables for all `k` at once; `k_end` truncates (zero-extends)
    /// the data, `k_end = K` uses the full record.
    pub fn precompute(&self, t: &Trajectory, k_end: usize) -> TailTable {
        assert!(k_end <= t.k_steps(), "k_end beyond the record");
        let mut g1 = vec![0.0f64; k_end + 1];
        let mut increments = vec![0.0f64; k_end];
        // Suffix accumulation keeps g1_k - g1_{k+1} exactly equal to the
        // stored increment in floating point.
        for k in (0..k_end).rev() {
            let inc = self.q * (t.alpha[k].powf(1.0 + self.beta) + vecops::norm(&t.e[k]));
            increments[k] = inc;
            g1[k] = g1[k + 1] + inc;
        }
        TailTable {
            model: *self,
            alpha: t.alpha[..k_end].to_vec(),
            e_norm: t.e[..k_end].iter().map(|e| vecops::norm(e)).collect(),
            g1,
            increments,
        }
    }
}

/// Precomputed tail errors for one trajectory.
#[derive(Debug, Clone)]
pub struct TailTable {
    pub model: TailErrorModel,
    alpha: Vec<f64>,
    e_norm: Vec<f64>,
    /// `g1[k]` for `k = 0..=k_end`; `g1[k_end] = 0` by zero extension.
    pub g1: Vec<f64>,
    /// `g1[k] - g1[k+1]`, exact by construction.
    pub increments: Vec<f64>,
}

impl TailTable {
    pub fn g2(&self, k: usize) -> f64 {
        if k >= self.alpha.len() {
            return 0.0;
        }
        let m = &self.model;
        m.q * (self.alpha[k].powf(1.0 + m.beta)
            + self.alpha[k] * self.g1[k].powf(m.theta)
            + self.e_norm[k])
    }

    pub fn g2_sum(&self, from: usize, to: usize) -> f64 {
        (from..to).map(|k| self.g2(k)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(alpha: Vec<f64>, e: Vec<f64>) -> Trajectory {
        let k = alpha.len();
        let mut t = Trajectory::synthetic(vec![vec![0.0]; k + 1], alpha).unwrap();
        t.e = e.into_iter().map(|v| vec![v]).collect();
        t
    }

    #[test]
    fn zero_extension_at_end() {
        let model = TailErrorModel::new(1.0, 1.0, 0.5).unwrap();
        let t = toy(vec![0.5, 0.5], vec![0.0, 0.0]);
        let (g1, g2) = model.tail_errors(&t, 2, 2);
        assert_eq!(g1, 0.0);
        assert_eq!(g2, 0.0);
    }

    #[test]
    fn quadratic_tail_sum() {
        // S_0 = 0.25 + 0.25 with beta = 1 and no noise.
        let model = TailErrorModel::new(1.0, 1.0, 0.5).unwrap();
        let t = toy(vec![0.5, 0.5], vec![0.0, 0.0]);
        let (g1, _) = model.tail_errors(&t, 0, 2);
        assert!((g1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn g2_with_noise() {
        // g1_0 = 0.5 + 0.2; g2_0 = 0.25 + 0.5 sqrt(0.7) + 0.1.
        let model = TailErrorModel::new(1.0, 1.0, 0.5).unwrap();
        let t = toy(vec![0.5, 0.5], vec![0.1, 0.1]);
        let (g1, g2) = model.tail_errors(&t, 0, 2);
        assert!((g1 - 0.7).abs() < 1e-15);
        let expected = 0.25 + 0.5 * 0.7f64.sqrt() + 0.1;
        assert!((g2 - expected).abs() < 1e-15);
    }

    #[test]
    fn g1_decrements_exactly() {
        let model = TailErrorModel::new(2.0, 0.5, 0.3).unwrap();
        let t = toy(vec![0.9, 0.5, 0.25, 0.125], vec![0.3, 0.0, 0.01, 0.2]);
        let table = model.precompute(&t, 4);
        for k in 0..4 {
            let expected = model.q * (t.alpha[k].powf(1.5) + vecops::norm(&t.e[k]));
            // The suffix accumulation guarantees bit-exact differences.
            assert_eq!(table.g1[k] - table.g1[k + 1], table.increments[k]);
            assert!((table.increments[k] - expected).abs() <= 1e-15 * expected.max(1.0));
            assert!(table.g1[k] >= table.g1[k + 1]);
        }
    }
}
