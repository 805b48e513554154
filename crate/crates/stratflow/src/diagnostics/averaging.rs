//! Telescoping average of a difference-inclusion record. With the stored
//! convention `x_{k+1} = x_k - alpha_k v_k + e_k`, summing and dividing by
//! `A_N = sum alpha_k` gives
//! `(x_N - x_0)/A_N = -sum lambda_k v_k + (sum e_k)/A_N`.

use crate::trajectory::Trajectory;
use crate::vecops;

/// Norm of LHS minus RHS of the averaging identity at horizon `n_steps`.
pub fn averaging_residual(t: &Trajectory, n_steps: usize) -> f64 {
    assert!(n_steps >= 1 && n_steps <= t.k_steps(), "horizon out of range");
    let a_n: f64 = t.alpha[..n_steps].iter().sum();
    let dim = t.dim();
    let mut rhs = vecops::zeros(dim);
    let mut noise = vecops::zeros(dim);
    for k in 0..n_steps {
        vecops::axpy(&mut rhs, -t.alpha[k] / a_n, &t.v[k]);
        vecops::axpy(&mut noise, 1.0 / a_n, &t.e[k]);
    }
    for (r, w) in rhs.iter_mut().zip(&noise) {
        *r += w;
    }
    let lhs = vecops::scale(&vecops::sub(&t.x[n_steps], &t.x[0]), 1.0 / a_n);
    vecops::dist(&lhs, &rhs)
}

/// Residual relative to `1 + |x_N - x_0| / A_N`, the tolerance convention
/// used by the identity suites.
pub fn averaging_residual_relative(t: &Trajectory, n_steps: usize) -> f64 {
    let a_n: f64 = t.alpha[..n_steps].iter().sum();
    let scale = 1.0 + vecops::dist(&t.x[n_steps], &t.x[0]) / a_n;
    averaging_residual(t, n_steps) / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::{inexact_run, InexactConfig};
    use crate::objectives;
    use crate::rng::RngHandle;
    use crate::schedule::StepSchedule;
    use crate::trajectory::Trajectory;

    #[test]
    fn hand_built_record_is_exact() {
        // x = (0, 1, 1), alpha = (1, 1), v = (-1, 0), e = (0, 0).
        let mut t = Trajectory::synthetic(
            vec![vec![0.0], vec![1.0], vec![1.0]],
            vec![1.0, 1.0],
        )
        .unwrap();
        t.v = vec![vec![-1.0], vec![0.0]];
        assert_eq!(averaging_residual(&t, 2), 0.0);
    }

    #[test]
    fn noise_free_run_identity() {
        let f = objectives::ridge();
        let t = inexact_run(
            &f,
            &f.default_start.clone(),
            StepSchedule::harmonic(1.0),
            InexactConfig::exact_subgradient(),
            400,
            RngHandle::new(1),
        )
        .unwrap();
        assert!(averaging_residual_relative(&t, t.k_steps()) <= 1e-12);
    }
}
