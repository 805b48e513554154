//! Momentum-increment decomposition: split the unrolled increment
//! `x_{k+1} - x_k = -sum_{i<=k} kappa^{k-i} alpha_i v_i` into a recent
//! window (behaving like one inexact step `-a_k u_k`) and an exponentially
//! small remainder `e_k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::StepSchedule;
use crate::trajectory::{MethodMeta, Trajectory};
use crate::vecops;

/// Exponentially weighted steps and the recent-window split, all pure
/// functions of the step sizes and `kappa`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightedSteps {
    pub kappa: f64,
    pub zeta: f64,
    /// `b_k = kappa b_{k-1} + alpha_k`, `b_{-1} = 0`.
    pub b: Vec<f64>,
    /// Recent-window start `T(k)`: smallest `i` with
    /// `kappa^{k-j} b_j >= b_k^{1+zeta}` for all `j` in `[i, k]`.
    pub window_start: Vec<usize>,
    /// `a_k = sum_{i=T(k)}^{k} kappa^{k-i} alpha_i`.
    pub a: Vec<f64>,
}

/// Computes `b`, `T`, and `a` for the first `k_steps` steps of a schedule.
pub fn weighted_steps(schedule: &StepSchedule, kappa: f64, zeta: f64, k_steps: usize) -> Result<WeightedSteps> {
    weighted_steps_of(&schedule.values(k_steps), kappa, zeta)
}

pub fn weighted_steps_of(alpha: &[f64], kappa: f64, zeta: f64) -> Result<WeightedSteps> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "kappa must lie in (0, 1), got {kappa}"
        )));
    }
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "zeta must lie in (0, 1), got {zeta}"
        )));
    }
    let k_steps = alpha.len();
    let mut b = Vec::with_capacity(k_steps);
    let mut prev = 0.0f64;
    for &a in alpha {
        let cur = kappa * prev + a;
        b.push(cur);
        prev = cur;
    }
    let mut window_start = Vec::with_capacity(k_steps);
    let mut a_mass = Vec::with_capacity(k_steps);
    for k in 0..k_steps {
        let cutoff = b[k].powf(1.0 + zeta);
        // Backward scan: the condition must hold for every j in [T(k), k],
        // so the scan stops at the first failure. kappa^(k-j) decays
        // geometrically, giving the expected O(log k) scan length.
        let mut start = k;
        let mut weight = 1.0f64;
        for j in (0..=k).rev() {
            if weight * b[j] >= cutoff {
                start = j;
            } else {
                break;
            }
            weight *= kappa;
        }
        window_start.push(start);
        let mut mass = 0.0f64;
        for i in start..=k {
            mass += kappa.powi((k - i) as i32) * alpha[i];
        }
        a_mass.push(mass);
    }
    Ok(WeightedSteps {
        kappa,
        zeta,
        b,
        window_start,
        a: a_mass,
    })
}

/// Decomposition of a recorded momentum run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentumDecomposition {
    pub steps: WeightedSteps,
    /// Window-averaged directions `u_k`.
    pub u: Vec<Vec<f64>>,
    /// Remainders `e_k = -sum_{i < T(k)} kappa^{k-i} alpha_i v_i`.
    pub e: Vec<Vec<f64>>,
    /// Worst relative error of `x_{k+1} - x_k = -a_k u_k + e_k`.
    pub reconstruction_residual: f64,
}

/// Splits each momentum increment into `-a_k u_k + e_k`. The trajectory
/// must come from a momentum run with the same `kappa`; the stored record
/// is revalidated against the unrolled recursion and a mismatch aborts.
pub fn momentum_decompose(t: &Trajectory, kappa: f64, zeta: f64) -> Result<MomentumDecomposition> {
    if let MethodMeta::Momentum { kappa: rec, .. } = &t.meta.method {
        if (rec - kappa).abs() > 1e-12 {
            return Err(Error::Precondition(format!(
                "record was produced with kappa = {rec}, asked to decompose with {kappa}"
            )));
        }
    }
    let k_steps = t.k_steps();
    let dim = t.dim();
    let steps = weighted_steps_of(&t.alpha, kappa, zeta)?;
    let mut u = Vec::with_capacity(k_steps);
    let mut e = Vec::with_capacity(k_steps);
    let mut worst = 0.0f64;
    // Suffix-free incremental remainder: carry_k = sum_{i<=k} kappa^{k-i} alpha_i v_i
    // satisfies carry_k = kappa carry_{k-1} + alpha_k v_k.
    let mut carry = vecops::zeros(dim);
    for k in 0..k_steps {
        for c in carry.iter_mut() {
            *c *= kappa;
        }
        vecops::axpy(&mut carry, t.alpha[k], &t.v[k]);
        // Recent part sum_{i=T(k)}^{k} kappa^{k-i} alpha_i v_i.
        let start = steps.window_start[k];
        let mut recent = vecops::zeros(dim);
        for i in start..=k {
            vecops::axpy(
                &mut recent,
                kappa.powi((k - i) as i32) * t.alpha[i],
                &t.v[i],
            );
        }
        let remainder = vecops::sub(&recent, &carry); // = -sum_{i < T(k)} ...
        let dir = vecops::scale(&recent, 1.0 / steps.a[k]);
        // Reconstruction check against the recorded increment.
        let increment = vecops::sub(&t.x[k + 1], &t.x[k]);
        let mut predicted = vecops::scale(&dir, -steps.a[k]);
        for (p, r) in predicted.iter_mut().zip(&remainder) {
            *p += r;
        }
        let err = vecops::dist(&predicted, &increment) / (1.0 + vecops::norm(&increment));
        worst = worst.max(err);
        u.push(dir);
        e.push(remainder);
    }
    if worst > 1e-8 {
        return Err(Error::InconsistentRecord {
            step: 0,
            residual: worst,
        });
    }
    Ok(MomentumDecomposition {
        steps,
        u,
        e,
        reconstruction_residual: worst,
    })
}

/// Tail report of the momentum split: window-mass sandwich
/// `a_k in [b_k/2, b_k]`, remainder decay `|e_k| <= L b_k^(1+zeta)`, the
/// `b_k (k+1)` growth band, and the query-point proximity constant fitted
/// on the first half of the tail and validated on the second.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentumBounds {
    pub tail_from: usize,
    pub mass_violations: usize,
    pub remainder_violations: usize,
    pub b_band: Option<(f64, f64)>,
    pub fitted_c_xi: f64,
    pub proximity_violations: usize,
    /// Worst distance of `u_k` to the hull of generators sampled in
    /// `B(x_k, C_xi b_k^xi)` over the validation half.
    pub hull_distance: f64,
}

pub fn momentum_bounds_check(
    t: &Trajectory,
    d: &MomentumDecomposition,
    f: &crate::objectives::PiecewiseSmoothFunction,
    lipschitz: f64,
    xi: f64,
    tail_from: usize,
) -> Result<MomentumBounds> {
    let k_steps = t.k_steps();
    if tail_from >= k_steps {
        return Err(Error::Precondition("empty momentum tail".into()));
    }
    let steps = &d.steps;
    let mut mass_violations = 0usize;
    let mut remainder_violations = 0usize;
    for k in tail_from..k_steps {
        let b = steps.b[k];
        if !(steps.a[k] >= b / 2.0 - 1e-12 && steps.a[k] <= b + 1e-12) {
            mass_violations += 1;
        }
        if vecops::norm(&d.e[k]) > lipschitz * b.powf(1.0 + steps.zeta) + 1e-12 {
            remainder_violations += 1;
        }
    }
    let b_band = if k_steps > 10 * tail_from.max(1) {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in k_steps / 10..k_steps {
            let v = steps.b[k] * (k + 1) as f64;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Some((lo, hi))
    } else {
        None
    };
    // Proximity of the queried points to x_k over each recent window:
    // fit C_xi on the first half of the tail, validate on the second.
    let iota = match &t.meta.method {
        MethodMeta::Momentum { iota_m, .. } => *iota_m,
        _ => 0.0,
    };
    let query = |i: usize| -> Vec<f64> {
        let prev = if i == 0 { &t.x[0] } else { &t.x[i - 1] };
        let mut q = t.x[i].clone();
        vecops::axpy(&mut q, iota, &vecops::sub(&t.x[i], prev));
        q
    };
    let mid = tail_from + (k_steps - tail_from) / 2;
    let mut fitted_c_xi = 0.0f64;
    for k in tail_from..mid {
        let scale = steps.b[k].powf(xi);
        for i in steps.window_start[k]..=k {
            let dist = vecops::dist(&query(i), &t.x[k]);
            fitted_c_xi = fitted_c_xi.max(dist / scale);
        }
    }
    let mut proximity_violations = 0usize;
    let mut hull_distance = 0.0f64;
    let mut rng = crate::rng::RngHandle::new(t.meta.seed)
        .stream(crate::rng::streams::CHECKS)
        .rng();
    for k in mid..k_steps {
        let radius = fitted_c_xi * steps.b[k].powf(xi);
        for i in steps.window_start[k]..=k {
            if vecops::dist(&query(i), &t.x[k]) > radius + 1e-12 {
                proximity_violations += 1;
            }
        }
        // Subsampled hull check (the min-norm solve dominates otherwise).
        if (k - mid) % ((k_steps - mid) / 64 + 1) == 0 {
            let mut gens =
                crate::diagnostics::minnorm::sample_generators(f, &t.x[k], radius, 32, &mut rng)?;
            for g in gens.iter_mut() {
                for (gi, ui) in g.iter_mut().zip(&d.u[k]) {
                    *gi -= ui;
                }
            }
            hull_distance = hull_distance.max(crate::diagnostics::min_norm_distance(&gens)?);
        }
    }
    Ok(MomentumBounds {
        tail_from,
        mass_violations,
        remainder_violations,
        b_band,
        fitted_c_xi,
        proximity_violations,
        hull_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::{momentum_run, MomentumConfig};
    use crate::objectives;
    use crate::rng::RngHandle;

    #[test]
    fn weighted_steps_recursion_values() {
        // b_0 = 1, b_1 = 0.5 * 1 + 0.5 = 1, b_2 = 0.5 + 1/3.
        let s = weighted_steps(&StepSchedule::harmonic(1.0), 0.5, 0.5, 3).unwrap();
        assert!((s.b[0] - 1.0).abs() < 1e-15);
        assert!((s.b[1] - 1.0).abs() < 1e-15);
        assert!((s.b[2] - (0.5 + 1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn first_step_has_no_history() {
        let s = weighted_steps(&StepSchedule::harmonic(1.0), 0.5, 0.5, 1).unwrap();
        assert_eq!(s.window_start[0], 0);
        assert_eq!(s.a[0], 1.0);
    }

    #[test]
    fn window_start_matches_brute_force() {
        let s = weighted_steps(&StepSchedule::harmonic(1.0), 0.4, 0.5, 400).unwrap();
        for k in 0..400 {
            let cutoff = s.b[k].powf(1.5);
            // Smallest i such that every j in [i, k] passes the cutoff.
            let mut expected = k;
            for i in (0..=k).rev() {
                let ok = (i..=k).all(|j| 0.4f64.powi((k - j) as i32) * s.b[j] >= cutoff);
                if ok {
                    expected = i;
                } else {
                    break;
                }
            }
            assert_eq!(s.window_start[k], expected, "k = {k}");
        }
    }

    #[test]
    fn decomposition_reconstructs_increments() {
        let f = objectives::ridge();
        let t = momentum_run(
            &f,
            &f.default_start.clone(),
            StepSchedule::harmonic(1.0),
            MomentumConfig::new(0.5, 0.0),
            2000,
            RngHandle::new(11),
        )
        .unwrap();
        let d = momentum_decompose(&t, 0.5, 0.5).unwrap();
        assert!(d.reconstruction_residual <= 1e-10, "{}", d.reconstruction_residual);
    }

    #[test]
    fn constant_direction_windows_average_to_it() {
        // On a linear piece every v_k is the same vector, so u_k equals it.
        let f = objectives::abs_sum();
        let t = momentum_run(
            &f,
            &[1.5, 1.5],
            StepSchedule::harmonic(0.05),
            MomentumConfig::new(0.3, 0.0),
            40,
            RngHandle::new(1),
        )
        .unwrap();
        let d = momentum_decompose(&t, 0.3, 0.5).unwrap();
        for k in 0..40 {
            assert!(vecops::dist(&d.u[k], &[1.0, 1.0]) < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn mass_sandwich_and_remainder_decay() {
        let f = objectives::smooth_quad();
        let t = momentum_run(
            &f,
            &[1.0, 0.5],
            StepSchedule::harmonic(1.0),
            MomentumConfig::new(0.5, 0.0),
            5000,
            RngHandle::new(2),
        )
        .unwrap();
        let d = momentum_decompose(&t, 0.5, 0.5).unwrap();
        let report =
            momentum_bounds_check(&t, &d, &f, f.lipschitz_bound, 0.5, 100).unwrap();
        assert_eq!(report.mass_violations, 0);
        assert_eq!(report.remainder_violations, 0);
        assert_eq!(report.proximity_violations, 0);
        if let Some((lo, hi)) = report.b_band {
            assert!(hi / lo <= 3.0, "band ({lo}, {hi})");
        }
    }

    #[test]
    fn remainder_decay_exponent_in_log_log_fit() {
        // |e_k| should decay at least like b_k^(1+zeta); regress the
        // observed exponent of |e_k| against k on the tail.
        let f = objectives::smooth_quad();
        let zeta = 0.5;
        let t = momentum_run(
            &f,
            &[1.0, 0.5],
            StepSchedule::harmonic(1.0),
            MomentumConfig::new(0.5, 0.0),
            10_000,
            RngHandle::new(3),
        )
        .unwrap();
        let d = momentum_decompose(&t, 0.5, zeta).unwrap();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for k in 100..t.k_steps() {
            let e = vecops::norm(&d.e[k]);
            if e > 0.0 {
                xs.push(((k + 1) as f64).ln());
                ys.push(e.ln());
            }
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let slope: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum::<f64>()
            / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
        // b_k ~ 1/(k+1), so |e_k| <= L b^(1+zeta) means slope <= -(1+zeta),
        // allowing 0.1 of regression slack.
        assert!(
            -slope >= 1.0 + zeta - 0.1,
            "observed decay exponent {}",
            -slope
        );
    }
}
