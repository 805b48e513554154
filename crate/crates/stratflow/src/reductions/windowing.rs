//! Windowing of stochastic runs: group consecutive steps until their step
//! sizes sum past `alpha_{s_t}^zeta`, so the aggregated window behaves like
//! one inexact subgradient step `x_{s_{t+1}} = x_{s_t} - a_t u_t + e_t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::{ScheduleKind, StepSchedule};
use crate::trajectory::Trajectory;
use crate::vecops;

/// Window boundaries `s_0 < s_1 < ...` for a fixed exponent `zeta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowPlan {
    pub zeta: f64,
    pub s: Vec<usize>,
}

impl WindowPlan {
    pub fn windows(&self) -> usize {
        self.s.len().saturating_sub(1)
    }
}

/// First `count + 1` indices of the window recursion
/// `s_{t+1} = inf { k > s_t : sum_{i = s_t}^{k} alpha_i > alpha_{s_t}^zeta }`.
pub fn window_indices(schedule: &StepSchedule, zeta: f64, count: usize) -> Result<WindowPlan> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "zeta must lie in (0, 1), got {zeta}"
        )));
    }
    let mut s = Vec::with_capacity(count + 1);
    s.push(0usize);
    let mut s_t = 0usize;
    for _ in 0..count {
        let threshold = schedule.value(s_t).powf(zeta);
        let mut sum = schedule.value(s_t);
        let mut k = s_t;
        while sum <= threshold {
            k += 1;
            sum += schedule.value(k);
        }
        // First k > s_t with the inclusive sum above the threshold.
        let next = k.max(s_t + 1);
        s.push(next);
        s_t = next;
    }
    Ok(WindowPlan { zeta, s })
}

/// Checks the defining sandwich
/// `sum_{i=s_t}^{s_{t+1}-1} alpha_i <= alpha_{s_t}^zeta < sum_{i=s_t}^{s_{t+1}} alpha_i`
/// for every window; returns the first violating window index.
pub fn sandwich_violation(plan: &WindowPlan, schedule: &StepSchedule) -> Option<usize> {
    for t in 0..plan.windows() {
        let (lo, hi) = (plan.s[t], plan.s[t + 1]);
        let threshold = schedule.value(lo).powf(plan.zeta);
        let partial: f64 = (lo..hi).map(|i| schedule.value(i)).sum();
        if !(partial <= threshold && threshold < partial + schedule.value(hi)) {
            return Some(t);
        }
    }
    None
}

/// Aggregated window data: `a_t` (step mass), `u_t` (weighted mean
/// direction), `e_t` (accumulated noise).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedSequence {
    pub a: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub e: Vec<Vec<f64>>,
}

/// Exact aggregation over a recorded trajectory:
/// `a_t = sum alpha_k`, `u_t = (1/a_t) sum alpha_k v_k`, `e_t = sum e_k`,
/// and the reconstruction `x_{s_{t+1}} = x_{s_t} - a_t u_t + e_t` holds.
pub fn window_aggregate(t: &Trajectory, plan: &WindowPlan) -> Result<WindowedSequence> {
    let last = *plan.s.last().ok_or(Error::EmptyInput("window plan"))?;
    if last > t.k_steps() {
        return Err(Error::Precondition(format!(
            "window plan reaches index {last} but the record has {} steps",
            t.k_steps()
        )));
    }
    let dim = t.dim();
    let mut a = Vec::with_capacity(plan.windows());
    let mut u = Vec::with_capacity(plan.windows());
    let mut e = Vec::with_capacity(plan.windows());
    for w in 0..plan.windows() {
        let (lo, hi) = (plan.s[w], plan.s[w + 1]);
        let mut mass = 0.0;
        let mut dir = vecops::zeros(dim);
        let mut noise = vecops::zeros(dim);
        for k in lo..hi {
            mass += t.alpha[k];
            vecops::axpy(&mut dir, t.alpha[k], &t.v[k]);
            vecops::axpy(&mut noise, 1.0, &t.e[k]);
        }
        for d in dir.iter_mut() {
            *d /= mass;
        }
        a.push(mass);
        u.push(dir);
        e.push(noise);
    }
    Ok(WindowedSequence { a, u, e })
}

/// Largest relative reconstruction error of
/// `x_{s_{t+1}} = x_{s_t} - a_t u_t + e_t` over all windows.
pub fn reconstruction_residual(t: &Trajectory, plan: &WindowPlan, w: &WindowedSequence) -> f64 {
    let mut worst = 0.0f64;
    for idx in 0..plan.windows() {
        let (lo, hi) = (plan.s[idx], plan.s[idx + 1]);
        let mut pred = t.x[lo].clone();
        vecops::axpy(&mut pred, -w.a[idx], &w.u[idx]);
        for (p, n) in pred.iter_mut().zip(&w.e[idx]) {
            *p += n;
        }
        let err = vecops::dist(&pred, &t.x[hi]) / (1.0 + vecops::norm(&t.x[hi]));
        worst = worst.max(err);
    }
    worst
}

/// Empirical ratio band over an index range.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RatioBand {
    pub min: f64,
    pub max: f64,
}

impl RatioBand {
    pub fn width_factor(&self) -> f64 {
        self.max / self.min
    }

    fn over(values: impl Iterator<Item = f64>) -> Self {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            min = min.min(v);
            max = max.max(v);
        }
        Self { min, max }
    }
}

/// Growth-rate report: `s_t / (t+1)^(1/zeta)` and `a_t (t+1)` bands over
/// `t in [count/10, count]`, flagged when a band is wider than factor 3.
/// Only meaningful for schedules with `alpha_k` of order `1/(k+1)`; other
/// schedules are reported as not applicable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowAsymptotics {
    pub applicable: bool,
    pub s_band: Option<RatioBand>,
    pub a_band: Option<RatioBand>,
    pub flagged: bool,
}

pub fn window_asymptotics(plan: &WindowPlan, schedule: &StepSchedule) -> WindowAsymptotics {
    let applicable = matches!(schedule.kind, ScheduleKind::Harmonic);
    let count = plan.windows();
    if !applicable || count < 100 {
        return WindowAsymptotics {
            applicable,
            s_band: None,
            a_band: None,
            flagged: !applicable,
        };
    }
    let lo = count / 10;
    let s_band = RatioBand::over((lo..count).map(|t| {
        plan.s[t] as f64 / ((t + 1) as f64).powf(1.0 / plan.zeta)
    }));
    let a_band = RatioBand::over((lo..count).map(|t| {
        let mass: f64 = (plan.s[t]..plan.s[t + 1]).map(|i| schedule.value(i)).sum();
        mass * (t + 1) as f64
    }));
    let flagged = s_band.width_factor() > 3.0 || a_band.width_factor() > 3.0;
    WindowAsymptotics {
        applicable,
        s_band: Some(s_band),
        a_band: Some(a_band),
        flagged,
    }
}

/// Tail report of the windowed noise: fraction of windows `t` in
/// `[count/2, count)` whose sup partial noise sum exceeds
/// `alpha_{s_t}^gamma`, plus the proximity constant fitted on the first
/// half of the checked range and validated on the second half.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowErrorReport {
    pub checked_windows: usize,
    pub violations: usize,
    pub violation_fraction: f64,
    /// `max_k |x_k - x_{s_t}| / a_t` fitted on the first half of the range.
    pub fitted_c_b: f64,
    /// Windows in the second half exceeding the fitted constant.
    pub cb_violations: usize,
}

/// Checks windowed noise decay on a recorded stochastic run. The recorded
/// noise is `e_k = -alpha_k eps_k`, so window partial sums of `-e_k` are the
/// martingale partial sums being bounded.
pub fn window_error_check(t: &Trajectory, plan: &WindowPlan, gamma: f64) -> Result<WindowErrorReport> {
    if !(plan.zeta < gamma && gamma < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "need zeta < gamma < 1/2, got zeta = {}, gamma = {gamma}",
            plan.zeta
        )));
    }
    let count = plan.windows();
    let last = *plan.s.last().unwrap();
    if last > t.k_steps() {
        return Err(Error::Precondition(
            "window plan longer than the record".into(),
        ));
    }
    let alpha_at = |k: usize| t.alpha[k];
    let half = count / 2;
    let dim = t.dim();
    let mut violations = 0usize;
    let mut fitted_c_b = 0.0f64;
    let mut cb_violations = 0usize;
    for w in half..count {
        let (lo, hi) = (plan.s[w], plan.s[w + 1]);
        let bound = alpha_at(lo).powf(gamma);
        let mut partial = vecops::zeros(dim);
        let mut sup = 0.0f64;
        let mut proximity = 0.0f64;
        for k in lo..hi {
            proximity = proximity.max(vecops::dist(&t.x[k], &t.x[lo]));
            vecops::axpy(&mut partial, -1.0, &t.e[k]);
            sup = sup.max(vecops::norm(&partial));
        }
        proximity = proximity.max(vecops::dist(&t.x[hi], &t.x[lo]));
        if sup > bound {
            violations += 1;
        }
        let mass: f64 = (lo..hi).map(alpha_at).sum();
        let ratio = proximity / mass;
        let mid = half + (count - half) / 2;
        if w < mid {
            fitted_c_b = fitted_c_b.max(ratio);
        } else if ratio > fitted_c_b {
            cb_violations += 1;
        }
    }
    let checked = count - half;
    Ok(WindowErrorReport {
        checked_windows: checked,
        violations,
        violation_fraction: violations as f64 / checked.max(1) as f64,
        fitted_c_b,
        cb_violations,
    })
}

/// Streaming variant of [`window_error_check`]: advances a stochastic run
/// window by window without storing the trajectory, so horizons of tens of
/// millions of steps stay in constant memory. Windows are built by the same
/// recursion, from the realized step sizes.
pub fn window_error_streaming(
    stepper: &mut crate::methods::StochasticStepper,
    zeta: f64,
    gamma: f64,
    count: usize,
) -> Result<WindowErrorReport> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "zeta must lie in (0, 1), got {zeta}"
        )));
    }
    if !(zeta < gamma && gamma < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "need zeta < gamma < 1/2, got zeta = {zeta}, gamma = {gamma}"
        )));
    }
    let half = count / 2;
    let mid = half + (count - half) / 2;
    let mut violations = 0usize;
    let mut fitted_c_b = 0.0f64;
    let mut cb_violations = 0usize;
    // The step whose size tips the inclusive sum over the threshold starts
    // the next window; it is carried along with its pre-state (= x_{s_t}).
    let mut carried: Option<(Vec<f64>, crate::methods::Step)> = None;
    for w in 0..count {
        let (anchor, first) = match carried.take() {
            Some(pair) => pair,
            None => {
                let pre = stepper.state().to_vec();
                (pre, stepper.advance()?)
            }
        };
        let threshold = first.alpha.powf(zeta);
        let alpha_start = first.alpha;
        let mut mass = first.alpha;
        let mut partial = vecops::scale(&first.e, -1.0);
        let mut sup = vecops::norm(&partial);
        let mut proximity = vecops::dist(&first.x_next, &anchor);
        loop {
            let pre = stepper.state().to_vec();
            let step = stepper.advance()?;
            if mass + step.alpha > threshold {
                carried = Some((pre, step));
                break;
            }
            mass += step.alpha;
            vecops::axpy(&mut partial, -1.0, &step.e);
            sup = sup.max(vecops::norm(&partial));
            proximity = proximity.max(vecops::dist(&step.x_next, &anchor));
        }
        if w < half {
            continue;
        }
        if sup > alpha_start.powf(gamma) {
            violations += 1;
        }
        let ratio = proximity / mass;
        if w < mid {
            fitted_c_b = fitted_c_b.max(ratio);
        } else if ratio > fitted_c_b {
            cb_violations += 1;
        }
    }
    let checked = count - half;
    Ok(WindowErrorReport {
        checked_windows: checked,
        violations,
        violation_fraction: violations as f64 / checked.max(1) as f64,
        fitted_c_b,
        cb_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::{stochastic_run, StochasticNoise};
    use crate::objectives;
    use crate::rng::RngHandle;

    /// Literal evaluation of the recursion, kept independent of the
    /// production code path.
    fn brute_force_windows(schedule: &StepSchedule, zeta: f64, count: usize) -> Vec<usize> {
        let mut s = vec![0usize];
        for _ in 0..count {
            let s_t = *s.last().unwrap();
            let threshold = schedule.value(s_t).powf(zeta);
            let mut k = s_t + 1;
            loop {
                let sum: f64 = (s_t..=k).map(|i| schedule.value(i)).sum();
                if sum > threshold {
                    break;
                }
                k += 1;
            }
            s.push(k);
        }
        s
    }

    #[test]
    fn harmonic_prefix_matches_recursion() {
        let schedule = StepSchedule::harmonic(1.0);
        let plan = window_indices(&schedule, 0.5, 4).unwrap();
        assert_eq!(plan.s, vec![0, 1, 2, 3, 5]);
        assert_eq!(plan.s, brute_force_windows(&schedule, 0.5, 4));
    }

    #[test]
    fn constant_schedule_single_step_windows() {
        // alpha = 1: threshold 1, the one-step partial sum is not above it,
        // so the inclusive sum tips over at the very next index.
        let schedule = StepSchedule::constant(1.0);
        let plan = window_indices(&schedule, 0.5, 5).unwrap();
        assert_eq!(plan.s, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(plan.s, brute_force_windows(&schedule, 0.5, 5));
    }

    #[test]
    fn near_one_zeta_short_windows() {
        let schedule = StepSchedule::harmonic(1.0);
        let plan = window_indices(&schedule, 0.999, 10).unwrap();
        assert_eq!(plan.s, brute_force_windows(&schedule, 0.999, 10));
        for t in 0..5 {
            assert_eq!(plan.s[t + 1] - plan.s[t], 1);
        }
    }

    #[test]
    fn sandwich_holds_on_varied_schedules() {
        for schedule in [
            StepSchedule::harmonic(1.0),
            StepSchedule::harmonic(0.25),
            StepSchedule::power(1.0, 0.7),
            StepSchedule::constant(0.3),
        ] {
            for zeta in [0.3, 0.5, 0.9] {
                let plan = window_indices(&schedule, zeta, 200).unwrap();
                assert_eq!(sandwich_violation(&plan, &schedule), None);
            }
        }
    }

    #[test]
    fn harmonic_ratio_bands_are_tight() {
        let schedule = StepSchedule::harmonic(1.0);
        for zeta in [0.5, 0.9] {
            let plan = window_indices(&schedule, zeta, 1000).unwrap();
            let report = window_asymptotics(&plan, &schedule);
            assert!(report.applicable);
            assert!(!report.flagged, "zeta {zeta}: {report:?}");
        }
    }

    #[test]
    fn constant_schedule_flagged_not_applicable() {
        let schedule = StepSchedule::constant(1.0);
        let plan = window_indices(&schedule, 0.5, 200).unwrap();
        let report = window_asymptotics(&plan, &schedule);
        assert!(!report.applicable);
        assert!(report.flagged);
    }

    #[test]
    fn aggregate_hand_window() {
        // alpha = (1, 0.5), v = (1, -1): a = 1.5, u = 1/3.
        let mut t = Trajectory::synthetic(
            vec![vec![0.0], vec![0.0], vec![0.0]],
            vec![1.0, 0.5],
        )
        .unwrap();
        t.v = vec![vec![1.0], vec![-1.0]];
        // Make the record consistent with the stored directions.
        t.x[1] = vec![t.x[0][0] - 1.0 * 1.0];
        t.x[2] = vec![t.x[1][0] + 0.5 * 1.0];
        let plan = WindowPlan {
            zeta: 0.5,
            s: vec![0, 2],
        };
        let w = window_aggregate(&t, &plan).unwrap();
        assert!((w.a[0] - 1.5).abs() < 1e-15);
        assert!((w.u[0][0] - 1.0 / 3.0).abs() < 1e-15);
        assert!(reconstruction_residual(&t, &plan, &w) <= 1e-15);
    }

    #[test]
    fn single_step_windows_degenerate() {
        let f = objectives::abs_sum();
        let schedule = StepSchedule::harmonic(1.0);
        let t = stochastic_run(
            &f,
            &f.default_start.clone(),
            schedule,
            StochasticNoise::gaussian(0.5),
            64,
            RngHandle::new(4),
        )
        .unwrap();
        let plan = WindowPlan {
            zeta: 0.5,
            s: (0..=32).collect(),
        };
        let w = window_aggregate(&t, &plan).unwrap();
        for k in 0..32 {
            assert_eq!(w.a[k], t.alpha[k]);
            assert_eq!(w.e[k], t.e[k]);
            // (alpha v) / alpha can differ from v by an ulp.
            assert!(vecops::dist(&w.u[k], &t.v[k]) <= 1e-15 * (1.0 + vecops::norm(&t.v[k])));
        }
    }

    #[test]
    fn noise_free_run_has_zero_window_noise() {
        let f = objectives::ridge();
        let schedule = StepSchedule::harmonic(1.0);
        let t = stochastic_run(
            &f,
            &f.default_start.clone(),
            schedule,
            StochasticNoise::gaussian(0.0),
            500,
            RngHandle::new(4),
        )
        .unwrap();
        let plan = window_indices(&schedule, 0.4, 40).unwrap();
        let w = window_aggregate(&t, &plan).unwrap();
        for noise in &w.e {
            assert_eq!(vecops::norm(noise), 0.0);
        }
        let report = window_error_check(&t, &plan, 0.45).unwrap();
        assert_eq!(report.violations, 0);
    }

    #[test]
    fn streaming_matches_stored_run() {
        let f = objectives::abs_sum();
        let schedule = StepSchedule::harmonic(1.0);
        let (zeta, gamma, windows) = (0.3, 0.45, 60);
        let seed = RngHandle::new(99);
        let plan = window_indices(&schedule, zeta, windows).unwrap();
        let t = stochastic_run(
            &f,
            &f.default_start.clone(),
            schedule,
            StochasticNoise::gaussian(1.0),
            *plan.s.last().unwrap(),
            seed,
        )
        .unwrap();
        let stored = window_error_check(&t, &plan, gamma).unwrap();
        let mut stepper = crate::methods::StochasticStepper::new(
            &f,
            f.default_start.clone(),
            schedule,
            StochasticNoise::gaussian(1.0),
            crate::objectives::SelectionRule::FirstActive,
            seed,
        )
        .unwrap();
        let streamed = window_error_streaming(&mut stepper, zeta, gamma, windows).unwrap();
        assert_eq!(stored.checked_windows, streamed.checked_windows);
        assert_eq!(stored.violations, streamed.violations);
        assert_eq!(stored.cb_violations, streamed.cb_violations);
        assert!((stored.fitted_c_b - streamed.fitted_c_b).abs() <= 1e-12);
    }

    #[test]
    fn window_weights_are_barycentric() {
        // u_t is a convex combination of the window's directions.
        let schedule = StepSchedule::harmonic(1.0);
        let plan = window_indices(&schedule, 0.5, 30).unwrap();
        for t in 0..plan.windows() {
            let (lo, hi) = (plan.s[t], plan.s[t + 1]);
            let mass: f64 = (lo..hi).map(|k| schedule.value(k)).sum();
            let weights: Vec<f64> = (lo..hi).map(|k| schedule.value(k) / mass).collect();
            assert!(weights.iter().all(|&w| w >= 0.0));
            assert!((weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }
}
