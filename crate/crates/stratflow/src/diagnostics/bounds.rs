//! Explicit diameter-bound calculators and the fit-then-validate protocol
//! for their existential constants.
//!
//! Two right-hand-side shapes are supported:
//!   * `General`: `2 (psi(f(x_0)) - psi(f(x_K))) + 4 (psi(g1_0) + psi(g1_K))
//!      + 2 sum g2_k + C alpha_0^(beta_lower (1 - theta))`, and
//!   * `StepTails`: potential drop scaled by `varsigma_1` plus step- and
//!      noise-tail sums scaled by `varsigma_2`.
//!
//! Constants are existential: the comparison `diam <= rhs` is reported,
//! and the protocol fits minimal multipliers on one seed set and validates
//! the inequality on a disjoint one.

use serde::{Deserialize, Serialize};

use crate::diagnostics::desingularizer::Desingularizer;
use crate::diagnostics::diameter::diameter;
use crate::diagnostics::tails::TailErrorModel;
use crate::error::{Error, Result};
use crate::objectives::PiecewiseSmoothFunction;
use crate::trajectory::Trajectory;
use crate::vecops;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMode {
    /// Desingularizer-based bound with `g`-tails and the `C alpha_0^..` term.
    General,
    /// Signed-power drop plus explicit step/noise tail sums.
    StepTails,
}

/// Multipliers of the two bounds. `epsilon` records the level-set radius the
/// fit was performed on and `theta_bar` the smallest exponent for which the
/// fit validated (both informational).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub varsigma_1: f64,
    pub varsigma_2: f64,
    pub big_c: f64,
    pub beta_lower: f64,
    pub epsilon: f64,
    pub theta_bar: Option<f64>,
}

impl BoundConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.varsigma_1 > 0.0 && self.varsigma_2 > 0.0 && self.big_c > 0.0) {
            return Err(Error::InvalidParameter(
                "fitted bound constants must be strictly positive".into(),
            ));
        }
        Ok(())
    }
}

/// The raw ingredients of either bound for one trajectory, so fits can reuse
/// them without re-scanning the record.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundTerms {
    /// Observed `diam(x_{[0, K]})`.
    pub diam: f64,
    /// `psi(f(x_0)) - psi(f(x_K))` (General) or the signed-power drop
    /// (StepTails, with the desingularizer scale divided out).
    pub potential_drop: f64,
    /// `4 (psi(g1_0) + psi(g1_K)) + 2 sum g2_k` (General mode).
    pub g_tails: f64,
    /// `alpha_0^(beta_lower (1 - theta))` (General) or the full step/noise
    /// tail bracket (StepTails).
    pub tail_bracket: f64,
}

/// Computes the terms entering the selected bound for one run.
pub fn bound_terms(
    mode: BoundMode,
    d: &Desingularizer,
    model: &TailErrorModel,
    beta_lower: f64,
    t: &Trajectory,
    f: &PiecewiseSmoothFunction,
) -> Result<BoundTerms> {
    let k_end = t.k_steps();
    let f0 = f.evaluate(&t.x[0])?;
    let fk = f.evaluate(&t.x[k_end])?;
    let diam = diameter(&t.x);
    let table = model.precompute(t, k_end);
    match mode {
        BoundMode::General => {
            let potential_drop = d.psi(f0) - d.psi(fk);
            let g_tails =
                4.0 * (d.psi(table.g1[0]) + d.psi(table.g1[k_end])) + 2.0 * table.g2_sum(0, k_end);
            let tail_bracket = t.alpha[0].powf(beta_lower * (1.0 - d.theta));
            Ok(BoundTerms {
                diam,
                potential_drop,
                g_tails,
                tail_bracket,
            })
        }
        BoundMode::StepTails => {
            let theta = d.theta;
            let signed = |v: f64| v.signum() * v.abs().powf(1.0 - theta);
            let potential_drop = signed(f0) - signed(fk);
            // S_k = sum_{j >= k} alpha_j^{1+beta}, E_k = sum_{j >= k} |e_j|.
            let mut s = vec![0.0f64; k_end + 1];
            let mut e = vec![0.0f64; k_end + 1];
            for k in (0..k_end).rev() {
                s[k] = s[k + 1] + t.alpha[k].powf(1.0 + model.beta);
                e[k] = e[k + 1] + vecops::norm(&t.e[k]);
            }
            let mut alpha_s = 0.0;
            let mut alpha_e = 0.0;
            for k in 0..k_end {
                alpha_s += t.alpha[k] * s[k].powf(theta);
                alpha_e += t.alpha[k] * e[k].powf(theta);
            }
            let tail_bracket = t.alpha[0].powf(model.beta)
                + s[0]
                + s[0].powf(1.0 - theta)
                + alpha_s
                + e[0]
                + e[0].powf(1.0 - theta)
                + alpha_e;
            Ok(BoundTerms {
                diam,
                potential_drop,
                g_tails: 0.0,
                tail_bracket,
            })
        }
    }
}

/// Numeric right-hand side of the selected bound.
pub fn diameter_bound_rhs(
    mode: BoundMode,
    d: &Desingularizer,
    consts: &BoundConstants,
    model: &TailErrorModel,
    t: &Trajectory,
    f: &PiecewiseSmoothFunction,
) -> Result<f64> {
    let terms = bound_terms(mode, d, model, consts.beta_lower, t, f)?;
    Ok(rhs_from_terms(mode, consts, &terms))
}

pub fn rhs_from_terms(mode: BoundMode, consts: &BoundConstants, terms: &BoundTerms) -> f64 {
    match mode {
        BoundMode::General => {
            2.0 * terms.potential_drop + terms.g_tails + consts.big_c * terms.tail_bracket
        }
        BoundMode::StepTails => {
            consts.varsigma_1 * terms.potential_drop + consts.varsigma_2 * terms.tail_bracket
        }
    }
}

/// Outcome of the fit-then-validate protocol.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub constants: BoundConstants,
    pub training_runs: usize,
    pub validation_runs: usize,
    pub validation_violations: usize,
    /// Worst `diam - rhs` over validation runs (negative means the bound
    /// held with margin).
    pub worst_validation_gap: f64,
}

/// Fits minimal `(varsigma_1, varsigma_2)` so `diam <= rhs` holds on every
/// training run, then reports violations on the validation runs.
///
/// The fit minimizes `varsigma_1 + varsigma_2` over the half-planes
/// `varsigma_1 u_r + varsigma_2 w_r >= diam_r`: it suffices to scan the
/// pairwise constraint intersections plus the single-constraint extremes.
pub fn fit_step_tail_constants(
    training: &[BoundTerms],
    validation: &[BoundTerms],
    beta_lower: f64,
    theta_bar: Option<f64>,
) -> Result<FitReport> {
    if training.is_empty() {
        return Err(Error::EmptyInput("bound fit training set"));
    }
    const FLOOR: f64 = 1e-9;
    let feasible = |s1: f64, s2: f64| {
        training
            .iter()
            .all(|t| s1 * t.potential_drop + s2 * t.tail_bracket >= t.diam - 1e-12)
    };
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    for t in training {
        // Extremes where one multiplier carries the whole constraint.
        if t.potential_drop > 0.0 {
            candidates.push(((t.diam - FLOOR * t.tail_bracket) / t.potential_drop, FLOOR));
        }
        if t.tail_bracket > 0.0 {
            candidates.push((FLOOR, (t.diam - FLOOR * t.potential_drop) / t.tail_bracket));
        }
        for u in training {
            // Intersection of two active constraints.
            let det = t.potential_drop * u.tail_bracket - u.potential_drop * t.tail_bracket;
            if det.abs() > 1e-14 {
                let s1 = (t.diam * u.tail_bracket - u.diam * t.tail_bracket) / det;
                let s2 = (t.potential_drop * u.diam - u.potential_drop * t.diam) / det;
                candidates.push((s1, s2));
            }
        }
    }
    let mut best: Option<(f64, f64)> = None;
    for (s1, s2) in candidates {
        let (s1, s2) = (s1.max(FLOOR), s2.max(FLOOR));
        if feasible(s1, s2) {
            match best {
                Some((b1, b2)) if b1 + b2 <= s1 + s2 => {}
                _ => best = Some((s1, s2)),
            }
        }
    }
    let (s1, s2) = best.ok_or_else(|| {
        Error::InvalidParameter("no feasible bound constants on the training set".into())
    })?;
    let constants = BoundConstants {
        varsigma_1: s1,
        varsigma_2: s2,
        big_c: s2.max(FLOOR),
        beta_lower,
        epsilon: f64::INFINITY,
        theta_bar,
    };
    let mut violations = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for v in validation {
        let gap = v.diam - rhs_from_terms(BoundMode::StepTails, &constants, v);
        worst = worst.max(gap);
        if gap > 1e-12 {
            violations += 1;
        }
    }
    Ok(FitReport {
        constants,
        training_runs: training.len(),
        validation_runs: validation.len(),
        validation_violations: violations,
        worst_validation_gap: if validation.is_empty() {
            f64::NAN
        } else {
            worst
        },
    })
}

/// Sweeps `theta` upward and returns the smallest value whose fitted bound
/// validates with no violations, together with that fit.
pub fn sweep_theta<FitData>(
    thetas: &[f64],
    mut terms_at: FitData,
) -> Result<Option<(f64, FitReport)>>
where
    FitData: FnMut(f64) -> Result<(Vec<BoundTerms>, Vec<BoundTerms>, f64)>,
{
    for &theta in thetas {
        let (train, valid, beta_lower) = terms_at(theta)?;
        let report = fit_step_tail_constants(&train, &valid, beta_lower, Some(theta))?;
        if report.validation_violations == 0 {
            return Ok(Some((theta, report)));
        }
    }
    Ok(None)
}
