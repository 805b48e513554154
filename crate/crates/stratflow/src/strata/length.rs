//! Relative length: hybrid path length mixing ambient increments with
//! stratum-projected increments over the block structure, plus the
//! stratified descent residual it controls.

use crate::diagnostics::desingularizer::Desingularizer;
use crate::diagnostics::diameter::diameter_of;
use crate::diagnostics::tails::TailTable;
use crate::error::{Error, Result};
use crate::objectives::PiecewiseSmoothFunction;
use crate::strata::blocks::{alpha_at, BlockStructure};
use crate::strata::stratification::Stratification;
use crate::trajectory::Trajectory;
use crate::vecops;

fn ambient_sum(t: &Trajectory, k1: usize, k2: usize) -> f64 {
    (k1..k2)
        .map(|k| vecops::dist(&t.x[k + 1], &t.x[k]))
        .sum()
}

fn projected_sum(t: &Trajectory, s: &Stratification, i: usize, k1: usize, k2: usize) -> Result<f64> {
    let mut total = 0.0;
    let mut prev = s.strata[i].project(&t.x[k1])?;
    for k in (k1 + 1)..=k2 {
        let cur = s.strata[i].project(&t.x[k])?;
        total += vecops::dist(&cur, &prev);
        prev = cur;
    }
    Ok(total)
}

/// Relative length of `x_{[k1, k2]}` under the given block structure.
///
/// Outside all blocks the ambient increments count; inside a block and
/// before its `q`-index the increments of the projection onto the assigned
/// stratum count, with a bridge term `|x_q - y_q|` where the two regimes
/// meet; across block boundaries the pieces splice additively.
pub fn relative_length(
    t: &Trajectory,
    s: &Stratification,
    blocks: &BlockStructure,
    k1: usize,
    k2: usize,
) -> Result<f64> {
    if k1 >= k2 || k2 > t.k_steps() {
        return Err(Error::Precondition(format!(
            "need 0 <= k1 < k2 <= K, got ({k1}, {k2})"
        )));
    }
    let entries = blocks.entry_indices();
    rl_dispatch(t, s, blocks, &entries, k1, k2)
}

fn rl_dispatch(
    t: &Trajectory,
    s: &Stratification,
    blocks: &BlockStructure,
    entries: &[usize],
    k1: usize,
    k2: usize,
) -> Result<f64> {
    if k1 == k2 {
        return Ok(0.0);
    }
    // Case 1: entirely before the first block entry.
    match entries.first() {
        None => return Ok(ambient_sum(t, k1, k2)),
        Some(&l0) if k2 <= l0 => return Ok(ambient_sum(t, k1, k2)),
        _ => {}
    }
    // Case 3: some entry lies strictly inside; splice at the entries.
    let interior: Vec<usize> = entries
        .iter()
        .copied()
        .filter(|&l| l > k1 && l < k2)
        .collect();
    if !interior.is_empty() {
        let first = *interior.first().unwrap();
        let last = *interior.last().unwrap();
        let mut total = rl_dispatch(t, s, blocks, entries, k1, first)?;
        let mut prev = first;
        for &l in &interior[1..] {
            total += rl_dispatch(t, s, blocks, entries, prev, l)?;
            prev = l;
        }
        total += rl_dispatch(t, s, blocks, entries, last, k2)?;
        return Ok(total);
    }
    // Case 2: within one block's span [l_m, next entry].
    let m = blocks
        .blocks
        .iter()
        .rev()
        .find(|b| b.l <= k1)
        .ok_or_else(|| Error::Precondition(format!("no block covers index {k1}")))?;
    let q = m.q;
    let i = m.stratum;
    if q <= k1 {
        return Ok(ambient_sum(t, k1, k2));
    }
    if k1 == m.l {
        // Entry bridge |x_l - y_l| + |y_{l+1} - y_l| then recurse past it.
        let y_l = s.strata[i].project(&t.x[k1])?;
        let y_next = s.strata[i].project(&t.x[k1 + 1])?;
        let mut total = vecops::dist(&t.x[k1], &y_l) + vecops::dist(&y_next, &y_l);
        total += rl_dispatch(t, s, blocks, entries, k1 + 1, k2)?;
        return Ok(total);
    }
    // l_m < k1 < q here.
    if k2 < q {
        return projected_sum(t, s, i, k1, k2);
    }
    let mut total = projected_sum(t, s, i, k1, q)?;
    let y_q = s.strata[i].project(&t.x[q])?;
    total += vecops::dist(&t.x[q], &y_q);
    total += ambient_sum(t, q, k2);
    Ok(total)
}

/// Worst violation of `diam(x_[k1,k2]) <= RL + 4 c_max c_d alpha_k1^beta_min`
/// over sampled index pairs; returns the max of `diam - bound` (nonpositive
/// when the inequality holds everywhere).
pub fn diameter_vs_relative_length(
    t: &Trajectory,
    s: &Stratification,
    blocks: &BlockStructure,
    pairs: &[(usize, usize)],
) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for &(k1, k2) in pairs {
        let rl = relative_length(t, s, blocks, k1, k2)?;
        let diam = diameter_of(k2 - k1 + 1, |i| t.x[k1 + i].as_slice());
        let slack = 4.0 * s.c_max() * s.c_d * alpha_at(t, k1).powf(s.beta_min());
        worst = worst.max(diam - (rl + slack));
    }
    Ok(worst)
}

/// Maximal index segments `[a, b]` over which every iterate lies in
/// `N(i, alpha_k)`.
pub fn membership_segments(t: &Trajectory, s: &Stratification, i: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for k in 0..=t.k_steps() {
        let member = s.neighborhood_member(i, &t.x[k], alpha_at(t, k));
        match (member, start) {
            (true, None) => start = Some(k),
            (false, Some(a)) => {
                if k - 1 > a {
                    out.push((a, k - 1));
                }
                start = None;
            }
            _ => {}
        }
    }
    if let Some(a) = start {
        if t.k_steps() > a {
            out.push((a, t.k_steps()));
        }
    }
    out
}

/// Stratified-descent residual on a membership segment: the projected path
/// length minus its certified budget
/// `psi(f(y_a) + g1_a) - psi(f(y_b) + g1_b) + sum g2 + sd_iota max alpha^tau`.
/// Negative values mean the descent inequality holds.
#[allow(clippy::too_many_arguments)]
pub fn descent_residual(
    t: &Trajectory,
    s: &Stratification,
    i: usize,
    segment: (usize, usize),
    f: &PiecewiseSmoothFunction,
    d: &Desingularizer,
    tails: &TailTable,
    sd_iota: f64,
) -> Result<f64> {
    let (a, b) = segment;
    if a >= b || b > t.k_steps() {
        return Err(Error::Precondition(format!(
            "segment ({a}, {b}) out of range"
        )));
    }
    for k in a..=b {
        if !s.neighborhood_member(i, &t.x[k], alpha_at(t, k)) {
            return Err(Error::Precondition(format!(
                "iterate {k} leaves N({i}, alpha)"
            )));
        }
    }
    let lhs = projected_sum(t, s, i, a, b)?;
    let y_a = s.strata[i].project(&t.x[a])?;
    let y_b = s.strata[i].project(&t.x[b])?;
    let drop = d.psi(f.evaluate(&y_a)? + tails.g1[a]) - d.psi(f.evaluate(&y_b)? + tails.g1[b]);
    let g2 = tails.g2_sum(a, b);
    let alpha_max = (a..b).map(|k| t.alpha[k]).fold(0.0f64, f64::max);
    let rhs = drop + g2 + sd_iota * alpha_max.powf(s.tau);
    Ok(lhs - rhs)
}
