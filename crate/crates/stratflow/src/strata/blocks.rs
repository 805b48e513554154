//! Crossing indices, minimal-dimension stratum assignment, and the block
//! recursion that segments a trajectory by the non-open stratum controlling
//! its motion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strata::stratification::Stratification;
use crate::trajectory::Trajectory;

/// Step size used for membership at index `k`; the terminal iterate reuses
/// the last step size (records are finite, the dynamics are not).
pub fn alpha_at(t: &Trajectory, k: usize) -> f64 {
    if k < t.k_steps() {
        t.alpha[k]
    } else {
        t.alpha[t.k_steps() - 1]
    }
}

/// Steps whose segment `[x_k, x_{k+1}]` meets the crossing tube
/// `B(M_i, hat_c_i alpha_k^{gamma_i})` of some non-open stratum.
pub fn crossing_indices(t: &Trajectory, s: &Stratification) -> Vec<usize> {
    let non_open = s.non_open_count();
    let mut out = Vec::new();
    for k in 0..t.k_steps() {
        let hit = (0..non_open).any(|i| {
            s.strata[i].segment_dist(&t.x[k], &t.x[k + 1])
                <= s.hat_c(i) * t.alpha[k].powf(s.gamma[i])
        });
        if hit {
            out.push(k);
        }
    }
    out
}

/// The qualifying stratum of minimal dimension at a crossing index:
/// `argmin { dim M_i : d(x_k, M_i) <= 2 hat_c_i alpha_k^gamma_i }`.
/// An empty qualifying set means the step sizes are too large for the tube
/// radii and is reported as an error.
pub fn assign_stratum(t: &Trajectory, s: &Stratification, k: usize) -> Result<usize> {
    let non_open = s.non_open_count();
    let mut best: Option<(usize, usize)> = None; // (dim, index)
    for i in 0..non_open {
        let d = s.strata[i].dist(&t.x[k]);
        if d <= 2.0 * s.hat_c(i) * alpha_at(t, k).powf(s.gamma[i]) {
            let dim = s.strata[i].dim(s.ambient_dim);
            match best {
                Some((bd, _)) if bd <= dim => {}
                _ => best = Some((dim, i)),
            }
        }
    }
    best.map(|(_, i)| i)
        .ok_or(Error::NoQualifyingStratum { step: k })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    /// Entry index `l_m` (a crossing index).
    pub l: usize,
    /// Assigned stratum `G(l_m)`.
    pub stratum: usize,
    /// Last index `s(l_m)` of uninterrupted neighborhood membership.
    pub s_end: usize,
    /// Last index `q(l_m) <= s(l_m)` still within twice the crossing radius.
    pub q: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockStructure {
    pub i_c: Vec<usize>,
    pub blocks: Vec<Block>,
}

impl BlockStructure {
    pub fn entry_indices(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.l).collect()
    }

    /// Trajectories that never cross a non-open tube run in the open-stratum
    /// regime.
    pub fn open_regime(&self) -> bool {
        self.i_c.is_empty()
    }
}

/// The block recursion: starting from the first crossing index, each block
/// extends while membership in the assigned stratum's neighborhood persists
/// (`s`), records the last very-close index (`q`), and the next block starts
/// at the first crossing index after `q`.
pub fn block_recursion(t: &Trajectory, s: &Stratification) -> Result<BlockStructure> {
    let i_c = crossing_indices(t, s);
    let k_end = t.k_steps();
    let mut blocks = Vec::new();
    let mut cursor = match i_c.first() {
        Some(&l0) => l0,
        None => {
            return Ok(BlockStructure {
                i_c,
                blocks,
            })
        }
    };
    loop {
        let stratum = assign_stratum(t, s, cursor)?;
        let mut s_end = cursor;
        while s_end < k_end
            && s.neighborhood_member(stratum, &t.x[s_end + 1], alpha_at(t, s_end + 1))
        {
            s_end += 1;
        }
        if !s.neighborhood_member(stratum, &t.x[cursor], alpha_at(t, cursor)) {
            return Err(Error::Precondition(format!(
                "entry iterate {cursor} escapes its assigned neighborhood; step sizes too large"
            )));
        }
        let mut q = cursor;
        for k in cursor..=s_end {
            if s.strata[stratum].dist(&t.x[k])
                <= 2.0 * s.hat_c(stratum) * alpha_at(t, k).powf(s.gamma[stratum])
            {
                q = k;
            }
        }
        blocks.push(Block {
            l: cursor,
            stratum,
            s_end,
            q,
        });
        match i_c.iter().find(|&&k| k > q) {
            Some(&next) => cursor = next,
            None => break,
        }
    }
    Ok(BlockStructure { i_c, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::{inexact_run, InexactConfig};
    use crate::objectives;
    use crate::rng::RngHandle;
    use crate::schedule::StepSchedule;
    use crate::strata::stratification;

    fn abs_run(k_steps: usize) -> Trajectory {
        let f = objectives::abs_one_d();
        inexact_run(
            &f,
            &[0.7],
            StepSchedule::harmonic(1.0),
            InexactConfig::exact_subgradient(),
            k_steps,
            RngHandle::new(0),
        )
        .unwrap()
    }

    #[test]
    fn segment_through_origin_always_crosses() {
        let s = stratification::abs_one_d();
        let t = Trajectory::synthetic(vec![vec![0.3], vec![-0.2]], vec![1.0]).unwrap();
        assert_eq!(crossing_indices(&t, &s), vec![0]);
    }

    #[test]
    fn short_far_step_does_not_cross() {
        let mut s = stratification::abs_one_d();
        // Shrink the tube so hat_c alpha^gamma = 0.01.
        s.c[0] = 0.01;
        let mut t = Trajectory::synthetic(vec![vec![0.5], vec![0.4]], vec![1.0]).unwrap();
        t.alpha = vec![1.0];
        assert!(crossing_indices(&t, &s).is_empty());
    }

    #[test]
    fn ridge_segment_near_axis_crosses() {
        let s = stratification::ridge();
        let t =
            Trajectory::synthetic(vec![vec![0.05, 1.0], vec![-0.03, 1.0]], vec![0.1]).unwrap();
        assert_eq!(crossing_indices(&t, &s), vec![0]);
    }

    #[test]
    fn minimal_dimension_assignment_prefers_point() {
        let s = stratification::abs_sum();
        let t = Trajectory::synthetic(
            vec![vec![1e-4, 1e-4], vec![-1e-4, 1e-4]],
            vec![0.5],
        )
        .unwrap();
        // Near the origin both the point and the axes qualify.
        assert_eq!(assign_stratum(&t, &s, 0).unwrap(), 0);
    }

    #[test]
    fn empty_qualifying_set_is_reported() {
        let mut s = stratification::abs_one_d();
        s.c[0] = 1e-6;
        // The segment sweeps through zero but the endpoint sits far outside
        // the (tiny) qualifying radius.
        let t = Trajectory::synthetic(vec![vec![0.5], vec![-0.5]], vec![1.0]).unwrap();
        let k = crossing_indices(&t, &s)[0];
        assert!(matches!(
            assign_stratum(&t, &s, k),
            Err(Error::NoQualifyingStratum { .. })
        ));
    }

    #[test]
    fn open_regime_when_no_crossings() {
        let s = stratification::smooth_quad();
        let f = objectives::smooth_quad();
        let t = inexact_run(
            &f,
            &[1.0, 0.5],
            StepSchedule::harmonic(0.25),
            InexactConfig::exact_subgradient(),
            100,
            RngHandle::new(0),
        )
        .unwrap();
        let blocks = block_recursion(&t, &s).unwrap();
        assert!(blocks.open_regime());
        assert!(blocks.blocks.is_empty());
    }

    #[test]
    fn single_tube_run_is_one_block() {
        // The oscillating abs run enters the kink tube and stays.
        let s = stratification::abs_one_d();
        let t = abs_run(200);
        let blocks = block_recursion(&t, &s).unwrap();
        assert_eq!(blocks.blocks.len(), 1);
        let b = &blocks.blocks[0];
        assert_eq!(b.stratum, 0);
        assert_eq!(b.s_end, 200);
        assert_eq!(b.q, 200);
    }

    /// Literal reimplementation of the recursion used as an oracle.
    fn slow_blocks(t: &Trajectory, s: &Stratification) -> Vec<Block> {
        let i_c = crossing_indices(t, s);
        if i_c.is_empty() {
            return vec![];
        }
        let k_end = t.k_steps();
        let mut blocks: Vec<Block> = Vec::new();
        let mut l = i_c[0];
        loop {
            let stratum = assign_stratum(t, s, l).unwrap();
            let mut s_end = l;
            for k in l..=k_end {
                let all_in = (l..=k)
                    .all(|j| s.neighborhood_member(stratum, &t.x[j], alpha_at(t, j)));
                if all_in {
                    s_end = k;
                }
            }
            let q = (l..=s_end)
                .filter(|&k| {
                    s.strata[stratum].dist(&t.x[k])
                        <= 2.0 * s.hat_c(stratum) * alpha_at(t, k).powf(s.gamma[stratum])
                })
                .max()
                .unwrap();
            blocks.push(Block {
                l,
                stratum,
                s_end,
                q,
            });
            match i_c.iter().copied().find(|&k| k > q) {
                Some(next) => l = next,
                None => return blocks,
            }
        }
    }

    #[test]
    fn recursion_matches_slow_reference() {
        let s = stratification::abs_one_d();
        let t = abs_run(150);
        let fast = block_recursion(&t, &s).unwrap();
        assert_eq!(fast.blocks, slow_blocks(&t, &s));

        // A ridge run with Goldstein enlargement for variety.
        let s2 = stratification::ridge();
        let f = objectives::ridge();
        let t2 = inexact_run(
            &f,
            &[0.7, 0.5],
            StepSchedule::harmonic(0.4),
            InexactConfig {
                c_b: 0.1,
                xi: 1.0,
                tau: 1.0,
                noise: crate::methods::NoiseMode::None,
                samples: None,
            },
            300,
            RngHandle::new(5),
        )
        .unwrap();
        let fast2 = block_recursion(&t2, &s2).unwrap();
        assert_eq!(fast2.blocks, slow_blocks(&t2, &s2));
    }

    #[test]
    fn no_repeat_within_block_span() {
        // G(l_m) never reappears among entries in (q(l_m), s(l_m)].
        let s = stratification::abs_sum();
        let f = objectives::abs_sum();
        let t = inexact_run(
            &f,
            &f.default_start.clone(),
            StepSchedule::harmonic(0.4),
            InexactConfig::exact_subgradient(),
            400,
            RngHandle::new(9),
        )
        .unwrap();
        let structure = block_recursion(&t, &s).unwrap();
        let entries = structure.entry_indices();
        for b in &structure.blocks {
            for other in &structure.blocks {
                if entries.contains(&other.l) && other.l > b.q && other.l <= b.s_end {
                    assert_ne!(other.stratum, b.stratum, "blocks {b:?} vs {other:?}");
                }
            }
        }
    }
}
