//! Stratifications: strata with frontier relations and tube exponents, the
//! shrinking neighborhoods built from them, and hand-built instances for the
//! battery functions whose kink loci are affine or spherical.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strata::stratum::{RegionForm, Stratum};

/// A stratification with its tube constants. Non-open strata come first;
/// `frontier` lists pairs `(j, i)` meaning `M_j` lies in the frontier of
/// `M_i`, which carves the `gamma_j`-tube of `M_j` out of the neighborhoods
/// of `M_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stratification {
    pub ambient_dim: usize,
    pub strata: Vec<Stratum>,
    pub frontier: Vec<(usize, usize)>,
    pub c: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub theta: f64,
    pub tau: f64,
    pub c_d: f64,
}

impl Stratification {
    /// Number of non-open strata (they are listed first).
    pub fn non_open_count(&self) -> usize {
        self.strata.iter().take_while(|m| !m.is_open()).count()
    }

    /// Enlarged crossing radius scale for nonmonotone steps.
    pub fn hat_c(&self, i: usize) -> f64 {
        self.c_d.powf(self.gamma[i]) * self.c[i]
    }

    /// `p_i = gamma_i (1 - theta)`.
    pub fn p(&self, i: usize) -> f64 {
        self.gamma[i] * (1.0 - self.theta)
    }

    pub fn beta_min(&self) -> f64 {
        self.beta.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn gamma_min(&self) -> f64 {
        self.gamma.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `min p_i` over the non-open strata.
    pub fn p_min(&self) -> f64 {
        (0..self.non_open_count())
            .map(|i| self.p(i))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn c_max(&self) -> f64 {
        self.c.iter().cloned().fold(0.0, f64::max)
    }

    /// Frontier-lower strata of `i`.
    pub fn lower_of(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.frontier
            .iter()
            .filter(move |(_, upper)| *upper == i)
            .map(|(lower, _)| *lower)
    }

    /// Structural and exponent checks:
    /// per stratum `0 < beta_i < gamma_i (1 - theta) < tau (1 - theta)`
    /// (hence `beta_i < p_i < gamma_i < tau <= 1`), ordering of non-open
    /// before open strata, and `beta_i > gamma_j` for frontier pairs among
    /// non-open strata. Frontier pairs whose upper stratum is open keep the
    /// tube exclusions but are exempt from the exponent comparison: with
    /// the tube exponents pinned for the kink strata, no admissible open
    /// beta can also dominate them.
    pub fn validate(&self) -> Result<()> {
        let n = self.strata.len();
        if n == 0 {
            return Err(Error::EmptyInput("stratification"));
        }
        if self.c.len() != n || self.beta.len() != n || self.gamma.len() != n {
            return Err(Error::InvalidParameter(
                "per-stratum constant lists must match the strata count".into(),
            ));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in (0, 1), got {}",
                self.theta
            )));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tau must lie in (0, 1], got {}",
                self.tau
            )));
        }
        if self.c_d < 1.0 {
            return Err(Error::InvalidParameter("c_d must be at least 1".into()));
        }
        let mut seen_open = false;
        for m in &self.strata {
            if m.is_open() {
                seen_open = true;
            } else if seen_open {
                return Err(Error::InvalidParameter(
                    "non-open strata must precede open strata".into(),
                ));
            }
        }
        for i in 0..n {
            if !(self.c[i] > 0.0) {
                return Err(Error::InvalidParameter(format!("c[{i}] must be > 0")));
            }
            let p = self.p(i);
            if !(self.beta[i] > 0.0 && self.beta[i] < p) {
                return Err(Error::InvalidParameter(format!(
                    "need 0 < beta[{i}] < gamma[{i}] (1 - theta), got beta = {}, p = {p}",
                    self.beta[i]
                )));
            }
            if !(self.gamma[i] < self.tau) {
                return Err(Error::InvalidParameter(format!(
                    "need gamma[{i}] < tau, got {} vs {}",
                    self.gamma[i], self.tau
                )));
            }
        }
        let non_open = self.non_open_count();
        for &(j, i) in &self.frontier {
            if j >= n || i >= n {
                return Err(Error::InvalidParameter(format!(
                    "frontier pair ({j}, {i}) out of range"
                )));
            }
            let (dj, di) = (
                self.strata[j].dim(self.ambient_dim),
                self.strata[i].dim(self.ambient_dim),
            );
            if dj >= di {
                return Err(Error::InvalidParameter(format!(
                    "frontier pair ({j}, {i}) must go from lower to higher dimension"
                )));
            }
            if i < non_open && !(self.beta[i] > self.gamma[j]) {
                return Err(Error::InvalidParameter(format!(
                    "frontier pair ({j}, {i}) needs beta[{i}] > gamma[{j}]"
                )));
            }
        }
        Ok(())
    }

    /// Membership in the shrinking neighborhood `N(i, alpha)`: within the
    /// `beta_i`-tube of `M_i` and outside every `gamma_j`-tube of its
    /// frontier strata.
    pub fn neighborhood_member(&self, i: usize, x: &[f64], alpha: f64) -> bool {
        assert!(alpha > 0.0, "alpha must be positive");
        if self.strata[i].dist(x) > self.c[i] * alpha.powf(self.beta[i]) {
            return false;
        }
        for j in self.lower_of(i) {
            if self.strata[j].dist(x) <= self.c[j] * alpha.powf(self.gamma[j]) {
                return false;
            }
        }
        true
    }

    /// Index of the stratum containing `x` strictly (open strata only);
    /// used for open-regime reporting.
    pub fn open_stratum_of(&self, x: &[f64]) -> Option<usize> {
        (self.non_open_count()..self.strata.len()).find(|&i| self.strata[i].dist(x) == 0.0)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Stratification = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }
}

// Shared exponent defaults for the hand-built instances: theta = 1/2,
// tau = 1, kink tubes with gamma = 0.8 and the midpoint beta, open collars
// slightly below their admissible ceiling. Deep strata (isolated points
// under a one-dimensional kink) get gamma = 0.1.
const THETA: f64 = 0.5;
const TAU: f64 = 1.0;
const GAMMA_KINK: f64 = 0.8;
const GAMMA_DEEP: f64 = 0.1;
const GAMMA_OPEN: f64 = 0.9;
const BETA_OPEN: f64 = 0.42;

fn beta_midpoint(frontier_gamma_max: f64, gamma: f64) -> f64 {
    (frontier_gamma_max + gamma * (1.0 - THETA)) / 2.0
}

/// Stratification of `|x|` on the line: the kink point and two rays.
pub fn abs_one_d() -> Stratification {
    Stratification {
        ambient_dim: 1,
        strata: vec![
            Stratum::Point { at: vec![0.0] },
            Stratum::Region(RegionForm::HalfSpace {
                coord: 0,
                positive: true,
            }),
            Stratum::Region(RegionForm::HalfSpace {
                coord: 0,
                positive: false,
            }),
        ],
        frontier: vec![(0, 1), (0, 2)],
        c: vec![1.0; 3],
        beta: vec![beta_midpoint(0.0, GAMMA_KINK), BETA_OPEN, BETA_OPEN],
        gamma: vec![GAMMA_KINK, GAMMA_OPEN, GAMMA_OPEN],
        theta: THETA,
        tau: TAU,
        c_d: 1.0,
    }
}

/// Stratification of `|x_1| + |x_2|`: origin, the two axes (modeled as full
/// lines; their tubes are symmetric about the excluded origin), and the four
/// open quadrants.
pub fn abs_sum() -> Stratification {
    let axis = |coord_free: usize| Stratum::Affine {
        origin: vec![0.0, 0.0],
        basis: vec![if coord_free == 0 {
            vec![1.0, 0.0]
        } else {
            vec![0.0, 1.0]
        }],
    };
    let quadrant = |sx: i8, sy: i8| Stratum::Region(RegionForm::Orthant { signs: vec![sx, sy] });
    let beta_axis = beta_midpoint(GAMMA_DEEP, GAMMA_KINK);
    Stratification {
        ambient_dim: 2,
        strata: vec![
            Stratum::Point { at: vec![0.0, 0.0] },
            axis(1), // {x_1 = 0}
            axis(0), // {x_2 = 0}
            quadrant(1, 1),
            quadrant(1, -1),
            quadrant(-1, 1),
            quadrant(-1, -1),
        ],
        frontier: vec![
            (0, 1),
            (0, 2),
            (0, 3),
            (0, 4),
            (0, 5),
            (0, 6),
            (1, 3),
            (1, 4),
            (1, 5),
            (1, 6),
            (2, 3),
            (2, 4),
            (2, 5),
            (2, 6),
        ],
        c: vec![1.0; 7],
        beta: vec![
            beta_midpoint(0.0, GAMMA_DEEP),
            beta_axis,
            beta_axis,
            BETA_OPEN,
            BETA_OPEN,
            BETA_OPEN,
            BETA_OPEN,
        ],
        gamma: vec![
            GAMMA_DEEP, GAMMA_KINK, GAMMA_KINK, GAMMA_OPEN, GAMMA_OPEN, GAMMA_OPEN, GAMMA_OPEN,
        ],
        theta: THETA,
        tau: TAU,
        c_d: 1.0,
    }
}

/// Stratification of the ridge `|x_1| + x_2^2`: the kink axis and the two
/// open half-planes.
pub fn ridge() -> Stratification {
    Stratification {
        ambient_dim: 2,
        strata: vec![
            Stratum::Affine {
                origin: vec![0.0, 0.0],
                basis: vec![vec![0.0, 1.0]],
            },
            Stratum::Region(RegionForm::HalfSpace {
                coord: 0,
                positive: true,
            }),
            Stratum::Region(RegionForm::HalfSpace {
                coord: 0,
                positive: false,
            }),
        ],
        frontier: vec![(0, 1), (0, 2)],
        c: vec![1.0; 3],
        beta: vec![beta_midpoint(0.0, GAMMA_KINK), BETA_OPEN, BETA_OPEN],
        gamma: vec![GAMMA_KINK, GAMMA_OPEN, GAMMA_OPEN],
        theta: THETA,
        tau: TAU,
        c_d: 1.0,
    }
}

/// Stratification of the ring `| |x| - 1 |`: center point, unit circle,
/// punctured interior, and exterior.
pub fn ring() -> Stratification {
    Stratification {
        ambient_dim: 2,
        strata: vec![
            Stratum::Point { at: vec![0.0, 0.0] },
            Stratum::Sphere {
                center: vec![0.0, 0.0],
                radius: 1.0,
            },
            Stratum::Region(RegionForm::BallSide {
                center: vec![0.0, 0.0],
                radius: 1.0,
                inside: true,
            }),
            Stratum::Region(RegionForm::BallSide {
                center: vec![0.0, 0.0],
                radius: 1.0,
                inside: false,
            }),
        ],
        frontier: vec![(0, 2), (1, 2), (1, 3)],
        c: vec![0.25, 0.25, 1.0, 1.0],
        beta: vec![
            beta_midpoint(0.0, GAMMA_DEEP),
            beta_midpoint(0.0, GAMMA_KINK),
            BETA_OPEN,
            BETA_OPEN,
        ],
        gamma: vec![GAMMA_DEEP, GAMMA_KINK, GAMMA_OPEN, GAMMA_OPEN],
        theta: THETA,
        tau: TAU,
        c_d: 1.0,
    }
}

/// Trivial stratification of a smooth objective: one open stratum.
pub fn smooth_quad() -> Stratification {
    Stratification {
        ambient_dim: 2,
        strata: vec![Stratum::Region(RegionForm::AllSpace)],
        frontier: vec![],
        c: vec![1.0],
        beta: vec![BETA_OPEN],
        gamma: vec![GAMMA_OPEN],
        theta: THETA,
        tau: TAU,
        c_d: 1.0,
    }
}

/// Hand-built stratification for a battery function, when its kink locus is
/// affine or spherical (the parabolic kink of `max_quad` is not).
pub fn for_function(name: &str) -> Option<Stratification> {
    match name {
        "abs" => Some(abs_one_d()),
        "abs_sum" => Some(abs_sum()),
        "ridge" => Some(ridge()),
        "ring" => Some(ring()),
        "smooth_quad" => Some(smooth_quad()),
        _ => None,
    }
}
