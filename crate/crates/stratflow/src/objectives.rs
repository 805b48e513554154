//! Piecewise-smooth test functions with exact generator oracles for the
//! Clarke subdifferential and sampling from its Goldstein enlargement.
//!
//! Every battery function is one of three shapes:
//!   * a pointwise max of smooth pieces,
//!   * a sum of coordinate absolute values plus a smooth part,
//!   * the absolute gap `|g(x) - level|` of a smooth scalar function.
//!
//! For these shapes the convex hull of the active-piece gradients equals the
//! Clarke subdifferential away from the singular points of the pieces
//! themselves (for the ring that is the center, where the inner norm is not
//! differentiable; the oracle returns the zero gradient there, which is an
//! element of the subdifferential but not all of it).

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::vecops;

/// One smooth piece: value and gradient evaluators.
#[derive(Clone, Copy)]
pub struct SmoothPiece {
    pub eval: fn(&[f64]) -> f64,
    pub grad: fn(&[f64]) -> Vec<f64>,
}

/// How the pieces combine into the objective.
#[derive(Clone)]
pub enum Combiner {
    /// `f = max_i p_i(x)`.
    Max(Vec<SmoothPiece>),
    /// `f = sum_{i in abs_coords} |x_i| + smooth(x)`.
    SumAbs {
        abs_coords: Vec<usize>,
        smooth: Option<SmoothPiece>,
    },
    /// `f = |inner(x) - level|`.
    AbsComposite { inner: SmoothPiece, level: f64 },
}

/// Description of one known critical component.
#[derive(Debug, Clone, PartialEq)]
pub enum CriticalComponent {
    Point(Vec<f64>),
    Sphere { center: Vec<f64>, radius: f64 },
}

/// A piecewise-smooth objective with activity logic and an exact generator
/// oracle on a stated box.
#[derive(Clone)]
pub struct PiecewiseSmoothFunction {
    pub name: &'static str,
    pub dim: usize,
    pub combiner: Combiner,
    /// Bound on generator norms over the stated box.
    pub lipschitz_bound: f64,
    /// Half-width of the box `[-r, r]^n` on which `lipschitz_bound` holds.
    pub box_radius: f64,
    pub critical_set: Vec<CriticalComponent>,
    /// Default starting point for experiment runs.
    pub default_start: Vec<f64>,
}

/// Generators spanning (the sampled part of) a subdifferential:
/// `co(generators)` represents the Clarke subdifferential at `base` for
/// `radius = 0`, and the Goldstein enlargement for `radius > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientSet {
    pub generators: Vec<Vec<f64>>,
    pub base: Vec<f64>,
    pub radius: f64,
}

impl PiecewiseSmoothFunction {
    /// Relative activity tolerance: pieces within this band of the leader
    /// count as active.
    pub fn activity_tol(&self, fx: f64) -> f64 {
        1e-9 * (1.0 + fx.abs())
    }

    pub fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Objective value per the combiner.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match &self.combiner {
            Combiner::Max(pieces) => pieces
                .iter()
                .map(|p| (p.eval)(x))
                .fold(f64::NEG_INFINITY, f64::max),
            Combiner::SumAbs { abs_coords, smooth } => {
                let mut total: f64 = abs_coords.iter().map(|&i| x[i].abs()).sum();
                if let Some(s) = smooth {
                    total += (s.eval)(x);
                }
                total
            }
            Combiner::AbsComposite { inner, level } => ((inner.eval)(x) - level).abs(),
        }
    }

    /// Gradients of all pieces active within `tol_active`. For the battery
    /// shapes the convex hull of the result equals the Clarke subdifferential
    /// (see the module note for the ring's center).
    pub fn clarke_generators(&self, x: &[f64], tol_active: f64) -> Result<SubgradientSet> {
        self.check_dim(x)?;
        let generators = match &self.combiner {
            Combiner::Max(pieces) => {
                let values: Vec<f64> = pieces.iter().map(|p| (p.eval)(x)).collect();
                let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                pieces
                    .iter()
                    .zip(&values)
                    .filter(|(_, &v)| top - v <= tol_active)
                    .map(|(p, _)| (p.grad)(x))
                    .collect()
            }
            Combiner::SumAbs { abs_coords, smooth } => {
                let base = smooth
                    .as_ref()
                    .map(|s| (s.grad)(x))
                    .unwrap_or_else(|| vecops::zeros(self.dim));
                // Cartesian product of sign choices over the ambiguous coords.
                let mut gens = vec![base];
                for &i in abs_coords {
                    if x[i].abs() <= tol_active {
                        let mut doubled = Vec::with_capacity(gens.len() * 2);
                        for g in &gens {
                            let mut plus = g.clone();
                            plus[i] += 1.0;
                            let mut minus = g.clone();
                            minus[i] -= 1.0;
                            doubled.push(plus);
                            doubled.push(minus);
                        }
                        gens = doubled;
                    } else {
                        let s = x[i].signum();
                        for g in &mut gens {
                            g[i] += s;
                        }
                    }
                }
                gens
            }
            Combiner::AbsComposite { inner, level } => {
                let gap = (inner.eval)(x) - level;
                let grad = (inner.grad)(x);
                if gap.abs() <= tol_active {
                    vec![grad.clone(), vecops::scale(&grad, -1.0)]
                } else {
                    vec![vecops::scale(&grad, gap.signum())]
                }
            }
        };
        Ok(SubgradientSet {
            generators,
            base: x.to_vec(),
            radius: 0.0,
        })
    }

    /// Draws one element of the Goldstein enlargement `co ∂f(B(x, r))`:
    /// a flat-Dirichlet mixture of generators taken at `m` uniform points of
    /// the ball. With `r = 0` this reduces to a Clarke generator at `x`.
    pub fn goldstein_sample(
        &self,
        x: &[f64],
        r: f64,
        m: usize,
        rng: &mut impl Rng,
    ) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        assert!(r >= 0.0, "radius must be nonnegative");
        assert!(m >= 1, "need at least one sample");
        let mut out = vecops::zeros(self.dim);
        let mut weights = Vec::with_capacity(m);
        let mut total = 0.0;
        for _ in 0..m {
            let w: f64 = Exp1.sample(rng);
            total += w;
            weights.push(w);
        }
        for w in &mut weights {
            *w /= total;
        }
        for &w in &weights {
            let point = if r > 0.0 {
                uniform_in_ball(x, r, rng)
            } else {
                x.to_vec()
            };
            let tol = self.activity_tol(self.eval_unchecked(&point));
            let set = self.clarke_generators(&point, tol)?;
            vecops::axpy(&mut out, w, &set.generators[0]);
        }
        Ok(out)
    }

    /// Default number of ball samples per Goldstein draw.
    pub fn default_samples(&self) -> usize {
        2 * self.dim + 2
    }
}

/// Uniform draw from the closed ball `B(center, r)`.
pub fn uniform_in_ball(center: &[f64], r: f64, rng: &mut impl Rng) -> Vec<f64> {
    let n = center.len();
    let mut dir: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let len = vecops::norm(&dir);
    if len == 0.0 {
        return center.to_vec();
    }
    let u: f64 = rng.gen::<f64>();
    let scale = r * u.powf(1.0 / n as f64) / len;
    for (d, c) in dir.iter_mut().zip(center) {
        *d = c + *d * scale;
    }
    dir
}

/// Deterministic selection rule for picking one generator at a kink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule {
    /// First active piece in declaration order (default).
    FirstActive,
    /// Uniformly random vertex of the generator list.
    RandomVertex,
}

impl SelectionRule {
    pub fn pick(&self, set: &SubgradientSet, rng: &mut impl Rng) -> Vec<f64> {
        match self {
            SelectionRule::FirstActive => set.generators[0].clone(),
            SelectionRule::RandomVertex => {
                let i = rng.gen_range(0..set.generators.len());
                set.generators[i].clone()
            }
        }
    }
}

// Piece evaluators used by the battery (fn items so pieces stay `Copy`).

fn norm_sq(x: &[f64]) -> f64 {
    vecops::norm_sq(x)
}

fn norm_sq_grad(x: &[f64]) -> Vec<f64> {
    vecops::scale(x, 2.0)
}

fn norm_val(x: &[f64]) -> f64 {
    vecops::norm(x)
}

/// Gradient of the Euclidean norm; zero at the origin (an element of the
/// subdifferential there, by convention).
fn norm_grad(x: &[f64]) -> Vec<f64> {
    let n = vecops::norm(x);
    if n == 0.0 {
        vecops::zeros(x.len())
    } else {
        vecops::scale(x, 1.0 / n)
    }
}

fn tail_sq(x: &[f64]) -> f64 {
    x[1..].iter().map(|v| v * v).sum()
}

fn tail_sq_grad(x: &[f64]) -> Vec<f64> {
    let mut g = vecops::scale(x, 2.0);
    g[0] = 0.0;
    g
}

fn shifted_quad(x: &[f64]) -> f64 {
    (x[0] - 1.0) * (x[0] - 1.0) + 1.0
}

fn shifted_quad_grad(x: &[f64]) -> Vec<f64> {
    let mut g = vecops::zeros(x.len());
    g[0] = 2.0 * (x[0] - 1.0);
    g
}

/// `sum_i |x_i|` in dimension 2; critical set `{0}`.
pub fn abs_sum() -> PiecewiseSmoothFunction {
    PiecewiseSmoothFunction {
        name: "abs_sum",
        dim: 2,
        combiner: Combiner::SumAbs {
            abs_coords: vec![0, 1],
            smooth: None,
        },
        lipschitz_bound: 2.0_f64.sqrt(),
        box_radius: 2.0,
        critical_set: vec![CriticalComponent::Point(vec![0.0, 0.0])],
        default_start: vec![0.7, -0.5],
    }
}

/// `|x_1|` in dimension 1; critical set `{0}`.
pub fn abs_one_d() -> PiecewiseSmoothFunction {
    PiecewiseSmoothFunction {
        name: "abs",
        dim: 1,
        combiner: Combiner::SumAbs {
            abs_coords: vec![0],
            smooth: None,
        },
        lipschitz_bound: 1.0,
        box_radius: 2.0,
        critical_set: vec![CriticalComponent::Point(vec![0.0])],
        default_start: vec![0.7],
    }
}

/// `|x_1| + sum_{i>=2} x_i^2`; critical set `{0}`.
pub fn ridge() -> PiecewiseSmoothFunction {
    PiecewiseSmoothFunction {
        name: "ridge",
        dim: 2,
        combiner: Combiner::SumAbs {
            abs_coords: vec![0],
            smooth: Some(SmoothPiece {
                eval: tail_sq,
                grad: tail_sq_grad,
            }),
        },
        // |(±1, 2 x_2)| <= sqrt(1 + 16) on the box of half-width 2.
        lipschitz_bound: 17.0_f64.sqrt(),
        box_radius: 2.0,
        critical_set: vec![CriticalComponent::Point(vec![0.0, 0.0])],
        default_start: vec![0.7, 0.5],
    }
}

/// `| ||x|| - 1 |`; critical set `{0}` and the unit sphere.
pub fn ring() -> PiecewiseSmoothFunction {
    PiecewiseSmoothFunction {
        name: "ring",
        dim: 2,
        combiner: Combiner::AbsComposite {
            inner: SmoothPiece {
                eval: norm_val,
                grad: norm_grad,
            },
            level: 1.0,
        },
        lipschitz_bound: 1.0,
        box_radius: 2.0,
        critical_set: vec![
            CriticalComponent::Point(vec![0.0, 0.0]),
            CriticalComponent::Sphere {
                center: vec![0.0, 0.0],
                radius: 1.0,
            },
        ],
        default_start: vec![0.3, 0.2],
    }
}

/// `max(x_1^2 + x_2^2, (x_1 - 1)^2 + 1)`: a parabolic kink locus with the
/// unique critical point `(1, 0)` on it.
pub fn max_quad() -> PiecewiseSmoothFunction {
    PiecewiseSmoothFunction {
        name: "max_quad",
        dim: 2,
        combiner: Combiner::Max(vec![
            SmoothPiece {
                eval: norm_sq,
                grad: norm_sq_grad,
            },
            SmoothPiece {
                eval: shifted_quad,
                grad: shifted_quad_grad,
            },
        ]),
        // max(2 ||x||, 2 |x_1 - 1|) <= 2 sqrt(8) on the box of half-width 2.
        lipschitz_bound: 2.0 * 8.0_f64.sqrt(),
        box_radius: 2.0,
        critical_set: vec![CriticalComponent::Point(vec![1.0, 0.0])],
        default_start: vec![1.5, 0.8],
    }
}

/// `||x||^2` smooth control; critical set `{0}`.
pub fn smooth_quad() -> PiecewiseSmoothFunction {
    PiecewiseSmoothFunction {
        name: "smooth_quad",
        dim: 2,
        combiner: Combiner::Max(vec![SmoothPiece {
            eval: norm_sq,
            grad: norm_sq_grad,
        }]),
        lipschitz_bound: 4.0 * 2.0_f64.sqrt(),
        box_radius: 2.0,
        critical_set: vec![CriticalComponent::Point(vec![0.0, 0.0])],
        default_start: vec![1.0, 0.0],
    }
}

/// The full test battery, addressable by name.
pub fn battery() -> Vec<PiecewiseSmoothFunction> {
    vec![
        abs_sum(),
        ridge(),
        ring(),
        max_quad(),
        smooth_quad(),
        abs_one_d(),
    ]
}

/// Looks a battery function up by its config name.
pub fn by_name(name: &str) -> Option<PiecewiseSmoothFunction> {
    battery().into_iter().find(|f| f.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngHandle;

    fn tol(f: &PiecewiseSmoothFunction, x: &[f64]) -> f64 {
        f.activity_tol(f.evaluate(x).unwrap())
    }

    #[test]
    fn evaluate_battery_values() {
        assert_eq!(abs_sum().evaluate(&[3.0, -4.0]).unwrap(), 7.0);
        assert_eq!(ridge().evaluate(&[0.0, 2.0]).unwrap(), 4.0);
        assert_eq!(ring().evaluate(&[0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn evaluate_rejects_dim_mismatch() {
        assert!(matches!(
            abs_sum().evaluate(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn clarke_abs_at_zero() {
        let f = abs_one_d();
        let set = f.clarke_generators(&[0.0], tol(&f, &[0.0])).unwrap();
        let mut gens: Vec<f64> = set.generators.iter().map(|g| g[0]).collect();
        gens.sort_by(f64::total_cmp);
        assert_eq!(gens, vec![-1.0, 1.0]);
    }

    #[test]
    fn clarke_ridge_on_axis() {
        let f = ridge();
        let x = [0.0, 0.5];
        let set = f.clarke_generators(&x, tol(&f, &x)).unwrap();
        let mut gens = set.generators.clone();
        gens.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(gens, vec![vec![-1.0, 1.0], vec![1.0, 1.0]]);
    }

    #[test]
    fn clarke_smooth_is_singleton_gradient() {
        let f = smooth_quad();
        let x = [1.0, 2.0];
        let set = f.clarke_generators(&x, tol(&f, &x)).unwrap();
        assert_eq!(set.generators, vec![vec![2.0, 4.0]]);
    }

    #[test]
    fn max_quad_inactive_piece_dropped() {
        // At (0.5, 0) the piece values are 0.25 vs 1.25: only the far
        // quadratic is active, so the oracle returns a single gradient.
        let f = max_quad();
        let x = [0.5, 0.0];
        let set = f.clarke_generators(&x, tol(&f, &x)).unwrap();
        assert_eq!(set.generators, vec![vec![-1.0, 0.0]]);
    }

    #[test]
    fn battery_contents() {
        let fns = battery();
        assert!(fns.len() >= 5);
        let ring_fn = by_name("ring").unwrap();
        assert!(ring_fn
            .critical_set
            .iter()
            .any(|c| matches!(c, CriticalComponent::Sphere { radius, .. } if *radius == 1.0)));
        // (1, 0) lies on the ring's critical sphere.
        assert!((vecops::norm(&[1.0, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn goldstein_zero_radius_smooth_is_exact() {
        let f = smooth_quad();
        let mut rng = RngHandle::new(1).rng();
        let u = f.goldstein_sample(&[1.0, 0.0], 0.0, 4, &mut rng).unwrap();
        assert!(vecops::dist(&u, &[2.0, 0.0]) < 1e-14);
    }

    #[test]
    fn goldstein_abs_stays_in_hull() {
        let f = abs_one_d();
        let mut rng = RngHandle::new(2).rng();
        for _ in 0..100 {
            let u = f.goldstein_sample(&[0.0], 0.1, 5, &mut rng).unwrap();
            assert!(u[0] >= -1.0 - 1e-12 && u[0] <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn goldstein_positive_ball_averages_to_one() {
        // B(1, 0.5) lies in the positive axis, so every generator is +1.
        let f = abs_one_d();
        let mut rng = RngHandle::new(3).rng();
        let mut mean = 0.0;
        let draws = 2000;
        for _ in 0..draws {
            mean += f.goldstein_sample(&[1.0], 0.5, 3, &mut rng).unwrap()[0];
        }
        mean /= draws as f64;
        assert!((mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generator_norms_bounded_on_box() {
        let mut rng = RngHandle::new(11).rng();
        for f in battery() {
            for _ in 0..10_000 {
                let x: Vec<f64> = (0..f.dim)
                    .map(|_| rng.gen_range(-f.box_radius..f.box_radius))
                    .collect();
                let set = f.clarke_generators(&x, tol(&f, &x)).unwrap();
                for g in &set.generators {
                    assert!(
                        vecops::norm(g) <= f.lipschitz_bound + 1e-12,
                        "{}: generator norm {} exceeds bound {}",
                        f.name,
                        vecops::norm(g),
                        f.lipschitz_bound
                    );
                }
            }
        }
    }

    #[test]
    fn goldstein_hull_grows_with_radius() {
        // Support-function comparison: draws at radius r1 stay within
        // L * (r2 - r1) of the hull sampled at radius r2 >= r1.
        let f = abs_sum();
        let x = [0.05, -0.02];
        let (r1, r2) = (0.02, 0.2);
        let dirs = 16usize;
        let draws = 400;
        let mut rng = RngHandle::new(5).rng();
        let sample = |radius: f64, rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Vec<f64>> {
            (0..draws)
                .map(|_| f.goldstein_sample(&x, radius, 6, rng).unwrap())
                .collect()
        };
        let small = sample(r1, &mut rng);
        let large = sample(r2, &mut rng);
        for d in 0..dirs {
            let angle = d as f64 * std::f64::consts::TAU / dirs as f64;
            let dir = [angle.cos(), angle.sin()];
            let sup = |set: &[Vec<f64>]| {
                set.iter()
                    .map(|g| vecops::dot(g, &dir))
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            let eps = 0.05;
            assert!(sup(&small) <= sup(&large) + f.lipschitz_bound * (r2 - r1) + eps);
        }
    }

    #[test]
    fn zero_radius_draw_lies_in_clarke_hull() {
        let f = abs_sum();
        let x = [0.0, 0.3];
        let mut rng = RngHandle::new(9).rng();
        let u = f.goldstein_sample(&x, 0.0, 6, &mut rng).unwrap();
        // Hull at x is the segment {(s, 1): s in [-1, 1]}.
        assert!((u[1] - 1.0).abs() < 1e-12);
        assert!(u[0].abs() <= 1.0 + 1e-12);
    }
}
