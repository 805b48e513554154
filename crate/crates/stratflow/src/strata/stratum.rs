//! Stratum geometry: points, affine subspaces, spheres, and open regions,
//! with exact projections and closed-form point/segment distances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vecops;

/// Open, top-dimensional region shapes with closed-form distances to their
/// closures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum RegionForm {
    AllSpace,
    /// `{ x : sign * x[coord] > 0 }`.
    HalfSpace { coord: usize, positive: bool },
    /// Intersection of coordinate half-spaces; `0` leaves a coordinate free.
    Orthant { signs: Vec<i8> },
    /// Open ball interior (`inside`) or exterior of a sphere.
    BallSide {
        center: Vec<f64>,
        radius: f64,
        inside: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Stratum {
    Point { at: Vec<f64> },
    /// Affine subspace through `origin` spanned by an orthonormal `basis`.
    Affine {
        origin: Vec<f64>,
        basis: Vec<Vec<f64>>,
    },
    Sphere { center: Vec<f64>, radius: f64 },
    Region(RegionForm),
}

impl Stratum {
    pub fn is_open(&self) -> bool {
        matches!(self, Stratum::Region(_))
    }

    pub fn dim(&self, ambient: usize) -> usize {
        match self {
            Stratum::Point { .. } => 0,
            Stratum::Affine { basis, .. } => basis.len(),
            Stratum::Sphere { .. } => ambient - 1,
            Stratum::Region(_) => ambient,
        }
    }

    /// Nearest point of the stratum closure.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Stratum::Point { at } => Ok(at.clone()),
            Stratum::Affine { origin, basis } => {
                let rel = vecops::sub(x, origin);
                let mut p = origin.clone();
                for b in basis {
                    vecops::axpy(&mut p, vecops::dot(&rel, b), b);
                }
                Ok(p)
            }
            Stratum::Sphere { center, radius } => {
                let rel = vecops::sub(x, center);
                let len = vecops::norm(&rel);
                if len == 0.0 {
                    return Err(Error::ProjectionAtCenter);
                }
                let mut p = center.clone();
                vecops::axpy(&mut p, radius / len, &rel);
                Ok(p)
            }
            Stratum::Region(form) => Ok(match form {
                RegionForm::AllSpace => x.to_vec(),
                RegionForm::HalfSpace { coord, positive } => {
                    let mut p = x.to_vec();
                    if *positive {
                        p[*coord] = p[*coord].max(0.0);
                    } else {
                        p[*coord] = p[*coord].min(0.0);
                    }
                    p
                }
                RegionForm::Orthant { signs } => {
                    let mut p = x.to_vec();
                    for (pi, &s) in p.iter_mut().zip(signs) {
                        if (s > 0 && *pi < 0.0) || (s < 0 && *pi > 0.0) {
                            *pi = 0.0;
                        }
                    }
                    p
                }
                RegionForm::BallSide {
                    center,
                    radius,
                    inside,
                } => {
                    let rel = vecops::sub(x, center);
                    let len = vecops::norm(&rel);
                    let clamp = if *inside { len > *radius } else { len < *radius };
                    if !clamp {
                        x.to_vec()
                    } else if len == 0.0 {
                        // Center of an exterior region: any boundary point
                        // is nearest; pick the first-axis one.
                        let mut p = center.clone();
                        p[0] += radius;
                        p
                    } else {
                        let mut p = center.clone();
                        vecops::axpy(&mut p, radius / len, &rel);
                        p
                    }
                }
            }),
        }
    }

    /// Distance to the stratum closure.
    pub fn dist(&self, x: &[f64]) -> f64 {
        match self {
            Stratum::Point { at } => vecops::dist(x, at),
            Stratum::Affine { origin, basis } => {
                let rel = vecops::sub(x, origin);
                let mut tangential = 0.0;
                for b in basis {
                    let c = vecops::dot(&rel, b);
                    tangential += c * c;
                }
                (vecops::norm_sq(&rel) - tangential).max(0.0).sqrt()
            }
            Stratum::Sphere { center, radius } => (vecops::dist(x, center) - radius).abs(),
            Stratum::Region(form) => match form {
                RegionForm::AllSpace => 0.0,
                RegionForm::HalfSpace { coord, positive } => {
                    if *positive {
                        (-x[*coord]).max(0.0)
                    } else {
                        x[*coord].max(0.0)
                    }
                }
                RegionForm::Orthant { signs } => {
                    let mut sq = 0.0;
                    for (xi, &s) in x.iter().zip(signs) {
                        if (s > 0 && *xi < 0.0) || (s < 0 && *xi > 0.0) {
                            sq += xi * xi;
                        }
                    }
                    sq.sqrt()
                }
                RegionForm::BallSide {
                    center,
                    radius,
                    inside,
                } => {
                    let gap = vecops::dist(x, center) - radius;
                    if *inside {
                        gap.max(0.0)
                    } else {
                        (-gap).max(0.0)
                    }
                }
            },
        }
    }

    /// Minimum distance from the segment `[a, b]` to the stratum. Exact for
    /// non-open strata (the contexts that need it); open regions fall back
    /// to the endpoint minimum.
    pub fn segment_dist(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Stratum::Point { at } => segment_to_point(a, b, at),
            Stratum::Affine { origin, basis } => {
                // Distance of t -> |Q(a - o) + t Q(b - a)| with Q the
                // normal-space projector; quadratic in t, clamped to [0, 1].
                let normal = |v: &[f64]| -> Vec<f64> {
                    let mut n = v.to_vec();
                    for bvec in basis {
                        let c = vecops::dot(v, bvec);
                        vecops::axpy(&mut n, -c, bvec);
                    }
                    n
                };
                let u = normal(&vecops::sub(a, origin));
                let w = normal(&vecops::sub(b, a));
                let ww = vecops::norm_sq(&w);
                let t = if ww == 0.0 {
                    0.0
                } else {
                    (-vecops::dot(&u, &w) / ww).clamp(0.0, 1.0)
                };
                let mut best = u.clone();
                vecops::axpy(&mut best, t, &w);
                vecops::norm(&best)
            }
            Stratum::Sphere { center, radius } => {
                // The radial profile along the segment attains every value
                // between its minimum and the endpoint maxima.
                let dmin = segment_to_point(a, b, center);
                let dmax = vecops::dist(a, center).max(vecops::dist(b, center));
                if *radius < dmin {
                    dmin - radius
                } else if *radius > dmax {
                    radius - dmax
                } else {
                    0.0
                }
            }
            Stratum::Region(_) => self.dist(a).min(self.dist(b)),
        }
    }

    /// Tangential component of a vector at a point of the stratum (the
    /// restricted-gradient map for gradients of the ambient objective).
    pub fn tangential(&self, on_stratum: &[f64], v: &[f64]) -> Vec<f64> {
        match self {
            Stratum::Point { .. } => vecops::zeros(v.len()),
            Stratum::Affine { basis, .. } => {
                let mut t = vecops::zeros(v.len());
                for b in basis {
                    vecops::axpy(&mut t, vecops::dot(v, b), b);
                }
                t
            }
            Stratum::Sphere { center, .. } => {
                let rel = vecops::sub(on_stratum, center);
                let len = vecops::norm(&rel);
                let mut t = v.to_vec();
                if len > 0.0 {
                    let radial = vecops::dot(v, &rel) / (len * len);
                    vecops::axpy(&mut t, -radial, &rel);
                }
                t
            }
            Stratum::Region(_) => v.to_vec(),
        }
    }
}

fn segment_to_point(a: &[f64], b: &[f64], p: &[f64]) -> f64 {
    let u = vecops::sub(a, p);
    let w = vecops::sub(b, a);
    let ww = vecops::norm_sq(&w);
    let t = if ww == 0.0 {
        0.0
    } else {
        (-vecops::dot(&u, &w) / ww).clamp(0.0, 1.0)
    };
    let mut q = u;
    vecops::axpy(&mut q, t, &w);
    vecops::norm(&q)
}
