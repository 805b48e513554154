//! Exact diameter (max pairwise distance) of a finite point set.
//!
//! Three exact strategies, chosen by size and dimension:
//!   * pairwise scan up to `PAIRWISE_LIMIT` points;
//!   * planar convex hull + rotating calipers for larger 2-D sets;
//!   * otherwise a farthest-point sweep supplies a lower bound `d`, and the
//!     exact scan is restricted to candidates farther than `d/2` from the
//!     centroid (any diameter endpoint pair has at least one point there).

use crate::vecops;

/// Largest set handled by the plain quadratic scan.
pub const PAIRWISE_LIMIT: usize = 5000;

/// Max pairwise Euclidean distance. Panics on an empty slice of points with
/// a clear message; single points have diameter zero.
pub fn diameter(points: &[Vec<f64>]) -> f64 {
    diameter_of(points.len(), |i| &points[i])
}

/// Generic form used to scan index subsets without copying points.
pub fn diameter_of<'a, F>(len: usize, at: F) -> f64
where
    F: Fn(usize) -> &'a [f64],
{
    assert!(len > 0, "diameter of an empty set is undefined");
    if len == 1 {
        return 0.0;
    }
    let dim = at(0).len();
    if len <= PAIRWISE_LIMIT {
        pairwise(len, &at)
    } else if dim == 2 {
        hull_calipers(len, &at)
    } else {
        pruned_scan(len, &at)
    }
}

fn pairwise<'a, F: Fn(usize) -> &'a [f64]>(len: usize, at: &F) -> f64 {
    let mut best = 0.0f64;
    for i in 0..len {
        let pi = at(i);
        for j in (i + 1)..len {
            let d = vecops::dist(pi, at(j));
            if d > best {
                best = d;
            }
        }
    }
    best
}

/// Andrew's monotone chain on the points, then rotating calipers.
fn hull_calipers<'a, F: Fn(usize) -> &'a [f64]>(len: usize, at: &F) -> f64 {
    let mut pts: Vec<(f64, f64)> = (0..len).map(|i| (at(i)[0], at(i)[1])).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    planar_diameter_sorted(&pts)
}

fn tdist(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    (dx * dx + dy * dy).sqrt()
}

/// Exact planar diameter of points already sorted by `(x, y)`.
pub(crate) fn planar_diameter_sorted(pts: &[(f64, f64)]) -> f64 {
    assert!(!pts.is_empty());
    let mut dedup: Vec<(f64, f64)> = pts.to_vec();
    dedup.dedup();
    if dedup.len() == 1 {
        return 0.0;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    // Monotone chain, strictly convex (collinear points dropped).
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(dedup.len().min(4096));
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 {
            Box::new(dedup.iter())
        } else {
            Box::new(dedup.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    if hull.len() <= 1 {
        // Everything collinear: the sorted extremes realize the diameter.
        return tdist(dedup[0], *dedup.last().unwrap());
    }
    let h = hull.len();
    let mut best = 0.0f64;
    let mut j = 1usize;
    for i in 0..h {
        let cur = hull[i];
        let next = hull[(i + 1) % h];
        let edge = (next.0 - cur.0, next.1 - cur.1);
        let mut advances = 0usize;
        loop {
            let jn = (j + 1) % h;
            let a = hull[j];
            let b = hull[jn];
            // Advance while the antipodal point still moves away from edge i.
            let adv = edge.0 * (b.1 - a.1) - edge.1 * (b.0 - a.0);
            if adv > 0.0 && advances < h {
                j = jn;
                advances += 1;
            } else {
                break;
            }
        }
        best = best.max(tdist(cur, hull[j]));
        best = best.max(tdist(next, hull[j]));
    }
    best
}

fn pruned_scan<'a, F: Fn(usize) -> &'a [f64]>(len: usize, at: &F) -> f64 {
    let dim = at(0).len();
    let mut centroid = vecops::zeros(dim);
    for i in 0..len {
        vecops::axpy(&mut centroid, 1.0 / len as f64, at(i));
    }
    // Farthest-point sweeps from the centroid give an actual pair distance,
    // hence a lower bound on the diameter.
    let farthest_from = |p: &[f64]| -> (usize, f64) {
        let mut best = (0usize, -1.0f64);
        for i in 0..len {
            let d = vecops::dist(p, at(i));
            if d > best.1 {
                best = (i, d);
            }
        }
        best
    };
    let (mut a, _) = farthest_from(&centroid);
    let mut lower = 0.0f64;
    for _ in 0..3 {
        let (b, d) = farthest_from(at(a));
        if d <= lower {
            break;
        }
        lower = d;
        a = b;
    }
    // Any diameter pair has one endpoint farther than lower/2 from the
    // centroid (since |p - c| + |q - c| >= diam >= lower).
    let threshold = lower / 2.0 * (1.0 - 1e-12);
    let candidates: Vec<usize> = (0..len)
        .filter(|&i| vecops::dist(at(i), &centroid) >= threshold)
        .collect();
    let mut best = lower;
    for &i in &candidates {
        let pi = at(i);
        for j in 0..len {
            let d = vecops::dist(pi, at(j));
            if d > best {
                best = d;
            }
        }
    }
    best
}
