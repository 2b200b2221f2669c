//! Separating hyperplanes between an ellipsoid and box obstacles.

use super::RegionError;
use crate::geom::{Aabb, Ellipsoid, Hyperplane, Vec3};
use nalgebra::Matrix3;
use ordered_float::OrderedFloat;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

const EXCLUDE_TOL: f64 = 1e-9;

/// One occupied grid cell (clipped to the inflation box), as a convex body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstacleCell(pub Aabb);

impl ObstacleCell {
    pub fn corners(&self) -> [Vec3; 8] {
        self.0.corners()
    }

    fn excluded_by(&self, h: &Hyperplane) -> bool {
        self.corners()
            .iter()
            .all(|c| h.signed_distance(c) >= -EXCLUDE_TOL)
    }
}

/// Closest point of `b` to `center` under the metric `(x-c)ᵀ Q (x-c)`.
///
/// The minimizer has each coordinate at its lower bound, upper bound, or
/// free; every one of the 27 patterns is solved and the best feasible
/// candidate kept.
pub(crate) fn closest_in_metric(b: &Aabb, center: &Vec3, q: &Matrix3<f64>) -> (f64, Vec3) {
    let lo = b.min - center;
    let hi = b.max - center;
    let mut best = (f64::INFINITY, Vec3::zeros());
    for pattern in 0..27u32 {
        let mut y = Vec3::zeros();
        let mut free = [false; 3];
        let mut code = pattern;
        for a in 0..3 {
            match code % 3 {
                0 => y[a] = lo[a],
                1 => y[a] = hi[a],
                _ => free[a] = true,
            }
            code /= 3;
        }
        let free_axes: Vec<usize> = (0..3).filter(|&a| free[a]).collect();
        match free_axes.len() {
            0 => {}
            1 => {
                let u = free_axes[0];
                let rhs: f64 = (0..3).filter(|&a| a != u).map(|a| q[(u, a)] * y[a]).sum();
                y[u] = -rhs / q[(u, u)];
            }
            2 => {
                let (u, v) = (free_axes[0], free_axes[1]);
                let f = 3 - u - v;
                let (a11, a12, a22) = (q[(u, u)], q[(u, v)], q[(v, v)]);
                let (r1, r2) = (-q[(u, f)] * y[f], -q[(v, f)] * y[f]);
                let det = a11 * a22 - a12 * a12;
                y[u] = (a22 * r1 - a12 * r2) / det;
                y[v] = (a11 * r2 - a12 * r1) / det;
            }
            _ => y = Vec3::zeros(),
        }
        if free_axes
            .iter()
            .any(|&a| y[a] < lo[a] - 1e-12 || y[a] > hi[a] + 1e-12)
        {
            continue;
        }
        for &a in &free_axes {
            y[a] = y[a].clamp(lo[a], hi[a]);
        }
        let val = y.dot(&(q * y));
        if val < best.0 {
            best = (val, y + center);
        }
    }
    best
}

/// Hyperplanes separating `e` from every obstacle, generated in order of
/// increasing ellipsoid-metric distance; obstacles already on the far side
/// of an earlier plane are skipped. Each obstacle lies in `normal·x >= offset`
/// of some returned plane.
pub fn separating_hyperplanes(
    e: &Ellipsoid,
    obstacles: &[ObstacleCell],
) -> Result<Vec<Hyperplane>, RegionError> {
    let inv = e.shape.try_inverse().ok_or(RegionError::Degenerate)?;
    let q = inv.transpose() * inv;
    let lambda_min = q.symmetric_eigenvalues().min().max(0.0);
    for o in obstacles {
        if o.0.contains(&e.center) {
            return Err(RegionError::SeedInObstacle);
        }
    }

    // Lazy ordering: a Euclidean lower bound first, refined to the exact
    // metric distance when popped.
    let mut heap: BinaryHeap<Reverse<(OrderedFloat<f64>, bool, usize)>> = obstacles
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let d = (o.0.min - e.center).sup(&(e.center - o.0.max)).sup(&Vec3::zeros());
            Reverse((OrderedFloat(lambda_min * d.norm_squared()), false, i))
        })
        .collect();
    let mut closest = vec![Vec3::zeros(); obstacles.len()];
    let mut planes: Vec<Hyperplane> = Vec::new();
    while let Some(Reverse((_, exact, i))) = heap.pop() {
        if planes.iter().any(|h| obstacles[i].excluded_by(h)) {
            continue;
        }
        if !exact {
            let (d2, x) = closest_in_metric(&obstacles[i].0, &e.center, &q);
            closest[i] = x;
            heap.push(Reverse((OrderedFloat(d2), true, i)));
            continue;
        }
        let x = closest[i];
        let normal = q * (x - e.center);
        if normal.norm() == 0.0 {
            return Err(RegionError::SeedInObstacle);
        }
        planes.push(Hyperplane::through(normal, &x));
    }
    Ok(planes)
}
