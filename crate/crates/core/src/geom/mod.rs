//! Polytope primitives shared by every other module.
//!
//! Polyhedra are kept in H-representation with unit normals, so offsets are
//! metric distances. Emptiness, containment and redundancy are decided with
//! small LPs ([`crate::lp`]); vertices are only enumerated when a volume,
//! centroid or export is required.

mod ellipsoid;
mod obb;
mod polyhedron;

pub use ellipsoid::Ellipsoid;
pub use obb::Obb;
pub use polyhedron::{Chebyshev, HPolyhedron, VertexSet};
pub(crate) use polyhedron::volume_centroid_of;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vec3 = Vector3<f64>;

/// Polyhedra whose inscribed ball is thinner than this are treated as empty.
pub const DEGENERATE_RADIUS: f64 = 1e-4;

/// Tolerance used when testing vertices against their defining planes.
pub const VERTEX_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("polyhedron has no interior")]
    NoInterior,
    #[error("polyhedron is unbounded")]
    Unbounded,
}

/// Halfspace `normal · x <= offset` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub normal: Vec3,
    pub offset: f64,
}

impl Hyperplane {
    /// Builds a halfspace from an arbitrary (non-zero) normal, normalizing it.
    pub fn new(normal: Vec3, offset: f64) -> Self {
        let n = normal.norm();
        debug_assert!(n > 0.0, "zero normal");
        Hyperplane {
            normal: normal / n,
            offset: offset / n,
        }
    }

    /// Halfspace through `point` with outward `normal`.
    pub fn through(normal: Vec3, point: &Vec3) -> Self {
        let n = normal.normalize();
        Hyperplane {
            normal: n,
            offset: n.dot(point),
        }
    }

    #[inline]
    pub fn signed_distance(&self, x: &Vec3) -> f64 {
        self.normal.dot(x) - self.offset
    }

    /// The complementary closed halfspace `normal · x >= offset`.
    pub fn flipped(&self) -> Self {
        Hyperplane {
            normal: -self.normal,
            offset: -self.offset,
        }
    }
}

/// Closed axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        debug_assert!(min.iter().zip(max.iter()).all(|(a, b)| a <= b));
        Aabb { min, max }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let (mut lo, mut hi) = (first, first);
        for p in it {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        Some(Aabb { min: lo, max: hi })
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| self.min[i] <= p[i] && p[i] <= self.max[i])
    }

    pub fn intersects(&self, other: &Aabb) -> bool {
        (0..3).all(|i| self.min[i] <= other.max[i] && other.min[i] <= self.max[i])
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn intersection(&self, other: &Aabb) -> Option<Aabb> {
        let lo = self.min.sup(&other.min);
        let hi = self.max.inf(&other.max);
        (0..3).all(|i| lo[i] <= hi[i]).then_some(Aabb { min: lo, max: hi })
    }

    pub fn halfspaces(&self) -> Vec<Hyperplane> {
        let mut out = Vec::with_capacity(6);
        for i in 0..3 {
            let mut e = Vec3::zeros();
            e[i] = 1.0;
            out.push(Hyperplane { normal: e, offset: self.max[i] });
            out.push(Hyperplane { normal: -e, offset: -self.min[i] });
        }
        out
    }

    pub fn to_polyhedron(&self) -> HPolyhedron {
        HPolyhedron::new(self.halfspaces())
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let mut out = [Vec3::zeros(); 8];
        for (i, c) in out.iter_mut().enumerate() {
            for k in 0..3 {
                c[k] = if i >> k & 1 == 1 { self.max[k] } else { self.min[k] };
            }
        }
        out
    }
}
