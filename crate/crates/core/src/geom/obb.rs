use super::{Aabb, HPolyhedron, Hyperplane, Vec3};
use nalgebra::{Matrix3, Rotation3};
use serde::{Deserialize, Serialize};

/// Oriented box: `center + rotation · u` with `|u_i| <= half_extents_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obb {
    pub center: Vec3,
    pub rotation: Matrix3<f64>,
    pub half_extents: Vec3,
}

impl Obb {
    pub fn new(center: Vec3, rotation: Matrix3<f64>, half_extents: Vec3) -> Self {
        debug_assert!(half_extents.iter().all(|&h| h > 0.0));
        debug_assert!((rotation.transpose() * rotation - Matrix3::identity()).norm() < 1e-9);
        Obb {
            center,
            rotation,
            half_extents,
        }
    }

    pub fn axis_aligned(center: Vec3, half_extents: Vec3) -> Self {
        Obb::new(center, Matrix3::identity(), half_extents)
    }

    /// Box rotated by `yaw` radians about +z.
    pub fn from_yaw(center: Vec3, yaw: f64, half_extents: Vec3) -> Self {
        let r = Rotation3::from_axis_angle(&Vec3::z_axis(), yaw);
        Obb::new(center, *r.matrix(), half_extents)
    }

    /// Grows every half-extent by `r` (the robot radius).
    pub fn inflate(&self, r: f64) -> Obb {
        debug_assert!(r >= 0.0);
        Obb {
            half_extents: self.half_extents.add_scalar(r),
            ..*self
        }
    }

    /// The six faces, ordered `+axis0, -axis0, +axis1, -axis1, +axis2, -axis2`;
    /// face `k` is opposite face `k ^ 1`.
    pub fn faces(&self) -> [Hyperplane; 6] {
        let mut out = [Hyperplane {
            normal: Vec3::zeros(),
            offset: 0.0,
        }; 6];
        for i in 0..3 {
            let axis: Vec3 = self.rotation.column(i).into_owned();
            let c = axis.dot(&self.center);
            let h = self.half_extents[i];
            out[2 * i] = Hyperplane {
                normal: axis,
                offset: c + h,
            };
            out[2 * i + 1] = Hyperplane {
                normal: -axis,
                offset: -c + h,
            };
        }
        out
    }

    pub fn halfspaces(&self) -> HPolyhedron {
        HPolyhedron::new(self.faces().to_vec())
    }

    pub fn contains_point(&self, p: &Vec3, tol: f64) -> bool {
        let local = self.rotation.transpose() * (p - self.center);
        (0..3).all(|i| local[i].abs() <= self.half_extents[i] + tol)
    }

    pub fn aabb(&self) -> Aabb {
        let ext = self.rotation.abs() * self.half_extents;
        Aabb::new(self.center - ext, self.center + ext)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn axis_aligned_faces() {
        let o = Obb::axis_aligned(Vec3::zeros(), Vec3::repeat(1.0));
        let f = o.faces();
        for (k, h) in f.iter().enumerate() {
            assert!((h.offset - 1.0).abs() < 1e-15);
            let mut e = Vec3::zeros();
            e[k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(h.normal, e);
        }
        let inflated = o.inflate(0.3).faces();
        assert!(inflated.iter().all(|h| (h.offset - 1.3).abs() < 1e-15));
    }

    #[test]
    fn rotated_inflation_captures_point() {
        let o = Obb::from_yaw(Vec3::zeros(), FRAC_PI_4, Vec3::new(1.0, 2.0, 1.0));
        // (1.06, 1.06) sits at local x = 1.499, outside even the inflated box
        let far = Vec3::new(1.06, 1.06, 0.0);
        assert!(!o.inflate(0.3).contains_point(&far, 0.0));
        // local x = 1.7/sqrt(2) = 1.202: between 1.0 and 1.3
        let p = Vec3::new(0.85, 0.85, 0.0);
        assert!(!o.contains_point(&p, 0.0));
        assert!(!o.halfspaces().contains_point(&p, 0.0));
        let big = o.inflate(0.3);
        assert!(big.contains_point(&p, 0.0));
        assert!(big.halfspaces().contains_point(&p, 0.0));
    }

    #[test]
    fn aabb_encloses_corners() {
        let o = Obb::from_yaw(Vec3::new(1.0, 2.0, 3.0), 0.3, Vec3::new(1.0, 0.5, 0.25));
        let bb = o.aabb();
        let vs = o.halfspaces().vertices().unwrap();
        assert_eq!(vs.vertices.len(), 8);
        for v in &vs.vertices {
            assert!((0..3).all(|i| v[i] >= bb.min[i] - 1e-12 && v[i] <= bb.max[i] + 1e-12));
        }
    }
}
