use super::{HPolyhedron, Vec3};
use nalgebra::Matrix3;

/// `{shape · u + center : |u| <= 1}` with `shape` symmetric positive definite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipsoid {
    pub shape: Matrix3<f64>,
    pub center: Vec3,
}

impl Ellipsoid {
    pub fn ball(center: Vec3, radius: f64) -> Self {
        Ellipsoid {
            shape: Matrix3::identity() * radius,
            center,
        }
    }

    /// Volume up to the constant 4π/3.
    pub fn det(&self) -> f64 {
        self.shape.determinant()
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * self.det()
    }

    /// Worst halfspace slack `max_i |shape·n_i| + n_i·center - offset_i`;
    /// `<= 0` means the ellipsoid lies inside `p`.
    pub fn max_violation(&self, p: &HPolyhedron) -> f64 {
        p.halfspaces()
            .iter()
            .map(|h| (self.shape * h.normal).norm() + h.normal.dot(&self.center) - h.offset)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains_point(&self, x: &Vec3) -> bool {
        match self.shape.try_inverse() {
            Some(inv) => (inv * (x - self.center)).norm() <= 1.0,
            None => false,
        }
    }

    /// Sorted semi-axis lengths (eigenvalues of `shape`).
    pub fn semi_axes(&self) -> [f64; 3] {
        let eig = self.shape.symmetric_eigenvalues();
        let mut ax = [eig[0], eig[1], eig[2]];
        ax.sort_by(|a, b| a.total_cmp(b));
        ax
    }
}
