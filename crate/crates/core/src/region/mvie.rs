//! Maximum-volume inscribed ellipsoid.
//!
//! Solves `max log det C  s.t.  |C a_i| + a_i·d <= b_i` with a log-barrier
//! and damped Newton steps over the 9 parameters of `(C, d)`, `C` symmetric.
//! The barrier weight is driven down until the duality gap `m·mu` is below
//! 1e-7 in log-det units.

use super::RegionError;
use crate::geom::{Ellipsoid, HPolyhedron, Vec3, DEGENERATE_RADIUS};
use nalgebra::{Matrix3, SMatrix, SVector};

type V9 = SVector<f64, 9>;
type M9 = SMatrix<f64, 9, 9>;

const MU_START: f64 = 1.0;
const MU_SHRINK: f64 = 0.1;
const GAP: f64 = 1e-7;
const MAX_NEWTON: usize = 60;

fn shape_of(z: &V9) -> Matrix3<f64> {
    Matrix3::new(z[0], z[3], z[4], z[3], z[1], z[5], z[4], z[5], z[2])
}

/// Symmetric basis matrices matching the parameter layout of [`shape_of`].
fn basis() -> [Matrix3<f64>; 6] {
    let mut e = [Matrix3::zeros(); 6];
    for (k, m) in e.iter_mut().enumerate() {
        let mut z = V9::zeros();
        z[k] = 1.0;
        *m = shape_of(&z);
    }
    e
}

/// `d(C a)/dp`: 3×6.
fn shape_jacobian(a: &Vec3) -> SMatrix<f64, 3, 6> {
    SMatrix::<f64, 3, 6>::from_row_slice(&[
        a.x, 0.0, 0.0, a.y, a.z, 0.0, //
        0.0, a.y, 0.0, a.x, 0.0, a.z, //
        0.0, 0.0, a.z, 0.0, a.x, a.y,
    ])
}

struct Problem<'a> {
    rows: &'a [(Vec3, f64)],
    basis: [Matrix3<f64>; 6],
}

impl Problem<'_> {
    /// Barrier objective, or `None` outside the domain.
    fn value(&self, z: &V9, mu: f64) -> Option<f64> {
        let c = shape_of(z);
        let chol = c.cholesky()?;
        let logdet = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let d = Vec3::new(z[6], z[7], z[8]);
        let mut barrier = 0.0;
        for (a, b) in self.rows {
            let s = b - a.dot(&d) - (c * a).norm();
            if s <= 0.0 {
                return None;
            }
            barrier -= s.ln();
        }
        Some(-logdet + mu * barrier)
    }

    fn grad_hess(&self, z: &V9, mu: f64) -> (V9, M9) {
        let c = shape_of(z);
        let w = c.try_inverse().expect("shape is positive definite");
        let d = Vec3::new(z[6], z[7], z[8]);
        let mut g = V9::zeros();
        let mut h = M9::zeros();
        for i in 0..6 {
            g[i] = -(w * self.basis[i]).trace();
            for j in 0..6 {
                h[(i, j)] = (w * self.basis[i] * w * self.basis[j]).trace();
            }
        }
        for (a, b) in self.rows {
            let m = shape_jacobian(a);
            let u = c * a;
            let n = u.norm();
            let uhat = u / n;
            let s = b - a.dot(&d) - n;
            let mut ds = V9::zeros();
            let dp = -(m.transpose() * uhat);
            ds.fixed_rows_mut::<6>(0).copy_from(&dp);
            ds.fixed_rows_mut::<3>(6).copy_from(&(-a));
            g -= mu * ds / s;
            h += mu * (ds * ds.transpose()) / (s * s);
            let curv = m.transpose() * (Matrix3::identity() - uhat * uhat.transpose()) * m / (n * s);
            let mut block = h.fixed_view_mut::<6, 6>(0, 0);
            block += mu * curv;
        }
        (g, h)
    }
}

/// Maximum-volume ellipsoid inside `p`. The result satisfies every
/// halfspace and is never smaller than the Chebyshev ball.
pub fn mvie(p: &HPolyhedron) -> Result<Ellipsoid, RegionError> {
    let cheb = p.chebyshev().map_err(|_| RegionError::Degenerate)?;
    if !p.is_bounded() || cheb.radius < DEGENERATE_RADIUS {
        return Err(RegionError::Degenerate);
    }
    let rows: Vec<(Vec3, f64)> = p.halfspaces().iter().map(|h| (h.normal, h.offset)).collect();
    let prob = Problem {
        rows: &rows,
        basis: basis(),
    };
    let mut z = V9::zeros();
    let r0 = 0.9 * cheb.radius;
    z[0] = r0;
    z[1] = r0;
    z[2] = r0;
    z.fixed_rows_mut::<3>(6).copy_from(&cheb.center);

    let m = rows.len() as f64;
    let mut mu = MU_START;
    loop {
        for _ in 0..MAX_NEWTON {
            let Some(f) = prob.value(&z, mu) else { break };
            let (g, h) = prob.grad_hess(&z, mu);
            let step = match h.cholesky() {
                Some(ch) => ch.solve(&(-g)),
                None => -g,
            };
            let decrement = -g.dot(&step);
            if decrement < 1e-14 {
                break;
            }
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let cand = z + step * t;
                if let Some(fc) = prob.value(&cand, mu) {
                    if fc <= f - 0.25 * t * decrement {
                        z = cand;
                        moved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if m * mu < GAP {
            break;
        }
        mu *= MU_SHRINK;
    }

    let e = Ellipsoid {
        shape: shape_of(&z),
        center: Vec3::new(z[6], z[7], z[8]),
    };
    let ball = Ellipsoid::ball(cheb.center, cheb.radius);
    if e.det() < ball.det() || e.max_violation(p) > 1e-9 {
        return Ok(ball);
    }
    Ok(e)
}
