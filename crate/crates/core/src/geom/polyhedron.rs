use super::{Aabb, GeomError, Hyperplane, Vec3, DEGENERATE_RADIUS, VERTEX_TOL};
use crate::lp::{maximize, LpOutcome};
use std::cmp::Ordering;

/// Slack allowed when deciding redundancy and containment by LP.
const LP_SLACK: f64 = 1e-9;
/// Feasibility slack for candidate vertices from 3-plane intersections.
const VERTEX_FEAS: f64 = 1e-8;

/// Largest inscribed ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chebyshev {
    pub center: Vec3,
    pub radius: f64,
}

/// Convex polyhedron `{x | normal_i · x <= offset_i}`.
///
/// The Chebyshev ball is computed once on construction; it doubles as the
/// emptiness certificate.
#[derive(Debug, Clone)]
pub struct HPolyhedron {
    halfspaces: Vec<Hyperplane>,
    bounded: bool,
    cheb: Option<Chebyshev>,
}

impl PartialEq for HPolyhedron {
    fn eq(&self, other: &Self) -> bool {
        self.halfspaces == other.halfspaces
    }
}

/// Extreme points of a bounded polyhedron.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexSet {
    pub vertices: Vec<Vec3>,
}

impl HPolyhedron {
    pub fn new(halfspaces: Vec<Hyperplane>) -> Self {
        let cheb = chebyshev_rows(&halfspaces);
        let bounded = cheb.is_some() && positively_spanning(&halfspaces);
        HPolyhedron {
            halfspaces,
            bounded,
            cheb,
        }
    }

    pub fn halfspaces(&self) -> &[Hyperplane] {
        &self.halfspaces
    }

    pub fn len(&self) -> usize {
        self.halfspaces.len()
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    /// True when the inscribed ball is thinner than [`DEGENERATE_RADIUS`].
    pub fn is_empty(&self) -> bool {
        matches!(self.cheb, Some(c) if c.radius < DEGENERATE_RADIUS)
    }

    /// Inscribed ball of maximum radius. A radius `<= 0` means the
    /// halfspaces have no common point.
    pub fn chebyshev(&self) -> Result<Chebyshev, GeomError> {
        self.cheb.ok_or(GeomError::Unbounded)
    }

    /// Chebyshev radius; infinite when the inscribed ball is unbounded.
    pub fn inradius(&self) -> f64 {
        self.cheb.map_or(f64::INFINITY, |c| c.radius)
    }

    pub fn contains_point(&self, x: &Vec3, tol: f64) -> bool {
        self.halfspaces
            .iter()
            .all(|h| h.normal.dot(x) <= h.offset + tol)
    }

    /// Maximizes `dir · x` over the polyhedron.
    pub fn support(&self, dir: &Vec3) -> LpOutcome {
        let rows: Vec<([f64; 3], f64)> = self
            .halfspaces
            .iter()
            .map(|h| ([h.normal.x, h.normal.y, h.normal.z], h.offset))
            .collect();
        let refs: Vec<(&[f64], f64)> = rows.iter().map(|(a, b)| (&a[..], *b)).collect();
        maximize(&[dir.x, dir.y, dir.z], &refs)
    }

    /// Drops redundant halfspaces. Surviving rows keep their relative order.
    pub fn canonicalize(&self) -> HPolyhedron {
        if self.is_empty() || !self.bounded {
            return self.clone();
        }
        let mut keep = vec![true; self.halfspaces.len()];
        let rows: Vec<([f64; 3], f64)> = self
            .halfspaces
            .iter()
            .map(|h| ([h.normal.x, h.normal.y, h.normal.z], h.offset))
            .collect();
        for i in 0..rows.len() {
            let others: Vec<(&[f64], f64)> = rows
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i && keep[j])
                .map(|(_, (a, b))| (&a[..], *b))
                .collect();
            if let LpOutcome::Optimal { value, .. } = maximize(&rows[i].0, &others) {
                if value <= rows[i].1 + LP_SLACK {
                    keep[i] = false;
                }
            }
        }
        let halfspaces = self
            .halfspaces
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(h, _)| *h)
            .collect();
        HPolyhedron {
            halfspaces,
            bounded: self.bounded,
            cheb: self.cheb,
        }
    }

    /// Intersection of two polyhedra, canonicalized. Check
    /// [`HPolyhedron::is_empty`] on the result.
    pub fn intersect(&self, other: &HPolyhedron) -> HPolyhedron {
        let mut hs = self.halfspaces.clone();
        hs.extend_from_slice(&other.halfspaces);
        HPolyhedron::new(hs).canonicalize()
    }

    /// Adds one halfspace, canonicalized.
    pub fn cut(&self, h: Hyperplane) -> HPolyhedron {
        let mut hs = self.halfspaces.clone();
        hs.push(h);
        HPolyhedron::new(hs).canonicalize()
    }

    /// Inscribed ball of `self ∩ other` without building the intersection.
    pub fn intersection_chebyshev(&self, other: &HPolyhedron) -> Option<Chebyshev> {
        let hs: Vec<Hyperplane> = self
            .halfspaces
            .iter()
            .chain(other.halfspaces.iter())
            .copied()
            .collect();
        chebyshev_rows(&hs)
    }

    /// True iff `self ∩ other` has an interior thicker than
    /// [`DEGENERATE_RADIUS`].
    pub fn overlaps(&self, other: &HPolyhedron) -> bool {
        self.intersection_chebyshev(other)
            .is_some_and(|c| c.radius >= DEGENERATE_RADIUS)
    }

    /// `inner ⊆ self`, decided per halfspace of `self` by an LP over `inner`.
    pub fn contains_polyhedron(&self, inner: &HPolyhedron) -> bool {
        self.halfspaces.iter().all(|h| match inner.support(&h.normal) {
            LpOutcome::Optimal { value, .. } => value <= h.offset + LP_SLACK,
            LpOutcome::Infeasible => true,
            LpOutcome::Unbounded => false,
        })
    }

    /// Exact extreme points by brute-force 3-plane intersection.
    pub fn vertices(&self) -> Result<VertexSet, GeomError> {
        if !self.bounded {
            return Err(GeomError::Unbounded);
        }
        if self.is_empty() {
            return Err(GeomError::NoInterior);
        }
        let hs = &self.halfspaces;
        let n = hs.len();
        let mut out: Vec<Vec3> = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let nij = hs[i].normal.cross(&hs[j].normal);
                if nij.norm_squared() < 1e-20 {
                    continue;
                }
                for k in j + 1..n {
                    let det = hs[k].normal.dot(&nij);
                    if det.abs() < 1e-10 {
                        continue;
                    }
                    let v = (hs[i].offset * hs[j].normal.cross(&hs[k].normal)
                        + hs[j].offset * hs[k].normal.cross(&hs[i].normal)
                        + hs[k].offset * nij)
                        / det;
                    if hs.iter().all(|h| h.signed_distance(&v) <= VERTEX_FEAS)
                        && !out.iter().any(|w| (w - v).norm() < VERTEX_TOL)
                    {
                        out.push(v);
                    }
                }
            }
        }
        if out.len() < 4 {
            return Err(GeomError::NoInterior);
        }
        Ok(VertexSet { vertices: out })
    }

    /// Volume and centroid via a tetrahedral fan over the faces.
    pub fn volume_centroid(&self) -> Result<(f64, Vec3), GeomError> {
        let vs = self.vertices()?;
        volume_centroid_of(&self.halfspaces, &vs.vertices)
    }

    pub fn aabb(&self) -> Result<Aabb, GeomError> {
        let vs = self.vertices()?;
        Ok(Aabb::from_points(&vs.vertices).expect("nonempty vertex set"))
    }
}

/// Volume and centroid of the polytope with the given facets and vertices.
pub(crate) fn volume_centroid_of(
    halfspaces: &[Hyperplane],
    vertices: &[Vec3],
) -> Result<(f64, Vec3), GeomError> {
    let inner = vertices.iter().sum::<Vec3>() / vertices.len() as f64;
    let mut volume = 0.0;
    let mut moment = Vec3::zeros();
    for h in halfspaces {
        let face: Vec<Vec3> = vertices
            .iter()
            .filter(|v| h.signed_distance(v).abs() <= VERTEX_TOL)
            .copied()
            .collect();
        if face.len() < 3 {
            continue;
        }
        let mid = face.iter().sum::<Vec3>() / face.len() as f64;
        let u = (face[0] - mid).normalize();
        let w = h.normal.cross(&u);
        let mut ordered: Vec<(f64, Vec3)> = face
            .iter()
            .map(|p| {
                let d = p - mid;
                (d.dot(&w).atan2(d.dot(&u)), *p)
            })
            .collect();
        ordered.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        let height = -h.signed_distance(&inner);
        for k in 1..ordered.len() - 1 {
            let (a, b, c) = (ordered[0].1, ordered[k].1, ordered[k + 1].1);
            let area2 = (b - a).cross(&(c - a)).norm();
            let vol = area2 * height / 6.0;
            volume += vol;
            moment += vol * (a + b + c + inner) / 4.0;
        }
    }
    if volume <= 0.0 {
        return Err(GeomError::NoInterior);
    }
    Ok((volume, moment / volume))
}

/// Chebyshev LP over raw rows; `None` when the inscribed radius is unbounded.
fn chebyshev_rows(hs: &[Hyperplane]) -> Option<Chebyshev> {
    if hs.is_empty() {
        return None;
    }
    let rows: Vec<([f64; 4], f64)> = hs
        .iter()
        .map(|h| ([h.normal.x, h.normal.y, h.normal.z, 1.0], h.offset))
        .collect();
    let refs: Vec<(&[f64], f64)> = rows.iter().map(|(a, b)| (&a[..], *b)).collect();
    match maximize(&[0.0, 0.0, 0.0, 1.0], &refs) {
        LpOutcome::Optimal { x, value } => Some(Chebyshev {
            center: Vec3::new(x[0], x[1], x[2]),
            radius: value,
        }),
        LpOutcome::Unbounded => None,
        // Cannot happen: t can always decrease until every row holds.
        LpOutcome::Infeasible => Some(Chebyshev {
            center: Vec3::zeros(),
            radius: f64::NEG_INFINITY,
        }),
    }
}

/// True iff the normals positively span R³ (the recession cone is {0}).
fn positively_spanning(hs: &[Hyperplane]) -> bool {
    if hs.len() < 4 {
        return false;
    }
    // Each axis direction must be a nonnegative combination of normals,
    // i.e. max e·x is bounded over the cone {x | n_i·x <= 0}.
    let rows: Vec<([f64; 3], f64)> = hs
        .iter()
        .map(|h| ([h.normal.x, h.normal.y, h.normal.z], 0.0))
        .collect();
    let refs: Vec<(&[f64], f64)> = rows.iter().map(|(a, b)| (&a[..], *b)).collect();
    let dirs = [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    dirs.iter()
        .all(|d| matches!(maximize(d, &refs), LpOutcome::Optimal { .. }))
}
