#![allow(dead_code)]

use nalgebra::Rotation3;
use polyroad::geom::{Aabb, HPolyhedron, Hyperplane, Obb, Vec3};
use polyroad::polyhedronize::Thresholds;
use polyroad::roadmap::RoadmapStore;
use rand::Rng;
use std::path::PathBuf;

pub const RADIUS: f64 = 0.2;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn thresholds() -> Thresholds {
    Thresholds::new(RADIUS, 0.2)
}

pub fn unit<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Box with a few random cuts, thick enough to be worth splitting.
pub fn random_parent<R: Rng>(rng: &mut R) -> HPolyhedron {
    loop {
        let lo = Vec3::from_fn(|_, _| rng.random_range(-2.0..0.0));
        let hi = lo + Vec3::from_fn(|_, _| rng.random_range(1.5..4.0));
        let c = (lo + hi) / 2.0;
        let mut hs = Aabb::new(lo, hi).halfspaces();
        for _ in 0..rng.random_range(0..4) {
            let n = unit(rng);
            hs.push(Hyperplane::new(n, n.dot(&c) + rng.random_range(0.4..1.5)));
        }
        let p = HPolyhedron::new(hs).canonicalize();
        if p.inradius() >= 0.3 {
            return p;
        }
    }
}

pub fn random_rotation<R: Rng>(rng: &mut R) -> nalgebra::Matrix3<f64> {
    let a = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    *Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(unit(rng)), a).matrix()
}

pub fn random_obb<R: Rng>(rng: &mut R, near: Vec3, spread: f64) -> Obb {
    let c = near + Vec3::from_fn(|_, _| rng.random_range(-spread..=spread));
    let h = Vec3::from_fn(|_, _| rng.random_range(0.1..0.8));
    Obb::new(c, random_rotation(rng), h)
}

/// Overlapping boxes on an `n` lattice of 2 m cells, some with a corner cut.
pub fn lattice_roots<R: Rng>(rng: &mut R, n: [usize; 3]) -> Vec<HPolyhedron> {
    let cell = 2.0;
    let mut roots = Vec::new();
    for i in 0..n[0] {
        for j in 0..n[1] {
            for k in 0..n[2] {
                let base = Vec3::new(i as f64, j as f64, k as f64) * cell;
                let lo = base - Vec3::from_fn(|_, _| rng.random_range(0.25..0.6));
                let hi = base + Vec3::repeat(cell) + Vec3::from_fn(|_, _| rng.random_range(0.25..0.6));
                let mut hs = Aabb::new(lo, hi).halfspaces();
                if rng.random_bool(0.4) {
                    let corner = Vec3::from_fn(|a, _| if rng.random_bool(0.5) { lo[a] } else { hi[a] });
                    let dir = corner - (lo + hi) / 2.0;
                    let n = dir.normalize();
                    hs.push(Hyperplane::new(n, n.dot(&corner) - rng.random_range(0.4..1.0)));
                }
                roots.push(HPolyhedron::new(hs).canonicalize());
            }
        }
    }
    roots
}

pub fn lattice_store<R: Rng>(rng: &mut R, n: [usize; 3]) -> RoadmapStore {
    RoadmapStore::from_roots(lattice_roots(rng, n), RADIUS, thresholds()).expect("valid roots")
}

/// `x` lies in the box shrunk by `margin` (negative margin grows it).
pub fn in_box(b: &Obb, x: &Vec3, margin: f64) -> bool {
    let local = b.rotation.transpose() * (x - b.center);
    (0..3).all(|i| local[i].abs() < b.half_extents[i] - margin)
}

pub fn in_rows(hs: &[Hyperplane], x: &Vec3, tol: f64) -> bool {
    hs.iter().all(|h| h.normal.dot(x) <= h.offset + tol)
}

/// Row-order-insensitive bit-exact key of the active set.
pub fn active_key(store: &RoadmapStore) -> Vec<Vec<[u64; 4]>> {
    let mut out: Vec<Vec<[u64; 4]>> = store
        .active()
        .iter()
        .map(|id| {
            let mut rows: Vec<[u64; 4]> = store
                .node(*id)
                .unwrap()
                .shape
                .halfspaces()
                .iter()
                .map(|h| [h.normal.x.to_bits(), h.normal.y.to_bits(), h.normal.z.to_bits(), h.offset.to_bits()])
                .collect();
            rows.sort_unstable();
            rows
        })
        .collect();
    out.sort_unstable();
    out
}
