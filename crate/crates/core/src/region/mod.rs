//! Obstacle-free convex region growth around a seed.
//!
//! Alternates two convex steps: separating hyperplanes between the current
//! ellipsoid and the occupied cells, then the maximum-volume ellipsoid of
//! the resulting polyhedron. Only cells inside a box around the seed are
//! considered, and the region is clipped to that box.

mod mvie;
mod separate;

pub use mvie::mvie;
pub use separate::{separating_hyperplanes, ObstacleCell};

use crate::geom::{Aabb, Ellipsoid, HPolyhedron, Vec3};
use crate::grid::GridMap;
use thiserror::Error;

/// Radius of the ball the first separating step is taken from.
const SEED_BALL: f64 = 1e-3;
/// Seed must remain inside the region within this slack.
pub const SEED_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error("seed inside obstacle")]
    SeedInObstacle,
    #[error("seed lies in an occupied cell")]
    SeedOccupied,
    #[error("seed lies outside the map")]
    SeedOutsideMap,
    #[error("polyhedron is empty or degenerate")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InflationConfig {
    pub max_iterations: usize,
    /// Stop once the ellipsoid volume grows by less than this fraction.
    pub volume_growth_tol: f64,
    pub bbox_halfwidth: f64,
}

impl Default for InflationConfig {
    fn default() -> Self {
        InflationConfig {
            max_iterations: 5,
            volume_growth_tol: 0.02,
            bbox_halfwidth: 4.0,
        }
    }
}

/// Region plus the per-iteration ellipsoid volumes that produced it.
#[derive(Debug, Clone)]
pub struct Inflation {
    pub region: HPolyhedron,
    pub ellipsoid: Ellipsoid,
    pub volumes: Vec<f64>,
}

/// Any generator that maps a free seed to a convex obstacle-free region
/// containing it can drive polyhedronization.
pub trait RegionGenerator {
    fn generate(&self, seed: &Vec3, map: &GridMap) -> Result<HPolyhedron, RegionError>;
}

impl RegionGenerator for InflationConfig {
    fn generate(&self, seed: &Vec3, map: &GridMap) -> Result<HPolyhedron, RegionError> {
        inflate_region(seed, map, self)
    }
}

/// Obstacles relevant to a region confined to `bbox`.
fn obstacles_in(map: &GridMap, bbox: &Aabb) -> Vec<ObstacleCell> {
    map.occupied_touching(bbox, true)
        .into_iter()
        .filter_map(|idx| {
            let clipped = map.cell_box(map.cell(idx)).intersection(bbox)?;
            let ext = clipped.max - clipped.min;
            (ext.min() > 1e-12).then_some(ObstacleCell(clipped))
        })
        .collect()
}

pub fn inflate_region(
    seed: &Vec3,
    map: &GridMap,
    cfg: &InflationConfig,
) -> Result<HPolyhedron, RegionError> {
    inflate_region_traced(seed, map, cfg).map(|i| i.region)
}

pub fn inflate_region_traced(
    seed: &Vec3,
    map: &GridMap,
    cfg: &InflationConfig,
) -> Result<Inflation, RegionError> {
    let cell = map.world_to_cell(seed).ok_or(RegionError::SeedOutsideMap)?;
    if map.is_occupied(cell) {
        return Err(RegionError::SeedOccupied);
    }
    let h = Vec3::repeat(cfg.bbox_halfwidth);
    let bbox = Aabb::new(seed - h, seed + h)
        .intersection(&map.bounds())
        .ok_or(RegionError::SeedOutsideMap)?;
    let obstacles = obstacles_in(map, &bbox);
    let bbox_planes = bbox.halfspaces();

    let mut ellipsoid = Ellipsoid::ball(*seed, SEED_BALL);
    let mut volumes = vec![ellipsoid.volume()];
    let mut region: Option<HPolyhedron> = None;
    for _ in 0..cfg.max_iterations.max(1) {
        let mut planes = bbox_planes.clone();
        planes.extend(separating_hyperplanes(&ellipsoid, &obstacles)?);
        let poly = HPolyhedron::new(planes).canonicalize();
        if !poly.contains_point(seed, SEED_TOL) || poly.is_empty() {
            // seed drifted out: keep the previous region
            break;
        }
        let next = match mvie(&poly) {
            Ok(e) if e.det() >= ellipsoid.det() => e,
            // the previous ellipsoid still fits the new polyhedron
            Ok(_) => ellipsoid,
            Err(_) => {
                region = Some(poly);
                break;
            }
        };
        region = Some(poly);
        let prev = ellipsoid.volume();
        ellipsoid = next;
        volumes.push(ellipsoid.volume());
        if (ellipsoid.volume() - prev) / prev < cfg.volume_growth_tol {
            break;
        }
    }
    let region = region.ok_or(RegionError::Degenerate)?;
    Ok(Inflation {
        region,
        ellipsoid,
        volumes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_map_gives_bbox() {
        let map = GridMap::empty(Vec3::zeros(), 0.2, [10, 10, 5]).unwrap();
        let seed = map.cell_center([4, 4, 2]);
        let cfg = InflationConfig {
            bbox_halfwidth: 10.0,
            ..Default::default()
        };
        let p = inflate_region(&seed, &map, &cfg).unwrap();
        assert_eq!(p.len(), 6);
        let bb = p.aabb().unwrap();
        assert!((bb.min - map.bounds().min).norm() < 1e-9);
        assert!((bb.max - map.bounds().max).norm() < 1e-9);
    }

    #[test]
    fn corridor_width_bounded() {
        // walls at y < 1.0 and y > 2.0 leave a 1 m corridor
        let map = GridMap::from_fn(Vec3::zeros(), 0.2, [30, 15, 10], |c| c.y < 1.0 || c.y > 2.0).unwrap();
        let seed = map.cell_center([15, 7, 5]);
        let p = inflate_region(&seed, &map, &InflationConfig::default()).unwrap();
        let bb = p.aabb().unwrap();
        assert!(bb.max.y - bb.min.y <= 1.0 + 1e-9);
        assert!(p.contains_point(&seed, SEED_TOL));
    }

    #[test]
    fn single_cell_single_plane() {
        let mut occ = vec![false; 20 * 20 * 20];
        let map0 = GridMap::empty(Vec3::zeros(), 0.2, [20, 20, 20]).unwrap();
        occ[map0.index([10, 10, 10])] = true;
        let map = GridMap::new(Vec3::zeros(), 0.2, [20, 20, 20], occ).unwrap();
        let seed = map.cell_center([11, 10, 10]);
        let p = inflate_region(&seed, &map, &InflationConfig::default()).unwrap();
        let bbox_faces = map.bounds().halfspaces();
        let extra = p
            .halfspaces()
            .iter()
            .filter(|h| !bbox_faces.iter().any(|b| (b.normal - h.normal).norm() < 1e-12 && (b.offset - h.offset).abs() < 1e-9))
            .count();
        assert_eq!(extra, 1);
        assert!(!p.contains_point(&map.cell_center([10, 10, 10]), 0.0));
    }

    #[test]
    fn seed_errors() {
        let map = GridMap::from_fn(Vec3::zeros(), 0.2, [5, 5, 5], |c| c.x < 0.4).unwrap();
        let cfg = InflationConfig::default();
        assert_eq!(
            inflate_region(&map.cell_center([0, 0, 0]), &map, &cfg),
            Err(RegionError::SeedOccupied)
        );
        assert_eq!(
            inflate_region(&Vec3::new(-1.0, 0.0, 0.0), &map, &cfg),
            Err(RegionError::SeedOutsideMap)
        );
    }
}
