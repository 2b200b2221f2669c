//! Covers the free space of a grid with convex roots.
//!
//! Uncovered free cell centers are sampled uniformly; each seed is grown into
//! a region, and regions passing [`Thresholds::accepts`] are kept until the
//! covered fraction reaches `rho_e`, `max_samples` seeds were drawn, or
//! every free cell is covered.

use crate::geom::{Aabb, HPolyhedron, Vec3};
use crate::grid::{CoverageTracker, GridMap};
use crate::region::{InflationConfig, RegionGenerator};
use crate::roadmap::{RoadmapError, RoadmapStore};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minimum size for a region to be worth keeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub min_radius: f64,
    pub min_volume: f64,
}

/// Vertices, volume, centroid and bounding box of a polyhedron.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    pub volume: f64,
    pub centroid: Vec3,
    pub aabb: Aabb,
    pub vertices: Vec<Vec3>,
}

impl Measure {
    pub fn of(p: &HPolyhedron) -> Option<Measure> {
        if !p.is_bounded() || p.is_empty() {
            return None;
        }
        let vs = p.vertices().ok()?;
        let (volume, centroid) = crate::geom::volume_centroid_of(p.halfspaces(), &vs.vertices).ok()?;
        Some(Measure {
            volume,
            centroid,
            aabb: Aabb::from_points(&vs.vertices)?,
            vertices: vs.vertices,
        })
    }
}

impl Thresholds {
    pub fn new(robot_radius: f64, resolution: f64) -> Self {
        Thresholds {
            min_radius: robot_radius,
            min_volume: 8.0 * resolution.powi(3),
        }
    }

    pub fn accepts(&self, p: &HPolyhedron) -> bool {
        self.measure(p).is_some()
    }

    /// Measures `p` if it passes both thresholds. The radius test runs first
    /// since it is free.
    pub fn measure(&self, p: &HPolyhedron) -> Option<Measure> {
        if p.is_empty() || !p.is_bounded() || p.inradius() < self.min_radius {
            return None;
        }
        Measure::of(p).filter(|m| m.volume >= self.min_volume)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub rho_e: f64,
    pub max_samples: usize,
    pub rng_seed: u64,
    pub robot_radius: f64,
    pub thresholds: Thresholds,
    pub inflation: InflationSettings,
}

/// Serializable mirror of [`InflationConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InflationSettings {
    pub max_iterations: usize,
    pub volume_growth_tol: f64,
    pub bbox_halfwidth: f64,
}

impl From<InflationSettings> for InflationConfig {
    fn from(s: InflationSettings) -> Self {
        InflationConfig {
            max_iterations: s.max_iterations,
            volume_growth_tol: s.volume_growth_tol,
            bbox_halfwidth: s.bbox_halfwidth,
        }
    }
}

impl From<InflationConfig> for InflationSettings {
    fn from(c: InflationConfig) -> Self {
        InflationSettings {
            max_iterations: c.max_iterations,
            volume_growth_tol: c.volume_growth_tol,
            bbox_halfwidth: c.bbox_halfwidth,
        }
    }
}

impl BuildConfig {
    /// Defaults for a robot of radius `robot_radius` on a grid of the given
    /// resolution.
    pub fn new(robot_radius: f64, resolution: f64) -> Self {
        BuildConfig {
            rho_e: 0.85,
            max_samples: 5000,
            rng_seed: 0,
            robot_radius,
            thresholds: Thresholds::new(robot_radius, resolution),
            inflation: InflationConfig::default().into(),
        }
    }
}

pub fn is_good_poly(p: &HPolyhedron, cfg: &BuildConfig) -> bool {
    cfg.thresholds.accepts(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Coverage,
    MaxSamples,
    Saturated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildStats {
    pub rho: f64,
    pub samples: usize,
    pub accepted: usize,
    pub stop: StopReason,
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("map has no free cells")]
    NoFreeSpace,
    #[error("invalid build config: {0}")]
    Config(String),
    #[error(transparent)]
    Roadmap(#[from] RoadmapError),
}

/// Runs the sampling loop with the default region generator.
pub fn build(map: &GridMap, cfg: &BuildConfig) -> Result<RoadmapStore, BuildError> {
    let gen: InflationConfig = cfg.inflation.into();
    build_with(map, cfg, &gen)
}

pub fn build_with<G: RegionGenerator>(
    map: &GridMap,
    cfg: &BuildConfig,
    gen: &G,
) -> Result<RoadmapStore, BuildError> {
    if !(cfg.rho_e > 0.0 && cfg.rho_e <= 1.0) {
        return Err(BuildError::Config(format!("rho_e {} not in (0, 1]", cfg.rho_e)));
    }
    if map.free_count() == 0 {
        return Err(BuildError::NoFreeSpace);
    }
    let (roots, stats) = sample_roots(map, cfg, gen);
    Ok(RoadmapStore::new(roots, cfg.robot_radius, cfg.thresholds, stats)?)
}

fn sample_roots<G: RegionGenerator>(
    map: &GridMap,
    cfg: &BuildConfig,
    gen: &G,
) -> (Vec<HPolyhedron>, BuildStats) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut tracker = CoverageTracker::new(map);
    let mut roots = Vec::new();
    let mut samples = 0;
    let stop = loop {
        if tracker.rho() >= cfg.rho_e {
            break StopReason::Coverage;
        }
        if samples >= cfg.max_samples {
            break StopReason::MaxSamples;
        }
        let Some(seed) = tracker.sample_uncovered_free(map, &mut rng) else {
            break StopReason::Saturated;
        };
        samples += 1;
        let Ok(p) = gen.generate(&seed, map) else {
            continue;
        };
        if cfg.thresholds.accepts(&p) {
            tracker.update_ratio(map, &p);
            roots.push(p);
        }
    };
    let stats = BuildStats {
        rho: tracker.rho(),
        samples,
        accepted: roots.len(),
        stop,
    };
    (roots, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Aabb;

    fn cube(lo: f64, hi: f64) -> HPolyhedron {
        Aabb::new(Vec3::repeat(lo), Vec3::repeat(hi)).to_polyhedron()
    }

    #[test]
    fn good_poly_examples() {
        let cfg = BuildConfig::new(0.2, 0.2);
        assert!((cfg.thresholds.min_volume - 0.064).abs() < 1e-12);
        assert!(is_good_poly(&cube(0.0, 1.0), &cfg));
        let slab = Aabb::new(Vec3::zeros(), Vec3::new(1.0, 1.0, 0.05)).to_polyhedron();
        assert!((slab.inradius() - 0.025).abs() < 1e-9);
        assert!(!is_good_poly(&slab, &cfg));
        let empty = Aabb::new(Vec3::zeros(), Vec3::new(1.0, 1.0, 0.0)).to_polyhedron();
        assert!(!is_good_poly(&empty, &cfg));
    }

    #[test]
    fn free_map_single_root() {
        let map = GridMap::empty(Vec3::zeros(), 0.2, [50, 50, 10]).unwrap();
        let mut cfg = BuildConfig::new(0.2, 0.2);
        cfg.inflation.bbox_halfwidth = 20.0;
        let store = build(&map, &cfg).unwrap();
        assert_eq!(store.roots().len(), 1);
        assert_eq!(store.build_stats().rho, 1.0);
    }

    #[test]
    fn wall_splits_chambers() {
        let map = GridMap::from_fn(Vec3::zeros(), 0.2, [30, 15, 10], |c| (2.8..3.2).contains(&c.x)).unwrap();
        let mut cfg = BuildConfig::new(0.2, 0.2);
        cfg.rng_seed = 7;
        let store = build(&map, &cfg).unwrap();
        assert!(store.roots().len() >= 2);
        for &r in store.roots() {
            let bb = store.node(r).unwrap().aabb;
            assert!(bb.max.x <= 2.8 + 1e-9 || bb.min.x >= 3.2 - 1e-9, "{bb:?}");
        }
    }

    #[test]
    fn zero_samples_gives_empty_store() {
        let map = GridMap::empty(Vec3::zeros(), 0.2, [5, 5, 5]).unwrap();
        let mut cfg = BuildConfig::new(0.2, 0.2);
        cfg.max_samples = 0;
        let store = build(&map, &cfg).unwrap();
        assert!(store.roots().is_empty());
        assert_eq!(store.build_stats().rho, 0.0);
    }

    #[test]
    fn no_free_cells_is_an_error() {
        let map = GridMap::from_fn(Vec3::zeros(), 0.2, [3, 3, 3], |_| true).unwrap();
        assert!(matches!(build(&map, &BuildConfig::new(0.2, 0.2)), Err(BuildError::NoFreeSpace)));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let map = GridMap::from_fn(Vec3::zeros(), 0.2, [25, 25, 8], |c| {
            (c - Vec3::new(2.5, 2.5, 0.8)).norm() < 0.7
        })
        .unwrap();
        let mut cfg = BuildConfig::new(0.2, 0.2);
        cfg.rng_seed = 42;
        let a = build(&map, &cfg).unwrap();
        let b = build(&map, &cfg).unwrap();
        let shapes = |s: &RoadmapStore| -> Vec<HPolyhedron> {
            s.roots().iter().map(|r| s.node(*r).unwrap().shape.clone()).collect()
        };
        assert_eq!(shapes(&a), shapes(&b));
        assert!(a.build_stats().rho >= cfg.rho_e);
        for &r in a.roots() {
            let p = &a.node(r).unwrap().shape;
            for idx in 0..map.cell_count() {
                if map.is_occupied_index(idx) {
                    assert!(!p.contains_point(&map.cell_center(map.cell(idx)), -1e-9));
                }
            }
        }
    }
}
