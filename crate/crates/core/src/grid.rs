//! Static occupancy grid, its free set, and the coverage ratio that stops
//! polyhedronization.
//!
//! `.grid` files are plain text: a five-line header followed by run lengths
//! of alternating free/occupied cells, starting with free. Cells are ordered
//! x fastest, then y, then z.
//!
//! ```text
//! POLYROAD-GRID 1
//! resolution 0.2
//! dims 50 50 10
//! origin 0 0 0
//! runs 3
//! 1200 40 23760
//! ```

use crate::geom::{Aabb, HPolyhedron, Vec3};
use rand::Rng;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

const MAGIC: &str = "POLYROAD-GRID 1";
const RUNS_PER_LINE: usize = 16;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed grid header: {0}")]
    Header(String),
    #[error("occupancy data does not match dims: expected {expected} cells, got {got}")]
    Mismatch { expected: usize, got: usize },
    #[error("invalid grid: {0}")]
    Invalid(String),
}

/// Occupancy grid `M`. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    origin: Vec3,
    resolution: f64,
    dims: [usize; 3],
    occupied: Vec<bool>,
    /// Occupied cells with at least one free cell among their 26 neighbours.
    surface: Vec<bool>,
    free_count: usize,
}

impl GridMap {
    pub fn new(
        origin: Vec3,
        resolution: f64,
        dims: [usize; 3],
        occupied: Vec<bool>,
    ) -> Result<Self, GridError> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(GridError::Invalid(format!("resolution {resolution}")));
        }
        if dims.contains(&0) {
            return Err(GridError::Invalid(format!("dims {dims:?}")));
        }
        let expected = dims[0] * dims[1] * dims[2];
        if occupied.len() != expected {
            return Err(GridError::Mismatch {
                expected,
                got: occupied.len(),
            });
        }
        let free_count = occupied.iter().filter(|o| !**o).count();
        let mut map = GridMap {
            origin,
            resolution,
            dims,
            occupied,
            surface: Vec::new(),
            free_count,
        };
        map.surface = map.compute_surface();
        Ok(map)
    }

    /// All-free grid.
    pub fn empty(origin: Vec3, resolution: f64, dims: [usize; 3]) -> Result<Self, GridError> {
        GridMap::new(origin, resolution, dims, vec![false; dims[0] * dims[1] * dims[2]])
    }

    /// Grid built from a predicate on cell centers.
    pub fn from_fn(
        origin: Vec3,
        resolution: f64,
        dims: [usize; 3],
        occupied: impl Fn(&Vec3) -> bool,
    ) -> Result<Self, GridError> {
        let n = dims[0] * dims[1] * dims[2];
        let mut occ = Vec::with_capacity(n);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let c = origin + Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * resolution;
                    occ.push(occupied(&c));
                }
            }
        }
        GridMap::new(origin, resolution, dims, occ)
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn cell_count(&self) -> usize {
        self.occupied.len()
    }

    pub fn free_count(&self) -> usize {
        self.free_count
    }

    pub fn bounds(&self) -> Aabb {
        let ext = Vec3::new(self.dims[0] as f64, self.dims[1] as f64, self.dims[2] as f64);
        Aabb::new(self.origin, self.origin + ext * self.resolution)
    }

    #[inline]
    pub fn index(&self, cell: [usize; 3]) -> usize {
        cell[0] + self.dims[0] * (cell[1] + self.dims[1] * cell[2])
    }

    #[inline]
    pub fn cell(&self, index: usize) -> [usize; 3] {
        let i = index % self.dims[0];
        let j = (index / self.dims[0]) % self.dims[1];
        let k = index / (self.dims[0] * self.dims[1]);
        [i, j, k]
    }

    pub fn cell_center(&self, cell: [usize; 3]) -> Vec3 {
        self.origin
            + Vec3::new(cell[0] as f64 + 0.5, cell[1] as f64 + 0.5, cell[2] as f64 + 0.5)
                * self.resolution
    }

    pub fn cell_box(&self, cell: [usize; 3]) -> Aabb {
        let lo = self.origin
            + Vec3::new(cell[0] as f64, cell[1] as f64, cell[2] as f64) * self.resolution;
        Aabb::new(lo, lo.add_scalar(self.resolution))
    }

    /// Cell containing `p`, if inside the map. Points on a shared face go to
    /// the higher cell; the upper map boundary belongs to the last cell.
    pub fn world_to_cell(&self, p: &Vec3) -> Option<[usize; 3]> {
        let mut out = [0usize; 3];
        for a in 0..3 {
            let t = (p[a] - self.origin[a]) / self.resolution;
            if !(t >= 0.0) || t > self.dims[a] as f64 {
                return None;
            }
            out[a] = (t.floor() as usize).min(self.dims[a] - 1);
        }
        Some(out)
    }

    pub fn is_occupied(&self, cell: [usize; 3]) -> bool {
        self.occupied[self.index(cell)]
    }

    pub fn is_occupied_index(&self, index: usize) -> bool {
        self.occupied[index]
    }

    pub fn is_surface_index(&self, index: usize) -> bool {
        self.surface[index]
    }

    /// Inclusive cell ranges whose centers may lie in `b` (within
    /// [`COVER_TOL`], so centers on a face are not lost to rounding).
    pub fn cell_range(&self, b: &Aabb) -> Option<[(usize, usize); 3]> {
        let mut out = [(0, 0); 3];
        for a in 0..3 {
            let lo = ((b.min[a] - COVER_TOL - self.origin[a]) / self.resolution - 0.5).ceil();
            let hi = ((b.max[a] + COVER_TOL - self.origin[a]) / self.resolution - 0.5).floor();
            let lo = lo.max(0.0);
            let hi = hi.min(self.dims[a] as f64 - 1.0);
            if lo > hi {
                return None;
            }
            out[a] = (lo as usize, hi as usize);
        }
        Some(out)
    }

    /// Indices of occupied cells whose box intersects `b`.
    pub fn occupied_touching(&self, b: &Aabb, surface_only: bool) -> Vec<usize> {
        let mut out = Vec::new();
        let mut rng = [(0usize, 0usize); 3];
        for a in 0..3 {
            let lo = ((b.min[a] - self.origin[a]) / self.resolution).floor().max(0.0);
            let hi = ((b.max[a] - self.origin[a]) / self.resolution).ceil() - 1.0;
            let hi = hi.min(self.dims[a] as f64 - 1.0);
            if lo > hi {
                return out;
            }
            rng[a] = (lo as usize, hi as usize);
        }
        let mask = if surface_only { &self.surface } else { &self.occupied };
        for k in rng[2].0..=rng[2].1 {
            for j in rng[1].0..=rng[1].1 {
                for i in rng[0].0..=rng[0].1 {
                    let idx = self.index([i, j, k]);
                    if mask[idx] {
                        out.push(idx);
                    }
                }
            }
        }
        out
    }

    fn compute_surface(&self) -> Vec<bool> {
        let [nx, ny, nz] = self.dims;
        let mut surface = vec![false; self.occupied.len()];
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let idx = self.index([i, j, k]);
                    if !self.occupied[idx] {
                        continue;
                    }
                    'nb: for dk in -1i64..=1 {
                        for dj in -1i64..=1 {
                            for di in -1i64..=1 {
                                let (a, b, c) = (i as i64 + di, j as i64 + dj, k as i64 + dk);
                                if a < 0
                                    || b < 0
                                    || c < 0
                                    || a >= nx as i64
                                    || b >= ny as i64
                                    || c >= nz as i64
                                {
                                    continue;
                                }
                                if !self.occupied[self.index([a as usize, b as usize, c as usize])] {
                                    surface[idx] = true;
                                    break 'nb;
                                }
                            }
                        }
                    }
                }
            }
        }
        surface
    }

    pub fn to_text(&self) -> String {
        let mut runs: Vec<usize> = Vec::new();
        let mut current = false;
        let mut len = 0usize;
        for &o in &self.occupied {
            if o == current {
                len += 1;
            } else {
                runs.push(len);
                current = o;
                len = 1;
            }
        }
        runs.push(len);
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "resolution {}", self.resolution);
        let _ = writeln!(s, "dims {} {} {}", self.dims[0], self.dims[1], self.dims[2]);
        let _ = writeln!(s, "origin {} {} {}", self.origin.x, self.origin.y, self.origin.z);
        let _ = writeln!(s, "runs {}", runs.len());
        for chunk in runs.chunks(RUNS_PER_LINE) {
            let line: Vec<String> = chunk.iter().map(|r| r.to_string()).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, GridError> {
        let mut lines = text.lines();
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| GridError::Header(format!("missing {what} line")))
        };
        if next("magic")?.trim() != MAGIC {
            return Err(GridError::Header("bad magic".into()));
        }
        let resolution: f64 = parse_fields(next("resolution")?, "resolution", 1)?[0];
        let d: Vec<f64> = parse_fields(next("dims")?, "dims", 3)?;
        let o: Vec<f64> = parse_fields(next("origin")?, "origin", 3)?;
        let nruns = parse_fields(next("runs")?, "runs", 1)?[0] as usize;
        if d.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
            return Err(GridError::Header("dims must be positive integers".into()));
        }
        let dims = [d[0] as usize, d[1] as usize, d[2] as usize];
        let expected = dims[0] * dims[1] * dims[2];
        let mut occupied = Vec::with_capacity(expected);
        let mut seen = 0usize;
        let mut value = false;
        for line in lines {
            for tok in line.split_whitespace() {
                let n: usize = tok
                    .parse()
                    .map_err(|_| GridError::Header(format!("bad run length {tok:?}")))?;
                if occupied.len() + n > expected {
                    return Err(GridError::Mismatch {
                        expected,
                        got: occupied.len() + n,
                    });
                }
                occupied.extend(std::iter::repeat_n(value, n));
                value = !value;
                seen += 1;
            }
        }
        if seen != nruns || occupied.len() != expected {
            return Err(GridError::Mismatch {
                expected,
                got: occupied.len(),
            });
        }
        GridMap::new(Vec3::new(o[0], o[1], o[2]), resolution, dims, occupied)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GridError> {
        GridMap::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GridError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn parse_fields(line: &str, key: &str, n: usize) -> Result<Vec<f64>, GridError> {
    let mut it = line.split_whitespace();
    if it.next() != Some(key) {
        return Err(GridError::Header(format!("expected `{key}`")));
    }
    let vals: Vec<f64> = it
        .map(|t| t.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| GridError::Header(format!("bad number in `{key}`")))?;
    if vals.len() != n {
        return Err(GridError::Header(format!("`{key}` needs {n} values")));
    }
    Ok(vals)
}

/// Tracks which free cells are covered by the roadmap; `rho` is the
/// covered fraction of free cells.
#[derive(Debug, Clone)]
pub struct CoverageTracker {
    covered: Vec<bool>,
    covered_count: usize,
    free_count: usize,
    /// Uncovered free cells; `slot[idx]` is the position of `idx` in here.
    uncovered: Vec<u32>,
    slot: Vec<u32>,
}

impl CoverageTracker {
    pub fn new(map: &GridMap) -> Self {
        let mut uncovered = Vec::with_capacity(map.free_count());
        let mut slot = vec![u32::MAX; map.cell_count()];
        for idx in 0..map.cell_count() {
            if !map.is_occupied_index(idx) {
                slot[idx] = uncovered.len() as u32;
                uncovered.push(idx as u32);
            }
        }
        CoverageTracker {
            covered: vec![false; map.cell_count()],
            covered_count: 0,
            free_count: map.free_count(),
            uncovered,
            slot,
        }
    }

    pub fn rho(&self) -> f64 {
        if self.free_count == 0 {
            return 0.0;
        }
        self.covered_count as f64 / self.free_count as f64
    }

    pub fn covered_count(&self) -> usize {
        self.covered_count
    }

    pub fn uncovered_count(&self) -> usize {
        self.uncovered.len()
    }

    pub fn is_covered(&self, index: usize) -> bool {
        self.covered[index]
    }

    fn mark(&mut self, idx: usize) {
        if self.covered[idx] {
            return;
        }
        self.covered[idx] = true;
        self.covered_count += 1;
        let pos = self.slot[idx] as usize;
        let last = *self.uncovered.last().expect("uncovered nonempty");
        self.uncovered.swap_remove(pos);
        if last as usize != idx {
            self.slot[last as usize] = pos as u32;
        }
        self.slot[idx] = u32::MAX;
    }

    /// Center of a uniformly chosen uncovered free cell; `None` once every
    /// free cell is covered.
    pub fn sample_uncovered_free<R: Rng + ?Sized>(&self, map: &GridMap, rng: &mut R) -> Option<Vec3> {
        if self.uncovered.is_empty() {
            return None;
        }
        let idx = self.uncovered[rng.random_range(0..self.uncovered.len())] as usize;
        Some(map.cell_center(map.cell(idx)))
    }

    /// Marks every free cell whose center lies in `p` and returns the new
    /// ratio.
    pub fn update_ratio(&mut self, map: &GridMap, p: &HPolyhedron) -> f64 {
        if p.is_empty() {
            return self.rho();
        }
        let Ok(bb) = p.aabb() else {
            return self.rho();
        };
        if let Some(r) = map.cell_range(&bb) {
            for k in r[2].0..=r[2].1 {
                for j in r[1].0..=r[1].1 {
                    for i in r[0].0..=r[0].1 {
                        let idx = map.index([i, j, k]);
                        if map.is_occupied_index(idx) || self.covered[idx] {
                            continue;
                        }
                        if p.contains_point(&map.cell_center([i, j, k]), COVER_TOL) {
                            self.mark(idx);
                        }
                    }
                }
            }
        }
        self.rho()
    }
}

/// Containment slack when counting covered cell centers.
pub const COVER_TOL: f64 = 1e-6;
