//! Scenario files, the tick loop and its outputs.
//!
//! Each tick: move obstacles to their scripted pose, update the store and
//! graph, replan if a room on the current path changed recently, then
//! advance the robot along the path.

use crate::geom::{Aabb, Hyperplane, Obb, Vec3};
use crate::graph::{astar, build_graph, NavGraph, PlannedPath};
use crate::grid::{GridError, GridMap};
use crate::polyhedronize::{BuildConfig, BuildStats};
use crate::roadmap::{NodeId, NodeState, ObstacleId, RoadmapError, RoadmapStore};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;
use thiserror::Error;

pub const SCHEMA: u32 = 1;
/// Robot counts as arrived within this distance of the goal.
const ARRIVE_TOL: f64 = 1e-9;
/// Containment slack for the per-tick safety check.
const SAFETY_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("unsupported schema {0}")]
    Schema(u32),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("map {path}: {source}")]
    Map { path: PathBuf, source: GridError },
    #[error(transparent)]
    Roadmap(#[from] RoadmapError),
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, SimError> {
    let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
        path: path.into(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| SimError::Json {
        path: path.into(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), SimError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text).map_err(|source| SimError::Io {
        path: path.into(),
        source,
    })
}

/// Caps the global rayon pool at `POLYROAD_THREADS` if set.
pub fn configure_threads() {
    if let Some(n) = std::env::var("POLYROAD_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // a pool may already exist (tests); keep it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

// ---------------------------------------------------------------- roadmap file

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoadmapFile {
    pub schema: u32,
    pub map: String,
    pub config: BuildConfig,
    pub stats: BuildStats,
    pub roots: Vec<Vec<Hyperplane>>,
}

impl RoadmapFile {
    pub fn from_store(store: &RoadmapStore, map: &str, config: &BuildConfig) -> Self {
        RoadmapFile {
            schema: SCHEMA,
            map: map.to_string(),
            config: *config,
            stats: *store.build_stats(),
            roots: store
                .roots()
                .iter()
                .map(|r| store.node(*r).expect("root").shape.halfspaces().to_vec())
                .collect(),
        }
    }

    pub fn to_store(&self) -> Result<RoadmapStore, SimError> {
        let roots = self
            .roots
            .iter()
            .map(|h| crate::geom::HPolyhedron::new(h.clone()))
            .collect();
        Ok(RoadmapStore::new(
            roots,
            self.config.robot_radius,
            self.config.thresholds,
            self.stats,
        )?)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let f: RoadmapFile = read_json(path)?;
        if f.schema != SCHEMA {
            return Err(SimError::Schema(f.schema));
        }
        Ok(f)
    }

    pub fn save(&self, path: &Path) -> Result<(), SimError> {
        write_json(path, self)
    }
}

// ---------------------------------------------------------------- scenario

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseKey {
    pub t: f64,
    pub center: Vec3,
    #[serde(default)]
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleScript {
    pub id: ObstacleId,
    pub half_extents: Vec3,
    pub waypoints: Vec<PoseKey>,
}

impl ObstacleScript {
    /// Pose at time `t`: linear in the center, shortest arc in yaw, held
    /// at the ends.
    pub fn pose_at(&self, t: f64) -> Obb {
        let w = &self.waypoints;
        let (c, yaw) = if t <= w[0].t {
            (w[0].center, w[0].yaw)
        } else if t >= w[w.len() - 1].t {
            (w[w.len() - 1].center, w[w.len() - 1].yaw)
        } else {
            let i = w.partition_point(|k| k.t <= t) - 1;
            let (a, b) = (&w[i], &w[i + 1]);
            let s = (t - a.t) / (b.t - a.t);
            let dyaw = (b.yaw - a.yaw + PI).rem_euclid(2.0 * PI) - PI;
            (a.center + (b.center - a.center) * s, a.yaw + dyaw * s)
        };
        Obb::from_yaw(c, yaw, self.half_extents)
    }
}

/// Obstacles generated from `--seed`: each wanders between random points
/// inside `region` at constant speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomObstacles {
    pub count: usize,
    pub half_extents: Vec3,
    pub speed: f64,
    pub legs: usize,
    pub region: Aabb,
    #[serde(default = "default_first_id")]
    pub first_id: ObstacleId,
}

fn default_first_id() -> ObstacleId {
    100
}

impl RandomObstacles {
    pub fn generate(&self, seed: u64) -> Vec<ObstacleScript> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = &self.region;
        let point = |rng: &mut ChaCha8Rng| Vec3::from_fn(|i, _| rng.random_range(r.min[i]..=r.max[i]));
        (0..self.count)
            .map(|k| {
                let mut t = 0.0;
                let mut p = point(&mut rng);
                let mut waypoints = vec![PoseKey {
                    t,
                    center: p,
                    yaw: rng.random_range(-PI..PI),
                }];
                for _ in 0..self.legs {
                    let q = point(&mut rng);
                    t += ((q - p).norm() / self.speed).max(1e-3);
                    waypoints.push(PoseKey {
                        t,
                        center: q,
                        yaw: rng.random_range(-PI..PI),
                    });
                    p = q;
                }
                ObstacleScript {
                    id: self.first_id + k as ObstacleId,
                    half_extents: self.half_extents,
                    waypoints,
                }
            })
            .collect()
    }
}

fn default_dt() -> f64 {
    0.1
}

fn default_window() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub schema: u32,
    /// Grid file, relative to the scenario file.
    pub map: String,
    pub robot_radius: f64,
    pub start: Vec3,
    pub goal: Vec3,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_window")]
    pub replan_window: f64,
    pub max_velocity: f64,
    /// Simulated time limit in seconds.
    pub duration: f64,
    #[serde(default)]
    pub snapshot_ticks: Vec<u64>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleScript>,
    #[serde(default)]
    pub random_obstacles: Option<RandomObstacles>,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Scenario(m));
        if self.schema != SCHEMA {
            return Err(SimError::Schema(self.schema));
        }
        if !(self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.max_velocity > 0.0) || !(self.duration >= 0.0) {
            return bad("max_velocity must be positive and duration non-negative".into());
        }
        let mut ids = BTreeSet::new();
        for o in &self.obstacles {
            if !ids.insert(o.id) {
                return bad(format!("duplicate obstacle id {}", o.id));
            }
            if o.waypoints.is_empty() {
                return bad(format!("obstacle {} has no waypoints", o.id));
            }
            if o.waypoints.windows(2).any(|w| !(w[1].t > w[0].t)) {
                return bad(format!("obstacle {} waypoint times not strictly increasing", o.id));
            }
            if o.half_extents.iter().any(|&h| !(h > 0.0)) {
                return bad(format!("obstacle {} has non-positive half extents", o.id));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let s: Scenario = read_json(path)?;
        s.validate()?;
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<(), SimError> {
        write_json(path, self)
    }

    pub fn map_path(&self, scenario_path: &Path) -> PathBuf {
        scenario_path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(&self.map)
    }

    /// Scripted obstacles plus the generated ones, ascending by id.
    pub fn scripts(&self, seed: u64) -> Result<Vec<ObstacleScript>, SimError> {
        let mut all = self.obstacles.clone();
        if let Some(r) = &self.random_obstacles {
            all.extend(r.generate(seed));
        }
        all.sort_by_key(|o| o.id);
        if all.windows(2).any(|w| w[0].id == w[1].id) {
            return Err(SimError::Scenario("generated obstacle ids clash with scripted ones".into()));
        }
        Ok(all)
    }
}

// ---------------------------------------------------------------- snapshots

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapPolyhedron {
    pub id: NodeId,
    pub halfspaces: Vec<Hyperplane>,
    pub vertices: Vec<Vec3>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapNode {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub state: NodeState,
    pub split_by: Option<ObstacleId>,
    pub depth: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapObstacle {
    pub id: ObstacleId,
    pub obb: Obb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapEdge {
    pub a: NodeId,
    pub b: NodeId,
    pub door: Vec3,
    pub weight: f64,
}

/// One `(polyhedron, waypoint)` record; the polyhedron holds the segment
/// ending at the waypoint (the first record uses the start room).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapWaypoint {
    pub polyhedron: NodeId,
    pub point: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub schema: u32,
    pub tick: u64,
    pub time: f64,
    pub robot: Option<Vec3>,
    pub active: Vec<SnapPolyhedron>,
    pub lineage: Vec<SnapNode>,
    pub obstacles: Vec<SnapObstacle>,
    pub edges: Vec<SnapEdge>,
    pub path: Vec<SnapWaypoint>,
}

pub fn path_records(path: &PlannedPath) -> Vec<SnapWaypoint> {
    path.waypoints
        .iter()
        .enumerate()
        .map(|(i, p)| SnapWaypoint {
            polyhedron: path.segment_room(i.saturating_sub(1)),
            point: *p,
        })
        .collect()
}

pub fn export_snapshot(
    store: &RoadmapStore,
    graph: &NavGraph,
    path: Option<&PlannedPath>,
    tick: u64,
    time: f64,
    robot: Option<Vec3>,
) -> Snapshot {
    let active = store
        .active()
        .iter()
        .map(|id| {
            let shape = &store.node(*id).expect("active").shape;
            SnapPolyhedron {
                id: *id,
                halfspaces: shape.halfspaces().to_vec(),
                vertices: shape.vertices().map(|v| v.vertices).unwrap_or_default(),
            }
        })
        .collect();
    let lineage = store
        .nodes()
        .filter(|n| n.state == NodeState::Decomposed || n.parent.is_some())
        .map(|n| SnapNode {
            id: n.id,
            parent: n.parent,
            children: n.children.clone(),
            state: n.state,
            split_by: n.split_by.map(|s| s.obstacle),
            depth: n.depth,
        })
        .collect();
    let obstacles = store
        .obstacles()
        .values()
        .filter_map(|o| o.obb.map(|obb| SnapObstacle { id: o.id, obb }))
        .collect();
    let edges = graph
        .edges()
        .into_iter()
        .map(|(a, b, e)| SnapEdge {
            a,
            b,
            door: e.door,
            weight: e.weight,
        })
        .collect();
    Snapshot {
        schema: SCHEMA,
        tick,
        time,
        robot,
        active,
        lineage,
        obstacles,
        edges,
        path: path.map(path_records).unwrap_or_default(),
    }
}

impl Snapshot {
    pub fn save(&self, path: &Path) -> Result<(), SimError> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let s: Snapshot = read_json(path)?;
        if s.schema != SCHEMA {
            return Err(SimError::Schema(s.schema));
        }
        Ok(s)
    }
}

// ---------------------------------------------------------------- metrics

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventKind {
    Decomposition,
    Restoration,
    GraphUpdate,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Decomposition => "decomposition",
            EventKind::Restoration => "restoration",
            EventKind::GraphUpdate => "graph_update",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRow {
    pub tick: u64,
    pub event: EventKind,
    pub node_count: usize,
    pub duration: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub event: EventKind,
    pub times: usize,
    pub total: Duration,
}

impl Summary {
    pub fn average_ms(&self) -> f64 {
        if self.times == 0 {
            return 0.0;
        }
        self.total.as_secs_f64() * 1e3 / self.times as f64
    }
}

/// Average timings of three reference scenes, in ms, for side-by-side
/// printing.
pub const REFERENCE_MS: [(EventKind, [f64; 3]); 3] = [
    (EventKind::Decomposition, [2.784, 2.777, 1.569]),
    (EventKind::Restoration, [0.482, 0.3632, 0.1414]),
    (EventKind::GraphUpdate, [25.017, 16.823, 3.491]),
];

#[derive(Debug, Clone, Default)]
pub struct MetricsLog {
    pub rows: Vec<MetricRow>,
}

impl MetricsLog {
    pub fn push(&mut self, tick: u64, event: EventKind, node_count: usize, duration: Duration) {
        self.rows.push(MetricRow {
            tick,
            event,
            node_count,
            duration,
        });
    }

    pub fn summary(&self) -> Vec<Summary> {
        [EventKind::Decomposition, EventKind::Restoration, EventKind::GraphUpdate]
            .into_iter()
            .map(|event| {
                let rows = self.rows.iter().filter(|r| r.event == event);
                Summary {
                    event,
                    times: rows.clone().count(),
                    total: rows.map(|r| r.duration).sum(),
                }
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("tick,event,node_count,duration_us\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{}", r.tick, r.event.name(), r.node_count, r.duration.as_micros());
        }
        s
    }

    pub fn summary_table(&self) -> String {
        let mut s = format!(
            "{:<14}{:>8}{:>12}{:>12}   {:>8}{:>8}{:>8}\n",
            "event", "times", "total_ms", "average_ms", "ref_1", "ref_2", "ref_3"
        );
        for sum in self.summary() {
            let r = REFERENCE_MS.iter().find(|(k, _)| *k == sum.event).expect("reference").1;
            let _ = writeln!(
                s,
                "{:<14}{:>8}{:>12.3}{:>12.3}   {:>8}{:>8}{:>8}",
                sum.event.name(),
                sum.times,
                sum.total.as_secs_f64() * 1e3,
                sum.average_ms(),
                r[0],
                r[1],
                r[2]
            );
        }
        s
    }
}

// ---------------------------------------------------------------- simulation

#[derive(Debug, Clone, PartialEq)]
pub enum ReplanReason {
    Initial,
    PathChanged,
    NoPath,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replan {
    pub tick: u64,
    pub reason: ReplanReason,
    pub found: bool,
}

/// Per-tick record used to audit the run afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub tick: u64,
    pub robot: Vec3,
    /// Ids on the path in force before this tick's replan decision.
    pub path_rooms: Vec<NodeId>,
    /// Ids touched by store events in this tick.
    pub touched: Vec<NodeId>,
    pub safe: bool,
}

pub struct Simulation {
    pub store: RoadmapStore,
    pub graph: NavGraph,
    scenario: Scenario,
    scripts: Vec<ObstacleScript>,
    bounds: Aabb,
    poses: BTreeMap<ObstacleId, Option<Obb>>,
    pub robot: Vec3,
    pub path: Option<PlannedPath>,
    next_wp: usize,
    last_replan: Option<f64>,
    touched_at: BTreeMap<NodeId, f64>,
    pub metrics: MetricsLog,
    pub replans: Vec<Replan>,
    pub ticks: Vec<TickRecord>,
    pub snapshots: Vec<Snapshot>,
    tick: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub ticks: u64,
    pub reached: bool,
    pub final_position: Vec3,
    pub violations: Vec<u64>,
}

impl Simulation {
    pub fn new(store: RoadmapStore, map: &GridMap, scenario: Scenario, seed: u64) -> Result<Self, SimError> {
        scenario.validate()?;
        if (scenario.robot_radius - store.radius()).abs() > 1e-12 {
            return Err(SimError::Scenario(format!(
                "robot radius {} differs from the roadmap's {}",
                scenario.robot_radius,
                store.radius()
            )));
        }
        let scripts = scenario.scripts(seed)?;
        let graph = build_graph(&store, store.radius());
        Ok(Simulation {
            store,
            graph,
            scripts,
            bounds: map.bounds(),
            poses: BTreeMap::new(),
            robot: scenario.start,
            scenario,
            path: None,
            next_wp: 1,
            last_replan: None,
            touched_at: BTreeMap::new(),
            metrics: MetricsLog::default(),
            replans: Vec::new(),
            ticks: Vec::new(),
            snapshots: Vec::new(),
            tick: 0,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    fn time(&self) -> f64 {
        self.tick as f64 * self.scenario.dt
    }

    fn reached(&self) -> bool {
        (self.robot - self.scenario.goal).norm() <= ARRIVE_TOL
    }

    /// Runs until the goal is reached or the time limit passes.
    pub fn run(&mut self) -> SimOutcome {
        let max_ticks = (self.scenario.duration / self.scenario.dt).round() as u64;
        loop {
            self.step();
            if self.reached() || self.tick > max_ticks {
                break;
            }
        }
        SimOutcome {
            ticks: self.tick,
            reached: self.reached(),
            final_position: self.robot,
            violations: self.ticks.iter().filter(|t| !t.safe).map(|t| t.tick).collect(),
        }
    }

    /// One tick of the loop.
    pub fn step(&mut self) {
        let t = self.time();
        let touched = self.move_obstacles(t);
        let path_rooms = self.path.as_ref().map(|p| p.rooms.clone()).unwrap_or_default();
        self.maybe_replan(t);
        self.advance();
        let safe = self.is_safe(&self.robot);
        self.ticks.push(TickRecord {
            tick: self.tick,
            robot: self.robot,
            path_rooms,
            touched,
            safe,
        });
        if self.scenario.snapshot_ticks.contains(&self.tick) {
            let snap = export_snapshot(&self.store, &self.graph, self.path.as_ref(), self.tick, t, Some(self.robot));
            self.snapshots.push(snap);
        }
        self.tick += 1;
    }

    fn move_obstacles(&mut self, t: f64) -> Vec<NodeId> {
        let mut touched = BTreeSet::new();
        for k in 0..self.scripts.len() {
            let id = self.scripts[k].id;
            let pose = Some(self.scripts[k].pose_at(t)).filter(|o| o.aabb().intersects(&self.bounds));
            if self.poses.get(&id) == Some(&pose) || (pose.is_none() && !self.poses.contains_key(&id)) {
                continue;
            }
            self.poses.insert(id, pose);
            let report = self.store.apply_obstacle_motion(id, pose);
            if report.restored {
                self.metrics
                    .push(self.tick, EventKind::Restoration, report.restoration_events, report.t_r);
            }
            if report.decomposed {
                let n = report.events.len() - report.restoration_events;
                self.metrics.push(self.tick, EventKind::Decomposition, n, report.t_d);
            }
            if !report.events.is_empty() {
                let t_g = self.graph.apply_events(&self.store, &report.events);
                self.metrics
                    .push(self.tick, EventKind::GraphUpdate, self.graph.rooms().len(), t_g);
            }
            for e in &report.events {
                touched.extend(e.touched());
            }
        }
        for id in &touched {
            self.touched_at.insert(*id, t);
        }
        touched.into_iter().collect()
    }

    /// Whether a room on the current path was touched within the window.
    fn path_changed(&self, t: f64) -> bool {
        let window = self.scenario.replan_window + 1e-9;
        self.path.as_ref().is_some_and(|p| {
            p.rooms
                .iter()
                .any(|r| self.touched_at.get(r).is_some_and(|&at| t - at <= window))
        })
    }

    fn maybe_replan(&mut self, t: f64) {
        let reason = match (self.last_replan, &self.path) {
            _ if self.reached() => return,
            (None, _) => ReplanReason::Initial,
            (Some(last), _) if t - last < self.scenario.dt - 1e-9 => return,
            (Some(_), None) => ReplanReason::NoPath,
            (Some(_), Some(_)) if self.path_changed(t) => ReplanReason::PathChanged,
            _ => return,
        };
        self.last_replan = Some(t);
        self.path = self.plan_from(self.robot);
        self.next_wp = 1;
        self.replans.push(Replan {
            tick: self.tick,
            reason,
            found: self.path.is_some(),
        });
    }

    fn plan_from(&self, p: Vec3) -> Option<PlannedPath> {
        let a = self.store.locate(&p)?;
        let b = self.store.locate(&self.scenario.goal)?;
        astar(&self.graph, a, p, b, self.scenario.goal)
    }

    fn advance(&mut self) {
        let Some(path) = &self.path else { return };
        let mut budget = self.scenario.max_velocity * self.scenario.dt;
        while budget > 0.0 && self.next_wp < path.waypoints.len() {
            let target = path.waypoints[self.next_wp];
            let d = (target - self.robot).norm();
            if d <= budget {
                self.robot = target;
                budget -= d;
                self.next_wp += 1;
            } else {
                self.robot += (target - self.robot) * (budget / d);
                budget = 0.0;
            }
        }
    }

    /// Inside some active polyhedron and outside every inflated box.
    pub fn is_safe(&self, p: &Vec3) -> bool {
        let inside = self
            .store
            .active()
            .iter()
            .any(|id| self.store.node(*id).expect("active").shape.contains_point(p, SAFETY_TOL));
        let clear = self
            .store
            .inflated_obstacles()
            .iter()
            .all(|(_, b)| !b.contains_point(p, -SAFETY_TOL));
        inside && clear
    }
}

/// Loads a roadmap and scenario from disk and runs them.
pub fn run_files(roadmap: &Path, scenario_path: &Path, seed: u64) -> Result<(Simulation, SimOutcome), SimError> {
    let file = RoadmapFile::load(roadmap)?;
    let scenario = Scenario::load(scenario_path)?;
    let map_path = scenario.map_path(scenario_path);
    let map = GridMap::load(&map_path).map_err(|source| SimError::Map {
        path: map_path.clone(),
        source,
    })?;
    let mut sim = Simulation::new(file.to_store()?, &map, scenario, seed)?;
    let outcome = sim.run();
    Ok((sim, outcome))
}

/// Applies every obstacle of `scenario` at time `t` to `store`.
pub fn apply_scenario_at(store: &mut RoadmapStore, scenario: &Scenario, seed: u64, t: f64) -> Result<(), SimError> {
    for s in scenario.scripts(seed)? {
        store.apply_obstacle_motion(s.id, Some(s.pose_at(t)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::HPolyhedron;
    use crate::polyhedronize::Thresholds;

    fn boxp(lo: [f64; 3], hi: [f64; 3]) -> HPolyhedron {
        Aabb::new(Vec3::from(lo), Vec3::from(hi)).to_polyhedron()
    }

    fn script(id: u32, keys: &[(f64, [f64; 3], f64)]) -> ObstacleScript {
        ObstacleScript {
            id,
            half_extents: Vec3::new(0.2, 0.2, 0.2),
            waypoints: keys
                .iter()
                .map(|&(t, c, yaw)| PoseKey {
                    t,
                    center: Vec3::from(c),
                    yaw,
                })
                .collect(),
        }
    }

    fn scenario(obstacles: Vec<ObstacleScript>) -> Scenario {
        Scenario {
            schema: 1,
            map: "x.grid".into(),
            robot_radius: 0.1,
            start: Vec3::new(0.5, 0.5, 0.5),
            goal: Vec3::new(7.5, 0.5, 0.5),
            dt: 0.1,
            replan_window: 0.2,
            max_velocity: 1.0,
            duration: 30.0,
            snapshot_ticks: vec![0, 3],
            obstacles,
            random_obstacles: None,
        }
    }

    fn corridor() -> (RoadmapStore, GridMap) {
        let th = Thresholds {
            min_radius: 0.1,
            min_volume: 1e-3,
        };
        let store = RoadmapStore::from_roots(
            vec![
                boxp([0.0; 3], [3.0, 1.0, 1.0]),
                boxp([2.5, 0.0, 0.0], [5.5, 1.0, 1.0]),
                boxp([5.0, 0.0, 0.0], [8.0, 1.0, 1.0]),
            ],
            0.1,
            th,
        )
        .unwrap();
        let map = GridMap::empty(Vec3::zeros(), 0.2, [40, 5, 5]).unwrap();
        (store, map)
    }

    #[test]
    fn pose_interpolation() {
        let s = script(1, &[(0.0, [0.0; 3], 3.0), (2.0, [2.0, 0.0, 0.0], -3.0)]);
        let o = s.pose_at(1.0);
        assert!((o.center - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
        // shortest arc from 3 to -3 passes through pi
        let yaw = o.rotation[(1, 0)].atan2(o.rotation[(0, 0)]);
        assert!((yaw.abs() - PI).abs() < 1e-9, "{yaw}");
        assert_eq!(s.pose_at(-1.0).center, Vec3::zeros());
        assert_eq!(s.pose_at(9.0).center, Vec3::new(2.0, 0.0, 0.0));
    }

    #[test]
    fn scenario_validation() {
        let mut sc = scenario(vec![script(1, &[(1.0, [0.0; 3], 0.0), (1.0, [1.0; 3], 0.0)])]);
        assert!(matches!(sc.validate(), Err(SimError::Scenario(_))));
        sc.obstacles.clear();
        sc.dt = 0.0;
        assert!(sc.validate().is_err());
        sc.dt = 0.1;
        sc.schema = 2;
        assert!(matches!(sc.validate(), Err(SimError::Schema(2))));
    }

    #[test]
    fn no_obstacles_plans_once() {
        let (store, map) = corridor();
        let mut sim = Simulation::new(store, &map, scenario(vec![]), 0).unwrap();
        let out = sim.run();
        assert!(out.reached);
        assert!(out.violations.is_empty());
        assert_eq!(sim.replans.len(), 1);
        assert!(sim.metrics.rows.is_empty());
        assert_eq!(sim.snapshots.len(), 2);
    }

    #[test]
    fn crossing_obstacle_forces_replan() {
        let (store, map) = corridor();
        // sweeps across the corridor near x=4 well before the robot arrives
        let o = script(1, &[(0.0, [4.0, -1.0, 0.5], 0.0), (1.0, [4.0, 0.5, 0.5], 0.0), (2.0, [4.0, 2.5, 0.5], 0.0)]);
        let mut sim = Simulation::new(store, &map, scenario(vec![o]), 0).unwrap();
        let out = sim.run();
        assert!(out.reached, "{out:?}");
        assert!(out.violations.is_empty());
        assert!(sim.metrics.rows.iter().any(|r| r.event == EventKind::Decomposition));
        assert!(sim.replans.iter().any(|r| r.reason == ReplanReason::PathChanged));
        assert!((out.final_position - sim.scenario().goal).norm() < 1e-6);
    }

    #[test]
    fn snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (store, _) = corridor();
        let g = build_graph(&store, 0.1);
        let snap = export_snapshot(&store, &g, None, 4, 0.4, None);
        assert_eq!(snap.active[0].halfspaces.len(), 6);
        assert_eq!(snap.active[0].vertices.len(), 8);
        let p = dir.path().join("s.json");
        snap.save(&p).unwrap();
        assert_eq!(Snapshot::load(&p).unwrap(), snap);

        let empty = RoadmapStore::from_roots(vec![], 0.1, *store.thresholds()).unwrap();
        let e = export_snapshot(&empty, &build_graph(&empty, 0.1), None, 0, 0.0, None);
        assert!(e.active.is_empty() && e.edges.is_empty() && e.path.is_empty());
    }

    #[test]
    fn csv_header_and_rows() {
        let mut m = MetricsLog::default();
        m.push(3, EventKind::Restoration, 2, Duration::from_micros(17));
        assert_eq!(m.to_csv(), "tick,event,node_count,duration_us\n3,restoration,2,17\n");
        let s = m.summary();
        assert_eq!(s[1].times, 1);
        assert!((s[1].average_ms() - 0.017).abs() < 1e-12);
    }
}
