//! Rooms-and-doors graph over the active polyhedra.
//!
//! Each active node is a room placed at its centroid. Two rooms are joined
//! when their intersection fits a ball of radius `door_min_radius`; the door
//! sits at the intersection's centroid and the edge costs the bent length
//! room → door → room.
//!
//! After a split only the pairs that can possibly have changed are tested:
//! sibling pieces (except those beyond opposite faces of the splitting box,
//! which are disjoint) and each piece against the parent's old neighbours.

use crate::geom::{volume_centroid_of, Aabb, HPolyhedron, Hyperplane, Vec3, VERTEX_TOL};
use crate::polyhedronize::Measure;
use crate::roadmap::{NodeId, RoadmapStore, StoreEvent};
use ordered_float::OrderedFloat;
use rayon::prelude::*;
use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::time::{Duration, Instant};

/// Door position if `a ∩ b` fits a ball of radius `min_radius`.
pub fn connectivity_check(a: &HPolyhedron, b: &HPolyhedron, min_radius: f64) -> Option<Vec3> {
    let va = a.vertices().ok()?.vertices;
    let vb = b.vertices().ok()?.vertices;
    connectivity_check_with(a, &va, b, &vb, min_radius)
}

/// [`connectivity_check`] with the vertex sets of both operands known.
///
/// Rows of one polyhedron that the other lies inside cannot shape the
/// intersection; the centroid is taken over the remaining rows and only
/// trusted once its vertices satisfy the dropped rows too.
pub fn connectivity_check_with(
    a: &HPolyhedron,
    va: &[Vec3],
    b: &HPolyhedron,
    vb: &[Vec3],
    min_radius: f64,
) -> Option<Vec3> {
    let cheb = a.intersection_chebyshev(b)?;
    if cheb.radius < min_radius || cheb.radius <= 0.0 {
        return None;
    }
    // Rows of the larger shape implied by the smaller one are redundant.
    // Dropping from one side only keeps the reduced set equal to a ∩ b.
    let ((big, _), (small, vsmall)) = if a.halfspaces().len() >= b.halfspaces().len() {
        ((a, va), (b, vb))
    } else {
        ((b, vb), (a, va))
    };
    let mut kept: Vec<Hyperplane> = small.halfspaces().to_vec();
    let mut dropped = Vec::new();
    for h in big.halfspaces() {
        if vsmall.iter().all(|v| h.signed_distance(v) <= 1e-9) {
            dropped.push(*h);
        } else if let Some(k) = kept.iter_mut().find(|k| (k.normal - h.normal).norm() < 1e-9) {
            k.offset = k.offset.min(h.offset);
        } else {
            kept.push(*h);
        }
    }
    let reduced = HPolyhedron::new(kept);
    if let Ok(vs) = reduced.vertices() {
        let exact = vs
            .vertices
            .iter()
            .all(|v| dropped.iter().all(|h| h.signed_distance(v) <= VERTEX_TOL));
        if exact {
            if let Ok((_, c)) = volume_centroid_of(reduced.halfspaces(), &vs.vertices) {
                return Some(c);
            }
        }
    }
    let inter = a.intersect(b);
    Some(Measure::of(&inter).map_or(cheb.center, |m| m.centroid))
}

#[derive(Debug, Clone)]
pub struct Room {
    pub id: NodeId,
    pub position: Vec3,
    pub shape: HPolyhedron,
    pub vertices: Vec<Vec3>,
    pub aabb: Aabb,
    pub root: NodeId,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub door: Vec3,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct NavGraph {
    rooms: BTreeMap<NodeId, Room>,
    adj: BTreeMap<NodeId, BTreeMap<NodeId, Edge>>,
    by_root: BTreeMap<NodeId, BTreeSet<NodeId>>,
    door_min_radius: f64,
    checks: u64,
}

/// One room per active node plus all its doors.
pub fn build_graph(store: &RoadmapStore, door_min_radius: f64) -> NavGraph {
    let mut g = NavGraph::empty(door_min_radius);
    for &id in store.active() {
        g.add_room(store, id);
    }
    let mut pairs = BTreeSet::new();
    for &a in store.active() {
        let bb = g.rooms[&a].aabb;
        for root in store.index().candidates_for_box(&bb) {
            for b in store.active_under(root) {
                if b > a && g.rooms[&b].aabb.intersects(&bb) {
                    pairs.insert((a, b));
                }
            }
        }
    }
    g.check_pairs(pairs.into_iter().collect());
    g
}

impl NavGraph {
    pub fn empty(door_min_radius: f64) -> Self {
        NavGraph {
            rooms: BTreeMap::new(),
            adj: BTreeMap::new(),
            by_root: BTreeMap::new(),
            door_min_radius,
            checks: 0,
        }
    }

    pub fn rooms(&self) -> &BTreeMap<NodeId, Room> {
        &self.rooms
    }

    pub fn room(&self, id: NodeId) -> Option<&Room> {
        self.rooms.get(&id)
    }

    pub fn neighbors(&self, id: NodeId) -> impl Iterator<Item = (NodeId, &Edge)> {
        self.adj.get(&id).into_iter().flat_map(|m| m.iter().map(|(k, e)| (*k, e)))
    }

    pub fn edge(&self, a: NodeId, b: NodeId) -> Option<&Edge> {
        self.adj.get(&a)?.get(&b)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(|m| m.len()).sum::<usize>() / 2
    }

    /// Every edge once, as `(low id, high id, edge)`.
    pub fn edges(&self) -> Vec<(NodeId, NodeId, Edge)> {
        self.adj
            .iter()
            .flat_map(|(a, m)| m.iter().filter(|(b, _)| *b > a).map(|(b, e)| (*a, *b, *e)))
            .collect()
    }

    /// Connectivity checks run since construction.
    pub fn checks(&self) -> u64 {
        self.checks
    }

    pub fn door_min_radius(&self) -> f64 {
        self.door_min_radius
    }

    fn add_room(&mut self, store: &RoadmapStore, id: NodeId) {
        let n = store.node(id).expect("active node exists");
        self.rooms.insert(
            id,
            Room {
                id,
                position: n.centroid,
                shape: n.shape.clone(),
                vertices: n.vertices.clone(),
                aabb: n.aabb,
                root: n.root,
            },
        );
        self.adj.entry(id).or_default();
        self.by_root.entry(n.root).or_default().insert(id);
    }

    /// Removes a room, returning its former neighbours.
    fn remove_room(&mut self, id: NodeId) -> Vec<NodeId> {
        let Some(room) = self.rooms.remove(&id) else {
            return Vec::new();
        };
        if let Some(set) = self.by_root.get_mut(&room.root) {
            set.remove(&id);
        }
        let nbrs: Vec<NodeId> = self.adj.remove(&id).unwrap_or_default().into_keys().collect();
        for n in &nbrs {
            if let Some(m) = self.adj.get_mut(n) {
                m.remove(&id);
            }
        }
        nbrs
    }

    /// Tests the given room pairs and inserts the doors found. Pairs whose
    /// boxes are disjoint are skipped without an LP.
    fn check_pairs(&mut self, pairs: Vec<(NodeId, NodeId)>) {
        let pairs: Vec<(NodeId, NodeId)> = pairs
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .filter(|(a, b)| self.rooms[a].aabb.intersects(&self.rooms[b].aabb))
            .collect();
        self.checks += pairs.len() as u64;
        let r = self.door_min_radius;
        let rooms = &self.rooms;
        let found: Vec<Option<(NodeId, NodeId, Edge)>> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let (ra, rb) = (&rooms[&a], &rooms[&b]);
                connectivity_check_with(&ra.shape, &ra.vertices, &rb.shape, &rb.vertices, r).map(|door| {
                    let weight = (ra.position - door).norm() + (door - rb.position).norm();
                    (a, b, Edge { door, weight })
                })
            })
            .collect();
        for (a, b, e) in found.into_iter().flatten() {
            self.adj.entry(a).or_default().insert(b, e);
            self.adj.entry(b).or_default().insert(a, e);
        }
    }

    /// Replaces `parent` by its new children.
    pub fn update_after_decompose(&mut self, store: &RoadmapStore, parent: NodeId, children: &[NodeId]) -> Duration {
        let t0 = Instant::now();
        let former = self.remove_room(parent);
        for &c in children {
            self.add_room(store, c);
        }
        let face = |id: NodeId| store.node(id).and_then(|n| n.face).expect("child has a face");
        let mut pairs = Vec::new();
        for (i, &a) in children.iter().enumerate() {
            for &b in &children[i + 1..] {
                // pieces beyond opposite faces cannot meet
                if face(a) != face(b) ^ 1 {
                    pairs.push((a, b));
                }
            }
            for &n in &former {
                pairs.push((a, n));
            }
        }
        self.check_pairs(pairs);
        t0.elapsed()
    }

    /// Replaces the rooms of `removed` by the room of the restored `node`.
    pub fn update_after_restore(&mut self, store: &RoadmapStore, node: NodeId, removed: &[NodeId]) -> Duration {
        let t0 = Instant::now();
        let mut cands = BTreeSet::new();
        for &r in removed {
            cands.extend(self.remove_room(r));
        }
        for r in removed {
            cands.remove(r);
        }
        self.add_room(store, node);
        let bb = self.rooms[&node].aabb;
        for root in store.index().candidates_for_box(&bb) {
            if let Some(set) = self.by_root.get(&root) {
                cands.extend(set.iter().copied());
            }
        }
        cands.remove(&node);
        self.check_pairs(cands.into_iter().map(|c| (node, c)).collect());
        t0.elapsed()
    }

    /// Replays a store event log in order; returns the total time spent.
    pub fn apply_events(&mut self, store: &RoadmapStore, events: &[StoreEvent]) -> Duration {
        events
            .iter()
            .map(|e| match e {
                StoreEvent::Decomposed { parent, children } => self.update_after_decompose(store, *parent, children),
                StoreEvent::Restored { node, removed } => self.update_after_restore(store, *node, removed),
            })
            .sum()
    }

    /// First difference between two graphs, doors compared within `tol`.
    pub fn diff(&self, other: &NavGraph, tol: f64) -> Option<String> {
        let ka: Vec<_> = self.rooms.keys().collect();
        let kb: Vec<_> = other.rooms.keys().collect();
        if ka != kb {
            return Some(format!("rooms differ: {ka:?} vs {kb:?}"));
        }
        let ea = self.edges();
        let eb = other.edges();
        if ea.len() != eb.len() {
            return Some(format!("edge counts differ: {} vs {}", ea.len(), eb.len()));
        }
        for (x, y) in ea.iter().zip(&eb) {
            if (x.0, x.1) != (y.0, y.1) {
                return Some(format!("edge ({},{}) vs ({},{})", x.0, x.1, y.0, y.1));
            }
            if (x.2.door - y.2.door).norm() > tol {
                return Some(format!("door of ({},{}) differs", x.0, x.1));
            }
        }
        None
    }
}

/// Room sequence and polyline from a start point to a goal point.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedPath {
    pub rooms: Vec<NodeId>,
    pub waypoints: Vec<Vec3>,
    pub cost: f64,
}

impl PlannedPath {
    /// Room containing the segment from waypoint `i` to `i + 1`.
    pub fn segment_room(&self, i: usize) -> NodeId {
        self.rooms[i.div_ceil(2)]
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }
}

/// Lowest-cost room path from `start` (in room `start_room`) to `goal`
/// (in room `goal_room`). Waypoints run start, door, room, door, …, goal.
pub fn astar(
    graph: &NavGraph,
    start_room: NodeId,
    start: Vec3,
    goal_room: NodeId,
    goal: Vec3,
) -> Option<PlannedPath> {
    let target = graph.room(goal_room)?.position;
    graph.room(start_room)?;
    let h = |id: NodeId| (graph.rooms[&id].position - target).norm();
    let mut best: BTreeMap<NodeId, f64> = BTreeMap::new();
    let mut prev: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut closed = BTreeSet::new();
    let mut open = BinaryHeap::new();
    best.insert(start_room, 0.0);
    open.push(Reverse((OrderedFloat(h(start_room)), start_room)));
    while let Some(Reverse((_, u))) = open.pop() {
        if !closed.insert(u) {
            continue;
        }
        if u == goal_room {
            break;
        }
        let gu = best[&u];
        for (v, e) in graph.neighbors(u) {
            let g = gu + e.weight;
            if best.get(&v).is_none_or(|&old| g < old) {
                best.insert(v, g);
                prev.insert(v, u);
                open.push(Reverse((OrderedFloat(g + h(v)), v)));
            }
        }
    }
    let cost = *best.get(&goal_room)?;
    let mut rooms = vec![goal_room];
    while let Some(&p) = prev.get(rooms.last().expect("nonempty")) {
        if *rooms.last().unwrap() == start_room {
            break;
        }
        rooms.push(p);
    }
    rooms.reverse();
    let mut waypoints = vec![start];
    for w in rooms.windows(2) {
        waypoints.push(graph.edge(w[0], w[1]).expect("path edge").door);
        if w[1] != goal_room {
            waypoints.push(graph.rooms[&w[1]].position);
        }
    }
    waypoints.push(goal);
    Some(PlannedPath { rooms, waypoints, cost })
}
