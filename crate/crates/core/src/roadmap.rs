//! Polyhedron hierarchy under moving obstacles.
//!
//! Roots come from polyhedronization and never change. When an obstacle's
//! inflated box overlaps a complete node, the node is split into up to six
//! children (one per box face) and becomes decomposed; undoing an obstacle
//! deletes the subtrees it created and re-applies the remaining obstacles.
//! Every mutation returns a [`StoreEvent`] log for the graph to replay.

use crate::geom::{Aabb, HPolyhedron, Obb, Vec3};
use crate::polyhedronize::{BuildStats, Measure, StopReason, Thresholds};
use crate::spatial::{SegTree3D, SpatialError};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};
use thiserror::Error;

pub type NodeId = u32;
pub type ObstacleId = u32;

/// Root boxes in the index are padded by this much so boundary points
/// still stab them.
const INDEX_PAD: f64 = 1e-7;
/// Point containment slack used by [`RoadmapStore::locate`].
pub const LOCATE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoadmapError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown obstacle {0}")]
    UnknownObstacle(ObstacleId),
    #[error("node {0} is already decomposed")]
    AlreadyDecomposed(NodeId),
    #[error("root {0} is empty or unbounded")]
    BadRoot(usize),
    #[error(transparent)]
    Index(#[from] SpatialError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeState {
    Complete,
    Decomposed,
}

/// The obstacle and inflated pose that split a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub obstacle: ObstacleId,
    pub inflated: Obb,
}

#[derive(Debug, Clone)]
pub struct PolyNode {
    pub id: NodeId,
    pub shape: HPolyhedron,
    pub state: NodeState,
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
    pub split_by: Option<Split>,
    pub depth: u32,
    /// Face of the parent's split box this piece lies beyond.
    pub face: Option<u8>,
    pub root: NodeId,
    pub volume: f64,
    pub centroid: Vec3,
    pub aabb: Aabb,
    pub vertices: Vec<Vec3>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub id: ObstacleId,
    /// Current pose; `None` while the obstacle is not applied.
    pub obb: Option<Obb>,
    /// Nodes this obstacle currently splits.
    pub splits: BTreeSet<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StoreEvent {
    Decomposed { parent: NodeId, children: Vec<NodeId> },
    Restored { node: NodeId, removed: Vec<NodeId> },
}

impl StoreEvent {
    /// Ids whose region changed: the split node, or the restored node and
    /// everything removed under it.
    pub fn touched(&self) -> Vec<NodeId> {
        match self {
            StoreEvent::Decomposed { parent, .. } => vec![*parent],
            StoreEvent::Restored { node, removed } => {
                let mut v = vec![*node];
                v.extend_from_slice(removed);
                v
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct MotionReport {
    pub events: Vec<StoreEvent>,
    pub t_r: Duration,
    pub t_d: Duration,
    /// Whether a restoration / decomposition step ran at all.
    pub restored: bool,
    pub decomposed: bool,
    /// Leading entries of `events` produced by the restoration step.
    pub restoration_events: usize,
}

impl MotionReport {
    pub fn split_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, StoreEvent::Decomposed { .. }))
            .count()
    }

    pub fn restore_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, StoreEvent::Restored { .. }))
            .count()
    }
}

/// The six candidate pieces `parent ∩ {a_k·x >= b_k}` for the faces of
/// `inflated`, in face order.
pub fn split_candidates(parent: &HPolyhedron, inflated: &Obb) -> Vec<HPolyhedron> {
    inflated
        .faces()
        .iter()
        .map(|f| parent.cut(f.flipped()))
        .collect()
}

/// Keeps pieces passing `thresholds`, then drops any piece contained in
/// another kept piece (the earlier one wins on ties).
pub fn select_pieces(candidates: Vec<HPolyhedron>, thresholds: &Thresholds) -> Vec<(u8, HPolyhedron, Measure)> {
    let mut kept: Vec<(u8, HPolyhedron, Measure)> = Vec::new();
    for (k, cand) in candidates.into_iter().enumerate() {
        let Some(m) = thresholds.measure(&cand) else {
            continue;
        };
        if kept.iter().any(|(_, p, pm)| may_contain(pm, &m) && p.contains_polyhedron(&cand)) {
            continue;
        }
        kept.retain(|(_, p, pm)| !(may_contain(&m, pm) && cand.contains_polyhedron(p)));
        kept.push((k as u8, cand, m));
    }
    kept
}

fn may_contain(outer: &Measure, inner: &Measure) -> bool {
    let (a, b) = (&outer.aabb, &inner.aabb);
    inner.volume <= outer.volume * (1.0 + 1e-9) + 1e-12
        && (0..3).all(|i| a.min[i] <= b.min[i] + 1e-7 && b.max[i] <= a.max[i] + 1e-7)
}

#[derive(Debug, Clone)]
pub struct RoadmapStore {
    nodes: BTreeMap<NodeId, PolyNode>,
    roots: Vec<NodeId>,
    index: SegTree3D,
    radius: f64,
    thresholds: Thresholds,
    obstacles: BTreeMap<ObstacleId, Obstacle>,
    active: BTreeSet<NodeId>,
    next_id: NodeId,
    stats: BuildStats,
}

impl RoadmapStore {
    pub fn new(
        roots: Vec<HPolyhedron>,
        radius: f64,
        thresholds: Thresholds,
        stats: BuildStats,
    ) -> Result<Self, RoadmapError> {
        let mut nodes = BTreeMap::new();
        let mut boxes = Vec::with_capacity(roots.len());
        for (i, shape) in roots.into_iter().enumerate() {
            let m = Measure::of(&shape).ok_or(RoadmapError::BadRoot(i))?;
            let id = i as NodeId;
            let pad = Vec3::repeat(INDEX_PAD);
            boxes.push((id, Aabb::new(m.aabb.min - pad, m.aabb.max + pad)));
            nodes.insert(id, new_node(id, shape, m, None, 0, None, id));
        }
        let index = SegTree3D::build(&boxes)?;
        Ok(RoadmapStore {
            active: nodes.keys().copied().collect(),
            roots: nodes.keys().copied().collect(),
            next_id: nodes.len() as NodeId,
            nodes,
            index,
            radius,
            thresholds,
            obstacles: BTreeMap::new(),
            stats,
        })
    }

    /// Store over hand-made roots, for tests and tools.
    pub fn from_roots(roots: Vec<HPolyhedron>, radius: f64, thresholds: Thresholds) -> Result<Self, RoadmapError> {
        let stats = BuildStats {
            rho: 0.0,
            samples: 0,
            accepted: roots.len(),
            stop: StopReason::Coverage,
        };
        RoadmapStore::new(roots, radius, thresholds, stats)
    }

    pub fn node(&self, id: NodeId) -> Option<&PolyNode> {
        self.nodes.get(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &PolyNode> {
        self.nodes.values()
    }

    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    /// Complete nodes, i.e. the current free-space pieces.
    pub fn active(&self) -> &BTreeSet<NodeId> {
        &self.active
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.thresholds
    }

    pub fn build_stats(&self) -> &BuildStats {
        &self.stats
    }

    pub fn index(&self) -> &SegTree3D {
        &self.index
    }

    pub fn obstacles(&self) -> &BTreeMap<ObstacleId, Obstacle> {
        &self.obstacles
    }

    /// Current inflated boxes of all applied obstacles.
    pub fn inflated_obstacles(&self) -> Vec<(ObstacleId, Obb)> {
        self.obstacles
            .values()
            .filter_map(|o| o.obb.map(|b| (o.id, b.inflate(self.radius))))
            .collect()
    }

    /// Active descendants of `id` (itself if complete), ascending.
    pub fn active_under(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[&n];
            match node.state {
                NodeState::Complete => out.push(n),
                NodeState::Decomposed => stack.extend(node.children.iter().copied()),
            }
        }
        out.sort_unstable();
        out
    }

    /// Roots whose shape overlaps the inflated `obb`.
    pub fn overlapping_nodes(&self, obb: &Obb) -> Vec<NodeId> {
        let inflated = obb.inflate(self.radius);
        let poly = inflated.halfspaces();
        self.index
            .candidates_for_box(&inflated.aabb())
            .into_iter()
            .filter(|id| self.nodes[id].shape.overlaps(&poly))
            .collect()
    }

    /// Lowest-id active node containing `p`.
    pub fn locate(&self, p: &Vec3) -> Option<NodeId> {
        let mut best: Option<NodeId> = None;
        for root in self.index.stab(p) {
            let mut stack = vec![root];
            while let Some(n) = stack.pop() {
                let node = &self.nodes[&n];
                if !node.shape.contains_point(p, LOCATE_TOL) {
                    continue;
                }
                match node.state {
                    NodeState::Complete => best = Some(best.map_or(n, |b| b.min(n))),
                    NodeState::Decomposed => stack.extend(node.children.iter().copied()),
                }
            }
        }
        best
    }

    /// Whether `p` lies in some root, regardless of obstacles.
    pub fn covers(&self, p: &Vec3) -> bool {
        self.index
            .stab(p)
            .iter()
            .any(|r| self.nodes[r].shape.contains_point(p, LOCATE_TOL))
    }

    fn set_pose(&mut self, obstacle: ObstacleId, obb: Option<Obb>) {
        self.obstacles
            .entry(obstacle)
            .or_insert_with(|| Obstacle {
                id: obstacle,
                obb: None,
                splits: BTreeSet::new(),
            })
            .obb = obb;
    }

    /// Splits one complete node by `obstacle` at pose `obb`.
    pub fn decompose_one(&mut self, id: NodeId, obstacle: ObstacleId, obb: &Obb) -> Result<Vec<NodeId>, RoadmapError> {
        let node = self.nodes.get(&id).ok_or(RoadmapError::UnknownNode(id))?;
        if node.state == NodeState::Decomposed {
            return Err(RoadmapError::AlreadyDecomposed(id));
        }
        self.set_pose(obstacle, Some(*obb));
        Ok(self.split_node(id, obstacle, &obb.inflate(self.radius)))
    }

    fn split_node(&mut self, id: NodeId, obstacle: ObstacleId, inflated: &Obb) -> Vec<NodeId> {
        let parent = &self.nodes[&id];
        let (depth, root) = (parent.depth + 1, parent.root);
        let pieces = select_pieces(split_candidates(&parent.shape, inflated), &self.thresholds);
        let mut children = Vec::with_capacity(pieces.len());
        for (face, shape, m) in pieces {
            let cid = self.next_id;
            self.next_id += 1;
            self.nodes.insert(cid, new_node(cid, shape, m, Some(id), depth, Some(face), root));
            self.active.insert(cid);
            children.push(cid);
        }
        let parent = self.nodes.get_mut(&id).expect("node exists");
        parent.state = NodeState::Decomposed;
        parent.children = children.clone();
        parent.split_by = Some(Split {
            obstacle,
            inflated: *inflated,
        });
        self.active.remove(&id);
        self.obstacles
            .get_mut(&obstacle)
            .expect("obstacle registered")
            .splits
            .insert(id);
        children
    }

    /// Applies `obstacle` at pose `obb` below the given nodes.
    pub fn polyhedron_decomposition(&mut self, ids: &[NodeId], obstacle: ObstacleId, obb: &Obb) -> Vec<StoreEvent> {
        self.set_pose(obstacle, Some(*obb));
        let inflated = obb.inflate(self.radius);
        let mut events = Vec::new();
        self.decompose_into(ids, obstacle, &inflated, &mut events);
        events
    }

    fn decompose_into(&mut self, ids: &[NodeId], obstacle: ObstacleId, inflated: &Obb, events: &mut Vec<StoreEvent>) {
        let poly = inflated.halfspaces();
        let bb = inflated.aabb();
        let mut stack: Vec<NodeId> = ids.iter().rev().copied().collect();
        while let Some(id) = stack.pop() {
            let node = &self.nodes[&id];
            if !node.aabb.intersects(&bb) || !node.shape.overlaps(&poly) {
                continue;
            }
            match node.state {
                NodeState::Complete => {
                    let children = self.split_node(id, obstacle, inflated);
                    events.push(StoreEvent::Decomposed { parent: id, children });
                }
                NodeState::Decomposed => stack.extend(node.children.iter().rev().copied()),
            }
        }
    }

    /// Undoes every split made by `obstacle`, then re-applies the other
    /// obstacles to the restored nodes. The obstacle is left unapplied.
    pub fn polyhedron_restoration(&mut self, obstacle: ObstacleId) -> Result<Vec<StoreEvent>, RoadmapError> {
        let o = self
            .obstacles
            .get_mut(&obstacle)
            .ok_or(RoadmapError::UnknownObstacle(obstacle))?;
        o.obb = None;
        let mut split: Vec<NodeId> = std::mem::take(&mut o.splits).into_iter().collect();
        split.sort_by_key(|id| (self.nodes[id].depth, *id));
        let mut events = Vec::new();
        for id in split {
            // may have gone with an ancestor restored earlier in this loop
            if !self.nodes.contains_key(&id) {
                continue;
            }
            let mut removed = Vec::new();
            let children = std::mem::take(&mut self.nodes.get_mut(&id).expect("exists").children);
            for c in children {
                self.remove_subtree(c, &mut removed);
            }
            removed.sort_unstable();
            let node = self.nodes.get_mut(&id).expect("exists");
            node.state = NodeState::Complete;
            node.split_by = None;
            self.active.insert(id);
            events.push(StoreEvent::Restored { node: id, removed });

            let others: Vec<(ObstacleId, Obb)> = self.inflated_obstacles();
            for (other, inflated) in others {
                self.decompose_into(&[id], other, &inflated, &mut events);
            }
        }
        Ok(events)
    }

    fn remove_subtree(&mut self, id: NodeId, removed: &mut Vec<NodeId>) {
        let node = self.nodes.remove(&id).expect("child exists");
        self.active.remove(&id);
        if let Some(s) = node.split_by {
            if let Some(o) = self.obstacles.get_mut(&s.obstacle) {
                o.splits.remove(&id);
            }
        }
        removed.push(id);
        for c in node.children {
            self.remove_subtree(c, removed);
        }
    }

    /// Moves `obstacle` to `new_obb` (`None` removes it from the scene):
    /// restoration at the old pose, then decomposition at the new one.
    pub fn apply_obstacle_motion(&mut self, obstacle: ObstacleId, new_obb: Option<Obb>) -> MotionReport {
        let mut report = MotionReport::default();
        let t0 = Instant::now();
        if self.obstacles.get(&obstacle).is_some_and(|o| o.obb.is_some()) {
            report.events = self
                .polyhedron_restoration(obstacle)
                .expect("obstacle is known");
            report.restored = true;
            report.restoration_events = report.events.len();
        }
        report.t_r = t0.elapsed();
        let t1 = Instant::now();
        if let Some(obb) = new_obb {
            let roots = self.overlapping_nodes(&obb);
            let events = self.polyhedron_decomposition(&roots, obstacle, &obb);
            report.decomposed = !events.is_empty();
            report.events.extend(events);
        } else {
            self.set_pose(obstacle, None);
        }
        report.t_d = t1.elapsed();
        report
    }

    /// Checks the structural invariants; returns the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        let complete: BTreeSet<NodeId> = self
            .nodes
            .values()
            .filter(|n| n.state == NodeState::Complete)
            .map(|n| n.id)
            .collect();
        if complete != self.active {
            return Err("active set differs from complete nodes".into());
        }
        for n in self.nodes.values() {
            if (n.state == NodeState::Decomposed) != n.split_by.is_some() {
                return Err(format!("node {} state/split mismatch", n.id));
            }
            if n.state == NodeState::Complete && !n.children.is_empty() {
                return Err(format!("complete node {} has children", n.id));
            }
            for c in &n.children {
                let child = self.nodes.get(c).ok_or(format!("dangling child {c}"))?;
                if child.parent != Some(n.id) {
                    return Err(format!("child {c} has wrong parent"));
                }
                if !n.shape.contains_polyhedron(&child.shape) {
                    return Err(format!("child {c} escapes parent {}", n.id));
                }
                let s = n.split_by.expect("decomposed");
                if child.shape.overlaps(&s.inflated.halfspaces()) {
                    return Err(format!("child {c} overlaps the box that split {}", n.id));
                }
            }
            if let Some(s) = n.split_by {
                let o = self.obstacles.get(&s.obstacle).ok_or("split by unknown obstacle")?;
                if !o.splits.contains(&n.id) {
                    return Err(format!("obstacle {} does not record split of {}", o.id, n.id));
                }
            }
        }
        for o in self.obstacles.values() {
            for s in &o.splits {
                let n = self.nodes.get(s).ok_or(format!("obstacle {} splits missing node", o.id))?;
                if n.split_by.map(|x| x.obstacle) != Some(o.id) {
                    return Err(format!("obstacle {} split record stale", o.id));
                }
            }
        }
        for (_, b) in self.inflated_obstacles() {
            let poly = b.halfspaces();
            for id in &self.active {
                if self.nodes[id].shape.overlaps(&poly) {
                    return Err(format!("active node {id} overlaps an obstacle"));
                }
            }
        }
        Ok(())
    }
}

fn new_node(
    id: NodeId,
    shape: HPolyhedron,
    m: Measure,
    parent: Option<NodeId>,
    depth: u32,
    face: Option<u8>,
    root: NodeId,
) -> PolyNode {
    PolyNode {
        id,
        shape,
        state: NodeState::Complete,
        children: Vec::new(),
        parent,
        split_by: None,
        depth,
        face,
        root,
        volume: m.volume,
        centroid: m.centroid,
        aabb: m.aabb,
        vertices: m.vertices,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn boxp(lo: [f64; 3], hi: [f64; 3]) -> HPolyhedron {
        Aabb::new(Vec3::from(lo), Vec3::from(hi)).to_polyhedron()
    }

    fn loose() -> Thresholds {
        Thresholds {
            min_radius: 0.01,
            min_volume: 1e-4,
        }
    }

    fn aa(lo: [f64; 3], hi: [f64; 3]) -> Obb {
        let (lo, hi) = (Vec3::from(lo), Vec3::from(hi));
        Obb::axis_aligned((lo + hi) * 0.5, (hi - lo) * 0.5)
    }

    fn active_shapes(s: &RoadmapStore) -> Vec<Vec<[u64; 4]>> {
        let mut v: Vec<Vec<[u64; 4]>> = s
            .active()
            .iter()
            .map(|id| {
                let mut rows: Vec<[u64; 4]> = s.node(*id).unwrap().shape.halfspaces().iter()
                    .map(|h| [h.normal.x.to_bits(), h.normal.y.to_bits(), h.normal.z.to_bits(), h.offset.to_bits()])
                    .collect();
                rows.sort_unstable();
                rows
            })
            .collect();
        v.sort();
        v
    }

    #[test]
    fn six_slabs_around_central_box() {
        let mut s = RoadmapStore::from_roots(vec![boxp([0.0; 3], [1.0; 3])], 0.0, loose()).unwrap();
        let kids = s.decompose_one(0, 1, &aa([0.4; 3], [0.6; 3])).unwrap();
        assert_eq!(kids.len(), 6);
        for k in &kids {
            assert!((s.node(*k).unwrap().volume - 0.4).abs() < 1e-9);
        }
        assert_eq!(s.decompose_one(0, 1, &aa([0.4; 3], [0.6; 3])), Err(RoadmapError::AlreadyDecomposed(0)));
        s.check_invariants().unwrap();
    }

    #[test]
    fn radius_inflates_split_box() {
        let mut s = RoadmapStore::from_roots(vec![boxp([0.0; 3], [1.0; 3])], 0.05, loose()).unwrap();
        let kids = s.decompose_one(0, 1, &aa([0.45; 3], [0.55; 3])).unwrap();
        assert_eq!(kids.len(), 6);
        assert!((s.node(kids[0]).unwrap().volume - 0.4).abs() < 1e-9);
    }

    #[test]
    fn contained_pieces_dropped() {
        let mut s = RoadmapStore::from_roots(vec![boxp([0.0; 3], [1.0; 3])], 0.0, loose()).unwrap();
        // corner box turned 45°: the two side pieces lie inside the diagonal one
        let obb = Obb::from_yaw(Vec3::new(1.0, 1.0, 0.5), FRAC_PI_4, Vec3::new(0.2, 0.3, 2.0));
        let all = split_candidates(&s.node(0).unwrap().shape, &obb);
        assert_eq!(all.iter().filter(|p| !p.is_empty()).count(), 3);
        let kids = s.decompose_one(0, 1, &obb).unwrap();
        assert_eq!(kids.len(), 1);
        assert_eq!(s.node(kids[0]).unwrap().face, Some(1));
        s.check_invariants().unwrap();
    }

    #[test]
    fn fully_covered_parent_has_no_children() {
        let mut s = RoadmapStore::from_roots(vec![boxp([0.0; 3], [1.0; 3])], 0.0, loose()).unwrap();
        assert!(s.decompose_one(0, 1, &aa([-1.0; 3], [2.0; 3])).unwrap().is_empty());
        assert!(s.active().is_empty());
        assert_eq!(s.locate(&Vec3::repeat(0.5)), None);
        assert!(s.covers(&Vec3::repeat(0.5)));
    }

    fn nested() -> RoadmapStore {
        let mut s = RoadmapStore::from_roots(vec![boxp([0.0; 3], [4.0, 1.0, 1.0])], 0.0, loose()).unwrap();
        // wall at x=1 splits the root; a small box near x=3 then splits the +x piece
        s.apply_obstacle_motion(1, Some(aa([0.9, -1.0, -1.0], [1.1, 2.0, 2.0])));
        s.apply_obstacle_motion(2, Some(aa([2.9, 0.4, 0.4], [3.1, 0.6, 0.6])));
        s
    }

    #[test]
    fn second_obstacle_splits_only_touched_child() {
        let s = nested();
        let root = s.node(0).unwrap();
        assert_eq!(root.children.len(), 2);
        let depth2: Vec<&PolyNode> = s.nodes().filter(|n| n.depth == 2).collect();
        assert_eq!(depth2.len(), 6);
        assert!(depth2.iter().all(|n| n.parent == Some(root.children[0])));
        s.check_invariants().unwrap();
    }

    #[test]
    fn restoring_outer_obstacle_resplits_by_inner() {
        let mut s = nested();
        let events = s.polyhedron_restoration(1).unwrap();
        assert!(matches!(events[0], StoreEvent::Restored { node: 0, .. }));
        let root = s.node(0).unwrap();
        assert_eq!(root.split_by.unwrap().obstacle, 2);
        assert_eq!(root.children.len(), 6);
        assert!(s.nodes().all(|n| n.depth <= 1));
        s.check_invariants().unwrap();
    }

    #[test]
    fn round_trip_restores_exactly() {
        let mut s = RoadmapStore::from_roots(
            vec![boxp([0.0; 3], [2.0; 3]), boxp([1.5, 0.0, 0.0], [4.0, 2.0, 2.0])],
            0.1,
            loose(),
        )
        .unwrap();
        let before = active_shapes(&s);
        let obb = Obb::from_yaw(Vec3::new(1.7, 1.0, 1.0), 0.4, Vec3::new(0.3, 0.2, 0.5));
        let r = s.apply_obstacle_motion(7, Some(obb));
        assert_eq!(r.split_count(), 2);
        assert_ne!(active_shapes(&s), before);
        s.polyhedron_restoration(7).unwrap();
        assert_eq!(active_shapes(&s), before);
        assert_eq!(s.active().iter().copied().collect::<Vec<_>>(), vec![0, 1]);
        s.check_invariants().unwrap();
        assert_eq!(s.polyhedron_restoration(99), Err(RoadmapError::UnknownObstacle(99)));
    }

    #[test]
    fn overlapping_nodes_examples() {
        let s = RoadmapStore::from_roots(
            vec![boxp([0.0; 3], [2.0; 3]), boxp([1.5, 0.0, 0.0], [4.0, 2.0, 2.0])],
            0.1,
            loose(),
        )
        .unwrap();
        assert!(s.overlapping_nodes(&aa([10.0; 3], [11.0; 3])).is_empty());
        assert_eq!(s.overlapping_nodes(&aa([0.5; 3], [0.7; 3])), vec![0]);
        assert_eq!(s.overlapping_nodes(&aa([1.6, 0.5, 0.5], [1.8, 0.7, 0.7])), vec![0, 1]);
    }

    #[test]
    fn stationary_motion_keeps_geometry() {
        let mut s = nested();
        let before = active_shapes(&s);
        let obb = s.obstacles()[&2].obb;
        s.apply_obstacle_motion(2, obb);
        assert_eq!(active_shapes(&s), before);
        let r = s.apply_obstacle_motion(2, None);
        assert!(r.restored && !r.decomposed);
        s.check_invariants().unwrap();
    }

    #[test]
    fn locate_prefers_lowest_id() {
        let s = RoadmapStore::from_roots(
            vec![boxp([0.0; 3], [2.0; 3]), boxp([1.5, 0.0, 0.0], [4.0, 2.0, 2.0])],
            0.1,
            loose(),
        )
        .unwrap();
        assert_eq!(s.locate(&Vec3::new(1.7, 1.0, 1.0)), Some(0));
        assert_eq!(s.locate(&Vec3::new(3.0, 1.0, 1.0)), Some(1));
        assert_eq!(s.locate(&Vec3::new(5.0, 1.0, 1.0)), None);
    }
}
