//! Multi-level segment tree over axis-aligned boxes.
//!
//! The first level is a segment tree over the x endpoints. Each node's
//! canonical subset gets its own segment tree over y, whose nodes in turn
//! hold a segment tree over z. A point stab walks one root-to-leaf path per
//! level, `O(log³ n + k)`.
//!
//! Every tree works on elementary leaves `[e0], (e0,e1), [e1], …, [ek]` of
//! its sorted endpoint list, so all intervals are closed.

use crate::geom::{Aabb, Vec3};
use std::collections::BTreeSet;
use thiserror::Error;

pub type BoxId = u32;

const NONE: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpatialError {
    #[error("duplicate box id {0}")]
    DuplicateId(BoxId),
}

#[derive(Debug, Clone)]
struct Node {
    lo: u32,
    hi: u32,
    left: u32,
    right: u32,
    items: Vec<u32>,
    sub: Option<Box<AxisTree>>,
}

#[derive(Debug, Clone)]
struct AxisTree {
    axis: usize,
    keys: Vec<f64>,
    nodes: Vec<Node>,
}

impl AxisTree {
    fn build(axis: usize, items: &[u32], boxes: &[(BoxId, Aabb)]) -> AxisTree {
        let mut keys: Vec<f64> = items
            .iter()
            .flat_map(|&i| [boxes[i as usize].1.min[axis], boxes[i as usize].1.max[axis]])
            .collect();
        keys.sort_by(f64::total_cmp);
        keys.dedup();
        let leaves = 2 * keys.len() as u32 - 1;
        let mut tree = AxisTree {
            axis,
            keys,
            nodes: Vec::with_capacity(2 * leaves as usize),
        };
        tree.make_node(0, leaves - 1);
        for &i in items {
            let b = &boxes[i as usize].1;
            let lo = 2 * tree.key_pos(b.min[axis]);
            let hi = 2 * tree.key_pos(b.max[axis]);
            tree.insert(0, lo, hi, i);
        }
        if axis < 2 {
            for n in 0..tree.nodes.len() {
                if !tree.nodes[n].items.is_empty() {
                    let sub = AxisTree::build(axis + 1, &tree.nodes[n].items, boxes);
                    tree.nodes[n].sub = Some(Box::new(sub));
                    tree.nodes[n].items = Vec::new();
                }
            }
        }
        tree
    }

    fn make_node(&mut self, lo: u32, hi: u32) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            lo,
            hi,
            left: NONE,
            right: NONE,
            items: Vec::new(),
            sub: None,
        });
        if lo < hi {
            let mid = lo + (hi - lo) / 2;
            let l = self.make_node(lo, mid);
            let r = self.make_node(mid + 1, hi);
            self.nodes[id as usize].left = l;
            self.nodes[id as usize].right = r;
        }
        id
    }

    fn key_pos(&self, v: f64) -> u32 {
        self.keys
            .binary_search_by(|k| k.total_cmp(&v))
            .expect("endpoint is a key") as u32
    }

    fn insert(&mut self, n: u32, lo: u32, hi: u32, item: u32) {
        let node = &self.nodes[n as usize];
        if hi < node.lo || node.hi < lo {
            return;
        }
        if lo <= node.lo && node.hi <= hi {
            self.nodes[n as usize].items.push(item);
            return;
        }
        let (l, r) = (node.left, node.right);
        self.insert(l, lo, hi, item);
        self.insert(r, lo, hi, item);
    }

    /// Elementary leaf holding `v`.
    fn leaf_of(&self, v: f64) -> Option<u32> {
        let k = &self.keys;
        if v < k[0] || v > k[k.len() - 1] || v.is_nan() {
            return None;
        }
        match k.binary_search_by(|x| x.total_cmp(&v)) {
            Ok(i) => Some(2 * i as u32),
            Err(i) => Some(2 * i as u32 - 1),
        }
    }

    /// Leaf range overlapping the closed interval `[lo, hi]`.
    fn leaf_range(&self, lo: f64, hi: f64) -> Option<(u32, u32)> {
        let k = &self.keys;
        let last = k.len() - 1;
        if hi < k[0] || lo > k[last] || lo > hi {
            return None;
        }
        let first = if lo <= k[0] {
            0
        } else {
            match k.binary_search_by(|x| x.total_cmp(&lo)) {
                Ok(i) => 2 * i as u32,
                Err(i) => 2 * i as u32 - 1,
            }
        };
        let end = if hi >= k[last] {
            2 * last as u32
        } else {
            match k.binary_search_by(|x| x.total_cmp(&hi)) {
                Ok(i) => 2 * i as u32,
                Err(i) => 2 * i as u32 - 1,
            }
        };
        (first <= end).then_some((first, end))
    }

    fn stab(&self, p: &Vec3, out: &mut Vec<u32>, visits: &mut usize) {
        let Some(leaf) = self.leaf_of(p[self.axis]) else {
            return;
        };
        let mut n = 0u32;
        loop {
            *visits += 1;
            let node = &self.nodes[n as usize];
            if let Some(sub) = &node.sub {
                sub.stab(p, out, visits);
            }
            out.extend_from_slice(&node.items);
            if node.left == NONE {
                break;
            }
            n = if leaf <= self.nodes[node.left as usize].hi {
                node.left
            } else {
                node.right
            };
        }
    }

    fn overlap(&self, q: &Aabb, out: &mut Vec<u32>) {
        let Some((lo, hi)) = self.leaf_range(q.min[self.axis], q.max[self.axis]) else {
            return;
        };
        let mut stack = vec![0u32];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if hi < node.lo || node.hi < lo {
                continue;
            }
            if let Some(sub) = &node.sub {
                sub.overlap(q, out);
            }
            out.extend_from_slice(&node.items);
            if node.left != NONE {
                stack.push(node.left);
                stack.push(node.right);
            }
        }
    }

    fn entries(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| n.items.len() + n.sub.as_ref().map_or(0, |s| s.entries()))
            .sum()
    }
}

/// Static stabbing index over `(id, box)` pairs.
#[derive(Debug, Clone)]
pub struct SegTree3D {
    boxes: Vec<(BoxId, Aabb)>,
    root: Option<AxisTree>,
}

impl Default for SegTree3D {
    fn default() -> Self {
        SegTree3D {
            boxes: Vec::new(),
            root: None,
        }
    }
}

impl SegTree3D {
    pub fn build(boxes: &[(BoxId, Aabb)]) -> Result<Self, SpatialError> {
        let mut seen = BTreeSet::new();
        for (id, _) in boxes {
            if !seen.insert(*id) {
                return Err(SpatialError::DuplicateId(*id));
            }
        }
        let items: Vec<u32> = (0..boxes.len() as u32).collect();
        let root = (!boxes.is_empty()).then(|| AxisTree::build(0, &items, boxes));
        Ok(SegTree3D {
            boxes: boxes.to_vec(),
            root,
        })
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn boxes(&self) -> &[(BoxId, Aabb)] {
        &self.boxes
    }

    /// Ids of all boxes containing `p`, sorted.
    pub fn stab(&self, p: &Vec3) -> Vec<BoxId> {
        self.stab_counted(p).0
    }

    /// Like [`SegTree3D::stab`], also returning the number of tree nodes
    /// visited.
    pub fn stab_counted(&self, p: &Vec3) -> (Vec<BoxId>, usize) {
        let mut hits = Vec::new();
        let mut visits = 0;
        if let Some(root) = &self.root {
            root.stab(p, &mut hits, &mut visits);
        }
        let mut ids: Vec<BoxId> = hits.iter().map(|&i| self.boxes[i as usize].0).collect();
        ids.sort_unstable();
        (ids, visits)
    }

    /// Ids of all boxes intersecting `b` (closed), sorted and unique.
    pub fn candidates_for_box(&self, b: &Aabb) -> Vec<BoxId> {
        let mut hits = Vec::new();
        if let Some(root) = &self.root {
            root.overlap(b, &mut hits);
        }
        let mut ids: Vec<BoxId> = hits.iter().map(|&i| self.boxes[i as usize].0).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Number of stored id references across all levels.
    pub fn stored_entries(&self) -> usize {
        self.root.as_ref().map_or(0, |r| r.entries())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(lo: f64, hi: f64) -> Aabb {
        Aabb::new(Vec3::repeat(lo), Vec3::repeat(hi))
    }

    #[test]
    fn empty_index() {
        let t = SegTree3D::build(&[]).unwrap();
        assert!(t.stab(&Vec3::zeros()).is_empty());
        assert!(t.candidates_for_box(&bx(-1.0, 1.0)).is_empty());
    }

    #[test]
    fn stab_examples() {
        let t = SegTree3D::build(&[(7, bx(0.0, 2.0)), (9, bx(1.0, 3.0))]).unwrap();
        assert_eq!(t.stab(&Vec3::repeat(1.5)), vec![7, 9]);
        assert_eq!(t.stab(&Vec3::repeat(2.5)), vec![9]);
        assert!(t.stab(&Vec3::repeat(5.0)).is_empty());
        // closed faces
        assert_eq!(t.stab(&Vec3::repeat(2.0)), vec![7, 9]);
        assert_eq!(t.stab(&Vec3::new(0.0, 1.0, 2.0)), vec![7]);
    }

    #[test]
    fn identical_boxes_distinct_ids() {
        let t = SegTree3D::build(&[(1, bx(0.0, 1.0)), (2, bx(0.0, 1.0))]).unwrap();
        assert_eq!(t.stab(&Vec3::repeat(0.5)), vec![1, 2]);
    }

    #[test]
    fn duplicate_id_rejected() {
        let r = SegTree3D::build(&[(1, bx(0.0, 1.0)), (1, bx(2.0, 3.0))]);
        assert_eq!(r.unwrap_err(), SpatialError::DuplicateId(1));
    }

    #[test]
    fn box_query_examples() {
        let t = SegTree3D::build(&[(1, bx(0.0, 1.0)), (2, bx(2.0, 3.0))]).unwrap();
        assert!(t.candidates_for_box(&bx(5.0, 6.0)).is_empty());
        assert_eq!(t.candidates_for_box(&bx(2.0, 3.0)), vec![2]);
        assert_eq!(t.candidates_for_box(&bx(1.0, 2.0)), vec![1, 2]);
        assert_eq!(t.candidates_for_box(&bx(1.2, 1.8)), Vec::<u32>::new());
    }

    fn random_boxes(n: usize, rng: &mut impl rand::Rng) -> Vec<(BoxId, Aabb)> {
        (0..n as u32)
            .map(|id| {
                let lo = Vec3::from_fn(|_, _| rng.random_range(0.0..10.0));
                let ext = Vec3::from_fn(|_, _| rng.random_range(0.1..3.0));
                (id * 3 + 1, Aabb::new(lo, lo + ext))
            })
            .collect()
    }

    #[test]
    fn matches_linear_scan() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let boxes = random_boxes(500, &mut rng);
        let t = SegTree3D::build(&boxes).unwrap();
        for (id, b) in &boxes {
            assert!(t.stab(&b.center()).contains(id));
        }
        for _ in 0..300 {
            let p = Vec3::from_fn(|_, _| rng.random_range(-1.0..13.0));
            let want: Vec<BoxId> = boxes.iter().filter(|(_, b)| b.contains(&p)).map(|(i, _)| *i).collect();
            assert_eq!(t.stab(&p), want);
            let lo = Vec3::from_fn(|_, _| rng.random_range(-1.0..12.0));
            let q = Aabb::new(lo, lo + Vec3::from_fn(|_, _| rng.random_range(0.0..2.0)));
            let want: Vec<BoxId> = boxes.iter().filter(|(_, b)| b.intersects(&q)).map(|(i, _)| *i).collect();
            assert_eq!(t.candidates_for_box(&q), want);
        }
        assert!(t.stored_entries() >= boxes.len());
    }
}
