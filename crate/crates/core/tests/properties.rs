mod common;

use common::*;
use polyroad::geom::{Aabb, Obb, Vec3, DEGENERATE_RADIUS};
use polyroad::graph::build_graph;
use polyroad::roadmap::{select_pieces, split_candidates, RoadmapStore};
use polyroad::sim::{ObstacleScript, PoseKey};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn vec3(lo: f64, hi: f64) -> impl Strategy<Value = Vec3> {
    (lo..hi, lo..hi, lo..hi).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn obb() -> impl Strategy<Value = Obb> {
    (vec3(-0.5, 3.5), vec3(0.1, 1.0), -3.0..3.0f64).prop_map(|(c, h, yaw)| Obb::from_yaw(c, yaw, h))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pieces_lie_in_parent_and_avoid_the_box(ext in vec3(1.0, 4.0), b in obb()) {
        let parent = Aabb::new(Vec3::zeros(), ext).to_polyhedron();
        let inflated = b.inflate(RADIUS);
        let hb = inflated.halfspaces();
        for (_, piece, m) in select_pieces(split_candidates(&parent, &inflated), &thresholds()) {
            prop_assert!(parent.contains_polyhedron(&piece));
            prop_assert!(piece.intersection_chebyshev(&hb).is_none_or(|c| c.radius < DEGENERATE_RADIUS));
            prop_assert!(m.volume >= thresholds().min_volume);
            prop_assert!(piece.inradius() >= RADIUS);
        }
    }

    #[test]
    fn motion_keeps_store_consistent(seed in 0u64..1000, moves in prop::collection::vec(prop::option::of(obb()), 1..6)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = lattice_store(&mut rng, [2, 2, 1]);
        let initial = active_key(&store);
        let mut graph = build_graph(&store, RADIUS);
        for (k, m) in moves.iter().enumerate() {
            let r = store.apply_obstacle_motion(1 + (k % 2) as u32, *m);
            graph.apply_events(&store, &r.events);
            prop_assert_eq!(store.check_invariants(), Ok(()));
            for n in store.nodes() {
                if let Some(p) = n.parent {
                    prop_assert!(store.node(p).unwrap().shape.contains_polyhedron(&n.shape));
                }
            }
        }
        prop_assert!(graph.diff(&build_graph(&store, RADIUS), 1e-6).is_none());
        store.apply_obstacle_motion(1, None);
        store.apply_obstacle_motion(2, None);
        prop_assert_eq!(active_key(&store), initial);
    }

    #[test]
    fn pose_hits_keys_and_stays_between(t in -1.0..5.0f64, yaw in -3.0..3.0f64) {
        let s = ObstacleScript {
            id: 1,
            half_extents: Vec3::repeat(0.3),
            waypoints: vec![
                PoseKey { t: 0.0, center: Vec3::zeros(), yaw: 0.0 },
                PoseKey { t: 4.0, center: Vec3::new(4.0, 0.0, 0.0), yaw },
            ],
        };
        let p = s.pose_at(t);
        let expect = t.clamp(0.0, 4.0);
        prop_assert!((p.center.x - expect).abs() < 1e-12);
        prop_assert!((p.rotation.determinant() - 1.0).abs() < 1e-9);
        let at_end = s.pose_at(4.0).rotation;
        prop_assert!((at_end - Obb::from_yaw(Vec3::zeros(), yaw, Vec3::repeat(0.3)).rotation).norm() < 1e-9);
    }
}

#[test]
fn store_rejects_degenerate_root() {
    let flat = Aabb::new(Vec3::zeros(), Vec3::new(1.0, 1.0, 0.0)).to_polyhedron();
    assert!(RoadmapStore::from_roots(vec![flat], RADIUS, thresholds()).is_err());
}
