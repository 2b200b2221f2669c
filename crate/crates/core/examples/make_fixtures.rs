//! Regenerates the maps and scenarios under `fixtures/`.
//!
//! cargo run --release --example make_fixtures

use polyroad::geom::{Aabb, Vec3};
use polyroad::grid::GridMap;
use polyroad::sim::{ObstacleScript, PoseKey, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;

const RES: f64 = 0.2;

fn dims(size: [f64; 3]) -> [usize; 3] {
    size.map(|s| (s / RES).round() as usize)
}

fn boxes_map(size: [f64; 3], blocks: &[Aabb]) -> GridMap {
    GridMap::from_fn(Vec3::zeros(), RES, dims(size), |c| blocks.iter().any(|b| b.contains(&c))).unwrap()
}

fn aabb(lo: [f64; 3], hi: [f64; 3]) -> Aabb {
    Aabb::new(Vec3::from(lo), Vec3::from(hi))
}

/// Random columns, keeping the given points clear.
fn columns(rng: &mut ChaCha8Rng, n: usize, size: [f64; 3], side: (f64, f64), keep: &[Vec3]) -> Vec<Aabb> {
    let mut out = Vec::new();
    while out.len() < n {
        let w = rng.random_range(side.0..side.1);
        let d = rng.random_range(side.0..side.1);
        let x = (rng.random_range(0.0..size[0] - w) / RES).round() * RES;
        let y = (rng.random_range(0.0..size[1] - d) / RES).round() * RES;
        let h = if rng.random_bool(0.7) { size[2] } else { rng.random_range(0.4..0.8) * size[2] };
        let b = aabb([x, y, 0.0], [x + w, y + d, h]);
        let margin = Vec3::repeat(1.0);
        if keep.iter().any(|p| Aabb::new(b.min - margin, b.max + margin).contains(p)) {
            continue;
        }
        out.push(b);
    }
    out
}

fn key(t: f64, c: [f64; 3], yaw: f64) -> PoseKey {
    PoseKey { t, center: Vec3::from(c), yaw }
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    std::fs::create_dir_all(&dir).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    // 10 × 10 × 2 m with a few pillars
    let sample = [10.0, 10.0, 2.0];
    let pillars = columns(&mut rng, 6, sample, (0.4, 1.0), &[Vec3::new(1.0, 1.0, 1.0), Vec3::new(9.0, 9.0, 1.0)]);
    boxes_map(sample, &pillars).save(dir.join("sample.grid")).unwrap();

    // two chambers separated by a wall with one opening
    let two = [10.0, 5.0, 2.0];
    let wall = [aabb([4.8, 0.0, 0.0], [5.2, 2.0, 2.0]), aabb([4.8, 3.2, 0.0], [5.2, 5.0, 2.0])];
    boxes_map(two, &wall).save(dir.join("two_chamber.grid")).unwrap();

    // sparse: 20 × 20 × 4 m, a handful of blocks
    let sparse = [20.0, 20.0, 4.0];
    let blocks = columns(&mut rng, 8, sparse, (0.6, 1.6), &[]);
    boxes_map(sparse, &blocks).save(dir.join("sparse.grid")).unwrap();

    // cluster: 25 × 25 × 5 m, dense columns
    let cluster = [25.0, 25.0, 5.0];
    let start = Vec3::new(1.5, 1.5, 1.5);
    let goal = Vec3::new(23.5, 23.5, 1.5);
    let cols = columns(&mut rng, 80, cluster, (0.4, 1.2), &[start, goal]);
    boxes_map(cluster, &cols).save(dir.join("cluster.grid")).unwrap();

    let he = Vec3::new(0.3, 0.3, 0.4);
    let two_sc = Scenario {
        schema: 1,
        map: "two_chamber.grid".into(),
        robot_radius: 0.2,
        start: Vec3::new(1.0, 2.5, 1.0),
        goal: Vec3::new(9.0, 2.5, 1.0),
        dt: 0.1,
        replan_window: 0.2,
        max_velocity: 1.0,
        duration: 60.0,
        snapshot_ticks: vec![0, 20, 40],
        obstacles: vec![ObstacleScript {
            id: 1,
            half_extents: he,
            // crosses the corridor in the right chamber before the robot gets there
            waypoints: vec![key(0.0, [7.0, 0.5, 1.0], 0.0), key(3.0, [7.0, 4.5, 1.0], 0.5), key(6.0, [7.0, 0.5, 1.0], 0.0)],
        }],
        random_obstacles: None,
    };
    two_sc.save(&dir.join("two_chamber.json")).unwrap();

    let cl = Scenario {
        schema: 1,
        map: "cluster.grid".into(),
        robot_radius: 0.2,
        start,
        goal,
        dt: 0.1,
        replan_window: 0.2,
        max_velocity: 1.0,
        duration: 120.0,
        snapshot_ticks: vec![0, 50, 100, 150],
        obstacles: vec![
            ObstacleScript {
                id: 1,
                half_extents: he,
                waypoints: vec![key(0.0, [8.0, 3.0, 1.5], 0.0), key(4.0, [3.0, 8.0, 1.5], 1.0), key(8.0, [8.0, 3.0, 1.5], 0.0)],
            },
            ObstacleScript {
                id: 2,
                half_extents: he,
                waypoints: vec![key(0.0, [15.0, 9.0, 1.5], 0.0), key(6.0, [9.0, 15.0, 1.5], 2.0), key(12.0, [15.0, 9.0, 1.5], 0.0)],
            },
            ObstacleScript {
                id: 3,
                half_extents: he,
                waypoints: vec![key(0.0, [20.0, 13.0, 1.5], 0.0), key(8.0, [13.0, 20.0, 1.5], -1.0), key(16.0, [20.0, 13.0, 1.5], 0.0)],
            },
            ObstacleScript {
                id: 4,
                half_extents: he,
                waypoints: vec![key(0.0, [3.0, 20.0, 3.5], 0.0), key(10.0, [20.0, 3.0, 3.5], 1.5), key(20.0, [3.0, 20.0, 3.5], 0.0)],
            },
        ],
        random_obstacles: None,
    };
    cl.save(&dir.join("cluster.json")).unwrap();
    println!("fixtures written to {}", dir.display());
}
