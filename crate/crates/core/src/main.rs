use clap::{Parser, Subcommand};
use polyroad::geom::Vec3;
use polyroad::graph::{astar, build_graph};
use polyroad::grid::GridMap;
use polyroad::polyhedronize::{build, BuildConfig};
use polyroad::roadmap::RoadmapStore;
use polyroad::sim::{self, RoadmapFile, Scenario};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "polyroad", version, about = "Convex free-space roadmaps under moving obstacles")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Cover a grid map with convex polyhedra and save the roadmap.
    Build {
        #[arg(long)]
        map: PathBuf,
        /// Target coverage ratio.
        #[arg(long, default_value_t = 0.85)]
        rho: f64,
        #[arg(long, default_value_t = 5000)]
        max_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Robot radius in meters.
        #[arg(long, default_value_t = 0.2)]
        radius: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay a scenario on a roadmap.
    Sim {
        #[arg(long)]
        roadmap: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        /// Metrics CSV output.
        #[arg(long)]
        metrics: PathBuf,
        /// Directory for the snapshots requested by the scenario.
        #[arg(long)]
        snapshots: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Find a path between two points.
    Plan {
        #[arg(long)]
        roadmap: PathBuf,
        #[arg(long, value_parser = parse_point)]
        start: Vec3,
        #[arg(long, value_parser = parse_point)]
        goal: Vec3,
        /// Apply this scenario's obstacles first, at time `--time`.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        time: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_point(s: &str) -> Result<Vec3, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [x, y, z] => Ok(Vec3::new(x, y, z)),
        _ => Err(format!("expected x,y,z, got {s:?}")),
    }
}

type Res<T> = Result<T, Box<dyn std::error::Error>>;

fn cmd_build(map_path: &Path, cfg: BuildConfig, out: &Path) -> Res<()> {
    let map = GridMap::load(map_path).map_err(|e| format!("{}: {e}", map_path.display()))?;
    let cfg = BuildConfig {
        thresholds: polyroad::polyhedronize::Thresholds::new(cfg.robot_radius, map.resolution()),
        ..cfg
    };
    let store = build(&map, &cfg)?;
    let s = store.build_stats();
    let file = RoadmapFile::from_store(&store, &map_path.display().to_string(), &cfg);
    file.save(out)?;
    println!(
        "{} roots, rho {:.4} after {} samples (stopped: {:?})",
        s.accepted, s.rho, s.samples, s.stop
    );
    if s.rho < cfg.rho_e {
        println!("target rho {} not reached", cfg.rho_e);
    }
    Ok(())
}

fn cmd_sim(roadmap: &Path, scenario: &Path, metrics: &Path, snapshots: Option<&Path>, seed: u64) -> Res<()> {
    let (sim, out) = sim::run_files(roadmap, scenario, seed)?;
    std::fs::write(metrics, sim.metrics.to_csv()).map_err(|e| format!("{}: {e}", metrics.display()))?;
    if let Some(dir) = snapshots {
        std::fs::create_dir_all(dir)?;
        for s in &sim.snapshots {
            s.save(&dir.join(format!("tick_{:06}.json", s.tick)))?;
        }
    }
    print!("{}", sim.metrics.summary_table());
    println!(
        "ticks {}  replans {}  reached {}  final ({:.3}, {:.3}, {:.3})  unsafe ticks {}",
        out.ticks,
        sim.replans.len(),
        out.reached,
        out.final_position.x,
        out.final_position.y,
        out.final_position.z,
        out.violations.len()
    );
    Ok(())
}

fn cmd_plan(roadmap: &Path, start: Vec3, goal: Vec3, scenario: Option<&Path>, time: f64, seed: u64) -> Res<bool> {
    let mut store = RoadmapFile::load(roadmap)?.to_store()?;
    if let Some(p) = scenario {
        let sc = Scenario::load(p)?;
        sim::apply_scenario_at(&mut store, &sc, seed, time)?;
    }
    let where_ = |store: &RoadmapStore, p: &Vec3, what: &str| match store.locate(p) {
        Some(id) => Ok(id),
        None if store.covers(p) => Err(format!("{what} is blocked by an obstacle")),
        None => Err(format!("{what} is not covered by the roadmap")),
    };
    let (a, b) = match (where_(&store, &start, "start"), where_(&store, &goal, "goal")) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            println!("{e}");
            return Ok(false);
        }
    };
    let graph = build_graph(&store, store.radius());
    match astar(&graph, a, start, b, goal) {
        Some(path) => {
            println!("polyhedra: {:?}", path.rooms);
            for r in sim::path_records(&path) {
                println!("  {:>6}  {:.4} {:.4} {:.4}", r.polyhedron, r.point.x, r.point.y, r.point.z);
            }
            println!("length {:.4}", path.length());
            Ok(true)
        }
        None => {
            println!("unreachable");
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    sim::configure_threads();
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Build {
            map,
            rho,
            max_samples,
            seed,
            radius,
            out,
        } => {
            let cfg = BuildConfig {
                rho_e: rho,
                max_samples,
                rng_seed: seed,
                ..BuildConfig::new(radius, 0.2)
            };
            cmd_build(&map, cfg, &out).map(|_| true)
        }
        Cmd::Sim {
            roadmap,
            scenario,
            metrics,
            snapshots,
            seed,
        } => cmd_sim(&roadmap, &scenario, &metrics, snapshots.as_deref(), seed).map(|_| true),
        Cmd::Plan {
            roadmap,
            start,
            goal,
            scenario,
            time,
            seed,
        } => cmd_plan(&roadmap, start, goal, scenario.as_deref(), time, seed),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
