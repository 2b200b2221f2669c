//! Dynamic free-space roadmap.
//!
//! An occupancy grid is covered by overlapping convex polyhedra; moving
//! oriented-box obstacles split those polyhedra into obstacle-free children
//! and are later undone, while a rooms-and-doors navigation graph over the
//! active polyhedra is kept in sync for A* queries.

pub mod geom;
pub mod graph;
pub mod grid;
pub mod lp;
pub mod polyhedronize;
pub mod region;
pub mod roadmap;
pub mod sim;
pub mod spatial;
