//! Turn-based grid-world engine for societies of generative agents.
//!
//! The crate is `no_std` (it needs `alloc`) and does no IO. Everything that
//! touches files, sockets or clocks lives in the `gridsoc-sim` companion crate.
//!
//! Layout:
//! - [`world`]: textures, cells, regions, objects and the map document schema.
//! - [`engine`]: rounds, pathfinding, line of sight, action resolution, run log.
//! - [`agent`]: VAD affect scoring, goals, the three memory tiers.
//! - [`decision`]: action grammar, decision requests, backends (mock, canned).
//! - [`events`]: scheduled and triggered events, chain resolution.
//! - [`population`]: roster sampling and demographic census.
//! - [`analytics`]: questionnaires, mood, heatmap and engagement measures.
//! - [`session`]: scenarios, human control, run control and replay.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod agent;
pub mod analytics;
pub mod decision;
pub mod digest;
pub mod engine;
pub mod events;
pub mod geom;
pub mod ids;
pub mod population;
pub mod rng;
pub mod session;
pub mod text;
pub mod world;

pub use geom::Coord;
pub use ids::{AgentId, ObjectId};
