//! Multi-robot exploration of lava tubes by a swarm of hopping robots.
//!
//! The crate is `no_std` (it needs `alloc`) and free of IO: a tube world with
//! circular obstacles, fuel-optimal ballistic hops, an RF relay model with
//! minimum-delay routing, chained relative localization, a frontier hop
//! planner with base-connected and detached-swarm modes, and a seeded
//! timestep engine with Monte Carlo aggregation.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod math;

pub mod ballistics;
pub mod comms;
pub mod engine;
pub mod geometry;
pub mod localization;
pub mod planner;
pub mod world;

pub use engine::{init_simulation, monte_carlo, run, SimConfig, SimState, TrialResult};
pub use geometry::Point;
pub use localization::Pose;
pub use planner::{Mode, PlannerParams};
pub use world::{Environment, EnvironmentSpec, Obstacle};
