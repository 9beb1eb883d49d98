//! Deterministic two-dimensional multi-agent particle world.
//!
//! A [`World`] is a plain value and [`Environment::step`] maps an old world
//! and a joint action to a new world, so any state can be snapshotted by
//! cloning it. Scenarios plug in through the [`Scenario`] trait and are looked
//! up by string id in a [`ScenarioRegistry`].

mod env;
mod error;
mod physics;
mod registry;
mod scenario;
pub mod scenarios;
mod trajectory;
mod vec2;
mod world;

pub use env::{Environment, StepResult};
pub use error::{EnvError, Result};
pub use physics::{integrate, PhysicsParams};
pub use registry::{ScenarioRegistry, RESERVED_SCENARIOS};
pub use scenario::{place_without_overlap, AgentSpec, Scenario, Team};
pub use trajectory::TrajectoryRecorder;
pub use vec2::Vec2;
pub use world::{AgentAction, Entity, JointAction, World};

/// Episode length used unless a run overrides it.
pub const DEFAULT_HORIZON: usize = 25;
