//! Built-in tasks.
//!
//! Radii: agents 0.1 (prey 0.075), landmarks 0.05. All initial positions are
//! uniform in `[-1, 1]^2` with overlap rejection.

mod communication;
mod deception;
mod navigation;
mod predator_prey;

pub use communication::CooperativeCommunication;
pub use deception::PhysicalDeception;
pub use navigation::CooperativeNavigation;
pub use predator_prey::PredatorPrey;

pub const AGENT_RADIUS: f64 = 0.1;
pub const PREY_RADIUS: f64 = 0.075;
pub const LANDMARK_RADIUS: f64 = 0.05;
