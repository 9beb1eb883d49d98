use std::fmt::Debug;

use marl_nn::SeededRng;
use rand::Rng;

use crate::error::{EnvError, Result};
use crate::vec2::Vec2;
use crate::world::{Entity, World};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Team {
    Good,
    Adversary,
}

/// Static description of one agent's interface.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub name: String,
    pub team: Team,
    /// 2 for agents that push themselves around, 0 otherwise.
    pub movement_dim: usize,
    pub comm_dim: usize,
    pub obs_dim: usize,
}

impl AgentSpec {
    pub fn action_dim(&self) -> usize {
        self.movement_dim + self.comm_dim
    }
}

/// A task: how to lay out a world, what each agent sees and how it is paid.
pub trait Scenario: Send + Sync + Debug {
    fn id(&self) -> &str;

    fn agent_specs(&self) -> Vec<AgentSpec>;

    /// Fresh world at `t = 0` with zero velocities. The environment fills in
    /// the horizon.
    fn reset(&self, rng: &mut SeededRng) -> Result<World>;

    fn observe(&self, world: &World, agent: usize) -> Vec<f64>;

    fn reward(&self, world: &World) -> Vec<f64>;
}

const MAX_PLACEMENT_ATTEMPTS: usize = 100_000;

/// Places every entity uniformly in `[-1, 1]^2`, rejecting any draw that
/// overlaps an entity placed before it.
pub fn place_without_overlap(entities: &mut [&mut Entity], rng: &mut SeededRng) -> Result<()> {
    let mut placed: Vec<(Vec2, f64)> = Vec::with_capacity(entities.len());
    for e in entities.iter_mut() {
        let mut attempts = 0;
        loop {
            let p = Vec2::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
            if placed.iter().all(|&(q, r)| p.dist(q) >= r + e.radius) {
                e.position = p;
                e.velocity = Vec2::ZERO;
                placed.push((p, e.radius));
                break;
            }
            attempts += 1;
            if attempts >= MAX_PLACEMENT_ATTEMPTS {
                return Err(EnvError::Placement(attempts));
            }
        }
    }
    Ok(())
}

/// Standard observation blocks shared by the built-in tasks.
pub(crate) mod layout {
    use crate::world::World;

    pub fn own_state(world: &World, agent: usize, out: &mut Vec<f64>) {
        let a = &world.agents[agent];
        out.extend_from_slice(&a.velocity.to_array());
        out.extend_from_slice(&a.position.to_array());
    }

    pub fn landmark_offsets(world: &World, agent: usize, out: &mut Vec<f64>) {
        let p = world.agents[agent].position;
        for l in &world.landmarks {
            out.extend_from_slice(&(l.position - p).to_array());
        }
    }

    pub fn other_agent_offsets(world: &World, agent: usize, out: &mut Vec<f64>) {
        let p = world.agents[agent].position;
        for (j, other) in world.agents.iter().enumerate() {
            if j != agent {
                out.extend_from_slice(&(other.position - p).to_array());
            }
        }
    }

    pub fn received_comm(world: &World, agent: usize, out: &mut Vec<f64>) {
        for (j, msg) in world.comm.iter().enumerate() {
            if j != agent {
                out.extend_from_slice(msg);
            }
        }
    }
}
