use marl_nn::SeededRng;

use super::{AGENT_RADIUS, LANDMARK_RADIUS, PREY_RADIUS};
use crate::error::Result;
use crate::scenario::{layout, place_without_overlap, AgentSpec, Scenario, Team};
use crate::world::{Entity, World};

/// Slower predators (agents `0..n_predators`) chase one faster prey (the
/// last agent) around fixed obstacles.
///
/// Observation of every agent (length `4 + 2L + 2(N-1)`): own velocity,
/// own position, obstacle offsets, other-agent offsets.
///
/// Each predator touching the prey is one contact event; per event every
/// predator gains `CONTACT_REWARD` and the prey loses the same amount.
#[derive(Debug, Clone)]
pub struct PredatorPrey {
    pub n_predators: usize,
    pub n_obstacles: usize,
}

impl Default for PredatorPrey {
    fn default() -> Self {
        Self {
            n_predators: 3,
            n_obstacles: 2,
        }
    }
}

impl PredatorPrey {
    pub const ID: &'static str = "predator_prey";
    pub const CONTACT_REWARD: f64 = 10.0;
    pub const PREDATOR_MAX_SPEED: f64 = 1.0;
    pub const PREY_MAX_SPEED: f64 = 1.3;

    fn n_agents(&self) -> usize {
        self.n_predators + 1
    }

    pub fn prey_index(&self) -> usize {
        self.n_predators
    }

    pub fn contact_events(&self, world: &World) -> usize {
        let prey = &world.agents[self.prey_index()];
        world.agents[..self.n_predators]
            .iter()
            .filter(|p| p.touches(prey))
            .count()
    }
}

impl Scenario for PredatorPrey {
    fn id(&self) -> &str {
        Self::ID
    }

    fn agent_specs(&self) -> Vec<AgentSpec> {
        let obs_dim = 4 + 2 * self.n_obstacles + 2 * (self.n_agents() - 1);
        (0..self.n_agents())
            .map(|i| {
                let prey = i == self.prey_index();
                AgentSpec {
                    name: if prey { "prey".into() } else { format!("predator_{i}") },
                    team: if prey { Team::Good } else { Team::Adversary },
                    movement_dim: 2,
                    comm_dim: 0,
                    obs_dim,
                }
            })
            .collect()
    }

    fn reset(&self, rng: &mut SeededRng) -> Result<World> {
        let mut agents: Vec<Entity> = (0..self.n_agents())
            .map(|i| {
                if i == self.prey_index() {
                    Entity {
                        max_speed: Some(Self::PREY_MAX_SPEED),
                        ..Entity::agent(PREY_RADIUS)
                    }
                } else {
                    Entity {
                        max_speed: Some(Self::PREDATOR_MAX_SPEED),
                        ..Entity::agent(AGENT_RADIUS)
                    }
                }
            })
            .collect();
        let mut landmarks: Vec<Entity> = (0..self.n_obstacles)
            .map(|_| Entity {
                collide: true,
                ..Entity::landmark(LANDMARK_RADIUS)
            })
            .collect();
        {
            let mut all: Vec<&mut Entity> = agents.iter_mut().chain(landmarks.iter_mut()).collect();
            place_without_overlap(&mut all, rng)?;
        }
        Ok(World {
            agents,
            landmarks,
            t: 0,
            scenario_id: Self::ID.to_string(),
            horizon: 0,
            comm: vec![Vec::new(); self.n_agents()],
            goal: None,
        })
    }

    fn observe(&self, world: &World, agent: usize) -> Vec<f64> {
        let mut obs = Vec::new();
        layout::own_state(world, agent, &mut obs);
        layout::landmark_offsets(world, agent, &mut obs);
        layout::other_agent_offsets(world, agent, &mut obs);
        obs
    }

    fn reward(&self, world: &World) -> Vec<f64> {
        let bonus = Self::CONTACT_REWARD * self.contact_events(world) as f64;
        let mut r = vec![bonus; self.n_agents()];
        r[self.prey_index()] = -bonus;
        r
    }
}
