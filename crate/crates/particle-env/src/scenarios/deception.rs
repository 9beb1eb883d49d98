use marl_nn::SeededRng;
use rand::Rng;

use super::{AGENT_RADIUS, LANDMARK_RADIUS};
use crate::error::Result;
use crate::scenario::{layout, place_without_overlap, AgentSpec, Scenario, Team};
use crate::world::{Entity, World};

/// Cooperators know which landmark is the target; the adversary does not and
/// must infer it from their movement.
///
/// Agent 0 is the adversary. Observation: own velocity, own position,
/// landmark offsets (2L), other-agent offsets (2(N-1)).
///
/// Cooperators additionally see the target offset right after their own
/// state: velocity, position, target offset, landmark offsets, other-agent
/// offsets.
///
/// Cooperator reward: `-min_i |coop_i - target| + |adv - target|`.
/// Adversary reward: `-|adv - target|`.
#[derive(Debug, Clone)]
pub struct PhysicalDeception {
    pub n_cooperators: usize,
    pub n_landmarks: usize,
}

impl Default for PhysicalDeception {
    fn default() -> Self {
        Self {
            n_cooperators: 2,
            n_landmarks: 2,
        }
    }
}

impl PhysicalDeception {
    pub const ID: &'static str = "physical_deception";
    pub const ADVERSARY: usize = 0;

    fn n_agents(&self) -> usize {
        self.n_cooperators + 1
    }
}

impl Scenario for PhysicalDeception {
    fn id(&self) -> &str {
        Self::ID
    }

    fn agent_specs(&self) -> Vec<AgentSpec> {
        let base = 4 + 2 * self.n_landmarks + 2 * (self.n_agents() - 1);
        (0..self.n_agents())
            .map(|i| {
                let adv = i == Self::ADVERSARY;
                AgentSpec {
                    name: if adv { "adversary".into() } else { format!("agent_{i}") },
                    team: if adv { Team::Adversary } else { Team::Good },
                    movement_dim: 2,
                    comm_dim: 0,
                    obs_dim: if adv { base } else { base + 2 },
                }
            })
            .collect()
    }

    fn reset(&self, rng: &mut SeededRng) -> Result<World> {
        let mut agents: Vec<Entity> = (0..self.n_agents())
            .map(|_| Entity {
                collide: false,
                ..Entity::agent(AGENT_RADIUS)
            })
            .collect();
        let mut landmarks: Vec<Entity> = (0..self.n_landmarks)
            .map(|c| Entity {
                color_tag: c as u8,
                ..Entity::landmark(LANDMARK_RADIUS)
            })
            .collect();
        {
            let mut all: Vec<&mut Entity> = agents.iter_mut().chain(landmarks.iter_mut()).collect();
            place_without_overlap(&mut all, rng)?;
        }
        let goal = rng.random_range(0..self.n_landmarks);
        Ok(World {
            agents,
            landmarks,
            t: 0,
            scenario_id: Self::ID.to_string(),
            horizon: 0,
            comm: vec![Vec::new(); self.n_agents()],
            goal: Some(goal),
        })
    }

    fn observe(&self, world: &World, agent: usize) -> Vec<f64> {
        let mut obs = Vec::new();
        layout::own_state(world, agent, &mut obs);
        if agent != Self::ADVERSARY {
            let target = world.landmarks[world.goal.expect("goal set at reset")].position;
            obs.extend_from_slice(&(target - world.agents[agent].position).to_array());
        }
        layout::landmark_offsets(world, agent, &mut obs);
        layout::other_agent_offsets(world, agent, &mut obs);
        obs
    }

    fn reward(&self, world: &World) -> Vec<f64> {
        let target = world.landmarks[world.goal.expect("goal set at reset")].position;
        let adv_dist = world.agents[Self::ADVERSARY].position.dist(target);
        let coop_dist = world
            .agents
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != Self::ADVERSARY)
            .map(|(_, a)| a.position.dist(target))
            .fold(f64::INFINITY, f64::min);
        (0..self.n_agents())
            .map(|i| {
                if i == Self::ADVERSARY {
                    -adv_dist
                } else {
                    -coop_dist + adv_dist
                }
            })
            .collect()
    }
}
