use marl_nn::SeededRng;

use super::{AGENT_RADIUS, LANDMARK_RADIUS};
use crate::error::Result;
use crate::scenario::{layout, place_without_overlap, AgentSpec, Scenario, Team};
use crate::world::{Entity, World};

/// N agents must cover N landmarks while avoiding each other.
///
/// Observation of agent i (length `4 + 2N + 2(N-1)`):
/// own velocity (2), own position (2), offset to every landmark (2N),
/// offset to every other agent in index order (2(N-1)).
///
/// Shared reward: `-sum_l min_a |a - l|` minus 1 per colliding agent pair.
#[derive(Debug, Clone)]
pub struct CooperativeNavigation {
    pub n_agents: usize,
}

impl Default for CooperativeNavigation {
    fn default() -> Self {
        Self { n_agents: 3 }
    }
}

impl CooperativeNavigation {
    pub const ID: &'static str = "cooperative_navigation";
    pub const COLLISION_PENALTY: f64 = 1.0;

    pub fn obs_dim(&self) -> usize {
        4 + 2 * self.n_agents + 2 * (self.n_agents - 1)
    }

    /// Distance term of the reward alone.
    pub fn coverage(world: &World) -> f64 {
        world
            .landmarks
            .iter()
            .map(|l| {
                world
                    .agents
                    .iter()
                    .map(|a| a.position.dist(l.position))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum()
    }

    pub fn colliding_pairs(world: &World) -> usize {
        let n = world.agents.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| world.agents[i].touches(&world.agents[j]))
            .count()
    }
}

impl Scenario for CooperativeNavigation {
    fn id(&self) -> &str {
        Self::ID
    }

    fn agent_specs(&self) -> Vec<AgentSpec> {
        (0..self.n_agents)
            .map(|i| AgentSpec {
                name: format!("agent_{i}"),
                team: Team::Good,
                movement_dim: 2,
                comm_dim: 0,
                obs_dim: self.obs_dim(),
            })
            .collect()
    }

    fn reset(&self, rng: &mut SeededRng) -> Result<World> {
        let mut agents = vec![Entity::agent(AGENT_RADIUS); self.n_agents];
        let mut landmarks = vec![Entity::landmark(LANDMARK_RADIUS); self.n_agents];
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
            comm: vec![Vec::new(); self.n_agents],
            goal: None,
        })
    }

    fn observe(&self, world: &World, agent: usize) -> Vec<f64> {
        let mut obs = Vec::with_capacity(self.obs_dim());
        layout::own_state(world, agent, &mut obs);
        layout::landmark_offsets(world, agent, &mut obs);
        layout::other_agent_offsets(world, agent, &mut obs);
        obs
    }

    fn reward(&self, world: &World) -> Vec<f64> {
        let r = -Self::coverage(world)
            - Self::COLLISION_PENALTY * Self::colliding_pairs(world) as f64;
        vec![r; world.agents.len()]
    }
}
