use marl_nn::SeededRng;
use rand::Rng;

use super::{AGENT_RADIUS, LANDMARK_RADIUS};
use crate::error::Result;
use crate::scenario::{layout, place_without_overlap, AgentSpec, Scenario, Team};
use crate::world::{Entity, World};

/// A stationary speaker knows which of three colored landmarks is the goal
/// and must tell a listener, who cannot see the goal, where to go.
///
/// Agent 0 (speaker): no movement, 3-way message; observes the goal color
/// as a one-hot vector (3).
///
/// Agent 1 (listener): moves, silent; observes own velocity (2), own
/// position (2), offsets to the landmarks in color order (6) and the
/// speaker's previous message (3).
///
/// Shared reward: `-|listener - goal|`.
#[derive(Debug, Clone, Default)]
pub struct CooperativeCommunication;

impl CooperativeCommunication {
    pub const ID: &'static str = "cooperative_communication";
    pub const N_LANDMARKS: usize = 3;
    pub const SPEAKER: usize = 0;
    pub const LISTENER: usize = 1;
}

impl Scenario for CooperativeCommunication {
    fn id(&self) -> &str {
        Self::ID
    }

    fn agent_specs(&self) -> Vec<AgentSpec> {
        vec![
            AgentSpec {
                name: "speaker".into(),
                team: Team::Good,
                movement_dim: 0,
                comm_dim: Self::N_LANDMARKS,
                obs_dim: Self::N_LANDMARKS,
            },
            AgentSpec {
                name: "listener".into(),
                team: Team::Good,
                movement_dim: 2,
                comm_dim: 0,
                obs_dim: 4 + 2 * Self::N_LANDMARKS + Self::N_LANDMARKS,
            },
        ]
    }

    fn reset(&self, rng: &mut SeededRng) -> Result<World> {
        let mut speaker = Entity::agent(AGENT_RADIUS);
        speaker.movable = false;
        speaker.collide = false;
        let mut listener = Entity::agent(AGENT_RADIUS);
        listener.collide = false;
        let mut agents = vec![speaker, listener];
        let mut landmarks: Vec<Entity> = (0..Self::N_LANDMARKS)
            .map(|c| Entity {
                color_tag: c as u8,
                ..Entity::landmark(LANDMARK_RADIUS)
            })
            .collect();
        {
            let mut all: Vec<&mut Entity> = agents.iter_mut().chain(landmarks.iter_mut()).collect();
            place_without_overlap(&mut all, rng)?;
        }
        let goal = rng.random_range(0..Self::N_LANDMARKS);
        Ok(World {
            agents,
            landmarks,
            t: 0,
            scenario_id: Self::ID.to_string(),
            horizon: 0,
            comm: vec![vec![0.0; Self::N_LANDMARKS], Vec::new()],
            goal: Some(goal),
        })
    }

    fn observe(&self, world: &World, agent: usize) -> Vec<f64> {
        if agent == Self::SPEAKER {
            let goal = world.goal.expect("goal set at reset");
            let color = world.landmarks[goal].color_tag as usize;
            let mut obs = vec![0.0; Self::N_LANDMARKS];
            obs[color] = 1.0;
            obs
        } else {
            let mut obs = Vec::with_capacity(13);
            layout::own_state(world, agent, &mut obs);
            layout::landmark_offsets(world, agent, &mut obs);
            layout::received_comm(world, agent, &mut obs);
            obs
        }
    }

    fn reward(&self, world: &World) -> Vec<f64> {
        let goal = &world.landmarks[world.goal.expect("goal set at reset")];
        let r = -world.agents[Self::LISTENER].position.dist(goal.position);
        vec![r; 2]
    }
}
