use std::sync::Arc;

use marl_nn::SeededRng;

use crate::error::{EnvError, Result};
use crate::physics::{integrate, PhysicsParams};
use crate::scenario::{AgentSpec, Scenario};
use crate::vec2::Vec2;
use crate::world::{JointAction, World};
use crate::DEFAULT_HORIZON;

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observations: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub done: bool,
}

const SIMPLEX_TOL: f64 = 1e-6;

/// A scenario bound to physics constants and an episode horizon.
#[derive(Debug, Clone)]
pub struct Environment {
    scenario: Arc<dyn Scenario>,
    specs: Vec<AgentSpec>,
    pub physics: PhysicsParams,
    pub horizon: usize,
}

impl Environment {
    pub fn new(scenario: Arc<dyn Scenario>) -> Self {
        let specs = scenario.agent_specs();
        Self {
            scenario,
            specs,
            physics: PhysicsParams::default(),
            horizon: DEFAULT_HORIZON,
        }
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn scenario(&self) -> &dyn Scenario {
        self.scenario.as_ref()
    }

    pub fn agent_specs(&self) -> &[AgentSpec] {
        &self.specs
    }

    pub fn n_agents(&self) -> usize {
        self.specs.len()
    }

    pub fn reset(&self, rng: &mut SeededRng) -> Result<(World, Vec<Vec<f64>>)> {
        let mut world = self.scenario.reset(rng)?;
        world.t = 0;
        world.horizon = self.horizon;
        let obs = self.observe_all(&world);
        Ok((world, obs))
    }

    pub fn observe(&self, world: &World, agent: usize) -> Result<Vec<f64>> {
        if agent >= world.agents.len() {
            return Err(EnvError::AgentIndex {
                index: agent,
                count: world.agents.len(),
            });
        }
        Ok(self.scenario.observe(world, agent))
    }

    pub fn observe_all(&self, world: &World) -> Vec<Vec<f64>> {
        (0..world.agents.len())
            .map(|i| self.scenario.observe(world, i))
            .collect()
    }

    pub fn reward(&self, world: &World) -> Vec<f64> {
        self.scenario.reward(world)
    }

    /// Pure transition: `world` is left untouched.
    pub fn step(&self, world: &World, action: &JointAction) -> Result<(World, StepResult)> {
        if world.is_done() {
            return Err(EnvError::EpisodeDone {
                t: world.t,
                horizon: world.horizon,
            });
        }
        self.validate(action)?;

        let mut next = world.clone();
        let forces: Vec<Vec2> = action
            .iter()
            .map(|a| match a.movement.as_slice() {
                [x, y] => Vec2::new(x.clamp(-1.0, 1.0), y.clamp(-1.0, 1.0)),
                _ => Vec2::ZERO,
            })
            .collect();
        for (slot, a) in next.comm.iter_mut().zip(action) {
            slot.clone_from(&a.comm);
        }
        let n_agents = next.agents.len();
        let mut entities: Vec<_> = next.agents.drain(..).chain(next.landmarks.drain(..)).collect();
        integrate(&mut entities, &forces, &self.physics);
        next.landmarks = entities.split_off(n_agents);
        next.agents = entities;
        next.t += 1;

        let result = StepResult {
            observations: self.observe_all(&next),
            rewards: self.reward(&next),
            done: next.is_done(),
        };
        Ok((next, result))
    }

    fn validate(&self, action: &JointAction) -> Result<()> {
        if action.len() != self.specs.len() {
            return Err(EnvError::MalformedAction {
                agent: action.len().min(self.specs.len()),
                reason: format!(
                    "expected {} agent actions, got {}",
                    self.specs.len(),
                    action.len()
                ),
            });
        }
        for (i, (a, spec)) in action.iter().zip(&self.specs).enumerate() {
            let bad = |reason: String| EnvError::MalformedAction { agent: i, reason };
            if a.movement.len() != spec.movement_dim {
                return Err(bad(format!(
                    "movement has {} components, expected {}",
                    a.movement.len(),
                    spec.movement_dim
                )));
            }
            if a.comm.len() != spec.comm_dim {
                return Err(bad(format!(
                    "message has {} components, expected {}",
                    a.comm.len(),
                    spec.comm_dim
                )));
            }
            if a.movement.iter().chain(&a.comm).any(|v| !v.is_finite()) {
                return Err(bad("non-finite component".into()));
            }
            if !a.comm.is_empty() {
                let sum: f64 = a.comm.iter().sum();
                if (sum - 1.0).abs() > SIMPLEX_TOL || a.comm.iter().any(|&p| p < 0.0) {
                    return Err(bad(format!("message is not on the simplex (sum {sum})")));
                }
            }
        }
        Ok(())
    }

    /// Concatenation of all agents' observations, in agent order.
    pub fn full_state(observations: &[Vec<f64>]) -> Vec<f64> {
        observations.concat()
    }
}
