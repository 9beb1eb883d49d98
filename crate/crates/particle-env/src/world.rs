use crate::vec2::Vec2;

/// A disc in the arena: an agent or a landmark.
#[derive(Debug, Clone, PartialEq)]
pub struct Entity {
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
    pub movable: bool,
    /// Whether contact forces act on this entity.
    pub collide: bool,
    pub max_speed: Option<f64>,
    pub color_tag: u8,
}

impl Entity {
    pub fn agent(radius: f64) -> Self {
        Self {
            position: Vec2::ZERO,
            velocity: Vec2::ZERO,
            radius,
            movable: true,
            collide: true,
            max_speed: None,
            color_tag: 0,
        }
    }

    pub fn landmark(radius: f64) -> Self {
        Self {
            movable: false,
            collide: false,
            ..Self::agent(radius)
        }
    }

    pub fn touches(&self, other: &Entity) -> bool {
        self.position.dist(other.position) < self.radius + other.radius
    }
}

/// Complete simulator state. Cloning a world snapshots it.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub agents: Vec<Entity>,
    pub landmarks: Vec<Entity>,
    pub t: usize,
    pub scenario_id: String,
    pub horizon: usize,
    /// Last message emitted by each agent; empty for silent agents.
    pub comm: Vec<Vec<f64>>,
    /// Scenario-private target landmark, if the task has one.
    pub goal: Option<usize>,
}

impl World {
    pub fn is_done(&self) -> bool {
        self.t >= self.horizon
    }

    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.agents.iter().chain(self.landmarks.iter())
    }

    /// Copy with a new horizon; used to roll a snapshot past its episode end.
    pub fn with_horizon(&self, horizon: usize) -> World {
        World {
            horizon,
            ..self.clone()
        }
    }

    /// Shifts every entity by `offset`.
    pub fn translated(&self, offset: Vec2) -> World {
        let mut w = self.clone();
        for e in w.agents.iter_mut().chain(w.landmarks.iter_mut()) {
            e.position += offset;
        }
        w
    }
}

/// One agent's action: a force and an optional message.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AgentAction {
    /// Two components in `[-1, 1]` for movable agents, empty otherwise.
    pub movement: Vec<f64>,
    /// Relaxed one-hot message, empty for silent agents.
    pub comm: Vec<f64>,
}

impl AgentAction {
    pub fn movement(x: f64, y: f64) -> Self {
        Self {
            movement: vec![x, y],
            comm: Vec::new(),
        }
    }

    pub fn comm(message: Vec<f64>) -> Self {
        Self {
            movement: Vec::new(),
            comm: message,
        }
    }

    /// Flat layout: movement then comm.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.movement.clone();
        v.extend_from_slice(&self.comm);
        v
    }

    pub fn from_flat(flat: &[f64], movement_dim: usize) -> Self {
        Self {
            movement: flat[..movement_dim].to_vec(),
            comm: flat[movement_dim..].to_vec(),
        }
    }
}

pub type JointAction = Vec<AgentAction>;
