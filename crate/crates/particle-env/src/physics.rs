use crate::vec2::Vec2;
use crate::world::Entity;

/// Integration constants. Every entity has unit mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsParams {
    pub dt: f64,
    /// Velocity is multiplied by `1 - damping` each tick.
    pub damping: f64,
    /// Scales a unit movement action into a force.
    pub force_scale: f64,
    /// Contact force per unit of penetration depth.
    pub contact_stiffness: f64,
    /// Restoring force per unit of excursion past `|coordinate| = 1`.
    pub boundary_stiffness: f64,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self {
            dt: 0.1,
            damping: 0.25,
            force_scale: 5.0,
            contact_stiffness: 100.0,
            boundary_stiffness: 5.0,
        }
    }
}

impl PhysicsParams {
    /// Per-component speed bound reached under a constant unit force with no
    /// contacts: `force_scale * dt / damping`.
    pub fn speed_bound(&self) -> f64 {
        self.force_scale * self.dt / self.damping
    }
}

fn boundary_force(p: f64, stiffness: f64) -> f64 {
    if p > 1.0 {
        -stiffness * (p - 1.0)
    } else if p < -1.0 {
        stiffness * (-1.0 - p)
    } else {
        0.0
    }
}

/// Advances `entities` by one tick. `actions[k]` is the unit-scale force for
/// entity `k` (ignored for immovable entities); missing entries mean no
/// action force.
pub fn integrate(entities: &mut [Entity], actions: &[Vec2], params: &PhysicsParams) {
    let n = entities.len();
    let mut forces = vec![Vec2::ZERO; n];
    for (k, e) in entities.iter().enumerate() {
        if e.movable {
            let a = actions.get(k).copied().unwrap_or(Vec2::ZERO);
            forces[k] = a * params.force_scale;
            forces[k] += Vec2::new(
                boundary_force(e.position.x, params.boundary_stiffness),
                boundary_force(e.position.y, params.boundary_stiffness),
            );
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (&entities[i], &entities[j]);
            if !(a.collide && b.collide) || !(a.movable || b.movable) {
                continue;
            }
            let delta = a.position - b.position;
            let dist = delta.norm();
            let penetration = a.radius + b.radius - dist;
            if penetration <= 0.0 || dist == 0.0 {
                continue;
            }
            let f = delta * (params.contact_stiffness * penetration / dist);
            if a.movable {
                forces[i] += f;
            }
            if b.movable {
                forces[j] += -f;
            }
        }
    }
    let keep = 1.0 - params.damping;
    for (e, f) in entities.iter_mut().zip(forces) {
        if !e.movable {
            continue;
        }
        e.velocity = e.velocity * keep + f * params.dt;
        if let Some(max) = e.max_speed {
            let speed = e.velocity.norm();
            if speed > max {
                e.velocity = e.velocity * (max / speed);
            }
        }
        e.position += e.velocity * params.dt;
    }
}
