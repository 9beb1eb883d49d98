use std::fmt::Write as _;

use crate::env::StepResult;
use crate::world::{JointAction, World};

/// Flat CSV dump of an episode, one row per step.
///
/// Header columns, in order: `t`; for each agent `a{i}_px,a{i}_py,a{i}_vx,a{i}_vy`;
/// for each landmark `l{j}_px,l{j}_py`; for each agent its action components
/// `a{i}_act{k}` (movement first, then message); for each agent `r{i}`.
#[derive(Debug, Clone)]
pub struct TrajectoryRecorder {
    header: String,
    rows: Vec<String>,
}

impl TrajectoryRecorder {
    pub fn new(world: &World, action_dims: &[usize]) -> Self {
        let mut cols = vec!["t".to_string()];
        for i in 0..world.agents.len() {
            for f in ["px", "py", "vx", "vy"] {
                cols.push(format!("a{i}_{f}"));
            }
        }
        for j in 0..world.landmarks.len() {
            cols.push(format!("l{j}_px"));
            cols.push(format!("l{j}_py"));
        }
        for (i, &d) in action_dims.iter().enumerate() {
            for k in 0..d {
                cols.push(format!("a{i}_act{k}"));
            }
        }
        for i in 0..world.agents.len() {
            cols.push(format!("r{i}"));
        }
        Self {
            header: cols.join(","),
            rows: Vec::new(),
        }
    }

    pub fn header(&self) -> &str {
        &self.header
    }

    /// Records the world reached by `action`, together with `action` and
    /// its rewards.
    pub fn record(&mut self, world: &World, action: &JointAction, result: &StepResult) {
        let mut row = world.t.to_string();
        for a in &world.agents {
            for v in [a.position.x, a.position.y, a.velocity.x, a.velocity.y] {
                let _ = write!(row, ",{v}");
            }
        }
        for l in &world.landmarks {
            let _ = write!(row, ",{},{}", l.position.x, l.position.y);
        }
        for a in action {
            for v in a.to_flat() {
                let _ = write!(row, ",{v}");
            }
        }
        for r in &result.rewards {
            let _ = write!(row, ",{r}");
        }
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.header.len() + 1 + self.rows.len() * 128);
        out.push_str(&self.header);
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }
}
