use serde::{Deserialize, Serialize};

use crate::error::{MarlError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Maddpg,
    Matd3,
    IlTd3,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Maddpg => "maddpg",
            Algorithm::Matd3 => "matd3",
            Algorithm::IlTd3 => "il_td3",
        }
    }

    pub fn twin_critics(&self) -> bool {
        !matches!(self, Algorithm::Maddpg)
    }

    pub fn centralized(&self) -> bool {
        !matches!(self, Algorithm::IlTd3)
    }

    /// MADDPG updates its policy after every critic update.
    pub fn policy_delay(&self, hp: &HyperParams) -> u64 {
        match self {
            Algorithm::Maddpg => 1,
            _ => hp.policy_delay,
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = MarlError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maddpg" => Ok(Algorithm::Maddpg),
            "matd3" => Ok(Algorithm::Matd3),
            "il_td3" => Ok(Algorithm::IlTd3),
            other => Err(MarlError::InvalidHyperParams(format!(
                "unknown algorithm '{other}' (expected maddpg, matd3 or il_td3)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HyperParams {
    /// Discount factor.
    pub gamma: f64,
    /// Polyak coefficient for target networks.
    pub tau: f64,
    /// Critic updates per policy/target update.
    pub policy_delay: u64,
    /// Std of target policy smoothing noise.
    pub smoothing_sigma: f64,
    /// Clip bound of target policy smoothing noise.
    pub smoothing_clip: f64,
    /// Adam learning rate for policies and critics.
    pub lr: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Exploration noise std as a fraction of the action range.
    pub exploration_noise: f64,
    pub episodes: usize,
    pub steps_per_episode: usize,
    pub hidden: Vec<usize>,
    /// Transitions required before learning starts; `max(batch, 1024)` when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warmup: Option<usize>,
    /// Softmax temperature for message heads.
    pub comm_temperature: f64,
    /// Treat `done` as a time limit and bootstrap through it.
    pub bootstrap_on_done: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            tau: 0.01,
            policy_delay: 2,
            smoothing_sigma: 0.2,
            smoothing_clip: 0.5,
            lr: 0.01,
            batch_size: 1000,
            buffer_capacity: 1_000_000,
            exploration_noise: 0.1,
            episodes: 5000,
            steps_per_episode: 25,
            hidden: vec![64, 64],
            warmup: None,
            comm_temperature: 1.0,
            bootstrap_on_done: true,
        }
    }
}

impl HyperParams {
    pub fn warmup(&self) -> usize {
        self.warmup.unwrap_or_else(|| self.batch_size.max(1024))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(MarlError::InvalidHyperParams(msg));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        if self.policy_delay < 1 {
            return bad("policy_delay must be >= 1".into());
        }
        if !(self.smoothing_sigma >= 0.0) || !(self.smoothing_clip >= 0.0) {
            return bad("smoothing sigma and clip must be >= 0".into());
        }
        if !(self.lr > 0.0) {
            return bad(format!("lr must be positive, got {}", self.lr));
        }
        if !(self.exploration_noise >= 0.0) {
            return bad("exploration_noise must be >= 0".into());
        }
        if !(self.comm_temperature > 0.0) {
            return bad("comm_temperature must be positive".into());
        }
        if self.batch_size == 0 || self.buffer_capacity == 0 {
            return bad("batch_size and buffer_capacity must be positive".into());
        }
        if self.batch_size > self.buffer_capacity {
            return bad(format!(
                "batch_size {} exceeds buffer_capacity {}",
                self.batch_size, self.buffer_capacity
            ));
        }
        if self.warmup() < self.batch_size {
            return bad("warmup must be at least batch_size".into());
        }
        if self.episodes == 0 || self.steps_per_episode == 0 {
            return bad("episodes and steps_per_episode must be positive".into());
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad(format!("hidden layers must be nonempty and positive, got {:?}", self.hidden));
        }
        Ok(())
    }
}
