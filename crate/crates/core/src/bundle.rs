use marl_nn::{AdamState, DenseNet, Matrix2D, OutputActivation, SeededRng};
use particle_env::AgentSpec;

use crate::error::{check_dim, MarlError, Result};
use crate::hyper::{Algorithm, HyperParams};
use crate::policy::Policy;

/// What a critic is conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticView {
    /// Every agent's observation followed by every agent's action.
    Centralized,
    /// The agent's own observation and action.
    Local,
}

/// Counts updates and enforces the delayed-update schedule: after `n`
/// critic updates, at most `floor(n / delay)` policy updates, and never more
/// target updates than policy updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpdateClock {
    delay: u64,
    critic_updates: u64,
    policy_updates: u64,
    target_updates: u64,
}

impl UpdateClock {
    pub fn new(delay: u64) -> Result<Self> {
        if delay == 0 {
            return Err(MarlError::InvalidHyperParams("policy delay must be >= 1".into()));
        }
        Ok(Self {
            delay,
            critic_updates: 0,
            policy_updates: 0,
            target_updates: 0,
        })
    }

    /// Clock with the given counters, checked against the schedule.
    pub fn restore(delay: u64, critic: u64, policy: u64, target: u64) -> Result<Self> {
        let mut c = Self::new(delay)?;
        c.critic_updates = critic;
        c.policy_updates = policy;
        c.target_updates = target;
        if policy > critic / delay || target > policy {
            return Err(c.violation());
        }
        Ok(c)
    }

    pub fn delay(&self) -> u64 {
        self.delay
    }

    pub fn critic_updates(&self) -> u64 {
        self.critic_updates
    }

    pub fn policy_updates(&self) -> u64 {
        self.policy_updates
    }

    pub fn target_updates(&self) -> u64 {
        self.target_updates
    }

    pub fn record_critic_update(&mut self) {
        self.critic_updates += 1;
    }

    pub fn policy_due(&self) -> bool {
        self.critic_updates / self.delay > self.policy_updates
    }

    pub fn record_policy_update(&mut self) -> Result<()> {
        if !self.policy_due() {
            return Err(self.violation());
        }
        self.policy_updates += 1;
        Ok(())
    }

    pub fn target_due(&self) -> bool {
        self.target_updates < self.policy_updates
    }

    pub fn record_target_update(&mut self) -> Result<()> {
        if !self.target_due() {
            return Err(self.violation());
        }
        self.target_updates += 1;
        Ok(())
    }

    fn violation(&self) -> MarlError {
        MarlError::ClockViolation {
            critic_updates: self.critic_updates,
            policy_updates: self.policy_updates,
            delay: self.delay,
        }
    }
}

/// Everything one learning agent owns.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentBundle {
    pub index: usize,
    pub algorithm: Algorithm,
    pub policy: Policy,
    pub target_policy: Policy,
    pub policy_adam: AdamState,
    /// One critic for MADDPG, two otherwise.
    pub critics: Vec<DenseNet>,
    pub target_critics: Vec<DenseNet>,
    pub critic_adams: Vec<AdamState>,
    pub clock: UpdateClock,
    obs_dims: Vec<usize>,
    action_dims: Vec<usize>,
}

impl AgentBundle {
    pub fn new(
        index: usize,
        specs: &[AgentSpec],
        algorithm: Algorithm,
        hp: &HyperParams,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        let spec = specs.get(index).ok_or(MarlError::Dimension {
            context: "agent index",
            expected: specs.len(),
            actual: index,
        })?;
        let policy = Policy::new(
            spec.obs_dim,
            spec.movement_dim,
            spec.comm_dim,
            &hp.hidden,
            hp.comm_temperature,
            rng,
        )?;
        let obs_dims: Vec<usize> = specs.iter().map(|s| s.obs_dim).collect();
        let action_dims: Vec<usize> = specs.iter().map(|s| s.action_dim()).collect();
        let input = critic_input_dim(algorithm, index, &obs_dims, &action_dims);
        let mut sizes = vec![input];
        sizes.extend_from_slice(&hp.hidden);
        sizes.push(1);
        let n_critics = if algorithm.twin_critics() { 2 } else { 1 };
        let critics = (0..n_critics)
            .map(|_| DenseNet::new(&sizes, OutputActivation::Identity, rng))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::from_parts(index, algorithm, policy, critics, obs_dims, action_dims, algorithm.policy_delay(hp))
    }

    /// Bundle with targets equal to the given networks and fresh optimizer
    /// state.
    pub fn from_parts(
        index: usize,
        algorithm: Algorithm,
        policy: Policy,
        critics: Vec<DenseNet>,
        obs_dims: Vec<usize>,
        action_dims: Vec<usize>,
        delay: u64,
    ) -> Result<Self> {
        let expected = if algorithm.twin_critics() { 2 } else { 1 };
        if critics.len() != expected {
            return Err(MarlError::VariantMismatch(format!(
                "{} needs {expected} critics, got {}",
                algorithm.name(),
                critics.len()
            )));
        }
        check_dim("bundle action dims", obs_dims.len(), action_dims.len())?;
        check_dim("bundle policy observation", obs_dims[index], policy.obs_dim())?;
        check_dim("bundle policy action", action_dims[index], policy.action_dim())?;
        let input = critic_input_dim(algorithm, index, &obs_dims, &action_dims);
        for c in &critics {
            check_dim("critic input", input, c.input_size())?;
            check_dim("critic output", 1, c.output_size())?;
        }
        Ok(Self {
            index,
            algorithm,
            target_policy: policy.clone(),
            policy_adam: AdamState::for_net(policy.net()),
            policy,
            target_critics: critics.clone(),
            critic_adams: critics.iter().map(AdamState::for_net).collect(),
            critics,
            clock: UpdateClock::new(delay)?,
            obs_dims,
            action_dims,
        })
    }

    /// One bundle per agent, initialized in agent order from `rng`.
    pub fn build_all(
        specs: &[AgentSpec],
        algorithm: Algorithm,
        hp: &HyperParams,
        rng: &mut SeededRng,
    ) -> Result<Vec<Self>> {
        (0..specs.len())
            .map(|i| Self::new(i, specs, algorithm, hp, rng))
            .collect()
    }

    pub fn view(&self) -> CriticView {
        if self.algorithm.centralized() {
            CriticView::Centralized
        } else {
            CriticView::Local
        }
    }

    pub fn n_agents(&self) -> usize {
        self.obs_dims.len()
    }

    pub fn obs_dims(&self) -> &[usize] {
        &self.obs_dims
    }

    pub fn action_dims(&self) -> &[usize] {
        &self.action_dims
    }

    pub fn critic_input_dim(&self) -> usize {
        critic_input_dim(self.algorithm, self.index, &self.obs_dims, &self.action_dims)
    }

    /// Agents whose observations and actions feed this agent's critics.
    pub fn critic_agents(&self) -> Vec<usize> {
        match self.view() {
            CriticView::Centralized => (0..self.n_agents()).collect(),
            CriticView::Local => vec![self.index],
        }
    }

    /// Critic input rows from full per-agent observation and action blocks.
    pub fn critic_input(&self, obs: &[&Matrix2D], actions: &[&Matrix2D]) -> Result<Matrix2D> {
        check_dim("critic input observations", self.n_agents(), obs.len())?;
        check_dim("critic input actions", self.n_agents(), actions.len())?;
        let parts: Vec<&Matrix2D> = match self.view() {
            CriticView::Centralized => obs.iter().chain(actions).copied().collect(),
            CriticView::Local => vec![obs[self.index], actions[self.index]],
        };
        for (k, m) in parts.iter().enumerate() {
            let agent = match self.view() {
                CriticView::Centralized => k % self.n_agents(),
                CriticView::Local => self.index,
            };
            let expected = if k < parts.len() / 2 {
                self.obs_dims[agent]
            } else {
                self.action_dims[agent]
            };
            check_dim("critic input block", expected, m.cols())?;
        }
        Ok(Matrix2D::hcat(&parts)?)
    }

    /// Column where this agent's own action starts in the critic input.
    pub fn own_action_offset(&self) -> usize {
        match self.view() {
            CriticView::Centralized => {
                self.obs_dims.iter().sum::<usize>()
                    + self.action_dims[..self.index].iter().sum::<usize>()
            }
            CriticView::Local => self.obs_dims[self.index],
        }
    }
}

fn critic_input_dim(
    algorithm: Algorithm,
    index: usize,
    obs_dims: &[usize],
    action_dims: &[usize],
) -> usize {
    if algorithm.centralized() {
        obs_dims.iter().sum::<usize>() + action_dims.iter().sum::<usize>()
    } else {
        obs_dims[index] + action_dims[index]
    }
}
