//! Critic bias measurement against Monte-Carlo returns.
//!
//! Probe states are drawn from recent replay, the critic's estimate
//! `Q_{i,1}(x, a)` is compared to the mean discounted return of rollouts that
//! take `a` first and then follow the current policies.

use marl_nn::{Matrix2D, SeededRng};
use particle_env::{AgentAction, Environment, JointAction, World};
use rand::seq::index;
use rand::Rng;

use crate::algo::select_actions;
use crate::buffer::ReplayBuffer;
use crate::bundle::AgentBundle;
use crate::error::{check_dim, MarlError, Result};
use crate::policy::Policy;

/// A simulator that can be restarted from a snapshot.
pub trait RolloutEnv {
    type State: Clone;

    fn n_agents(&self) -> usize;

    fn observe(&self, state: &Self::State) -> Result<Vec<Vec<f64>>>;

    /// Applies the flat per-agent actions and returns the next state and the
    /// reward of every agent.
    fn step(
        &self,
        state: &Self::State,
        actions: &[Vec<f64>],
        rng: &mut SeededRng,
    ) -> Result<(Self::State, Vec<f64>)>;

    /// True when `step` never consumes randomness.
    fn is_deterministic(&self) -> bool {
        false
    }

    /// Snapshot ready for a rollout of `len` steps.
    fn prepare(&self, state: &Self::State, _len: usize) -> Self::State {
        state.clone()
    }
}

impl RolloutEnv for Environment {
    type State = World;

    fn n_agents(&self) -> usize {
        Environment::n_agents(self)
    }

    fn observe(&self, state: &World) -> Result<Vec<Vec<f64>>> {
        Ok(self.observe_all(state))
    }

    fn step(
        &self,
        state: &World,
        actions: &[Vec<f64>],
        _rng: &mut SeededRng,
    ) -> Result<(World, Vec<f64>)> {
        check_dim("rollout actions", Environment::n_agents(self), actions.len())?;
        let joint: JointAction = actions
            .iter()
            .zip(self.agent_specs())
            .map(|(a, spec)| AgentAction::from_flat(a, spec.movement_dim))
            .collect();
        let (next, result) = Environment::step(self, state, &joint)?;
        Ok((next, result.rewards))
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    /// Probe states may sit near the end of an episode; extend the horizon
    /// so the rollout is not cut short.
    fn prepare(&self, state: &World, len: usize) -> World {
        state.with_horizon(state.t + len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutConfig {
    pub n_rollouts: usize,
    /// Steps per rollout, including the probed action.
    pub length: usize,
    /// Exploration noise used by the continuation policies.
    pub action_noise: f64,
}

impl Default for RolloutConfig {
    fn default() -> Self {
        Self {
            n_rollouts: 200,
            length: 100,
            action_noise: 0.0,
        }
    }
}

/// Per-agent return statistics over the rollouts of one probe.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: Vec<f64>,
    /// Unbiased sample variance of the return; zero with a single rollout.
    pub variance: Vec<f64>,
    pub rollouts: usize,
}

/// Mean discounted return `sum_t gamma^t r_t` of rollouts that take
/// `first_actions` in `state` and then follow `policies`.
///
/// When neither the environment nor the policies are random every rollout
/// is identical, so a single one is computed.
pub fn monte_carlo_q<E: RolloutEnv>(
    env: &E,
    state: &E::State,
    first_actions: &[Vec<f64>],
    policies: &[&Policy],
    gamma: f64,
    cfg: &RolloutConfig,
    rng: &mut SeededRng,
) -> Result<MonteCarloEstimate> {
    let n = env.n_agents();
    check_dim("rollout policies", n, policies.len())?;
    check_dim("rollout first actions", n, first_actions.len())?;
    if cfg.n_rollouts == 0 || cfg.length == 0 {
        return Err(MarlError::InvalidHyperParams(
            "rollouts need a positive count and length".into(),
        ));
    }
    let rollouts = if env.is_deterministic() && cfg.action_noise == 0.0 {
        1
    } else {
        cfg.n_rollouts
    };
    let start = env.prepare(state, cfg.length);
    let mut returns = vec![Vec::with_capacity(rollouts); n];
    for _ in 0..rollouts {
        let (mut s, r0) = env.step(&start, first_actions, rng)?;
        let mut g = r0;
        let mut discount = 1.0;
        for _ in 1..cfg.length {
            discount *= gamma;
            let obs = env.observe(&s)?;
            let joint = select_actions(policies, &obs, cfg.action_noise, rng)?;
            let flat: Vec<Vec<f64>> = joint.iter().map(AgentAction::to_flat).collect();
            let (next, r) = env.step(&s, &flat, rng)?;
            for (gi, ri) in g.iter_mut().zip(r) {
                *gi += discount * ri;
            }
            s = next;
        }
        for (acc, gi) in returns.iter_mut().zip(g) {
            acc.push(gi);
        }
    }
    let mean: Vec<f64> = returns
        .iter()
        .map(|g| g.iter().sum::<f64>() / rollouts as f64)
        .collect();
    let variance = returns
        .iter()
        .zip(&mean)
        .map(|(g, m)| {
            if rollouts < 2 {
                0.0
            } else {
                g.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (rollouts - 1) as f64
            }
        })
        .collect();
    Ok(MonteCarloEstimate {
        mean,
        variance,
        rollouts,
    })
}

/// A state/joint-action pair at which the critics are probed.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeState<S> {
    pub state: S,
    pub obs: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
}

/// Up to `n` distinct transitions pushed after sequence number `marker`.
pub fn collect_probe_states(
    buffer: &ReplayBuffer,
    marker: u64,
    n: usize,
    rng: &mut SeededRng,
) -> Result<Vec<ProbeState<World>>> {
    let window = buffer.since(marker);
    if window.is_empty() {
        return Err(MarlError::EmptyProbeWindow { marker });
    }
    let take = n.min(window.len());
    let picks = index::sample(rng, window.len(), take).into_vec();
    picks
        .into_iter()
        .map(|k| {
            let (seq, t) = window[k];
            let world = t.world.clone().ok_or_else(|| {
                MarlError::Buffer(format!("transition {seq} carries no world snapshot"))
            })?;
            Ok(ProbeState {
                state: world,
                obs: t.obs.clone(),
                actions: t.actions.clone(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasReport {
    pub agent: usize,
    pub eval_step: u64,
    pub mean_estimated: f64,
    pub mean_true: f64,
    /// `mean_estimated - mean_true`.
    pub bias: f64,
    /// Half-width of a 95% interval across runs; `None` for a single run.
    pub ci95: Option<f64>,
    pub n: usize,
    /// Monte-Carlo standard error of `mean_true`.
    pub true_std_error: f64,
}

/// Bias of every agent's first critic over the probe states.
pub fn bias_report<E: RolloutEnv>(
    bundles: &[AgentBundle],
    probes: &[ProbeState<E::State>],
    env: &E,
    gamma: f64,
    cfg: &RolloutConfig,
    eval_step: u64,
    rng: &mut SeededRng,
) -> Result<Vec<BiasReport>> {
    if probes.is_empty() {
        return Err(MarlError::EmptyProbeWindow { marker: eval_step });
    }
    let n_agents = bundles.len();
    let policies: Vec<&Policy> = bundles.iter().map(|b| &b.policy).collect();
    let estimates: Vec<MonteCarloEstimate> = probes
        .iter()
        .map(|p| monte_carlo_q(env, &p.state, &p.actions, &policies, gamma, cfg, rng))
        .collect::<Result<_>>()?;

    let block = |get: &dyn Fn(&ProbeState<E::State>) -> &Vec<f64>| -> Result<Matrix2D> {
        let rows: Vec<&Vec<f64>> = probes.iter().map(|p| get(p)).collect();
        Ok(Matrix2D::from_rows(&rows)?)
    };
    let mut obs = Vec::with_capacity(n_agents);
    let mut acts = Vec::with_capacity(n_agents);
    for k in 0..n_agents {
        obs.push(block(&|p| &p.obs[k])?);
        acts.push(block(&|p| &p.actions[k])?);
    }
    let obs_refs: Vec<&Matrix2D> = obs.iter().collect();
    let act_refs: Vec<&Matrix2D> = acts.iter().collect();

    let n = probes.len() as f64;
    let mut reports = Vec::with_capacity(n_agents);
    for b in bundles {
        let input = b.critic_input(&obs_refs, &act_refs)?;
        let q = b.critics[0].forward_batch(&input)?.0.into_vec();
        let mean_estimated = q.iter().sum::<f64>() / n;
        let mean_true = estimates.iter().map(|e| e.mean[b.index]).sum::<f64>() / n;
        let var_sum: f64 = estimates
            .iter()
            .map(|e| e.variance[b.index] / e.rollouts as f64)
            .sum();
        reports.push(BiasReport {
            agent: b.index,
            eval_step,
            mean_estimated,
            mean_true,
            bias: mean_estimated - mean_true,
            ci95: None,
            n: probes.len(),
            true_std_error: var_sum.sqrt() / n,
        });
    }
    Ok(reports)
}

/// Two-state, two-action chain with stochastic transitions and one agent.
///
/// Observations are one-hot states; the action is one continuous component
/// read as action 1 when positive and action 0 otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStateChain {
    /// `stay[s][a]`: probability of remaining in `s` after action `a`.
    pub stay: [[f64; 2]; 2],
    /// `reward[s][a]`, paid on taking `a` in `s`.
    pub reward: [[f64; 2]; 2],
}

impl Default for TwoStateChain {
    fn default() -> Self {
        Self {
            stay: [[0.8, 0.3], [0.6, 0.1]],
            reward: [[1.0, -0.5], [0.0, 2.0]],
        }
    }
}

impl TwoStateChain {
    pub fn discrete_action(a: f64) -> usize {
        usize::from(a > 0.0)
    }

    /// Exact `Q(s, a)` under the deterministic `policy[s]` for a horizon of
    /// `len` steps, by backward induction.
    pub fn finite_horizon_q(&self, policy: [usize; 2], gamma: f64, len: usize) -> [[f64; 2]; 2] {
        let mut q = [[0.0; 2]; 2];
        for _ in 0..len {
            let v = [q[0][policy[0]], q[1][policy[1]]];
            let mut next = [[0.0; 2]; 2];
            for (s, row) in next.iter_mut().enumerate() {
                for (a, cell) in row.iter_mut().enumerate() {
                    let p = self.stay[s][a];
                    *cell = self.reward[s][a] + gamma * (p * v[s] + (1.0 - p) * v[1 - s]);
                }
            }
            q = next;
        }
        q
    }
}

impl RolloutEnv for TwoStateChain {
    type State = usize;

    fn n_agents(&self) -> usize {
        1
    }

    fn observe(&self, state: &usize) -> Result<Vec<Vec<f64>>> {
        let mut o = vec![0.0; 2];
        o[*state] = 1.0;
        Ok(vec![o])
    }

    fn step(
        &self,
        state: &usize,
        actions: &[Vec<f64>],
        rng: &mut SeededRng,
    ) -> Result<(usize, Vec<f64>)> {
        check_dim("chain actions", 1, actions.len())?;
        check_dim("chain action width", 1, actions[0].len())?;
        let s = *state;
        let a = Self::discrete_action(actions[0][0]);
        let next = if rng.random::<f64>() < self.stay[s][a] { s } else { 1 - s };
        Ok((next, vec![self.reward[s][a]]))
    }
}
