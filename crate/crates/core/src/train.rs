use std::fmt::Write as _;

use marl_nn::{gumbel_softmax, SeededRng};
use particle_env::{AgentAction, Environment};
use rand::Rng;

use crate::algo::{
    critic_update, maddpg_critic_target, matd3_critic_target, policy_update, select_actions,
    update_targets,
};
use crate::buffer::{ReplayBuffer, Transition};
use crate::bundle::AgentBundle;
use crate::error::{MarlError, Result};
use crate::hyper::{Algorithm, HyperParams};
use crate::policy::Policy;
use crate::probe::{bias_report, collect_probe_states, BiasReport, RolloutConfig};

pub const METRICS_HEADER: &str = "episode,step,agent,episodic_reward,critic_loss_1,critic_loss_2,policy_grad_norm,critic_updates,policy_updates";

/// One row per agent per episode. Losses and gradient norms are episode
/// means and are absent when no update happened.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub episode: usize,
    /// Environment steps taken so far.
    pub step: u64,
    pub agent: usize,
    /// Undiscounted sum of the agent's rewards over the episode.
    pub episodic_reward: f64,
    pub critic_loss_1: Option<f64>,
    pub critic_loss_2: Option<f64>,
    pub policy_grad_norm: Option<f64>,
    pub critic_updates: u64,
    pub policy_updates: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsLog {
    pub rows: Vec<MetricsRow>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl MetricsLog {
    /// CSV text; each `comments` entry becomes a leading `# ` line.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut s = String::new();
        for c in comments {
            writeln!(s, "# {c}").unwrap();
        }
        writeln!(s, "{METRICS_HEADER}").unwrap();
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.episode,
                r.step,
                r.agent,
                r.episodic_reward,
                opt(r.critic_loss_1),
                opt(r.critic_loss_2),
                opt(r.policy_grad_norm),
                r.critic_updates,
                r.policy_updates
            )
            .unwrap();
        }
        s
    }

    pub fn n_episodes(&self) -> usize {
        self.rows.last().map_or(0, |r| r.episode + 1)
    }

    /// Per-episode reward averaged over the selected agents.
    pub fn episode_rewards(&self, agents: Option<&[usize]>) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_episodes()];
        let mut counts = vec![0usize; self.n_episodes()];
        for r in &self.rows {
            if agents.is_none_or(|a| a.contains(&r.agent)) {
                sums[r.episode] += r.episodic_reward;
                counts[r.episode] += 1;
            }
        }
        sums.iter()
            .zip(counts)
            .map(|(s, c)| if c == 0 { f64::NAN } else { s / c as f64 })
            .collect()
    }
}

/// When and how the critic bias is measured during training.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSchedule {
    /// Environment steps between evaluations.
    pub interval: u64,
    pub n_states: usize,
    pub rollout: RolloutConfig,
}

impl Default for ProbeSchedule {
    fn default() -> Self {
        Self {
            interval: 1000,
            n_states: 100,
            rollout: RolloutConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainOptions {
    pub probe: Option<ProbeSchedule>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub metrics: MetricsLog,
    pub bias: Vec<BiasReport>,
    pub bundles: Vec<AgentBundle>,
    pub total_steps: u64,
}

#[derive(Default, Clone, Copy)]
struct Mean {
    sum: f64,
    count: usize,
}

impl Mean {
    fn add(&mut self, x: f64) {
        self.sum += x;
        self.count += 1;
    }

    fn get(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }
}

struct Streams {
    env: SeededRng,
    explore: SeededRng,
    sample: SeededRng,
    smoothing: SeededRng,
    probe: SeededRng,
}

/// Runs `hp.episodes` episodes of `hp.steps_per_episode` steps. Once the
/// buffer holds `hp.warmup()` transitions, every environment step performs
/// one critic update per agent and, when the clock allows, a policy update
/// followed by a target update.
pub fn train(
    env: &Environment,
    algorithm: Algorithm,
    hp: &HyperParams,
    seed: u64,
    options: &TrainOptions,
) -> Result<TrainOutcome> {
    hp.validate()?;
    let env = env.clone().with_horizon(hp.steps_per_episode);
    let root = SeededRng::new(seed);
    let mut init = root.fork("init");
    let mut rng = Streams {
        env: root.fork("env"),
        explore: root.fork("explore"),
        sample: root.fork("sample"),
        smoothing: root.fork("smoothing"),
        probe: root.fork("probe"),
    };
    let mut bundles = AgentBundle::build_all(env.agent_specs(), algorithm, hp, &mut init)?;
    let mut buffer = ReplayBuffer::new(hp.buffer_capacity)?;
    let n = env.n_agents();
    let mut metrics = MetricsLog::default();
    let mut bias = Vec::new();
    let mut total_steps = 0u64;
    let mut marker = 0u64;

    for episode in 0..hp.episodes {
        let (mut world, mut obs) = env.reset(&mut rng.env).map_err(|e| MarlError::from(e).at(episode, 0))?;
        let mut returns = vec![0.0; n];
        let mut losses = vec![[Mean::default(); 2]; n];
        let mut grad_norms = vec![Mean::default(); n];
        for step in 0..hp.steps_per_episode {
            let at = |e: MarlError| e.at(episode, step);
            let policies: Vec<&Policy> = bundles.iter().map(|b| &b.policy).collect();
            let joint = select_actions(&policies, &obs, hp.exploration_noise, &mut rng.explore)
                .map_err(at)?;
            let (next_world, result) = env.step(&world, &joint).map_err(|e| at(e.into()))?;
            for (g, r) in returns.iter_mut().zip(&result.rewards) {
                *g += r;
            }
            buffer
                .push(Transition {
                    obs: obs.clone(),
                    actions: joint.iter().map(AgentAction::to_flat).collect(),
                    rewards: result.rewards.clone(),
                    next_obs: result.observations.clone(),
                    done: result.done,
                    world: options.probe.as_ref().map(|_| world.clone()),
                })
                .map_err(at)?;
            total_steps += 1;

            if buffer.len() >= hp.warmup() {
                for i in 0..n {
                    let batch = buffer.sample(hp.batch_size, &mut rng.sample).map_err(at)?;
                    let y = match algorithm {
                        Algorithm::Maddpg => maddpg_critic_target(&bundles, i, &batch, hp),
                        _ => matd3_critic_target(&bundles, i, &batch, hp, &mut rng.smoothing),
                    }
                    .map_err(at)?;
                    let b = &mut bundles[i];
                    let l = critic_update(b, &batch, &y, hp.lr).map_err(at)?;
                    for (m, x) in losses[i].iter_mut().zip(l) {
                        m.add(x);
                    }
                    if b.clock.policy_due() {
                        grad_norms[i].add(policy_update(b, &batch, hp.lr).map_err(at)?);
                        update_targets(b, hp.tau).map_err(at)?;
                    }
                }
            }

            if let Some(schedule) = &options.probe {
                if total_steps % schedule.interval == 0 {
                    let probes =
                        collect_probe_states(&buffer, marker, schedule.n_states, &mut rng.probe)
                            .map_err(at)?;
                    let reports = bias_report(
                        &bundles,
                        &probes,
                        &env,
                        hp.gamma,
                        &schedule.rollout,
                        total_steps,
                        &mut rng.probe,
                    )
                    .map_err(at)?;
                    bias.extend(reports);
                    marker = buffer.total_pushed();
                }
            }

            world = next_world;
            obs = result.observations;
        }
        for (i, b) in bundles.iter().enumerate() {
            metrics.rows.push(MetricsRow {
                episode,
                step: total_steps,
                agent: i,
                episodic_reward: returns[i],
                critic_loss_1: losses[i][0].get(),
                critic_loss_2: losses[i][1].get(),
                policy_grad_norm: grad_norms[i].get(),
                critic_updates: b.clock.critic_updates(),
                policy_updates: b.clock.policy_updates(),
            });
        }
    }
    Ok(TrainOutcome {
        metrics,
        bias,
        bundles,
        total_steps,
    })
}

/// Episodic rewards of uniformly random behaviour: movement uniform in the
/// action box, messages drawn as Gumbel-softmax samples of flat logits.
/// Returns one vector of per-agent returns per episode.
pub fn random_baseline(
    env: &Environment,
    episodes: usize,
    steps_per_episode: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let env = env.clone().with_horizon(steps_per_episode);
    let root = SeededRng::new(seed);
    let mut env_rng = root.fork("env");
    let mut act_rng = root.fork("random-actions");
    let mut out = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let (mut world, _) = env.reset(&mut env_rng)?;
        let mut returns = vec![0.0; env.n_agents()];
        for _ in 0..steps_per_episode {
            let joint = env
                .agent_specs()
                .iter()
                .map(|s| {
                    Ok(AgentAction {
                        movement: (0..s.movement_dim)
                            .map(|_| act_rng.random_range(-1.0..=1.0))
                            .collect(),
                        comm: if s.comm_dim > 0 {
                            gumbel_softmax(&vec![0.0; s.comm_dim], 1.0, &mut act_rng)?
                        } else {
                            Vec::new()
                        },
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let (next, result) = env.step(&world, &joint)?;
            for (g, r) in returns.iter_mut().zip(&result.rewards) {
                *g += r;
            }
            world = next;
        }
        out.push(returns);
    }
    Ok(out)
}
