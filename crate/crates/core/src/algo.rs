use marl_nn::{
    clipped_gaussian, gumbel_softmax, soft_update, DenseNet, Matrix2D, NetGrads, SeededRng,
};
use particle_env::{AgentAction, JointAction};
use rand_distr::{Distribution, Normal};

use crate::buffer::Batch;
use crate::bundle::AgentBundle;
use crate::error::{check_dim, MarlError, Result};
use crate::hyper::HyperParams;
use crate::policy::{Policy, MOVEMENT_BOUNDS};

/// Behaviour actions for one environment step.
///
/// Movement gets Gaussian noise with std `noise_scale * (hi - lo)` and is
/// clamped to the bounds. Messages are Gumbel-softmax samples while
/// `noise_scale > 0` and the plain softmax otherwise.
pub fn select_actions(
    policies: &[&Policy],
    observations: &[Vec<f64>],
    noise_scale: f64,
    rng: &mut SeededRng,
) -> Result<JointAction> {
    check_dim("select_actions observations", policies.len(), observations.len())?;
    if !(noise_scale >= 0.0) {
        return Err(MarlError::InvalidHyperParams(format!(
            "noise scale must be >= 0, got {noise_scale}"
        )));
    }
    let (lo, hi) = MOVEMENT_BOUNDS;
    let std = noise_scale * (hi - lo);
    let mut joint = Vec::with_capacity(policies.len());
    for (p, o) in policies.iter().zip(observations) {
        if p.comm_dim() > 0 {
            let msg = if noise_scale > 0.0 {
                gumbel_softmax(&p.logits(o)?, p.comm_temperature(), rng)?
            } else {
                p.act(o)?
            };
            joint.push(AgentAction::comm(msg));
        } else {
            let mut m = p.act(o)?;
            if std > 0.0 {
                let normal = Normal::new(0.0, std).expect("std validated");
                for x in m.iter_mut() {
                    *x = (*x + normal.sample(rng)).clamp(lo, hi);
                }
            }
            joint.push(AgentAction {
                movement: m,
                comm: Vec::new(),
            });
        }
    }
    Ok(joint)
}

/// Target-policy actions `mu'_k(o'_k) + eps` for the listed agents, with
/// `eps = clip(N(0, sigma), -c, c)` added to movement components and the
/// result clamped to the movement bounds. Message components are left
/// unperturbed.
pub fn target_actions(
    bundles: &[AgentBundle],
    agents: &[usize],
    next_obs: &[Matrix2D],
    sigma: f64,
    clip: f64,
    rng: &mut SeededRng,
) -> Result<Vec<Matrix2D>> {
    let (lo, hi) = MOVEMENT_BOUNDS;
    let mut out = Vec::with_capacity(agents.len());
    for &k in agents {
        let policy = &bundles[k].target_policy;
        let (mut a, _) = policy.act_batch(&next_obs[k])?;
        if policy.comm_dim() == 0 && sigma > 0.0 && clip > 0.0 {
            let eps = clipped_gaussian(a.data().len(), sigma, clip, rng)?;
            for (x, e) in a.data_mut().iter_mut().zip(eps) {
                *x = (*x + e).clamp(lo, hi);
            }
        }
        out.push(a);
    }
    Ok(out)
}

fn bootstrap_values(
    bundles: &[AgentBundle],
    agent: usize,
    batch: &Batch,
    sigma: f64,
    clip: f64,
    rng: &mut SeededRng,
) -> Result<Vec<Vec<f64>>> {
    let b = &bundles[agent];
    check_dim("batch agents", b.n_agents(), batch.n_agents())?;
    check_dim("bundle count", b.n_agents(), bundles.len())?;
    let who = b.critic_agents();
    let acts = target_actions(bundles, &who, &batch.next_obs, sigma, clip, rng)?;
    let mut action_refs: Vec<&Matrix2D> = batch.actions.iter().collect();
    for (k, a) in who.iter().zip(&acts) {
        action_refs[*k] = a;
    }
    let obs_refs: Vec<&Matrix2D> = batch.next_obs.iter().collect();
    let input = b.critic_input(&obs_refs, &action_refs)?;
    b.target_critics
        .iter()
        .map(|c| Ok(c.forward_batch(&input)?.0.into_vec()))
        .collect()
}

fn assemble_target(
    agent: usize,
    batch: &Batch,
    values: Vec<f64>,
    hp: &HyperParams,
) -> Vec<f64> {
    batch.rewards[agent]
        .iter()
        .zip(values)
        .zip(&batch.done)
        .map(|((r, q), &done)| {
            if done && !hp.bootstrap_on_done {
                *r
            } else {
                r + hp.gamma * q
            }
        })
        .collect()
}

/// `y = r_i + gamma * min_j Q'_{i,j}(x', a'_1, ..., a'_N)` with smoothed
/// target actions for every agent.
pub fn matd3_critic_target(
    bundles: &[AgentBundle],
    agent: usize,
    batch: &Batch,
    hp: &HyperParams,
    rng: &mut SeededRng,
) -> Result<Vec<f64>> {
    let b = &bundles[agent];
    if b.target_critics.len() != 2 {
        return Err(MarlError::VariantMismatch(format!(
            "twin-critic target needs two critics, agent {agent} has {}",
            b.target_critics.len()
        )));
    }
    let qs = bootstrap_values(bundles, agent, batch, hp.smoothing_sigma, hp.smoothing_clip, rng)?;
    let min: Vec<f64> = qs[0].iter().zip(&qs[1]).map(|(a, b)| a.min(*b)).collect();
    Ok(assemble_target(agent, batch, min, hp))
}

/// `y = r_i + gamma * Q'_i(x', mu'_1(o'_1), ..., mu'_N(o'_N))`.
pub fn maddpg_critic_target(
    bundles: &[AgentBundle],
    agent: usize,
    batch: &Batch,
    hp: &HyperParams,
) -> Result<Vec<f64>> {
    let b = &bundles[agent];
    if b.target_critics.len() != 1 {
        return Err(MarlError::VariantMismatch(format!(
            "single-critic target called on agent {agent} with {} critics",
            b.target_critics.len()
        )));
    }
    // No noise is drawn, so the generator is never advanced.
    let mut unused = SeededRng::new(0);
    let mut qs = bootstrap_values(bundles, agent, batch, 0.0, 0.0, &mut unused)?;
    Ok(assemble_target(agent, batch, qs.remove(0), hp))
}

/// Mean squared error `(1/S) sum (Q(input) - y)^2`, its parameter gradient
/// and the predictions.
pub fn critic_loss_and_grads(
    critic: &DenseNet,
    input: &Matrix2D,
    y: &[f64],
) -> Result<(f64, NetGrads, Vec<f64>)> {
    check_dim("critic targets", input.rows(), y.len())?;
    let (q, cache) = critic.forward_batch(input)?;
    let q = q.into_vec();
    let s = y.len() as f64;
    let loss = q.iter().zip(y).map(|(q, y)| (q - y).powi(2)).sum::<f64>() / s;
    let upstream: Vec<f64> = q.iter().zip(y).map(|(q, y)| 2.0 * (q - y) / s).collect();
    if !upstream.iter().all(|g| g.is_finite()) {
        return Ok((f64::NAN, NetGrads::zeros_like(critic), q));
    }
    let upstream = Matrix2D::from_vec(y.len(), 1, upstream)?;
    let (grads, _) = critic.backward_batch(&cache, &upstream)?;
    Ok((loss, grads, q))
}

/// One Adam step on every critic of `bundle` toward the shared target `y`.
/// Returns the loss of each critic before the step.
pub fn critic_update(
    bundle: &mut AgentBundle,
    batch: &Batch,
    y: &[f64],
    lr: f64,
) -> Result<Vec<f64>> {
    let obs: Vec<&Matrix2D> = batch.obs.iter().collect();
    let acts: Vec<&Matrix2D> = batch.actions.iter().collect();
    let input = bundle.critic_input(&obs, &acts)?;
    let mut losses = Vec::with_capacity(bundle.critics.len());
    let mut steps = Vec::with_capacity(bundle.critics.len());
    for (k, critic) in bundle.critics.iter().enumerate() {
        let (loss, grads, q) = critic_loss_and_grads(critic, &input, y)?;
        if !loss.is_finite() || !grads.is_finite() {
            let batch_index = q
                .iter()
                .zip(y)
                .position(|(q, y)| !(q - y).is_finite())
                .unwrap_or(0);
            return Err(MarlError::NonFiniteLoss {
                agent: bundle.index,
                critic: k + 1,
                batch_index,
                q: q.get(batch_index).copied().unwrap_or(f64::NAN),
                y: y.get(batch_index).copied().unwrap_or(f64::NAN),
            });
        }
        losses.push(loss);
        steps.push(grads);
    }
    for ((critic, adam), grads) in bundle
        .critics
        .iter_mut()
        .zip(bundle.critic_adams.iter_mut())
        .zip(&steps)
    {
        adam.step_net(critic, grads, lr)?;
    }
    bundle.clock.record_critic_update();
    Ok(losses)
}

/// `J = (1/S) sum Q_{i,1}(x, a_1, ..., mu_i(o_i), ..., a_N)` with the other
/// agents' actions taken from the batch, and its gradient with respect to
/// the policy parameters.
pub fn policy_objective_and_grads(bundle: &AgentBundle, batch: &Batch) -> Result<(f64, NetGrads)> {
    let i = bundle.index;
    let (mu, pcache) = bundle.policy.act_batch(&batch.obs[i])?;
    let obs: Vec<&Matrix2D> = batch.obs.iter().collect();
    let mut acts: Vec<&Matrix2D> = batch.actions.iter().collect();
    acts[i] = &mu;
    let input = bundle.critic_input(&obs, &acts)?;
    let critic = &bundle.critics[0];
    let (q, ccache) = critic.forward_batch(&input)?;
    let s = batch.len() as f64;
    let j = q.data().iter().sum::<f64>() / s;
    let upstream = Matrix2D::from_vec(batch.len(), 1, vec![1.0 / s; batch.len()])?;
    let dx = critic.input_grad_batch(&ccache, &upstream)?;
    let da = dx.columns(bundle.own_action_offset(), bundle.policy.action_dim());
    let grads = bundle.policy.backward_batch(&pcache, &da)?;
    Ok((j, grads))
}

/// Adam ascent step on the policy objective. Fails unless the update clock
/// allows a policy update. Returns the gradient norm.
pub fn policy_update(bundle: &mut AgentBundle, batch: &Batch, lr: f64) -> Result<f64> {
    if !bundle.clock.policy_due() {
        return Err(MarlError::ClockViolation {
            critic_updates: bundle.clock.critic_updates(),
            policy_updates: bundle.clock.policy_updates(),
            delay: bundle.clock.delay(),
        });
    }
    let (_, mut grads) = policy_objective_and_grads(bundle, batch)?;
    let norm = grads.l2_norm();
    grads.scale(-1.0);
    bundle
        .policy_adam
        .step_net(bundle.policy.net_mut(), &grads, lr)?;
    bundle.clock.record_policy_update()?;
    Ok(norm)
}

/// Polyak update of the target policy and every target critic.
pub fn update_targets(bundle: &mut AgentBundle, tau: f64) -> Result<()> {
    if !bundle.clock.target_due() {
        return Err(MarlError::ClockViolation {
            critic_updates: bundle.clock.critic_updates(),
            policy_updates: bundle.clock.policy_updates(),
            delay: bundle.clock.delay(),
        });
    }
    soft_update(bundle.target_policy.net_mut(), bundle.policy.net(), tau)?;
    for (t, c) in bundle.target_critics.iter_mut().zip(&bundle.critics) {
        soft_update(t, c, tau)?;
    }
    bundle.clock.record_target_update()
}
