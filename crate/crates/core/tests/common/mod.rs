#![allow(dead_code)]

use marl_core::{AgentBundle, Algorithm, Batch, HyperParams, Policy, Transition};
use marl_nn::{DenseNet, Matrix2D, OutputActivation, SeededRng};
use particle_env::{AgentSpec, Team};
use rand::Rng;

pub fn spec(movement_dim: usize, comm_dim: usize, obs_dim: usize) -> AgentSpec {
    AgentSpec {
        name: format!("agent_m{movement_dim}_c{comm_dim}"),
        team: Team::Good,
        movement_dim,
        comm_dim,
        obs_dim,
    }
}

/// Two movers and a speaker.
pub fn mixed_specs() -> Vec<AgentSpec> {
    vec![spec(2, 0, 5), spec(2, 0, 4), spec(0, 3, 3)]
}

pub fn small_hp() -> HyperParams {
    HyperParams {
        hidden: vec![7, 5],
        ..HyperParams::default()
    }
}

pub fn bundles(specs: &[AgentSpec], algorithm: Algorithm, seed: u64) -> Vec<AgentBundle> {
    let mut rng = SeededRng::new(seed);
    AgentBundle::build_all(specs, algorithm, &small_hp(), &mut rng).unwrap()
}

pub fn random_action(spec: &AgentSpec, rng: &mut SeededRng) -> Vec<f64> {
    if spec.comm_dim > 0 {
        let w: Vec<f64> = (0..spec.comm_dim).map(|_| rng.random_range(0.01..1.0)).collect();
        let s: f64 = w.iter().sum();
        w.iter().map(|x| x / s).collect()
    } else {
        (0..spec.movement_dim).map(|_| rng.random_range(-1.0..=1.0)).collect()
    }
}

pub fn random_transition(specs: &[AgentSpec], rng: &mut SeededRng) -> Transition {
    let obs = |rng: &mut SeededRng| -> Vec<Vec<f64>> {
        specs
            .iter()
            .map(|s| (0..s.obs_dim).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect()
    };
    Transition {
        obs: obs(rng),
        actions: specs.iter().map(|s| random_action(s, rng)).collect(),
        rewards: specs.iter().map(|_| rng.random_range(-3.0..1.0)).collect(),
        next_obs: obs(rng),
        done: rng.random_bool(0.2),
        world: None,
    }
}

pub fn random_batch(specs: &[AgentSpec], size: usize, rng: &mut SeededRng) -> Batch {
    let ts: Vec<Transition> = (0..size).map(|_| random_transition(specs, rng)).collect();
    Batch::from_transitions(&ts.iter().collect::<Vec<_>>()).unwrap()
}

/// Row `r` of the per-agent blocks as vectors.
pub fn row(blocks: &[Matrix2D], r: usize) -> Vec<Vec<f64>> {
    blocks.iter().map(|m| m.row(r).to_vec()).collect()
}

/// Critic input for one sample, assembled from scratch.
pub fn critic_row(b: &AgentBundle, obs: &[Vec<f64>], actions: &[Vec<f64>]) -> Vec<f64> {
    if b.algorithm == Algorithm::IlTd3 {
        [obs[b.index].clone(), actions[b.index].clone()].concat()
    } else {
        [obs.concat(), actions.concat()].concat()
    }
}

/// Single-critic bundle sharing `b`'s policy and first critic.
pub fn single_critic_copy(b: &AgentBundle) -> AgentBundle {
    let mut m = AgentBundle::from_parts(
        b.index,
        Algorithm::Maddpg,
        b.policy.clone(),
        vec![b.critics[0].clone()],
        b.obs_dims().to_vec(),
        b.action_dims().to_vec(),
        1,
    )
    .unwrap();
    m.target_policy = b.target_policy.clone();
    m.target_critics = vec![b.target_critics[0].clone()];
    m
}

/// Policy that plays `+1` in state 1 and `-1` in state 0 of a one-hot
/// two-state observation, up to the sigmoid's saturation.
pub fn chain_policy() -> Policy {
    let w0 = Matrix2D::from_rows(&[[0.0, 1.0]]).unwrap();
    let w1 = Matrix2D::from_rows(&[[40.0]]).unwrap();
    let net = DenseNet::from_parts(
        vec![w0, w1],
        vec![vec![0.0], vec![-20.0]],
        OutputActivation::SigmoidScaled { lo: -1.0, hi: 1.0 },
    )
    .unwrap();
    Policy::from_net(net, 1, 0, 1.0).unwrap()
}

/// Exact tabular critic on inputs `[s0, s1, a]` with `a` in `{-1, 1}`.
pub fn tabular_critic(q: [[f64; 2]; 2]) -> DenseNet {
    let w0 = Matrix2D::from_rows(&[
        [1.0, 0.0, -1.0],
        [1.0, 0.0, 1.0],
        [0.0, 1.0, -1.0],
        [0.0, 1.0, 1.0],
    ])
    .unwrap();
    let w1 = Matrix2D::from_rows(&[[q[0][0], q[0][1], q[1][0], q[1][1]]]).unwrap();
    DenseNet::from_parts(
        vec![w0, w1],
        vec![vec![-1.0; 4], vec![0.0]],
        OutputActivation::Identity,
    )
    .unwrap()
}
