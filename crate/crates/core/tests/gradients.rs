mod common;

use common::*;
use marl_core::{critic_loss_and_grads, policy_objective_and_grads, AgentBundle, Algorithm, Batch};
use marl_nn::{DenseNet, Matrix2D, SeededRng};
use rand::Rng;

const H: f64 = 1e-6;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-4)
}

fn perturbed(net: &DenseNet, tensor: usize, idx: usize, delta: f64) -> DenseNet {
    let mut n = net.clone();
    n.param_slices_mut()[tensor][idx] += delta;
    n
}

fn critic_input(b: &AgentBundle, batch: &Batch) -> Matrix2D {
    let obs: Vec<_> = batch.obs.iter().collect();
    let acts: Vec<_> = batch.actions.iter().collect();
    b.critic_input(&obs, &acts).unwrap()
}

#[test]
fn critic_loss_gradient_matches_finite_differences() {
    let specs = mixed_specs();
    let mut rng = SeededRng::new(30);
    let mut worst: f64 = 0.0;
    for instance in 0..20u64 {
        let alg = [Algorithm::Maddpg, Algorithm::Matd3, Algorithm::IlTd3][instance as usize % 3];
        let bs = bundles(&specs, alg, 300 + instance);
        let b = &bs[instance as usize % specs.len()];
        let batch = random_batch(&specs, 12, &mut rng);
        let y: Vec<f64> = (0..12).map(|_| rng.random_range(-5.0..5.0)).collect();
        let input = critic_input(b, &batch);
        let critic = &b.critics[0];
        let (_, grads, _) = critic_loss_and_grads(critic, &input, &y).unwrap();
        for (t, g) in grads.slices().iter().enumerate() {
            for (i, &analytic) in g.iter().enumerate() {
                let plus = critic_loss_and_grads(&perturbed(critic, t, i, H), &input, &y).unwrap().0;
                let minus = critic_loss_and_grads(&perturbed(critic, t, i, -H), &input, &y).unwrap().0;
                let numeric = (plus - minus) / (2.0 * H);
                worst = worst.max(rel_err(analytic, numeric));
            }
        }
    }
    assert!(worst < 1e-5, "max relative error {worst}");
}

#[test]
fn policy_gradient_matches_finite_differences() {
    let specs = mixed_specs();
    let mut rng = SeededRng::new(31);
    let mut worst: f64 = 0.0;
    for instance in 0..20u64 {
        let alg = [Algorithm::Maddpg, Algorithm::Matd3, Algorithm::IlTd3][instance as usize % 3];
        let bs = bundles(&specs, alg, 400 + instance);
        // Cycles through both movement agents and the speaker.
        let b = &bs[instance as usize % specs.len()];
        let batch = random_batch(&specs, 10, &mut rng);
        let (_, grads) = policy_objective_and_grads(b, &batch).unwrap();
        for (t, g) in grads.slices().iter().enumerate() {
            for (i, &analytic) in g.iter().enumerate() {
                let objective = |delta: f64| {
                    let mut p = b.clone();
                    p.policy.net_mut().param_slices_mut()[t][i] += delta;
                    policy_objective_and_grads(&p, &batch).unwrap().0
                };
                let numeric = (objective(H) - objective(-H)) / (2.0 * H);
                worst = worst.max(rel_err(analytic, numeric));
            }
        }
    }
    assert!(worst < 1e-5, "max relative error {worst}");
}

#[test]
fn policy_objective_uses_the_first_critic_and_batch_actions() {
    let specs = mixed_specs();
    let mut rng = SeededRng::new(32);
    let bs = bundles(&specs, Algorithm::Matd3, 33);
    let b = &bs[1];
    let batch = random_batch(&specs, 9, &mut rng);
    let (j, _) = policy_objective_and_grads(b, &batch).unwrap();
    let mut want = 0.0;
    for r in 0..batch.len() {
        let obs = row(&batch.obs, r);
        let mut acts = row(&batch.actions, r);
        acts[1] = b.policy.act(&obs[1]).unwrap();
        want += b.critics[0].predict(&critic_row(b, &obs, &acts)).unwrap()[0];
    }
    want /= batch.len() as f64;
    assert!((j - want).abs() < 1e-12);
}
