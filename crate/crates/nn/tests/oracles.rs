//! Independent oracles for the network math: naive loops, central finite
//! differences, closed forms and distributional checks.

use marl_nn::{
    adam_step, clipped_gaussian, decode_net, encode_net, gumbel_softmax, soft_update, AdamState,
    DenseNet, Matrix2D, OutputActivation, SeededRng,
};
use proptest::prelude::*;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

fn oracle_forward(net: &DenseNet, input: &[f64]) -> Vec<f64> {
    let mut a = input.to_vec();
    let last = net.num_layers() - 1;
    for k in 0..net.num_layers() {
        let w = &net.weights()[k];
        let b = &net.biases()[k];
        let mut z = vec![0.0; w.rows()];
        for i in 0..w.rows() {
            let mut s = b[i];
            for j in 0..w.cols() {
                s += w.get(i, j) * a[j];
            }
            z[i] = s;
        }
        a = if k < last {
            z.iter().map(|v| v.max(0.0)).collect()
        } else {
            match net.output_activation() {
                OutputActivation::Identity => z,
                OutputActivation::SigmoidScaled { lo, hi } => z
                    .iter()
                    .map(|v| lo + (hi - lo) / (1.0 + (-v).exp()))
                    .collect(),
            }
        };
    }
    a
}

fn random_input(rng: &mut SeededRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.5..1.5)).collect()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-4)
}

/// Max relative error between analytic and central-difference gradients of
/// `L = sum_k c_k * y_k` over every parameter and every input coordinate.
fn gradient_check(net: &DenseNet, input: &[f64], coeffs: &[f64]) -> f64 {
    let h = 1e-5;
    let loss = |n: &DenseNet, x: &[f64]| -> f64 {
        oracle_forward(n, x)
            .iter()
            .zip(coeffs)
            .map(|(y, c)| y * c)
            .sum()
    };
    let (_, cache) = net.forward(input).unwrap();
    let (grads, input_grad) = net.backward(&cache, coeffs).unwrap();

    let mut worst: f64 = 0.0;
    let analytic = grads.slices();
    let n_tensors = analytic.len();
    for t in 0..n_tensors {
        for i in 0..analytic[t].len() {
            let mut plus = net.clone();
            plus.param_slices_mut()[t][i] += h;
            let mut minus = net.clone();
            minus.param_slices_mut()[t][i] -= h;
            let fd = (loss(&plus, input) - loss(&minus, input)) / (2.0 * h);
            worst = worst.max(rel_err(analytic[t][i], fd));
        }
    }
    for i in 0..input.len() {
        let mut plus = input.to_vec();
        plus[i] += h;
        let mut minus = input.to_vec();
        minus[i] -= h;
        let fd = (loss(net, &plus) - loss(net, &minus)) / (2.0 * h);
        worst = worst.max(rel_err(input_grad[i], fd));
    }
    worst
}

#[test]
fn forward_matches_triple_loop_oracle() {
    let mut rng = SeededRng::new(42);
    let net = DenseNet::new(&[4, 6, 6, 2], OutputActivation::Identity, &mut rng).unwrap();
    for _ in 0..50 {
        let x = random_input(&mut rng, 4);
        let got = net.predict(&x).unwrap();
        let expect = oracle_forward(&net, &x);
        for (g, e) in got.iter().zip(&expect) {
            assert!((g - e).abs() < 1e-12);
        }
    }
}

#[test]
fn batched_forward_matches_oracle() {
    let mut rng = SeededRng::new(43);
    let net = DenseNet::new(
        &[5, 8, 8, 3],
        OutputActivation::SigmoidScaled { lo: -2.0, hi: 1.0 },
        &mut rng,
    )
    .unwrap();
    let rows: Vec<Vec<f64>> = (0..17).map(|_| random_input(&mut rng, 5)).collect();
    let (out, _) = net.forward_batch(&Matrix2D::from_rows(&rows).unwrap()).unwrap();
    for (r, row) in rows.iter().enumerate() {
        for (g, e) in out.row(r).iter().zip(oracle_forward(&net, row)) {
            assert!((g - e).abs() < 1e-12);
        }
    }
}

#[test]
fn backward_matches_finite_differences_on_4_6_6_2() {
    let mut rng = SeededRng::new(7);
    for _ in 0..5 {
        let net = DenseNet::new(&[4, 6, 6, 2], OutputActivation::Identity, &mut rng).unwrap();
        let x = random_input(&mut rng, 4);
        let c = random_input(&mut rng, 2);
        let err = gradient_check(&net, &x, &c);
        assert!(err < 1e-6, "max relative error {err}");
    }
}

#[test]
fn batched_backward_sums_per_sample_gradients() {
    let mut rng = SeededRng::new(8);
    let net = DenseNet::new(&[3, 5, 2], OutputActivation::Identity, &mut rng).unwrap();
    let rows: Vec<Vec<f64>> = (0..6).map(|_| random_input(&mut rng, 3)).collect();
    let ups: Vec<Vec<f64>> = (0..6).map(|_| random_input(&mut rng, 2)).collect();
    let (_, cache) = net.forward_batch(&Matrix2D::from_rows(&rows).unwrap()).unwrap();
    let (batch_grads, batch_in) = net
        .backward_batch(&cache, &Matrix2D::from_rows(&ups).unwrap())
        .unwrap();
    let mut summed = vec![0.0; net.num_params()];
    for (r, (x, u)) in rows.iter().zip(&ups).enumerate() {
        let (_, c) = net.forward(x).unwrap();
        let (g, gi) = net.backward(&c, u).unwrap();
        for (s, v) in summed.iter_mut().zip(g.slices().concat()) {
            *s += v;
        }
        for (a, b) in gi.iter().zip(batch_in.row(r)) {
            assert!((a - b).abs() < 1e-13);
        }
    }
    for (a, b) in summed.iter().zip(batch_grads.slices().concat()) {
        assert!((a - b).abs() < 1e-12);
    }
    let only_input = net
        .input_grad_batch(&cache, &Matrix2D::from_rows(&ups).unwrap())
        .unwrap();
    assert_eq!(only_input, batch_in);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gradients_sound_up_to_three_hidden_layers(
        seed in any::<u64>(),
        hidden in prop::collection::vec(1usize..7, 0..=3),
        n_in in 1usize..5,
        n_out in 1usize..4,
        sigmoid in any::<bool>(),
    ) {
        let mut rng = SeededRng::new(seed);
        let mut sizes = vec![n_in];
        sizes.extend(&hidden);
        sizes.push(n_out);
        let act = if sigmoid {
            OutputActivation::SigmoidScaled { lo: -1.0, hi: 1.0 }
        } else {
            OutputActivation::Identity
        };
        let net = DenseNet::new(&sizes, act, &mut rng).unwrap();
        let x = random_input(&mut rng, n_in);
        let c = random_input(&mut rng, n_out);
        let err = gradient_check(&net, &x, &c);
        prop_assert!(err < 1e-6, "max relative error {}", err);
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact(seed in any::<u64>(), steps in 0usize..4) {
        let mut rng = SeededRng::new(seed);
        let act = OutputActivation::SigmoidScaled { lo: -1.0, hi: 1.0 };
        let mut net = DenseNet::new(&[3, 4, 2], act, &mut rng).unwrap();
        let mut adam = AdamState::for_net(&net);
        for _ in 0..steps {
            let x = random_input(&mut rng, 3);
            let (_, cache) = net.forward(&x).unwrap();
            let (g, _) = net.backward(&cache, &[1.0, -0.5]).unwrap();
            adam.step_net(&mut net, &g, 0.01).unwrap();
        }
        let bytes = encode_net(&net, Some(&adam)).unwrap();
        let (back, back_adam, used) = decode_net(&bytes).unwrap();
        prop_assert_eq!(used, bytes.len());
        prop_assert_eq!(encode_net(&back, back_adam.as_ref()).unwrap(), bytes);
        prop_assert_eq!(&back, &net);
        prop_assert_eq!(back_adam.as_ref(), Some(&adam));
    }

    #[test]
    fn gumbel_softmax_lands_on_simplex(
        seed in any::<u64>(),
        logits in prop::collection::vec(-5.0f64..5.0, 2..8),
        temperature in 0.5f64..5.0,
    ) {
        let mut rng = SeededRng::new(seed);
        let y = gumbel_softmax(&logits, temperature, &mut rng).unwrap();
        prop_assert!((y.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(y.iter().all(|&p| p > 0.0 && p < 1.0));
    }

    #[test]
    fn soft_update_contracts_by_one_minus_tau(seed in any::<u64>(), tau in 0.001f64..1.0) {
        let mut rng = SeededRng::new(seed);
        let source = DenseNet::new(&[3, 5, 2], OutputActivation::Identity, &mut rng).unwrap();
        let mut target = DenseNet::new(&[3, 5, 2], OutputActivation::Identity, &mut rng).unwrap();
        let dist = |a: &DenseNet, b: &DenseNet| -> f64 {
            a.param_slices().concat().iter().zip(b.param_slices().concat())
                .map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
        };
        let before = dist(&target, &source);
        soft_update(&mut target, &source, tau).unwrap();
        let after = dist(&target, &source);
        prop_assert!((after - (1.0 - tau) * before).abs() < 1e-12 * (1.0 + before));
    }
}

#[test]
fn identical_seeds_give_bitwise_identical_training() {
    let run = || {
        let mut rng = SeededRng::new(99);
        let mut net = DenseNet::new(&[4, 8, 8, 2], OutputActivation::Identity, &mut rng).unwrap();
        let mut adam = AdamState::for_net(&net);
        for _ in 0..20 {
            let rows: Vec<Vec<f64>> = (0..8).map(|_| random_input(&mut rng, 4)).collect();
            let (out, cache) = net.forward_batch(&Matrix2D::from_rows(&rows).unwrap()).unwrap();
            let (g, _) = net.backward_batch(&cache, &out).unwrap();
            adam.step_net(&mut net, &g, 0.003).unwrap();
        }
        encode_net(&net, Some(&adam)).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn adam_flat_api_agrees_with_net_api() {
    let mut rng = SeededRng::new(5);
    let mut a = DenseNet::new(&[2, 3, 1], OutputActivation::Identity, &mut rng).unwrap();
    let mut b = a.clone();
    let (_, cache) = a.forward(&[0.3, -0.7]).unwrap();
    let (g, _) = a.backward(&cache, &[1.0]).unwrap();
    let mut sa = AdamState::for_net(&a);
    let mut sb = AdamState::for_net(&b);
    sa.step_net(&mut a, &g, 0.01).unwrap();
    adam_step(&mut b.param_slices_mut(), &g.slices(), &mut sb, 0.01).unwrap();
    assert_eq!(a, b);
    assert_eq!(sa, sb);
}

#[test]
fn clipped_fraction_matches_normal_cdf() {
    let (sigma, c) = (0.2, 0.5);
    let n = 1_000_000;
    let mut rng = SeededRng::new(2024);
    let draws = clipped_gaussian(n, sigma, c, &mut rng).unwrap();
    let clipped = draws.iter().filter(|x| x.abs() >= c).count() as f64 / n as f64;
    let expected = 2.0 * Normal::new(0.0, 1.0).unwrap().cdf(-c / sigma);
    // 2 * Phi(-2.5) ~= 0.0124; "within 1%" read as absolute fraction.
    assert!((clipped - expected).abs() < 0.01, "clipped {clipped} expected {expected}");
    // A tighter binomial check: 5 standard errors.
    let se = (expected * (1.0 - expected) / n as f64).sqrt();
    assert!((clipped - expected).abs() < 5.0 * se);
}

#[test]
fn gumbel_argmax_follows_softmax_distribution() {
    let logits = [1.0, 0.0, -0.5, 0.5];
    let probs = marl_nn::softmax(&logits, 1.0).unwrap();
    let n = 100_000;
    let mut rng = SeededRng::new(31);
    let mut counts = [0usize; 4];
    for _ in 0..n {
        let y = gumbel_softmax(&logits, 1.0, &mut rng).unwrap();
        let argmax = (0..4)
            .max_by(|&a, &b| y[a].partial_cmp(&y[b]).unwrap())
            .unwrap();
        counts[argmax] += 1;
    }
    let chi2: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&o, &p)| {
            let e = p * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let critical = ChiSquared::new(3.0).unwrap().inverse_cdf(0.99);
    assert!(chi2 < critical, "chi2 {chi2} critical {critical}");
}
