use crate::error::{check_len, NnError, Result};
use crate::net::{DenseNet, NetGrads};

/// First/second moment estimates for a list of parameter tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub const DEFAULT_BETA1: f64 = 0.9;
    pub const DEFAULT_BETA2: f64 = 0.999;
    pub const DEFAULT_EPS: f64 = 1e-8;

    /// Zero moments for tensors of the given lengths.
    pub fn new(tensor_lens: &[usize]) -> Self {
        Self {
            m: tensor_lens.iter().map(|&n| vec![0.0; n]).collect(),
            v: tensor_lens.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
            beta1: Self::DEFAULT_BETA1,
            beta2: Self::DEFAULT_BETA2,
            eps: Self::DEFAULT_EPS,
        }
    }

    pub fn for_net(net: &DenseNet) -> Self {
        let lens: Vec<usize> = net.param_slices().iter().map(|s| s.len()).collect();
        Self::new(&lens)
    }

    /// One Adam step on `net` using `grads`.
    pub fn step_net(&mut self, net: &mut DenseNet, grads: &NetGrads, lr: f64) -> Result<()> {
        let grad_slices = grads.slices();
        let mut params = net.param_slices_mut();
        adam_step(&mut params, &grad_slices, self, lr)
    }
}

/// Moments of parameters whose gradient stays zero decay geometrically into
/// the subnormal range, where arithmetic is very slow; they are zeroed there.
fn flush(x: f64) -> f64 {
    if x.abs() < f64::MIN_POSITIVE {
        0.0
    } else {
        x
    }
}

/// Bias-corrected Adam update applied in place.
///
/// Nothing is modified when any gradient is non-finite or shapes disagree.
pub fn adam_step(
    params: &mut [&mut [f64]],
    grads: &[&[f64]],
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(NnError::InvalidParameter(format!(
            "learning rate must be positive, got {lr}"
        )));
    }
    check_len("adam_step grad tensors", params.len(), grads.len())?;
    check_len("adam_step moment tensors", params.len(), state.m.len())?;
    check_len("adam_step moment tensors", params.len(), state.v.len())?;
    for (k, (p, g)) in params.iter().zip(grads).enumerate() {
        check_len("adam_step grad length", p.len(), g.len())?;
        check_len("adam_step moment length", p.len(), state.m[k].len())?;
        check_len("adam_step moment length", p.len(), state.v[k].len())?;
        if let Some(i) = g.iter().position(|x| !x.is_finite()) {
            return Err(NnError::NonFinite(format!(
                "gradient tensor {k} element {i} = {}",
                g[i]
            )));
        }
    }

    state.t += 1;
    let (b1, b2) = (state.beta1, state.beta2);
    let bias1 = 1.0 - b1.powi(state.t as i32);
    let bias2 = 1.0 - b2.powi(state.t as i32);
    for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let m = &mut state.m[k];
        let v = &mut state.v[k];
        for i in 0..p.len() {
            let gi = g[i];
            m[i] = flush(b1 * m[i] + (1.0 - b1) * gi);
            v[i] = flush(b2 * v[i] + (1.0 - b2) * gi * gi);
            let m_hat = m[i] / bias1;
            let v_hat = v[i] / bias2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + state.eps);
        }
    }
    Ok(())
}
