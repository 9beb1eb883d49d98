use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{NnError, Result};
use crate::rng::SeededRng;

/// Uniform draws for Gumbel noise are clamped to `[U, 1 - U]`.
pub const GUMBEL_U_CLAMP: f64 = 1e-12;

/// `n` independent draws of `clip(N(0, sigma), -c, c)`.
pub fn clipped_gaussian(n: usize, sigma: f64, c: f64, rng: &mut SeededRng) -> Result<Vec<f64>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(NnError::InvalidParameter(format!(
            "noise sigma must be finite and >= 0, got {sigma}"
        )));
    }
    if !(c >= 0.0) {
        return Err(NnError::InvalidParameter(format!(
            "noise clip must be >= 0, got {c}"
        )));
    }
    if sigma == 0.0 || c == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    Ok((0..n)
        .map(|_| normal.sample(rng).clamp(-c, c))
        .collect())
}

/// Numerically stable softmax of `logits / temperature`.
pub fn softmax(logits: &[f64], temperature: f64) -> Result<Vec<f64>> {
    check_temperature(temperature)?;
    if let Some(i) = logits.iter().position(|x| !x.is_finite()) {
        return Err(NnError::NonFinite(format!("softmax logit {i}")));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits
        .iter()
        .map(|&l| ((l - max) / temperature).exp())
        .collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= total);
    Ok(out)
}

/// Relaxed one-hot sample `softmax((logits + g) / temperature)` with
/// `g = -ln(-ln u)`, `u ~ U(0, 1)`.
pub fn gumbel_softmax(logits: &[f64], temperature: f64, rng: &mut SeededRng) -> Result<Vec<f64>> {
    check_temperature(temperature)?;
    let perturbed: Vec<f64> = logits
        .iter()
        .map(|&l| {
            let u: f64 = rng.random::<f64>().clamp(GUMBEL_U_CLAMP, 1.0 - GUMBEL_U_CLAMP);
            l - (-u.ln()).ln()
        })
        .collect();
    softmax(&perturbed, temperature)
}

/// Gradient through `y = softmax((logits + g) / temperature)` with respect
/// to the logits, given the output `y` and `dL/dy`. The Gumbel noise is a
/// constant shift, so the same expression serves plain softmax.
pub fn softmax_backward(y: &[f64], temperature: f64, upstream: &[f64]) -> Result<Vec<f64>> {
    check_temperature(temperature)?;
    crate::error::check_len("softmax_backward upstream", y.len(), upstream.len())?;
    let dot: f64 = y.iter().zip(upstream).map(|(a, b)| a * b).sum();
    Ok(y
        .iter()
        .zip(upstream)
        .map(|(&yj, &uj)| yj * (uj - dot) / temperature)
        .collect())
}

fn check_temperature(temperature: f64) -> Result<()> {
    if temperature > 0.0 && temperature.is_finite() {
        Ok(())
    } else {
        Err(NnError::InvalidParameter(format!(
            "temperature must be positive, got {temperature}"
        )))
    }
}
