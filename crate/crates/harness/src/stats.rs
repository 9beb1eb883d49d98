use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample standard deviation; `None` below two values.
pub fn sample_std(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    Some((ss / (xs.len() - 1) as f64).sqrt())
}

/// Half-width `t_{0.975, n-1} * s / sqrt(n)` of the 95% interval of the
/// mean; `None` below two values.
pub fn ci95_half_width(xs: &[f64]) -> Option<f64> {
    let s = sample_std(xs)?;
    let n = xs.len() as f64;
    let t = StudentsT::new(0.0, 1.0, n - 1.0)
        .expect("degrees of freedom positive")
        .inverse_cdf(0.975);
    Some(t * s / n.sqrt())
}

/// Mean of the last `window` values, or of all of them when fewer exist.
pub fn trailing_mean(xs: &[f64], window: usize) -> f64 {
    let start = xs.len().saturating_sub(window.max(1));
    mean(&xs[start..])
}

/// Trailing-window smoothing: entry `k` is the mean of `xs[k+1-window..=k]`,
/// with the window shrinking at the start of the series.
pub fn smooth(xs: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(xs.len());
    let mut sum = 0.0;
    for k in 0..xs.len() {
        sum += xs[k];
        if k >= window {
            sum -= xs[k - window];
        }
        out.push(sum / (k + 1).min(window) as f64);
    }
    out
}

/// Affine rescale of every row so its minimum maps to 0 and maximum to 1.
/// Constant rows map to 0.5 and produce a warning.
pub fn normalize_scores(rows: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<String>) {
    let mut warnings = Vec::new();
    let out = rows
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                r.iter().map(|x| (x - lo) / (hi - lo)).collect()
            } else {
                let msg = format!("row {k} is constant; normalized to 0.5");
                log::warn!("{msg}");
                warnings.push(msg);
                vec![0.5; r.len()]
            }
        })
        .collect();
    (out, warnings)
}
