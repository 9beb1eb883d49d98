use std::fmt::Write as _;

use crate::stats::{ci95_half_width, mean, smooth};

pub const PLOT_HEADER: &str = "series,x,mean,ci_lo,ci_hi";

/// Named family of per-seed curves sharing an x axis.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub name: String,
    pub x: Vec<f64>,
    /// One curve per seed, each as long as `x`.
    pub runs: Vec<Vec<f64>>,
    /// Trailing smoothing window; 1 leaves the curves as they are.
    pub window: usize,
}

/// Long-format rows `(series, x, mean, ci_lo, ci_hi)`. Each run is smoothed
/// first; the band is the 95% interval of the mean across runs and collapses
/// onto the mean for a single run.
pub fn emit_plot_data(series: &[PlotSeries], comments: &[String]) -> String {
    let mut s = String::new();
    for c in comments {
        writeln!(s, "# {c}").unwrap();
    }
    writeln!(s, "{PLOT_HEADER}").unwrap();
    for ps in series {
        let smoothed: Vec<Vec<f64>> = ps.runs.iter().map(|r| smooth(r, ps.window)).collect();
        for (k, x) in ps.x.iter().enumerate() {
            let col: Vec<f64> = smoothed.iter().filter_map(|r| r.get(k).copied()).collect();
            if col.is_empty() {
                continue;
            }
            let m = mean(&col);
            let h = ci95_half_width(&col).unwrap_or(0.0);
            writeln!(s, "{},{},{},{},{}", ps.name, x, m, m - h, m + h).unwrap();
        }
    }
    s
}
