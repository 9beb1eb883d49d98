use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use marl_core::{MetricsLog, MetricsRow, METRICS_HEADER};

use crate::artifacts::{
    build_id, comment_block, csv_rows, parse_bias_csv, parse_cell, read_file, seed_dir, write_file,
};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::plot::emit_plot_data;
use crate::run::{
    aggregate_bias, bias_plot_series, learning_curve_series, second_half_bias, RunSummary,
    SeedSummary,
};
use crate::stats::{ci95_half_width, mean, normalize_scores, trailing_mean};

fn opt_cell(cell: &str, path: &Path) -> Result<Option<f64>> {
    if cell.is_empty() {
        Ok(None)
    } else {
        parse_cell(cell, path).map(Some)
    }
}

pub fn parse_metrics_csv(path: &Path) -> Result<MetricsLog> {
    let text = read_file(path)?;
    let rows = csv_rows(&text, METRICS_HEADER, path)?
        .iter()
        .map(|c| {
            Ok(MetricsRow {
                episode: parse_cell(&c[0], path)?,
                step: parse_cell(&c[1], path)?,
                agent: parse_cell(&c[2], path)?,
                episodic_reward: parse_cell(&c[3], path)?,
                critic_loss_1: opt_cell(&c[4], path)?,
                critic_loss_2: opt_cell(&c[5], path)?,
                policy_grad_norm: opt_cell(&c[6], path)?,
                critic_updates: parse_cell(&c[7], path)?,
                policy_updates: parse_cell(&c[8], path)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricsLog { rows })
}

/// Rebuilds the summary of a finished run from its files. Every seed listed
/// in the run's config must have its outputs present.
pub fn load_run(dir: &Path) -> Result<RunSummary> {
    let cfg = ExperimentConfig::load(&dir.join("config.toml"))?;
    let mut seeds = Vec::new();
    let mut curves = Vec::new();
    let mut bias = Vec::new();
    for &seed in &cfg.seeds {
        let sd = seed_dir(dir, seed);
        let metrics_path = sd.join("metrics.csv");
        if !metrics_path.exists() {
            return Err(HarnessError::Parse {
                what: "run directory",
                path: dir.to_path_buf(),
                reason: format!("seed {seed} has no metrics file at {}", metrics_path.display()),
            });
        }
        let metrics = parse_metrics_csv(&metrics_path)?;
        let reports = if cfg.probe.enabled {
            parse_bias_csv(&sd.join("bias.csv"))?
        } else {
            Vec::new()
        };
        let curve = metrics.episode_rewards(None);
        let total = metrics.rows.last().map_or(0, |r| r.step);
        seeds.push(SeedSummary {
            seed,
            final_reward: trailing_mean(&curve, cfg.report.final_window),
            team_finals: BTreeMap::new(),
            mean_bias_second_half: second_half_bias(&reports, total),
            episodes: metrics.n_episodes(),
            wall_clock_secs: f64::NAN,
        });
        curves.push(curve);
        bias.push(reports);
    }
    let finals: Vec<f64> = seeds.iter().map(|s| s.final_reward).collect();
    Ok(RunSummary {
        label: cfg.label(),
        config_hash: cfg.hash(),
        build_id: build_id().to_string(),
        output_dir: dir.to_path_buf(),
        final_mean: mean(&finals),
        final_ci95: ci95_half_width(&finals),
        seeds,
        failures: Vec::new(),
        curves,
        bias,
    })
}

pub const REPORT_HEADER: &str =
    "label,run_dir,seeds,final_mean,final_ci95,normalized_final,bias_second_half,bias_ci95";

/// Aggregates finished runs into `report.csv`, `learning_curves.csv` and,
/// when any run probed its critics, `bias_curves.csv` and `bias_summary.csv`.
/// Final rewards are 0-1 normalized among runs of the same scenario.
pub fn report(dirs: &[PathBuf], out: &Path, smoothing_window: Option<usize>) -> Result<Vec<RunSummary>> {
    if dirs.is_empty() {
        return Err(HarnessError::Config("report needs at least one run directory".into()));
    }
    let mut runs = Vec::with_capacity(dirs.len());
    let mut configs = Vec::with_capacity(dirs.len());
    for d in dirs {
        runs.push(load_run(d)?);
        configs.push(ExperimentConfig::load(&d.join("config.toml"))?);
    }
    let hashes: Vec<&str> = runs.iter().map(|r| r.config_hash.as_str()).collect();
    let comments = vec![format!("build: {}", build_id()), format!("config: {}", hashes.join(" "))];

    let mut by_scenario: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (k, c) in configs.iter().enumerate() {
        by_scenario.entry(c.scenario.as_str()).or_default().push(k);
    }
    let mut normalized = vec![f64::NAN; runs.len()];
    let groups: Vec<&Vec<usize>> = by_scenario.values().collect();
    let matrix: Vec<Vec<f64>> = groups
        .iter()
        .map(|idx| idx.iter().map(|&k| runs[k].final_mean).collect())
        .collect();
    let (scaled, _) = normalize_scores(&matrix);
    for (idx, row) in groups.iter().zip(scaled) {
        for (&k, v) in idx.iter().zip(row) {
            normalized[k] = v;
        }
    }

    let mut table = comment_block(&comments);
    writeln!(table, "{REPORT_HEADER}").unwrap();
    for (k, r) in runs.iter().enumerate() {
        let biases: Vec<f64> = r.seeds.iter().filter_map(|s| s.mean_bias_second_half).collect();
        writeln!(
            table,
            "{},{},{},{},{},{},{},{}",
            r.label,
            r.output_dir.display(),
            r.seeds.len(),
            r.final_mean,
            r.final_ci95.map(|c| c.to_string()).unwrap_or_default(),
            normalized[k],
            if biases.is_empty() { String::new() } else { mean(&biases).to_string() },
            ci95_half_width(&biases).map(|c| c.to_string()).unwrap_or_default()
        )
        .unwrap();
    }
    write_file(&out.join("report.csv"), table)?;

    let curves: Vec<_> = runs
        .iter()
        .zip(&configs)
        .map(|(r, c)| {
            learning_curve_series(&r.label, &r.curves, smoothing_window.unwrap_or(c.report.smoothing_window))
        })
        .collect();
    write_file(&out.join("learning_curves.csv"), emit_plot_data(&curves, &comments))?;

    let probed: Vec<&RunSummary> = runs.iter().filter(|r| r.bias.iter().any(|b| !b.is_empty())).collect();
    if !probed.is_empty() {
        let series: Vec<_> = probed.iter().flat_map(|r| bias_plot_series(&r.label, &r.bias)).collect();
        write_file(&out.join("bias_curves.csv"), emit_plot_data(&series, &comments))?;
        let mut s = comment_block(&comments);
        for r in &probed {
            writeln!(s, "# run: {}", r.label).unwrap();
            let body = crate::artifacts::bias_csv(&aggregate_bias(&r.bias), &[]);
            s.push_str(&body);
        }
        write_file(&out.join("bias_summary.csv"), s)?;
    }
    Ok(runs)
}
