use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use marl_core::probe::BiasReport;
use marl_core::{train, TrainOutcome};
use particle_env::{Environment, ScenarioRegistry, Team};
use serde::{Deserialize, Serialize};

use crate::artifacts::{bias_csv, build_id, comment_block, header, resolve, seed_dir, write_file};
use crate::checkpoint::{save_checkpoint, Manifest};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::plot::{emit_plot_data, PlotSeries};
use crate::stats::{ci95_half_width, mean, trailing_mean};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    /// Trailing-window mean of the per-episode reward averaged over agents.
    pub final_reward: f64,
    /// The same statistic restricted to each team.
    pub team_finals: BTreeMap<String, f64>,
    /// Bias averaged over agents and over evaluations in the second half of
    /// training; absent without probing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_bias_second_half: Option<f64>,
    pub episodes: usize,
    pub wall_clock_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed: u64,
    pub error: String,
}

/// Cross-seed aggregate of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub config_hash: String,
    pub build_id: String,
    pub output_dir: PathBuf,
    pub seeds: Vec<SeedSummary>,
    pub failures: Vec<SeedFailure>,
    pub final_mean: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_ci95: Option<f64>,
    /// Per-seed episode rewards averaged over agents.
    #[serde(skip)]
    pub curves: Vec<Vec<f64>>,
    /// Per-seed bias reports.
    #[serde(skip)]
    pub bias: Vec<Vec<BiasReport>>,
}

impl RunSummary {
    pub fn ensure_success(&self) -> Result<()> {
        if self.failures.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::SeedFailures(
                self.failures.iter().map(|f| (f.seed, f.error.clone())).collect(),
            ))
        }
    }

    pub fn finals(&self) -> Vec<f64> {
        self.seeds.iter().map(|s| s.final_reward).collect()
    }

    pub fn to_toml(&self) -> String {
        comment_block(&header(&self.config_hash))
            + &toml::to_string(self).expect("summary serializes")
    }
}

/// Agent-averaged bias at each evaluation step.
pub fn bias_by_step(reports: &[BiasReport]) -> Vec<(u64, f64, f64, f64)> {
    let mut by: BTreeMap<u64, Vec<&BiasReport>> = BTreeMap::new();
    for r in reports {
        by.entry(r.eval_step).or_default().push(r);
    }
    by.into_iter()
        .map(|(step, rs)| {
            let n = rs.len() as f64;
            (
                step,
                rs.iter().map(|r| r.mean_estimated).sum::<f64>() / n,
                rs.iter().map(|r| r.mean_true).sum::<f64>() / n,
                rs.iter().map(|r| r.bias).sum::<f64>() / n,
            )
        })
        .collect()
}

pub fn second_half_bias(reports: &[BiasReport], total_steps: u64) -> Option<f64> {
    let late: Vec<f64> = reports
        .iter()
        .filter(|r| 2 * r.eval_step > total_steps)
        .map(|r| r.bias)
        .collect();
    (!late.is_empty()).then(|| mean(&late))
}

fn team_name(t: Team) -> &'static str {
    match t {
        Team::Good => "good",
        Team::Adversary => "adversary",
    }
}

/// Cross-seed bias table: agents and evaluation steps in rows, ci95 over seeds.
pub fn aggregate_bias(per_seed: &[Vec<BiasReport>]) -> Vec<BiasReport> {
    let mut by: BTreeMap<(u64, usize), Vec<&BiasReport>> = BTreeMap::new();
    for r in per_seed.iter().flatten() {
        by.entry((r.eval_step, r.agent)).or_default().push(r);
    }
    by.into_iter()
        .map(|((eval_step, agent), rs)| {
            let get = |f: fn(&BiasReport) -> f64| rs.iter().map(|r| f(r)).collect::<Vec<_>>();
            let biases = get(|r| r.bias);
            BiasReport {
                agent,
                eval_step,
                mean_estimated: mean(&get(|r| r.mean_estimated)),
                mean_true: mean(&get(|r| r.mean_true)),
                bias: mean(&biases),
                ci95: ci95_half_width(&biases),
                n: rs.len(),
                true_std_error: f64::NAN,
            }
        })
        .collect()
}

/// Figure-style bias plot rows: estimated, true and bias, averaged over agents.
pub fn bias_plot_series(label: &str, per_seed: &[Vec<BiasReport>]) -> Vec<PlotSeries> {
    let by_seed: Vec<Vec<(u64, f64, f64, f64)>> = per_seed.iter().map(|r| bias_by_step(r)).collect();
    let x: Vec<f64> = by_seed
        .iter()
        .map(|s| s.iter().map(|p| p.0 as f64).collect::<Vec<_>>())
        .min_by_key(|v| v.len())
        .unwrap_or_default();
    let pick = |f: fn(&(u64, f64, f64, f64)) -> f64| -> Vec<Vec<f64>> {
        by_seed
            .iter()
            .map(|s| s.iter().take(x.len()).map(f).collect())
            .collect()
    };
    [
        ("estimated", pick(|p| p.1)),
        ("true", pick(|p| p.2)),
        ("bias", pick(|p| p.3)),
    ]
    .into_iter()
    .map(|(what, runs)| PlotSeries {
        name: format!("{label}:{what}"),
        x: x.clone(),
        runs,
        window: 1,
    })
    .collect()
}

pub fn learning_curve_series(label: &str, curves: &[Vec<f64>], window: usize) -> PlotSeries {
    let len = curves.iter().map(Vec::len).min().unwrap_or(0);
    PlotSeries {
        name: label.to_string(),
        x: (0..len).map(|k| k as f64).collect(),
        runs: curves.iter().map(|c| c[..len].to_vec()).collect(),
        window,
    }
}

fn write_seed(
    cfg: &ExperimentConfig,
    env: &Environment,
    dir: &Path,
    seed: u64,
    out: &TrainOutcome,
    comments: &[String],
) -> Result<()> {
    let mut seed_comments = comments.to_vec();
    seed_comments.push(format!("seed: {seed}"));
    write_file(&dir.join("metrics.csv"), out.metrics.to_csv(&seed_comments))?;
    if cfg.probe.enabled {
        write_file(&dir.join("bias.csv"), bias_csv(&out.bias, &seed_comments))?;
        write_file(
            &dir.join("bias_plot.csv"),
            emit_plot_data(&bias_plot_series(&cfg.label(), std::slice::from_ref(&out.bias)), &seed_comments),
        )?;
    }
    let manifest = Manifest {
        scenario: cfg.scenario.clone(),
        algorithm: cfg.algorithm,
        seed,
        build_id: build_id().to_string(),
        config_hash: cfg.hash(),
        agents: Vec::new(),
        hyper: cfg.hyper.clone(),
    };
    save_checkpoint(&dir.join("checkpoint"), &out.bundles, env.agent_specs(), manifest, &seed_comments)
}

/// Trains every seed of `cfg` and writes all artifacts under the resolved
/// output directory. A failing seed is recorded and the others still run.
pub fn run(cfg: &ExperimentConfig, root: Option<&Path>) -> Result<RunSummary> {
    let registry = ScenarioRegistry::with_builtins();
    cfg.validate(&registry)?;
    let env = cfg.environment(&registry)?;
    let output = resolve(&cfg.output_dir, root);
    let hash = cfg.hash();
    let comments = header(&hash);
    write_file(&output.join("config.toml"), comment_block(&comments) + &cfg.to_toml_string())?;

    let teams: BTreeMap<&str, Vec<usize>> =
        env.agent_specs()
            .iter()
            .enumerate()
            .fold(BTreeMap::new(), |mut m, (i, s)| {
                m.entry(team_name(s.team)).or_insert_with(Vec::new).push(i);
                m
            });
    let mut seeds = Vec::new();
    let mut failures = Vec::new();
    let mut curves = Vec::new();
    let mut bias = Vec::new();
    for &seed in &cfg.seeds {
        log::info!("{}: seed {seed} starting", cfg.label());
        let start = Instant::now();
        let dir = seed_dir(&output, seed);
        let result = train(&env, cfg.algorithm, &cfg.hyper, seed, &cfg.train_options())
            .map_err(HarnessError::from)
            .and_then(|out| write_seed(cfg, &env, &dir, seed, &out, &comments).map(|_| out));
        match result {
            Ok(out) => {
                let curve = out.metrics.episode_rewards(None);
                let window = cfg.report.final_window;
                seeds.push(SeedSummary {
                    seed,
                    final_reward: trailing_mean(&curve, window),
                    team_finals: teams
                        .iter()
                        .map(|(name, agents)| {
                            (name.to_string(), trailing_mean(&out.metrics.episode_rewards(Some(agents)), window))
                        })
                        .collect(),
                    mean_bias_second_half: second_half_bias(&out.bias, out.total_steps),
                    episodes: out.metrics.n_episodes(),
                    wall_clock_secs: start.elapsed().as_secs_f64(),
                });
                log::info!("{}: seed {seed} final reward {:.3}", cfg.label(), seeds.last().unwrap().final_reward);
                curves.push(curve);
                bias.push(out.bias);
            }
            Err(e) => {
                log::error!("{}: seed {seed} failed: {e}", cfg.label());
                failures.push(SeedFailure {
                    seed,
                    error: e.to_string(),
                });
            }
        }
    }
    let finals: Vec<f64> = seeds.iter().map(|s| s.final_reward).collect();
    let summary = RunSummary {
        label: cfg.label(),
        config_hash: hash,
        build_id: build_id().to_string(),
        output_dir: output.clone(),
        final_mean: if finals.is_empty() { f64::NAN } else { mean(&finals) },
        final_ci95: ci95_half_width(&finals),
        seeds,
        failures,
        curves,
        bias,
    };
    write_file(&output.join("summary.toml"), summary.to_toml())?;
    write_file(
        &output.join("learning_curve.csv"),
        emit_plot_data(
            &[learning_curve_series(&summary.label, &summary.curves, cfg.report.smoothing_window)],
            &comments,
        ),
    )?;
    if cfg.probe.enabled && !summary.bias.is_empty() {
        write_file(&output.join("bias_summary.csv"), bias_csv(&aggregate_bias(&summary.bias), &comments))?;
        write_file(
            &output.join("bias_plot.csv"),
            emit_plot_data(&bias_plot_series(&summary.label, &summary.bias), &comments),
        )?;
    }
    Ok(summary)
}
