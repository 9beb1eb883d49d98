use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use marl_harness::artifacts::resolve;
use marl_harness::config::ExperimentConfig;
use marl_harness::grid::{grid_search, parse_axes};
use marl_harness::probe::{probe_checkpoint, CheckpointProbe};
use marl_harness::report::report;
use marl_harness::{run, HarnessError, Result};

/// Relative output directories are resolved against this when it is set.
const OUTPUT_ROOT_VAR: &str = "MARL_OUTPUT_ROOT";

#[derive(Parser)]
#[command(name = "marl-lab", version = env!("MARL_BUILD_ID"), about = "Train, tune and probe multi-agent actor-critic learners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every seed of an experiment.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Run only this seed instead of the configured list.
        #[arg(long)]
        seed_override: Option<u64>,
        /// Output directory, replacing the one in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the Cartesian product of hyper-parameter axes and rank it.
    Grid {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        axes: PathBuf,
    },
    /// Measure critic bias of a saved checkpoint.
    Probe {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 10)]
        episodes: usize,
        #[arg(long, default_value_t = 100)]
        states: usize,
        #[arg(long, default_value_t = 200)]
        rollouts: usize,
        #[arg(long, default_value_t = 100)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate finished runs into tables and plot data.
    Report {
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        #[arg(long, default_value = "report")]
        out: PathBuf,
        /// Override each run's smoothing window.
        #[arg(long)]
        window: Option<usize>,
    },
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path).map_err(|e| match e {
        HarnessError::Io { path, source } => {
            HarnessError::Config(format!("cannot read {}: {source}", path.display()))
        }
        other => other,
    })
}

fn execute(cli: Cli, root: Option<&Path>) -> Result<()> {
    match cli.command {
        Command::Train {
            config,
            seed_override,
            out,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(k) = seed_override {
                cfg.seeds = vec![k];
            }
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            let summary = run(&cfg, root)?;
            println!(
                "{}: final reward {:.3} over {} seed(s), written to {}",
                summary.label,
                summary.final_mean,
                summary.seeds.len(),
                summary.output_dir.display()
            );
            summary.ensure_success()
        }
        Command::Grid { config, axes } => {
            let base = load_config(&config)?;
            let text = std::fs::read_to_string(&axes)
                .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", axes.display())))?;
            let rows = grid_search(&base, &parse_axes(&text)?, root)?;
            for r in &rows {
                println!("{:>3}  {:>12.3}  {}", r.rank, r.summary.final_mean, r.point.config.output_dir.display());
            }
            let failed: Vec<(u64, String)> = rows
                .iter()
                .flat_map(|r| r.summary.failures.iter().map(|f| (f.seed, f.error.clone())))
                .collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(HarnessError::SeedFailures(failed))
            }
        }
        Command::Probe {
            checkpoint,
            scenario,
            episodes,
            states,
            rollouts,
            length,
            seed,
            out,
        } => {
            let mut opts = CheckpointProbe {
                episodes,
                seed,
                ..CheckpointProbe::default()
            };
            opts.settings.n_states = states;
            opts.settings.n_rollouts = rollouts;
            opts.settings.rollout_len = length;
            let out = out.map(|o| resolve(&o, root));
            let (path, reports) = probe_checkpoint(&checkpoint, &scenario, &opts, out.as_deref())?;
            for r in &reports {
                println!(
                    "agent {}: estimated {:.4} true {:.4} bias {:+.4} (se {:.4})",
                    r.agent, r.mean_estimated, r.mean_true, r.bias, r.true_std_error
                );
            }
            println!("written to {}", path.display());
            Ok(())
        }
        Command::Report { runs, out, window } => {
            let out = resolve(&out, root);
            let summaries = report(&runs, &out, window)?;
            for s in &summaries {
                let ci = s.final_ci95.map(|c| format!(" ± {c:.3}")).unwrap_or_default();
                println!("{}: {:.3}{ci} ({} seeds)", s.label, s.final_mean, s.seeds.len());
            }
            println!("written to {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let root = std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from);
    match execute(cli, root.as_deref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
