#![allow(dead_code)]

use std::path::Path;

use marl_core::{Algorithm, HyperParams};
use marl_harness::config::{ExperimentConfig, ProbeSettings, ReportSettings};

/// A configuration that trains in well under a second.
pub fn tiny(algorithm: Algorithm, seeds: Vec<u64>, out: &Path) -> ExperimentConfig {
    ExperimentConfig {
        output_dir: out.to_path_buf(),
        hyper: HyperParams {
            episodes: 4,
            steps_per_episode: 20,
            batch_size: 8,
            warmup: Some(16),
            hidden: vec![8, 8],
            ..HyperParams::default()
        },
        probe: ProbeSettings {
            enabled: true,
            eval_cadence: 40,
            n_states: 4,
            n_rollouts: 3,
            rollout_len: 5,
        },
        report: ReportSettings {
            final_window: 2,
            smoothing_window: 2,
        },
        ..ExperimentConfig::new("cooperative_navigation", algorithm, seeds)
    }
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
