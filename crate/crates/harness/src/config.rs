use std::collections::BTreeSet;
use std::path::PathBuf;

use marl_core::probe::RolloutConfig;
use marl_core::{Algorithm, HyperParams, ProbeSchedule, TrainOptions};
use std::sync::Arc;

use particle_env::scenarios::CooperativeNavigation;
use particle_env::{Environment, ScenarioRegistry, RESERVED_SCENARIOS};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeSettings {
    pub enabled: bool,
    /// Environment steps between bias evaluations.
    pub eval_cadence: u64,
    pub n_states: usize,
    pub n_rollouts: usize,
    pub rollout_len: usize,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        let s = ProbeSchedule::default();
        Self {
            enabled: false,
            eval_cadence: s.interval,
            n_states: s.n_states,
            n_rollouts: s.rollout.n_rollouts,
            rollout_len: s.rollout.length,
        }
    }
}

impl ProbeSettings {
    pub fn schedule(&self) -> ProbeSchedule {
        ProbeSchedule {
            interval: self.eval_cadence,
            n_states: self.n_states,
            rollout: RolloutConfig {
                n_rollouts: self.n_rollouts,
                length: self.rollout_len,
                action_noise: 0.0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportSettings {
    /// Episodes in the trailing window behind the final reward.
    pub final_window: usize,
    /// Trailing window used to smooth learning curves.
    pub smoothing_window: usize,
}

impl Default for ReportSettings {
    fn default() -> Self {
        Self {
            final_window: 1000,
            smoothing_window: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub algorithm: Algorithm,
    pub seeds: Vec<u64>,
    /// Agent count for tasks that scale with it; the task default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_agents: Option<usize>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub hyper: HyperParams,
    #[serde(default)]
    pub probe: ProbeSettings,
    #[serde(default)]
    pub report: ReportSettings,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

impl ExperimentConfig {
    pub fn new(scenario: &str, algorithm: Algorithm, seeds: Vec<u64>) -> Self {
        Self {
            scenario: scenario.to_string(),
            algorithm,
            seeds,
            n_agents: None,
            output_dir: default_output_dir(),
            hyper: HyperParams::default(),
            probe: ProbeSettings::default(),
            report: ReportSettings::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(HarnessError::io(path))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Canonical serialization; every default is spelled out. Panics on
    /// values TOML cannot hold, which `validate` rejects.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical serialization with the output directory
    /// left out, so relocating an experiment keeps its identity.
    pub fn hash(&self) -> String {
        let anchored = Self {
            output_dir: PathBuf::new(),
            ..self.clone()
        };
        Sha256::digest(anchored.to_toml_string().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn validate(&self, registry: &ScenarioRegistry) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return bad(format!("seeds must be distinct, got {:?}", self.seeds));
        }
        if let Some(s) = self.seeds.iter().find(|&&s| s > i64::MAX as u64) {
            return bad(format!("seed {s} does not fit a TOML integer"));
        }
        if RESERVED_SCENARIOS.contains(&self.scenario.as_str()) {
            return bad(format!("scenario '{}' is reserved and has no implementation", self.scenario));
        }
        if !registry.contains(&self.scenario) {
            return bad(format!(
                "unknown scenario '{}' (registered: {})",
                self.scenario,
                registry.ids().join(", ")
            ));
        }
        if let Some(n) = self.n_agents {
            if self.scenario != CooperativeNavigation::ID || n == 0 {
                return bad(format!(
                    "n_agents = {n} is not available for '{}'; only {} scales, with at least one agent",
                    self.scenario,
                    CooperativeNavigation::ID
                ));
            }
        }
        self.hyper
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.probe.enabled
            && (self.probe.eval_cadence == 0
                || self.probe.n_states == 0
                || self.probe.n_rollouts == 0
                || self.probe.rollout_len == 0)
        {
            return bad("probe cadence, state count, rollout count and length must be positive".into());
        }
        if self.report.final_window == 0 || self.report.smoothing_window == 0 {
            return bad("report windows must be positive".into());
        }
        Ok(())
    }

    /// Environment for this experiment, honouring `n_agents`.
    pub fn environment(&self, registry: &ScenarioRegistry) -> Result<Environment> {
        environment(registry, &self.scenario, self.n_agents)
    }

    pub fn train_options(&self) -> TrainOptions {
        TrainOptions {
            probe: self.probe.enabled.then(|| self.probe.schedule()),
        }
    }

    /// Short label used for plot series: `<algorithm>@<scenario>`, with a
    /// `/n<k>` suffix when the agent count is set.
    pub fn label(&self) -> String {
        match self.n_agents {
            Some(n) => format!("{}@{}/n{n}", self.algorithm.name(), self.scenario),
            None => format!("{}@{}", self.algorithm.name(), self.scenario),
        }
    }
}

/// Looks up `scenario`, rebuilding the scalable task when `n_agents` is given.
pub fn environment(registry: &ScenarioRegistry, scenario: &str, n_agents: Option<usize>) -> Result<Environment> {
    let task = match n_agents {
        Some(n) if scenario == CooperativeNavigation::ID && n > 0 => {
            Arc::new(CooperativeNavigation { n_agents: n })
        }
        Some(n) => {
            return Err(HarnessError::Config(format!(
                "n_agents = {n} is not available for '{scenario}'"
            )))
        }
        None => registry.get(scenario).map_err(|e| HarnessError::Config(e.to_string()))?,
    };
    Ok(Environment::new(task))
}
