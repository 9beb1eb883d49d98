use std::path::{Path, PathBuf};

use marl_core::probe::{bias_report, collect_probe_states, BiasReport};
use marl_core::{select_actions, Policy, ReplayBuffer, Transition};
use marl_nn::SeededRng;
use particle_env::{AgentAction, ScenarioRegistry};

use crate::artifacts::{bias_csv, header, write_file};
use crate::checkpoint::load_checkpoint;
use crate::config::{environment, ProbeSettings};
use crate::error::{HarnessError, Result};

/// Settings of a standalone bias evaluation of saved agents.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointProbe {
    /// Episodes rolled out with the saved policies to gather probe states.
    pub episodes: usize,
    /// Exploration noise applied while gathering.
    pub noise: f64,
    pub seed: u64,
    pub settings: ProbeSettings,
}

impl Default for CheckpointProbe {
    fn default() -> Self {
        Self {
            episodes: 10,
            noise: 0.1,
            seed: 0,
            settings: ProbeSettings::default(),
        }
    }
}

/// Measures critic bias of the agents saved in `dir` on `scenario` and
/// writes `bias.csv` into `out` (the checkpoint directory by default).
pub fn probe_checkpoint(
    dir: &Path,
    scenario: &str,
    opts: &CheckpointProbe,
    out: Option<&Path>,
) -> Result<(PathBuf, Vec<BiasReport>)> {
    let (manifest, bundles) = load_checkpoint(dir)?;
    if manifest.scenario != scenario {
        return Err(HarnessError::Config(format!(
            "checkpoint was trained on '{}', not '{scenario}'",
            manifest.scenario
        )));
    }
    if opts.episodes == 0 {
        return Err(HarnessError::Config("probe needs at least one episode".into()));
    }
    let registry = ScenarioRegistry::with_builtins();
    let default_count = registry.get(scenario).map(|s| s.agent_specs().len()).ok();
    let n_agents = (default_count != Some(bundles.len())).then_some(bundles.len());
    let env = environment(&registry, scenario, n_agents)?.with_horizon(manifest.hyper.steps_per_episode);
    if env.n_agents() != bundles.len() {
        return Err(HarnessError::Config(format!(
            "scenario has {} agents, checkpoint has {}",
            env.n_agents(),
            bundles.len()
        )));
    }

    let root = SeededRng::new(opts.seed);
    let mut env_rng = root.fork("env");
    let mut explore = root.fork("explore");
    let mut probe_rng = root.fork("probe");
    let steps = manifest.hyper.steps_per_episode;
    let mut buffer = ReplayBuffer::new(opts.episodes * steps)?;
    let policies: Vec<&Policy> = bundles.iter().map(|b| &b.policy).collect();
    for _ in 0..opts.episodes {
        let (mut world, mut obs) = env.reset(&mut env_rng)?;
        for _ in 0..steps {
            let joint = select_actions(&policies, &obs, opts.noise, &mut explore)?;
            let (next, result) = env.step(&world, &joint)?;
            buffer.push(Transition {
                obs,
                actions: joint.iter().map(AgentAction::to_flat).collect(),
                rewards: result.rewards,
                next_obs: result.observations.clone(),
                done: result.done,
                world: Some(world),
            })?;
            world = next;
            obs = result.observations;
        }
    }
    let schedule = opts.settings.schedule();
    let probes = collect_probe_states(&buffer, 0, schedule.n_states, &mut probe_rng)?;
    let reports = bias_report(
        &bundles,
        &probes,
        &env,
        manifest.hyper.gamma,
        &schedule.rollout,
        buffer.total_pushed(),
        &mut probe_rng,
    )?;
    let path = out.unwrap_or(dir).join("bias.csv");
    let mut comments = header(&manifest.config_hash);
    comments.push(format!("seed: {}", manifest.seed));
    comments.push(format!("probe seed: {}", opts.seed));
    write_file(&path, bias_csv(&reports, &comments))?;
    Ok((path, reports))
}
