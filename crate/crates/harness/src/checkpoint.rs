use std::path::Path;

use marl_core::{decode_bundle, encode_bundle, AgentBundle, Algorithm, HyperParams};
use particle_env::AgentSpec;
use serde::{Deserialize, Serialize};

use crate::artifacts::{comment_block, read_file, write_file};
use crate::error::{HarnessError, Result};

pub const MANIFEST: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestAgent {
    pub name: String,
    pub file: String,
    pub obs_dim: usize,
    pub movement_dim: usize,
    pub comm_dim: usize,
}

/// Agent order and training settings of a saved set of bundles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub scenario: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub build_id: String,
    pub config_hash: String,
    pub agents: Vec<ManifestAgent>,
    pub hyper: HyperParams,
}

pub fn save_checkpoint(
    dir: &Path,
    bundles: &[AgentBundle],
    specs: &[AgentSpec],
    mut manifest: Manifest,
    comments: &[String],
) -> Result<()> {
    manifest.agents.clear();
    for (b, spec) in bundles.iter().zip(specs) {
        let file = format!("agent_{}.bundle", b.index);
        write_file(&dir.join(&file), encode_bundle(b)?)?;
        manifest.agents.push(ManifestAgent {
            name: spec.name.clone(),
            file,
            obs_dim: spec.obs_dim,
            movement_dim: spec.movement_dim,
            comm_dim: spec.comm_dim,
        });
    }
    let text = toml::to_string(&manifest).expect("manifest serializes");
    write_file(&dir.join(MANIFEST), comment_block(comments) + &text)
}

pub fn load_checkpoint(dir: &Path) -> Result<(Manifest, Vec<AgentBundle>)> {
    let path = dir.join(MANIFEST);
    let manifest: Manifest = toml::from_str(&read_file(&path)?).map_err(|e| HarnessError::Parse {
        what: "checkpoint manifest",
        path: path.clone(),
        reason: e.to_string(),
    })?;
    let mut bundles = Vec::with_capacity(manifest.agents.len());
    for (i, a) in manifest.agents.iter().enumerate() {
        let p = dir.join(&a.file);
        let bytes = std::fs::read(&p).map_err(HarnessError::io(&p))?;
        let b = decode_bundle(&bytes)?;
        if b.index != i
            || b.policy.obs_dim() != a.obs_dim
            || b.policy.movement_dim() != a.movement_dim
            || b.policy.comm_dim() != a.comm_dim
        {
            return Err(HarnessError::Parse {
                what: "checkpoint bundle",
                path: p,
                reason: format!("bundle does not match manifest entry {i}"),
            });
        }
        bundles.push(b);
    }
    Ok((manifest, bundles))
}
