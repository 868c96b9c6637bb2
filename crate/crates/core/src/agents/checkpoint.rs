//! Bundle checkpoints: a manifest plus one parameter file per parameter set.
//! Optimiser state is not saved.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::EnvConfig;
use crate::neural::{load_params, save_params};

use super::{AgentBundle, AgentsError, Architecture, UnitRole};

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub version: u32,
    pub agent: usize,
    pub architecture: Architecture,
    pub num_agents: usize,
    pub num_cores: usize,
    pub num_slots: usize,
    pub units: Vec<(UnitRole, usize)>,
    pub nets: Vec<String>,
}

pub fn save_bundle(bundle: &AgentBundle, config: &EnvConfig, dir: &Path) -> Result<(), AgentsError> {
    std::fs::create_dir_all(dir).map_err(|e| AgentsError::Checkpoint(format!("{}: {e}", dir.display())))?;
    let nets: Vec<String> = (0..bundle.nets.len()).map(|i| format!("net{i}.json")).collect();
    for (net, file) in bundle.nets.iter().zip(&nets) {
        save_params(&net.params, &dir.join(file))?;
    }
    let manifest = BundleManifest {
        version: 1,
        agent: bundle.agent,
        architecture: bundle.arch,
        num_agents: config.num_agents,
        num_cores: config.num_cores,
        num_slots: config.num_slots,
        units: bundle.units.iter().map(|u| (u.role, u.net)).collect(),
        nets,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| AgentsError::Checkpoint(e.to_string()))?;
    std::fs::write(dir.join(MANIFEST), text).map_err(|e| AgentsError::Checkpoint(format!("{}: {e}", dir.display())))
}

/// Rebuilds a bundle for `config` and loads its parameters from `dir`.
pub fn load_bundle(dir: &Path, config: &EnvConfig, seed: u64) -> Result<AgentBundle, AgentsError> {
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path).map_err(|e| AgentsError::Checkpoint(format!("{}: {e}", path.display())))?;
    let manifest: BundleManifest = serde_json::from_str(&text).map_err(|e| AgentsError::Checkpoint(e.to_string()))?;
    if (manifest.num_agents, manifest.num_cores, manifest.num_slots)
        != (config.num_agents, config.num_cores, config.num_slots)
    {
        return Err(AgentsError::Checkpoint("checkpoint was saved for a different environment size".into()));
    }
    let mut bundle = AgentBundle::new(manifest.agent, manifest.architecture, config, seed)?;
    let layout: Vec<(UnitRole, usize)> = bundle.units.iter().map(|u| (u.role, u.net)).collect();
    if layout != manifest.units || manifest.nets.len() != bundle.nets.len() {
        return Err(AgentsError::Checkpoint("unit layout does not match the architecture".into()));
    }
    for (net, file) in bundle.nets.iter_mut().zip(&manifest.nets) {
        let params = load_params(&dir.join(file))?;
        if params.tensors().iter().map(|t| t.len()).ne(net.params.tensors().iter().map(|t| t.len())) {
            return Err(AgentsError::Checkpoint(format!("{file}: shape does not match the architecture")));
        }
        *net = crate::neural::PolicyNet::new(params);
    }
    Ok(bundle)
}
