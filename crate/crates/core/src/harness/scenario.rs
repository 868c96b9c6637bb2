use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::Architecture;
use crate::env::{EnvConfig, JobType, PricingMode};
use crate::neural::PpoHyper;

use super::HarnessError;

fn default_total_steps() -> u64 {
    50_000
}

fn default_window() -> u64 {
    500
}

fn default_record_every() -> u64 {
    100
}

fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3, 4, 5]
}

/// A complete experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub env: EnvConfig,
    /// Architecture of every agent not listed in `agent_architectures`.
    pub architecture: Architecture,
    /// Optional per-agent architectures; empty means all use `architecture`.
    #[serde(default)]
    pub agent_architectures: Vec<Architecture>,
    #[serde(default = "default_total_steps")]
    pub total_steps: u64,
    /// Trailing window of the windowed metrics, in steps.
    #[serde(default = "default_window")]
    pub window: u64,
    /// Metrics are recorded every this many steps and after the last one.
    #[serde(default = "default_record_every")]
    pub record_every: u64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub ppo: PpoHyper,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Scenario(format!("{}: {m}", self.name)));
        self.env.validate().map_err(|e| HarnessError::Scenario(format!("{}: {e}", self.name)))?;
        self.ppo.validate().map_err(|e| HarnessError::Scenario(format!("{}: {e}", self.name)))?;
        if self.window == 0 || self.total_steps < self.window {
            return bad(format!("need total_steps >= window >= 1 (got {} and {})", self.total_steps, self.window));
        }
        if self.record_every == 0 {
            return bad("record_every must be >= 1".into());
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        let n = self.agent_architectures.len();
        if n != 0 && n != self.env.num_agents {
            return bad(format!("agent_architectures lists {n} entries for {} agents", self.env.num_agents));
        }
        Ok(())
    }

    /// One architecture per agent.
    pub fn architectures(&self) -> Vec<Architecture> {
        if self.agent_architectures.is_empty() {
            vec![self.architecture; self.env.num_agents]
        } else {
            self.agent_architectures.clone()
        }
    }

    /// The same scenario with every agent replaced by the scripted policy and trading disabled.
    pub fn baseline(&self) -> Scenario {
        let mut s = self.clone();
        s.name = format!("{}_BASELINE", self.name);
        s.architecture = Architecture::ScriptedFcfs;
        s.agent_architectures.clear();
        s.env.trading_enabled = false;
        s
    }

    pub fn from_toml(text: &str) -> Result<Scenario, HarnessError> {
        let s: Scenario = toml::from_str(text).map_err(|e| HarnessError::Scenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenarios always serialise")
    }

    /// A builtin name or a path to a TOML file.
    pub fn resolve(name_or_path: &str) -> Result<Scenario, HarnessError> {
        if let Some(s) = builtin(name_or_path) {
            return Ok(s);
        }
        let path = Path::new(name_or_path);
        if path.exists() {
            let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
            return Scenario::from_toml(&text);
        }
        Err(HarnessError::UnknownScenario(name_or_path.to_string()))
    }

    /// Sets the field at a dotted path, e.g. `env.num_cores=4` or
    /// `env.job_types.1.burst=3`. Only existing fields can be set.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), HarnessError> {
        self.apply_overrides(&[assignment])
    }

    /// Applies `key=value` assignments in order and validates the result
    /// once, so fields that constrain each other can change together. On
    /// error the scenario is left unchanged.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, assignments: &[S]) -> Result<(), HarnessError> {
        let mut tree = toml::Value::try_from(&*self).map_err(|e| HarnessError::Override(e.to_string()))?;
        for assignment in assignments {
            set_path(&mut tree, assignment.as_ref())?;
        }
        let joined = || assignments.iter().map(|a| a.as_ref()).collect::<Vec<_>>().join(", ");
        let updated: Scenario = tree
            .try_into()
            .map_err(|e: toml::de::Error| HarnessError::Override(format!("{}: {}", joined(), e.message())))?;
        updated.validate().map_err(|e| HarnessError::Override(format!("{}: {e}", joined())))?;
        *self = updated;
        Ok(())
    }
}

fn set_path(tree: &mut toml::Value, assignment: &str) -> Result<(), HarnessError> {
    let bad = |m: String| HarnessError::Override(format!("{assignment}: {m}"));
    let (path, raw) = assignment.split_once('=').ok_or_else(|| bad("expected key=value".into()))?;
    let mut node = tree;
    for key in path.trim().split('.') {
        node = match node {
            toml::Value::Table(t) => t.get_mut(key),
            toml::Value::Array(a) => key.parse::<usize>().ok().and_then(|i| a.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| bad(format!("unknown field {key:?}")))?;
    }
    let raw = raw.trim();
    *node = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    Ok(())
}

fn base(name: &str, env: EnvConfig, arch: Architecture) -> Scenario {
    Scenario {
        name: name.to_string(),
        env,
        architecture: arch,
        agent_architectures: Vec::new(),
        total_steps: default_total_steps(),
        window: default_window(),
        record_every: default_record_every(),
        seeds: default_seeds(),
        ppo: PpoHyper::default(),
    }
}

fn env(n: usize, m: usize, k: usize, job_types: Vec<JobType>, pricing: PricingMode, trading: bool) -> EnvConfig {
    EnvConfig {
        num_agents: n,
        num_cores: m,
        num_slots: k,
        job_types,
        pricing_mode: pricing,
        trading_enabled: trading,
        guard_threshold: 1_000_000,
    }
}

/// Frequent, long, low-priority jobs and rare, short, high-priority ones.
pub fn mixed_types() -> Vec<JobType> {
    vec![
        JobType { id: 0, priority: 1, burst: 10, spawn_prob: 0.9 },
        JobType { id: 1, priority: 5, burst: 2, spawn_prob: 0.1 },
    ]
}

/// Discount of the free-price scenarios. A price is a one-off bid paid one
/// step later, so price setters are trained close to myopically.
pub const FREE_PRICE_GAMMA: f64 = 0.5;

fn free_price(name: &str, env: EnvConfig) -> Scenario {
    let mut s = base(name, env, Architecture::DistPrice);
    s.ppo.gamma = FREE_PRICE_GAMMA;
    s
}

fn scarcity(name: &str, cores: usize, pricing: PricingMode) -> Scenario {
    let types = vec![JobType { id: 0, priority: 5, burst: 5, spawn_prob: 1.0 }];
    free_price(name, env(2, cores, 3, types, pricing, true))
}

fn pricing(name: &str, mode: PricingMode) -> Scenario {
    let types = [2, 4, 8]
        .into_iter()
        .enumerate()
        .map(|(id, priority)| JobType { id, priority, burst: 4, spawn_prob: 1.0 / 3.0 })
        .collect();
    free_price(name, env(2, 2, 3, types, mode, true))
}

/// Every builtin scenario, in a fixed order.
pub fn builtin_scenarios() -> Vec<Scenario> {
    use PricingMode::*;
    vec![
        base("EXP1_TRADING", env(2, 2, 3, mixed_types(), Fixed, true), Architecture::DistPs),
        base("EXP1_NO_TRADING", env(2, 2, 3, mixed_types(), Fixed, false), Architecture::DistPs),
        base("EXP2_ARCH", env(2, 2, 3, mixed_types(), Fixed, true), Architecture::Dist),
        base("EXP2_ARCH_2x2", env(2, 2, 3, mixed_types(), Fixed, true), Architecture::Dist),
        base("EXP2_ARCH_4x4", env(4, 4, 3, mixed_types(), Fixed, true), Architecture::Dist),
        scarcity("EXP3_SCARCITY", 2, FreeCommercial),
        scarcity("EXP3_SCARCITY_4C", 4, FreeCommercial),
        scarcity("EXP3_SCARCITY_NC", 2, FreeNoncommercial),
        scarcity("EXP3_SCARCITY_4C_NC", 4, FreeNoncommercial),
        pricing("EXP4_PRICING", FreeCommercial),
        pricing("EXP4_PRICING_NC", FreeNoncommercial),
    ]
}

pub fn builtin(name: &str) -> Option<Scenario> {
    builtin_scenarios().into_iter().find(|s| s.name.eq_ignore_ascii_case(name))
}
