//! Acting units, their assembly into per-agent architectures, reward
//! routing and the independent-learner training loop.

mod bundle;
pub mod checkpoint;
mod reward;
pub mod scripted;
mod train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{AgentAction, EnvConfig, EnvError};
use crate::neural::NeuralError;
use crate::obs::{cardinality, mixed_radix_decode, CodecError, Layout, UnitSpace};

pub use bundle::{AgentBundle, Decision, Unit};
pub use reward::{commercial_reward, noncommercial_reward, route_rewards, RewardKind, UnitReward};
pub use train::{TrainStep, Trainer};

#[derive(Debug, Error)]
pub enum AgentsError {
    #[error("{arch} is infeasible: {unit} has {} actions (guard {threshold})", fmt_cardinality(*.cardinality))]
    Infeasible { arch: Architecture, unit: &'static str, cardinality: Option<u64>, threshold: u64 },
    #[error("unknown architecture {0:?}")]
    UnknownArchitecture(String),
    #[error("expected {expected} architectures (one per agent), got {got}")]
    ArchitectureCount { expected: usize, got: usize },
    #[error("reward for unknown unit {unit} of agent {agent}")]
    UnknownUnit { agent: usize, unit: usize },
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

fn fmt_cardinality(c: Option<u64>) -> String {
    match c {
        Some(v) => v.to_string(),
        None => "infeasible (> 2^63)".to_string(),
    }
}

/// How an agent's decisions are split over acting units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Architecture {
    /// One network choosing every acceptance and offer jointly.
    Full,
    /// One network for all acceptances, one for all offers.
    Semi,
    /// One network per core (acceptance) and per slot (offer).
    Dist,
    /// `Dist` with one parameter set shared by the acceptors and one by the offer units.
    DistPs,
    /// `DistPs` plus one price setter per slot sharing a third parameter set.
    DistPrice,
    /// No learning: priority-ordered first-come-first-served offers to cores about to be free.
    ScriptedFcfs,
}

impl Architecture {
    pub const ALL: [Architecture; 6] = [
        Architecture::Full,
        Architecture::Semi,
        Architecture::Dist,
        Architecture::DistPs,
        Architecture::DistPrice,
        Architecture::ScriptedFcfs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Full => "FULL",
            Architecture::Semi => "SEMI",
            Architecture::Dist => "DIST",
            Architecture::DistPs => "DIST_PS",
            Architecture::DistPrice => "DIST_PRICE",
            Architecture::ScriptedFcfs => "SCRIPTED_FCFS",
        }
    }

    pub fn hidden_width(self) -> usize {
        match self {
            Architecture::Full => 64,
            Architecture::Semi => 32,
            _ => 16,
        }
    }

    pub fn learns(self) -> bool {
        self != Architecture::ScriptedFcfs
    }

    /// Acting units of one agent, in bundle order.
    pub fn roles(self, m: usize, k: usize) -> Vec<UnitRole> {
        match self {
            Architecture::Full => vec![UnitRole::Full],
            Architecture::Semi => vec![UnitRole::SemiAccept, UnitRole::SemiOffer],
            Architecture::Dist | Architecture::DistPs => {
                (0..m).map(UnitRole::Acceptor).chain((0..k).map(UnitRole::Offer)).collect()
            }
            Architecture::DistPrice => (0..m)
                .map(UnitRole::Acceptor)
                .chain((0..k).map(UnitRole::Offer))
                .chain((0..k).map(UnitRole::Price))
                .collect(),
            Architecture::ScriptedFcfs => Vec::new(),
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = AgentsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        Architecture::ALL
            .into_iter()
            .find(|a| a.name() == norm)
            .ok_or_else(|| AgentsError::UnknownArchitecture(s.to_string()))
    }
}

/// What one acting unit decides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnitRole {
    Full,
    SemiAccept,
    SemiOffer,
    /// Acceptance on one core.
    Acceptor(usize),
    /// Target core of one slot.
    Offer(usize),
    /// Price of one slot's offer.
    Price(usize),
}

impl UnitRole {
    pub fn layout(self) -> Layout {
        match self {
            UnitRole::Full => Layout::Full,
            UnitRole::SemiAccept => Layout::SemiAcceptor,
            UnitRole::SemiOffer => Layout::SemiOffer,
            UnitRole::Acceptor(_) => Layout::Acceptor,
            UnitRole::Offer(_) => Layout::DistOffer,
            UnitRole::Price(_) => Layout::Price,
        }
    }

    /// Tabulated space kind; price setters have none.
    pub fn space(self) -> Option<UnitSpace> {
        match self {
            UnitRole::Full => Some(UnitSpace::Full),
            UnitRole::SemiAccept => Some(UnitSpace::SemiAccept),
            UnitRole::SemiOffer => Some(UnitSpace::SemiOffer),
            UnitRole::Acceptor(_) => Some(UnitSpace::DistAccept),
            UnitRole::Offer(_) => Some(UnitSpace::DistOffer),
            UnitRole::Price(_) => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self.space() {
            Some(s) => s.label(),
            None => "price setter",
        }
    }

    /// Number of discrete actions.
    pub fn action_count(self, config: &EnvConfig) -> Result<u64, CodecError> {
        match self.space() {
            Some(s) => cardinality(s, config.num_cores, config.num_agents, config.num_slots),
            None => Ok(u64::from(config.max_prio()) + 1),
        }
    }

    /// Writes the sub-actions encoded by `index` into `action`.
    pub fn apply(self, index: u64, config: &EnvConfig, action: &mut AgentAction) -> Result<(), CodecError> {
        let (m, n, k) = (config.num_cores, config.num_agents, config.num_slots);
        let digits = match self.space() {
            Some(s) => mixed_radix_decode(index, &s.radices(m, n, k)?)?,
            None => vec![index],
        };
        let d = |i: usize| digits[i] as usize;
        match self {
            UnitRole::Full => {
                (0..m).for_each(|c| action.accept[c] = d(c));
                (0..k).for_each(|s| action.offer[s] = d(m + s));
            }
            UnitRole::SemiAccept => (0..m).for_each(|c| action.accept[c] = d(c)),
            UnitRole::SemiOffer => (0..k).for_each(|s| action.offer[s] = d(s)),
            UnitRole::Acceptor(c) => action.accept[c] = d(0),
            UnitRole::Offer(s) => action.offer[s] = d(0),
            UnitRole::Price(s) => action.price[s] = d(0) as u32,
        }
        Ok(())
    }
}

/// Rejects `arch` when any of its units has more actions than the config's guard threshold.
pub fn feasibility_guard(arch: Architecture, config: &EnvConfig) -> Result<(), AgentsError> {
    for role in arch.roles(config.num_cores, config.num_slots) {
        let size = role.action_count(config).ok();
        if size.is_none_or(|s| s > config.guard_threshold) {
            return Err(AgentsError::Infeasible {
                arch,
                unit: role.label(),
                cardinality: size,
                threshold: config.guard_threshold,
            });
        }
    }
    Ok(())
}
