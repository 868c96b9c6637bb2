use serde::{Deserialize, Serialize};

use super::EnvError;

/// A kind of job that can spawn into a slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobType {
    pub id: usize,
    /// Reward paid out when a job of this type terminates.
    pub priority: u32,
    /// Compute time in steps.
    pub burst: u32,
    pub spawn_prob: f64,
}

/// How offer prices are determined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PricingMode {
    /// Price equals the priority of the offered job.
    Fixed,
    /// Price chosen by a price setter, rewarded by margin over the price.
    FreeCommercial,
    /// Price chosen by a price setter, rewarded with the full priority unless it overshoots.
    FreeNoncommercial,
}

impl PricingMode {
    pub fn is_free(self) -> bool {
        !matches!(self, PricingMode::Fixed)
    }
}

fn default_true() -> bool {
    true
}

fn default_guard() -> u64 {
    1_000_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub num_agents: usize,
    pub num_cores: usize,
    pub num_slots: usize,
    pub job_types: Vec<JobType>,
    pub pricing_mode: PricingMode,
    #[serde(default = "default_true")]
    pub trading_enabled: bool,
    /// Largest per-unit action space an architecture may use.
    #[serde(default = "default_guard")]
    pub guard_threshold: u64,
}

impl EnvConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |msg: String| Err(EnvError::InvalidConfig(msg));
        if self.num_agents == 0 {
            return bad("num_agents must be >= 1".into());
        }
        if self.num_cores == 0 {
            return bad("num_cores must be >= 1".into());
        }
        if self.num_slots == 0 {
            return bad("num_slots must be >= 1".into());
        }
        if self.job_types.is_empty() {
            return bad("at least one job type is required".into());
        }
        let mut total = 0.0;
        for (i, jt) in self.job_types.iter().enumerate() {
            if jt.id != i {
                return bad(format!("job type at position {i} has id {}", jt.id));
            }
            if jt.priority < 1 {
                return bad(format!("job type {i}: priority must be >= 1"));
            }
            if jt.burst < 1 {
                return bad(format!("job type {i}: burst must be >= 1"));
            }
            if !(0.0..=1.0).contains(&jt.spawn_prob) {
                return bad(format!("job type {i}: spawn_prob {} outside [0, 1]", jt.spawn_prob));
            }
            total += jt.spawn_prob;
        }
        if total > 1.0 + 1e-9 {
            return bad(format!("sum of spawn probabilities is {total} > 1"));
        }
        if self.guard_threshold == 0 {
            return bad("guard_threshold must be >= 1".into());
        }
        Ok(())
    }

    pub fn max_prio(&self) -> u32 {
        self.job_types.iter().map(|j| j.priority).max().unwrap_or(1)
    }

    pub fn max_burst(&self) -> u32 {
        self.job_types.iter().map(|j| j.burst).max().unwrap_or(1)
    }
}
