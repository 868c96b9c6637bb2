//! Observation encoders and action factoring.
//!
//! Every encoder returns a fixed-width vector whose length depends only on
//! the layout and the environment config. Values are scaled into `[0, 1]`
//! by the largest priority and burst of the config; empty positions are
//! zero, including their validity flag.

mod radix;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{Job, Participant, SchedEnv};

pub use radix::{cardinality, mixed_radix_decode, mixed_radix_encode, Radices, UnitSpace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("action index {index} out of range for space of size {size}")]
    IndexOutOfRange { index: u64, size: u64 },
    #[error("expected {want} digits, got {got}")]
    DigitCount { got: usize, want: usize },
    #[error("radix of zero")]
    ZeroRadix,
    #[error("infeasible (> 2^63)")]
    Infeasible,
}

/// Which encoder produced an observation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Layout {
    /// One core with its pending offers.
    Acceptor,
    /// All cores, each with its pending offers.
    SemiAcceptor,
    /// All cores plus one slot.
    DistOffer,
    /// All cores plus every slot of the agent.
    SemiOffer,
    /// `SemiAcceptor` followed by `SemiOffer`.
    Full,
    /// An offered job and its target core.
    Price,
}

pub const CORE_BLOCK: usize = 3;
pub const OFFER_BLOCK: usize = 4;
pub const SLOT_BLOCK: usize = 3;

impl Layout {
    /// Observation width for `m` cores, `n` agents and `k` slots.
    pub fn len(self, m: usize, n: usize, k: usize) -> usize {
        let acceptor = CORE_BLOCK + OFFER_BLOCK * n * k;
        match self {
            Layout::Acceptor => acceptor,
            Layout::SemiAcceptor => m * acceptor,
            Layout::DistOffer => CORE_BLOCK * m + SLOT_BLOCK,
            Layout::SemiOffer => CORE_BLOCK * m + SLOT_BLOCK * k,
            Layout::Full => m * acceptor + CORE_BLOCK * m + SLOT_BLOCK * k,
            Layout::Price => 4,
        }
    }

    pub fn len_for(self, env: &SchedEnv) -> usize {
        let c = env.config();
        self.len(c.num_cores, c.num_agents, c.num_slots)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObsVector {
    pub values: Vec<f64>,
    pub layout: Layout,
}

struct Scale {
    prio: f64,
    burst: f64,
}

impl Scale {
    fn of(env: &SchedEnv) -> Self {
        Scale { prio: f64::from(env.config().max_prio()), burst: f64::from(env.config().max_burst()) }
    }
}

fn push_core(out: &mut Vec<f64>, env: &SchedEnv, agent: usize, core: usize, s: &Scale) {
    let c = &env.cores()[core];
    match &c.running {
        Some(job) => {
            out.push(f64::from(job.priority) / s.prio);
            out.push(f64::from(job.remaining_burst) / s.burst);
        }
        None => out.extend([0.0, 0.0]),
    }
    out.push(if c.owner == Participant::Agent(agent) { 1.0 } else { 0.0 });
}

fn push_offers(out: &mut Vec<f64>, env: &SchedEnv, core: usize, s: &Scale) {
    let c = env.config();
    let capacity = c.num_agents * c.num_slots;
    let pending = env.pending_offers(core);
    for o in pending.iter().take(capacity) {
        out.extend([
            1.0,
            f64::from(o.price) / s.prio,
            f64::from(o.time_to_payment) / s.burst,
            f64::from(o.job_priority) / s.prio,
        ]);
    }
    out.extend(std::iter::repeat_n(0.0, OFFER_BLOCK * capacity.saturating_sub(pending.len())));
}

fn push_slot(out: &mut Vec<f64>, job: Option<&Job>, s: &Scale) {
    match job {
        Some(j) => out.extend([1.0, f64::from(j.priority) / s.prio, f64::from(j.remaining_burst) / s.burst]),
        None => out.extend([0.0; SLOT_BLOCK]),
    }
}

/// Core state, ownership flag and the pending offers of one core.
pub fn encode_acceptor_obs(env: &SchedEnv, agent: usize, core: usize) -> ObsVector {
    let s = Scale::of(env);
    let mut values = Vec::with_capacity(Layout::Acceptor.len_for(env));
    push_core(&mut values, env, agent, core, &s);
    push_offers(&mut values, env, core, &s);
    ObsVector { values, layout: Layout::Acceptor }
}

/// [`encode_acceptor_obs`] for every core, concatenated.
pub fn encode_semi_acceptor_obs(env: &SchedEnv, agent: usize) -> ObsVector {
    let s = Scale::of(env);
    let mut values = Vec::with_capacity(Layout::SemiAcceptor.len_for(env));
    for m in 0..env.config().num_cores {
        push_core(&mut values, env, agent, m, &s);
        push_offers(&mut values, env, m, &s);
    }
    ObsVector { values, layout: Layout::SemiAcceptor }
}

fn push_all_cores(out: &mut Vec<f64>, env: &SchedEnv, agent: usize, s: &Scale) {
    for m in 0..env.config().num_cores {
        push_core(out, env, agent, m, s);
    }
}

/// All cores plus the waiting job of one slot.
pub fn encode_offer_obs(env: &SchedEnv, agent: usize, slot: usize) -> ObsVector {
    let s = Scale::of(env);
    let mut values = Vec::with_capacity(Layout::DistOffer.len_for(env));
    push_all_cores(&mut values, env, agent, &s);
    push_slot(&mut values, env.slot(agent, slot).job.as_ref(), &s);
    ObsVector { values, layout: Layout::DistOffer }
}

/// All cores plus every slot of `agent`.
pub fn encode_semi_offer_obs(env: &SchedEnv, agent: usize) -> ObsVector {
    let s = Scale::of(env);
    let mut values = Vec::with_capacity(Layout::SemiOffer.len_for(env));
    push_all_cores(&mut values, env, agent, &s);
    for slot in env.slots(agent) {
        push_slot(&mut values, slot.job.as_ref(), &s);
    }
    ObsVector { values, layout: Layout::SemiOffer }
}

/// Everything the single network of a fully aggregated agent sees.
pub fn encode_full_obs(env: &SchedEnv, agent: usize) -> ObsVector {
    let mut values = encode_semi_acceptor_obs(env, agent).values;
    values.extend(encode_semi_offer_obs(env, agent).values);
    ObsVector { values, layout: Layout::Full }
}

/// Offered job and the target core's running job, for a price setter.
pub fn encode_price_obs(env: &SchedEnv, agent: usize, slot: usize, target_core: usize) -> ObsVector {
    let s = Scale::of(env);
    let mut values = Vec::with_capacity(4);
    match env.slot(agent, slot).job.as_ref() {
        Some(j) => values.extend([f64::from(j.priority) / s.prio, f64::from(j.remaining_burst) / s.burst]),
        None => values.extend([0.0, 0.0]),
    }
    match env.cores().get(target_core).and_then(|c| c.running.as_ref()) {
        Some(j) => values.extend([f64::from(j.priority) / s.prio, f64::from(j.remaining_burst) / s.burst]),
        None => values.extend([0.0, 0.0]),
    }
    ObsVector { values, layout: Layout::Price }
}
