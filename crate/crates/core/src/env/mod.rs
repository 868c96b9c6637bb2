//! The scheduling environment.
//!
//! `N` agents each hold `K` self-refilling job slots and compete for `M`
//! cores. Idle cores belong to the auctioneer, which grants them to the
//! highest pending offer. Busy cores belong to the agent whose job runs on
//! them, and that agent may accept an offer for the core from anyone
//! (including itself). Offers made in one step can only be accepted in the
//! next.
//!
//! One call to [`SchedEnv::step`] runs these phases in order:
//!
//! 1. trade resolution on agent-owned cores,
//! 2. auctioneer grants on idle cores,
//! 3. the offer book is cleared,
//! 4. every running job computes one unit,
//! 5. finished jobs terminate and their core's reward chain is settled,
//! 6. this step's offers are registered for the next step,
//! 7. empty slots draw new jobs,
//! 8. time advances.
//!
//! A slot whose job is running on a core stays reserved for it. A job that
//! gets displaced by a trade returns to that slot with its progress kept.

mod chain;
mod config;
pub mod trace;

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{self, ChaCha8Rng, Stream};

pub use chain::{settle_chain, ChainEntry, Payouts, RewardChain};
pub use config::{EnvConfig, JobType, PricingMode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("reward chain lineage broken: {0}")]
    BrokenLineage(String),
    #[error("environment invariant violated: {0}")]
    Invariant(String),
}

/// Someone who can own a core or appear in a reward chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Participant {
    Auctioneer,
    Agent(usize),
}

impl fmt::Display for Participant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Participant::Auctioneer => write!(f, "AUC"),
            Participant::Agent(a) => write!(f, "A{a}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub uid: u64,
    pub type_id: usize,
    pub priority: u32,
    pub burst: u32,
    /// First step at which the job was observable.
    pub arrival_time: u64,
    pub remaining_burst: u32,
    pub owner_agent: usize,
    pub home_slot: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Slot {
    /// Waiting job, if any.
    pub job: Option<Job>,
    /// Uid of this slot's job while it runs on a core.
    pub reserved_for: Option<u64>,
}

impl Slot {
    pub fn is_free(&self) -> bool {
        self.job.is_none() && self.reserved_for.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Core {
    pub index: usize,
    pub owner: Participant,
    pub running: Option<Job>,
    pub chain: RewardChain,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Offer {
    pub uid: u64,
    pub source_agent: usize,
    pub source_slot: usize,
    pub job_uid: u64,
    pub job_type: usize,
    pub job_priority: u32,
    pub job_arrival: u64,
    pub target_core: usize,
    pub price: u32,
    pub time_to_payment: u32,
}

/// Decoded sub-actions of one agent for one step.
///
/// `accept[m]`: 0 declines, `i > 0` accepts the `i`-th pending offer on core
/// `m` (in [`SchedEnv::pending_offers`] order). Consulted only when the agent
/// owns the core.
///
/// `offer[k]`: 0 makes no offer, `c > 0` offers slot `k`'s job to core `c - 1`.
///
/// `price[k]`: price for slot `k`'s offer in free-pricing modes.
///
/// Out-of-range or missing entries are treated as decline / no offer.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AgentAction {
    pub accept: Vec<usize>,
    pub offer: Vec<usize>,
    pub price: Vec<u32>,
}

impl AgentAction {
    pub fn idle(num_cores: usize, num_slots: usize) -> Self {
        AgentAction { accept: vec![0; num_cores], offer: vec![0; num_slots], price: vec![0; num_slots] }
    }
}

pub type JointActions = Vec<AgentAction>;

/// An accepted offer, either by an agent or by the auctioneer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trade {
    pub core: usize,
    pub buyer: usize,
    pub seller: Participant,
    pub price: u32,
    pub offer: Offer,
    /// Uid of the job pushed back to its slot, for agent-to-agent trades.
    pub displaced_job: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompletedJob {
    pub uid: u64,
    pub type_id: usize,
    pub priority: u32,
    pub burst: u32,
    pub owner_agent: usize,
    pub core: usize,
    pub arrival_time: u64,
    /// Step in which the job terminated.
    pub completion_time: u64,
    pub tat: u64,
    pub ntat: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Payout {
    pub core: usize,
    pub participant: Participant,
    pub amount: i64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepResult {
    /// Step index (time before advancing).
    pub time: u64,
    pub trades: Vec<Trade>,
    /// Offers that were pending this step and not accepted.
    pub expired_offers: Vec<Offer>,
    /// Acceptances dropped because the offer was stale.
    pub voided_acceptances: usize,
    pub completed: Vec<CompletedJob>,
    /// Settlement payouts, including the auctioneer's share.
    pub payouts: Vec<Payout>,
    pub auctioneer_income: i64,
    /// Offers registered this step, pending for the next.
    pub registered_offers: Vec<Offer>,
}

impl StepResult {
    pub fn agent_payout_total(&self) -> i64 {
        self.payouts
            .iter()
            .filter(|p| p.participant != Participant::Auctioneer)
            .map(|p| p.amount)
            .sum()
    }

    pub fn terminated_priority_total(&self) -> i64 {
        self.completed.iter().map(|c| i64::from(c.priority)).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchedEnv {
    config: EnvConfig,
    time: u64,
    slots: Vec<Vec<Slot>>,
    cores: Vec<Core>,
    offers: Vec<Offer>,
    rng: ChaCha8Rng,
    next_job_uid: u64,
    next_offer_uid: u64,
}

impl SchedEnv {
    pub fn new(config: EnvConfig, seed: u64) -> Result<Self, EnvError> {
        config.validate()?;
        let cores = (0..config.num_cores)
            .map(|index| Core { index, owner: Participant::Auctioneer, running: None, chain: RewardChain::new() })
            .collect();
        let slots = vec![vec![Slot::default(); config.num_slots]; config.num_agents];
        let mut env = SchedEnv {
            config,
            time: 0,
            slots,
            cores,
            offers: Vec::new(),
            rng: rng::stream(seed, Stream::Spawn),
            next_job_uid: 0,
            next_offer_uid: 0,
        };
        env.spawn(0);
        Ok(env)
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn cores(&self) -> &[Core] {
        &self.cores
    }

    pub fn slots(&self, agent: usize) -> &[Slot] {
        &self.slots[agent]
    }

    pub fn slot(&self, agent: usize, slot: usize) -> &Slot {
        &self.slots[agent][slot]
    }

    /// All offers pending for the next step, ordered by (agent, slot).
    pub fn offer_book(&self) -> &[Offer] {
        &self.offers
    }

    /// Offers pending on `core`, ordered by source agent then slot.
    pub fn pending_offers(&self, core: usize) -> Vec<&Offer> {
        self.offers.iter().filter(|o| o.target_core == core).collect()
    }

    pub fn step(&mut self, actions: &[AgentAction]) -> Result<StepResult, EnvError> {
        let mut result = StepResult { time: self.time, ..StepResult::default() };
        let mut book = std::mem::take(&mut self.offers);
        let mut used = vec![false; book.len()];

        if self.config.trading_enabled {
            self.resolve_trades(actions, &book, &mut used, &mut result)?;
        }
        self.resolve_auctions(&book, &mut used, &mut result)?;
        result.expired_offers = book.drain(..).zip(used).filter(|(_, u)| !u).map(|(o, _)| o).collect();

        for core in &mut self.cores {
            if let Some(job) = core.running.as_mut() {
                job.remaining_burst -= 1;
            }
        }
        self.terminate(&mut result)?;
        self.register_offers(actions, &mut result);
        self.spawn(self.time + 1);
        self.time += 1;
        Ok(result)
    }

    fn waiting_job_matches(&self, offer: &Offer) -> bool {
        self.slots[offer.source_agent][offer.source_slot]
            .job
            .as_ref()
            .is_some_and(|j| j.uid == offer.job_uid)
    }

    fn resolve_trades(
        &mut self,
        actions: &[AgentAction],
        book: &[Offer],
        used: &mut [bool],
        result: &mut StepResult,
    ) -> Result<(), EnvError> {
        for m in 0..self.cores.len() {
            let Participant::Agent(owner) = self.cores[m].owner else { continue };
            let choice = actions.get(owner).and_then(|a| a.accept.get(m)).copied().unwrap_or(0);
            if choice == 0 {
                continue;
            }
            let Some(idx) = book.iter().enumerate().filter(|(_, o)| o.target_core == m).map(|(i, _)| i).nth(choice - 1)
            else {
                continue;
            };
            let offer = &book[idx];
            if !self.waiting_job_matches(offer) {
                result.voided_acceptances += 1;
                continue;
            }
            let displaced = self.cores[m]
                .running
                .take()
                .ok_or_else(|| EnvError::Invariant(format!("agent-owned core {m} is idle")))?;
            let home = &mut self.slots[displaced.owner_agent][displaced.home_slot];
            if home.reserved_for != Some(displaced.uid) || home.job.is_some() {
                return Err(EnvError::Invariant(format!("home slot of job {} is not reserved", displaced.uid)));
            }
            home.reserved_for = None;
            let displaced_uid = displaced.uid;
            home.job = Some(displaced);

            let slot = &mut self.slots[offer.source_agent][offer.source_slot];
            let job = slot.job.take().expect("checked above");
            slot.reserved_for = Some(job.uid);
            let core = &mut self.cores[m];
            core.chain.push(ChainEntry {
                buyer: Participant::Agent(offer.source_agent),
                seller: Participant::Agent(owner),
                price: offer.price,
            })?;
            core.owner = Participant::Agent(offer.source_agent);
            core.running = Some(job);
            used[idx] = true;
            result.trades.push(Trade {
                core: m,
                buyer: offer.source_agent,
                seller: Participant::Agent(owner),
                price: offer.price,
                offer: offer.clone(),
                displaced_job: Some(displaced_uid),
            });
        }
        Ok(())
    }

    fn resolve_auctions(&mut self, book: &[Offer], used: &mut [bool], result: &mut StepResult) -> Result<(), EnvError> {
        for m in 0..self.cores.len() {
            if self.cores[m].owner != Participant::Auctioneer {
                continue;
            }
            // Highest price, then earliest arrival, then lowest (agent, slot).
            let best = book
                .iter()
                .enumerate()
                .filter(|(i, o)| o.target_core == m && !used[*i] && self.waiting_job_matches(o))
                .min_by_key(|(_, o)| (std::cmp::Reverse(o.price), o.job_arrival, o.source_agent, o.source_slot))
                .map(|(i, _)| i);
            let Some(idx) = best else { continue };
            let offer = &book[idx];
            let slot = &mut self.slots[offer.source_agent][offer.source_slot];
            let job = slot.job.take().expect("filtered on a waiting job");
            slot.reserved_for = Some(job.uid);
            let core = &mut self.cores[m];
            core.chain.push(ChainEntry {
                buyer: Participant::Agent(offer.source_agent),
                seller: Participant::Auctioneer,
                price: offer.price,
            })?;
            core.owner = Participant::Agent(offer.source_agent);
            core.running = Some(job);
            used[idx] = true;
            result.trades.push(Trade {
                core: m,
                buyer: offer.source_agent,
                seller: Participant::Auctioneer,
                price: offer.price,
                offer: offer.clone(),
                displaced_job: None,
            });
        }
        Ok(())
    }

    fn terminate(&mut self, result: &mut StepResult) -> Result<(), EnvError> {
        for m in 0..self.cores.len() {
            let core = &mut self.cores[m];
            if core.running.as_ref().is_none_or(|j| j.remaining_burst > 0) {
                continue;
            }
            let job = core.running.take().expect("checked above");
            let owner = core.owner;
            if owner != Participant::Agent(job.owner_agent) {
                return Err(EnvError::Invariant(format!("core {m} owned by {owner} runs job of A{}", job.owner_agent)));
            }
            let payouts = settle_chain(&mut core.chain, job.priority, owner)?;
            core.owner = Participant::Auctioneer;
            for (participant, amount) in payouts {
                if participant == Participant::Auctioneer {
                    result.auctioneer_income += amount;
                }
                result.payouts.push(Payout { core: m, participant, amount });
            }
            let home = &mut self.slots[job.owner_agent][job.home_slot];
            if home.reserved_for != Some(job.uid) {
                return Err(EnvError::Invariant(format!("home slot of job {} lost its reservation", job.uid)));
            }
            home.reserved_for = None;
            let tat = self.time - job.arrival_time;
            result.completed.push(CompletedJob {
                uid: job.uid,
                type_id: job.type_id,
                priority: job.priority,
                burst: job.burst,
                owner_agent: job.owner_agent,
                core: m,
                arrival_time: job.arrival_time,
                completion_time: self.time,
                tat,
                ntat: tat as f64 / f64::from(job.burst),
            });
        }
        Ok(())
    }

    fn register_offers(&mut self, actions: &[AgentAction], result: &mut StepResult) {
        let max_prio = self.config.max_prio();
        for (agent, action) in actions.iter().enumerate().take(self.config.num_agents) {
            for (k, slot) in self.slots[agent].iter().enumerate() {
                let Some(job) = &slot.job else { continue };
                let target = action.offer.get(k).copied().unwrap_or(0);
                if target == 0 || target > self.cores.len() {
                    continue;
                }
                let core = target - 1;
                if !self.config.trading_enabled && self.cores[core].owner != Participant::Auctioneer {
                    continue;
                }
                let price = if self.config.pricing_mode.is_free() {
                    action.price.get(k).copied().unwrap_or(job.priority).min(max_prio)
                } else {
                    job.priority
                };
                let offer = Offer {
                    uid: self.next_offer_uid,
                    source_agent: agent,
                    source_slot: k,
                    job_uid: job.uid,
                    job_type: job.type_id,
                    job_priority: job.priority,
                    job_arrival: job.arrival_time,
                    target_core: core,
                    price,
                    time_to_payment: job.remaining_burst,
                };
                self.next_offer_uid += 1;
                result.registered_offers.push(offer.clone());
                self.offers.push(offer);
            }
        }
    }

    fn spawn(&mut self, arrival_time: u64) {
        for agent in 0..self.slots.len() {
            for k in 0..self.slots[agent].len() {
                if !self.slots[agent][k].is_free() {
                    continue;
                }
                let u: f64 = self.rng.random();
                let mut acc = 0.0;
                let mut drawn = None;
                for jt in &self.config.job_types {
                    acc += jt.spawn_prob;
                    if u < acc {
                        drawn = Some(jt);
                        break;
                    }
                }
                if let Some(jt) = drawn {
                    self.slots[agent][k].job = Some(Job {
                        uid: self.next_job_uid,
                        type_id: jt.id,
                        priority: jt.priority,
                        burst: jt.burst,
                        arrival_time,
                        remaining_burst: jt.burst,
                        owner_agent: agent,
                        home_slot: k,
                    });
                    self.next_job_uid += 1;
                }
            }
        }
    }

    /// Checks the structural invariants that must hold between steps.
    pub fn check_invariants(&self) -> Result<(), EnvError> {
        let fail = |m: String| Err(EnvError::Invariant(m));
        let mut seen = std::collections::BTreeSet::new();
        for core in &self.cores {
            match (&core.owner, &core.running) {
                (Participant::Auctioneer, None) => {
                    if !core.chain.is_empty() {
                        return fail(format!("idle core {} has a pending chain", core.index));
                    }
                }
                (Participant::Agent(a), Some(job)) => {
                    if job.owner_agent != *a || core.chain.holder() != Some(core.owner) {
                        return fail(format!("core {} ownership disagrees with its job/chain", core.index));
                    }
                    if self.slots[*a][job.home_slot].reserved_for != Some(job.uid) {
                        return fail(format!("running job {} has no reserved slot", job.uid));
                    }
                    if job.remaining_burst == 0 || job.remaining_burst > job.burst {
                        return fail(format!("running job {} has remaining burst {}", job.uid, job.remaining_burst));
                    }
                    if !seen.insert(job.uid) {
                        return fail(format!("job {} appears twice", job.uid));
                    }
                }
                _ => return fail(format!("core {} owner/idle mismatch", core.index)),
            }
            if let Some(first) = core.chain.entries().first() {
                if first.seller != Participant::Auctioneer {
                    return fail(format!("chain of core {} does not start at the auctioneer", core.index));
                }
            }
        }
        for (a, slots) in self.slots.iter().enumerate() {
            for (k, slot) in slots.iter().enumerate() {
                if slot.job.is_some() && slot.reserved_for.is_some() {
                    return fail(format!("slot ({a},{k}) both holds and reserves a job"));
                }
                if let Some(job) = &slot.job {
                    if job.owner_agent != a || job.home_slot != k || job.remaining_burst == 0 {
                        return fail(format!("slot ({a},{k}) holds a foreign or finished job"));
                    }
                    if job.arrival_time > self.time {
                        return fail(format!("job {} arrives in the future", job.uid));
                    }
                    if !seen.insert(job.uid) {
                        return fail(format!("job {} appears twice", job.uid));
                    }
                }
            }
        }
        Ok(())
    }
}
