//! Random valid play checked against the ledger oracle.

use std::collections::BTreeMap;

use marketsched::env::{AgentAction, EnvConfig, JobType, Participant, PricingMode, SchedEnv};
use marketsched::rng::{stream, Stream};
use rand::Rng;

use super::ledger_payouts;

#[derive(Clone, Copy, Debug, Default)]
pub struct FuzzStats {
    pub steps: u64,
    pub settlements: u64,
    /// Settled chains with at least one agent-to-agent trade.
    pub traded_chains: u64,
    pub priority_total: i64,
}

pub fn random_config<R: Rng>(rng: &mut R) -> EnvConfig {
    let types = rng.random_range(1..=3);
    let share = 1.0 / types as f64;
    let job_types = (0..types)
        .map(|id| JobType {
            id,
            priority: rng.random_range(1..=9),
            burst: rng.random_range(1..=6),
            spawn_prob: share * rng.random_range(0.3..=1.0),
        })
        .collect();
    let pricing_mode = [PricingMode::Fixed, PricingMode::FreeCommercial, PricingMode::FreeNoncommercial][rng.random_range(0..3)];
    EnvConfig {
        num_agents: rng.random_range(1..=4),
        num_cores: rng.random_range(1..=4),
        num_slots: rng.random_range(1..=3),
        job_types,
        pricing_mode,
        trading_enabled: rng.random_bool(0.8),
        guard_threshold: 1_000_000,
    }
}

/// Accept indices may exceed the pending list and offers may target any
/// core, so invalid choices are exercised too.
pub fn random_actions<R: Rng>(env: &SchedEnv, rng: &mut R) -> Vec<AgentAction> {
    let c = env.config();
    let max_prio = c.max_prio();
    (0..c.num_agents)
        .map(|_| AgentAction {
            accept: (0..c.num_cores).map(|m| rng.random_range(0..=env.pending_offers(m).len() + 1)).collect(),
            offer: (0..c.num_slots).map(|_| rng.random_range(0..=c.num_cores)).collect(),
            price: (0..c.num_slots).map(|_| rng.random_range(0..=max_prio + 1)).collect(),
        })
        .collect()
}

/// `episodes` random configurations, `steps` random joint actions each.
/// Every step must conserve reward exactly, and every settlement must equal
/// the ledger recomputed from the core's trades.
pub fn conservation(episodes: u64, steps: u64, seed: u64) -> Result<FuzzStats, String> {
    let mut rng = stream(seed, Stream::Aux(1));
    let mut stats = FuzzStats::default();
    for episode in 0..episodes {
        let cfg = random_config(&mut rng);
        let mut env = SchedEnv::new(cfg, seed + episode).map_err(|e| e.to_string())?;
        let mut chains: Vec<Vec<(Participant, Participant, u32)>> = vec![Vec::new(); env.config().num_cores];
        for _ in 0..steps {
            let actions = random_actions(&env, &mut rng);
            let r = env.step(&actions).map_err(|e| e.to_string())?;
            env.check_invariants().map_err(|e| e.to_string())?;
            for t in &r.trades {
                chains[t.core].push((Participant::Agent(t.buyer), t.seller, t.price));
            }
            let mut by_core: BTreeMap<usize, BTreeMap<Participant, i64>> = BTreeMap::new();
            for p in r.payouts.iter().filter(|p| p.amount != 0) {
                *by_core.entry(p.core).or_default().entry(p.participant).or_default() += p.amount;
            }
            for c in &r.completed {
                let chain = std::mem::take(&mut chains[c.core]);
                if chain.iter().any(|(_, seller, _)| *seller != Participant::Auctioneer) {
                    stats.traded_chains += 1;
                }
                let want = ledger_payouts(&chain, c.priority, Participant::Agent(c.owner_agent));
                let got = by_core.remove(&c.core).unwrap_or_default();
                if got != want {
                    return Err(format!("core {} at t={}: settled {got:?}, ledger {want:?}", c.core, r.time));
                }
                stats.settlements += 1;
            }
            if !by_core.is_empty() {
                return Err(format!("payouts without a termination at t={}: {by_core:?}", r.time));
            }
            let paid = r.agent_payout_total() + r.auctioneer_income;
            if paid != r.terminated_priority_total() {
                return Err(format!("t={}: paid {paid}, terminated {}", r.time, r.terminated_priority_total()));
            }
            stats.priority_total += paid;
            stats.steps += 1;
        }
    }
    Ok(stats)
}
