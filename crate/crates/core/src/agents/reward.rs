use serde::{Deserialize, Serialize};

use crate::env::{Participant, PricingMode, StepResult};

use super::bundle::AgentBundle;
use super::AgentsError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RewardKind {
    /// Net settlement of a core's reward chain.
    Settlement,
    /// Priority of a job whose offer was accepted.
    Offer,
    /// Price setter's payoff for an accepted offer.
    Price,
}

/// A reward for one unit of one agent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitReward {
    pub unit: usize,
    /// Sample the reward belongs to; `None` means the unit's latest sample.
    pub sample: Option<u64>,
    pub reward: f64,
    pub kind: RewardKind,
}

/// Payoff when paying `price` for a job of priority `priority`: the saved
/// margin, or 0.5 for paying exactly the priority.
pub fn commercial_reward(priority: u32, price: u32) -> f64 {
    if priority == price {
        0.5
    } else {
        f64::from(priority) - f64::from(price)
    }
}

/// Payoff that ignores the price unless it exceeds the priority.
pub fn noncommercial_reward(priority: u32, price: u32) -> f64 {
    if priority >= price {
        f64::from(priority)
    } else {
        f64::from(priority) - f64::from(price)
    }
}

/// Maps `result` onto the units of `bundle`.
///
/// Settlement nets earned on a core go to the unit accepting for that core.
/// An accepted offer (by an agent or the auctioneer) pays the job's priority
/// to the unit that made it and the price payoff to its price setter, both
/// on the sample that made the offer. Auctioneer income goes nowhere.
pub fn route_rewards(
    bundle: &AgentBundle,
    result: &StepResult,
    pricing: PricingMode,
) -> Result<Vec<UnitReward>, AgentsError> {
    let mut out = Vec::new();
    if bundle.units.is_empty() {
        return Ok(out);
    }
    let me = Participant::Agent(bundle.agent);
    for p in result.payouts.iter().filter(|p| p.participant == me && p.amount != 0) {
        let unit = bundle
            .settlement_unit(p.core)
            .ok_or(AgentsError::UnknownUnit { agent: bundle.agent, unit: usize::MAX })?;
        out.push(UnitReward { unit, sample: None, reward: p.amount as f64, kind: RewardKind::Settlement });
    }
    for t in result.trades.iter().filter(|t| t.buyer == bundle.agent) {
        let Some(link) = bundle.live_offers.get(&t.offer.uid) else { continue };
        if let Some((unit, id)) = link.offer {
            out.push(UnitReward {
                unit,
                sample: Some(id),
                reward: f64::from(t.offer.job_priority),
                kind: RewardKind::Offer,
            });
        }
        if let Some((unit, id)) = link.price {
            let reward = match pricing {
                PricingMode::Fixed => continue,
                PricingMode::FreeCommercial => commercial_reward(t.offer.job_priority, t.price),
                PricingMode::FreeNoncommercial => noncommercial_reward(t.offer.job_priority, t.price),
            };
            out.push(UnitReward { unit, sample: Some(id), reward, kind: RewardKind::Price });
        }
    }
    Ok(out)
}
