//! Per-core ledgers of pending trade payments.
//!
//! A chain starts with the auctioneer granting an idle core and grows by one
//! entry per accepted trade. Nothing is paid until the job running on the core
//! terminates; at that point every participant receives its net position and
//! the final owner additionally receives the job priority.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{EnvError, Participant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainEntry {
    pub buyer: Participant,
    pub seller: Participant,
    pub price: u32,
}

/// Net payout per participant of one settlement.
pub type Payouts = BTreeMap<Participant, i64>;

/// Chronological trade ledger of one core.
///
/// Net positions are maintained incrementally as entries are appended, so
/// settlement is a read of the running balances.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RewardChain {
    entries: Vec<ChainEntry>,
    balances: Payouts,
}

impl RewardChain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[ChainEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Buyer of the latest entry.
    pub fn holder(&self) -> Option<Participant> {
        self.entries.last().map(|e| e.buyer)
    }

    /// Appends a trade, rejecting entries that break the ownership lineage.
    pub fn push(&mut self, entry: ChainEntry) -> Result<(), EnvError> {
        let expected_seller = self.holder().unwrap_or(Participant::Auctioneer);
        if entry.seller != expected_seller {
            return Err(EnvError::BrokenLineage(format!(
                "entry {} sold by {} but core is held by {}",
                self.entries.len(),
                entry.seller,
                expected_seller
            )));
        }
        if entry.buyer == Participant::Auctioneer {
            return Err(EnvError::BrokenLineage("the auctioneer never buys".into()));
        }
        let price = i64::from(entry.price);
        *self.balances.entry(entry.seller).or_insert(0) += price;
        *self.balances.entry(entry.buyer).or_insert(0) -= price;
        self.entries.push(entry);
        Ok(())
    }

    pub fn clear(&mut self) {
        self.entries.clear();
        self.balances.clear();
    }
}

/// Settles `chain` for a job of `terminal_priority` finishing under `final_owner`.
///
/// Every participant receives what it sold for minus what it paid; the final
/// owner also receives the terminal priority. The payouts sum to exactly
/// `terminal_priority`. The chain is emptied.
pub fn settle_chain(
    chain: &mut RewardChain,
    terminal_priority: u32,
    final_owner: Participant,
) -> Result<Payouts, EnvError> {
    if let Some(holder) = chain.holder() {
        if holder != final_owner {
            return Err(EnvError::BrokenLineage(format!(
                "settling for {final_owner} but the chain ends with {holder}"
            )));
        }
    }
    let mut payouts = std::mem::take(&mut chain.balances);
    *payouts.entry(final_owner).or_insert(0) += i64::from(terminal_priority);
    chain.clear();
    Ok(payouts)
}
