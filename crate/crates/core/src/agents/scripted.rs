//! A non-learning policy: waiting jobs are offered, highest priority first
//! and then oldest first, to the cores that will be free when the offers
//! are resolved. It never accepts trades.

use std::collections::BTreeSet;

use crate::env::{AgentAction, JointActions, Participant, SchedEnv};

/// Cores that will be idle at the next resolution: idle ones nobody bid on,
/// and ones whose job (running or about to be granted) ends this step.
fn cores_free_next(env: &SchedEnv) -> Vec<usize> {
    env.cores()
        .iter()
        .filter(|c| match &c.running {
            None => {
                c.owner == Participant::Auctioneer
                    && env.pending_offers(c.index).iter().all(|o| o.time_to_payment == 1)
            }
            Some(job) => job.remaining_burst == 1,
        })
        .map(|c| c.index)
        .collect()
}

/// Joint actions of all agents under the scripted policy.
pub fn fcfs_actions(env: &SchedEnv) -> JointActions {
    let cfg = env.config();
    let mut actions = vec![AgentAction::idle(cfg.num_cores, cfg.num_slots); cfg.num_agents];
    let offered: BTreeSet<u64> = env.offer_book().iter().map(|o| o.job_uid).collect();
    let mut queue = Vec::new();
    for a in 0..cfg.num_agents {
        for (s, slot) in env.slots(a).iter().enumerate() {
            if let Some(job) = slot.job.as_ref().filter(|j| !offered.contains(&j.uid)) {
                queue.push((std::cmp::Reverse(job.priority), job.arrival_time, a, s));
                actions[a].price[s] = job.priority;
            }
        }
    }
    queue.sort_unstable();
    for ((_, _, a, s), core) in queue.into_iter().zip(cores_free_next(env)) {
        actions[a].offer[s] = core + 1;
    }
    actions
}
