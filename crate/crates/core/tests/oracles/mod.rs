//! Independent reference models used by the integration tests.
//!
//! Nothing here calls into the environment's scheduling or settlement code;
//! the oracles only share the plain data types and the seeded spawn stream.

#![allow(dead_code)]

pub mod baseline;
pub mod codec;
pub mod fuzz;

use std::collections::BTreeMap;

use marketsched::env::{EnvConfig, Participant};
use marketsched::rng::{stream, Stream};
use rand::Rng;

/// Net position of every participant after a chain of trades, recomputed
/// from the raw list: sellers gain, buyers pay, the final owner also gets
/// the priority. Zero positions are dropped.
pub fn ledger_payouts(
    trades: &[(Participant, Participant, u32)],
    priority: u32,
    final_owner: Participant,
) -> BTreeMap<Participant, i64> {
    let mut net: BTreeMap<Participant, i64> = BTreeMap::new();
    for &(buyer, seller, price) in trades {
        *net.entry(seller).or_default() += i64::from(price);
        *net.entry(buyer).or_default() -= i64::from(price);
    }
    *net.entry(final_owner).or_default() += i64::from(priority);
    net.retain(|_, v| *v != 0);
    net
}

/// A completed job as seen by the queue model.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Done {
    pub time: u64,
    pub uid: u64,
    pub agent: usize,
    pub priority: u32,
    pub burst: u32,
    pub tat: u64,
}

#[derive(Clone, Debug)]
struct QJob {
    uid: u64,
    priority: u32,
    burst: u32,
    arrival: u64,
    left: u32,
}

/// Central priority queue in front of `M` identical cores.
///
/// Dispatch happens once per step. A core that is free at the start of step
/// `t` takes the best job already visible at step `t - 1` (one step of offer
/// latency). Best means highest priority, then earliest arrival, then lowest
/// (agent, slot). Cores are filled in index order. A slot refills only when
/// its job has finished, with one uniform draw per empty slot in (agent,
/// slot) order from the run's spawn stream.
pub struct FcfsQueue {
    cfg: EnvConfig,
    rng: marketsched::rng::ChaCha8Rng,
    time: u64,
    next_uid: u64,
    /// `slots[a][k]`: waiting job, running job, or nothing.
    waiting: Vec<Vec<Option<QJob>>>,
    busy_slot: Vec<Vec<bool>>,
    cores: Vec<Option<(usize, usize, QJob)>>,
    /// Jobs visible at the previous dispatch decision.
    visible: Vec<u64>,
}

impl FcfsQueue {
    pub fn new(cfg: EnvConfig, seed: u64) -> Self {
        let (n, k, m) = (cfg.num_agents, cfg.num_slots, cfg.num_cores);
        let mut q = FcfsQueue {
            rng: stream(seed, Stream::Spawn),
            cfg,
            time: 0,
            next_uid: 0,
            waiting: vec![vec![None; k]; n],
            busy_slot: vec![vec![false; k]; n],
            cores: vec![None; m],
            visible: Vec::new(),
        };
        q.refill(0);
        q.visible = q.waiting_uids();
        q
    }

    fn waiting_uids(&self) -> Vec<u64> {
        self.waiting.iter().flatten().flatten().map(|j| j.uid).collect()
    }

    fn refill(&mut self, arrival: u64) {
        for a in 0..self.cfg.num_agents {
            for k in 0..self.cfg.num_slots {
                if self.waiting[a][k].is_some() || self.busy_slot[a][k] {
                    continue;
                }
                let u: f64 = self.rng.random();
                let mut cum = 0.0;
                let pick = self.cfg.job_types.iter().find(|jt| {
                    cum += jt.spawn_prob;
                    u < cum
                });
                if let Some(jt) = pick {
                    self.waiting[a][k] =
                        Some(QJob { uid: self.next_uid, priority: jt.priority, burst: jt.burst, arrival, left: jt.burst });
                    self.next_uid += 1;
                }
            }
        }
    }

    /// Advances one step and returns the jobs finishing in it.
    pub fn step(&mut self) -> Vec<Done> {
        let t = self.time;
        if t > 0 {
            let mut queue: Vec<(std::cmp::Reverse<u32>, u64, usize, usize)> = Vec::new();
            for a in 0..self.cfg.num_agents {
                for k in 0..self.cfg.num_slots {
                    if let Some(j) = &self.waiting[a][k] {
                        if self.visible.contains(&j.uid) {
                            queue.push((std::cmp::Reverse(j.priority), j.arrival, a, k));
                        }
                    }
                }
            }
            queue.sort();
            let mut queue = queue.into_iter();
            for m in 0..self.cores.len() {
                if self.cores[m].is_some() {
                    continue;
                }
                let Some((_, _, a, k)) = queue.next() else { break };
                let job = self.waiting[a][k].take().unwrap();
                self.busy_slot[a][k] = true;
                self.cores[m] = Some((a, k, job));
            }
        }
        let mut done = Vec::new();
        for m in 0..self.cores.len() {
            let Some((a, k, job)) = self.cores[m].as_mut() else { continue };
            job.left -= 1;
            if job.left == 0 {
                let (a, k) = (*a, *k);
                let job = self.cores[m].take().unwrap().2;
                self.busy_slot[a][k] = false;
                done.push(Done { time: t, uid: job.uid, agent: a, priority: job.priority, burst: job.burst, tat: t - job.arrival });
            }
        }
        self.visible = self.waiting_uids();
        self.refill(t + 1);
        self.time += 1;
        done.sort();
        done
    }
}
