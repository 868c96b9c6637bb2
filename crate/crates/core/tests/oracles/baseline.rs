//! The scripted baseline compared with the central priority queue.

use marketsched::env::{EnvConfig, JobType, PricingMode};
use marketsched::harness::mixed_types;
use marketsched::{Architecture, PpoHyper, Trainer};

use super::{Done, FcfsQueue};

fn config(n: usize, m: usize, k: usize, job_types: Vec<JobType>) -> EnvConfig {
    EnvConfig {
        num_agents: n,
        num_cores: m,
        num_slots: k,
        job_types,
        pricing_mode: PricingMode::Fixed,
        trading_enabled: false,
        guard_threshold: 1_000_000,
    }
}

/// Three fixed settings: the mixed two-type workload, sparse arrivals of
/// three types, and unit bursts on four cores.
pub fn scenarios() -> Vec<(&'static str, EnvConfig, u64)> {
    let jt = |id, priority, burst, spawn_prob| JobType { id, priority, burst, spawn_prob };
    vec![
        ("mixed 2x2x3", config(2, 2, 3, mixed_types()), 7),
        ("sparse 3x2x2", config(3, 2, 2, vec![jt(0, 2, 3, 0.2), jt(1, 4, 1, 0.15), jt(2, 8, 2, 0.1)]), 11),
        ("unit bursts 4x4x2", config(4, 4, 2, vec![jt(0, 1, 1, 0.5), jt(1, 3, 1, 0.3), jt(2, 9, 4, 0.2)]), 23),
    ]
}

/// Runs the scripted agents through the trainer and the queue side by side.
/// Returns the number of completions compared.
pub fn compare(cfg: &EnvConfig, seed: u64, steps: u64) -> Result<usize, String> {
    let mut tr = Trainer::new(cfg.clone(), &[Architecture::ScriptedFcfs], PpoHyper::default(), seed)
        .map_err(|e| e.to_string())?;
    let mut queue = FcfsQueue::new(cfg.clone(), seed);
    let mut compared = 0;
    for t in 0..steps {
        let step = tr.train_step().map_err(|e| e.to_string())?;
        tr.env.check_invariants().map_err(|e| e.to_string())?;
        let mut got: Vec<Done> = step
            .result
            .completed
            .iter()
            .map(|c| Done {
                time: c.completion_time,
                uid: c.uid,
                agent: c.owner_agent,
                priority: c.priority,
                burst: c.burst,
                tat: c.tat,
            })
            .collect();
        got.sort();
        let want = queue.step();
        if got != want {
            return Err(format!("step {t}: environment {got:?}, queue {want:?}"));
        }
        compared += want.len();
    }
    Ok(compared)
}
