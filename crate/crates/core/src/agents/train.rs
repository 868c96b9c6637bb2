use crate::env::{EnvConfig, SchedEnv, StepResult};
use crate::neural::{PpoHyper, UpdateStats};

use super::bundle::AgentBundle;
use super::reward::UnitReward;
use super::{AgentsError, Architecture};

/// Everything one training step produced.
#[derive(Clone, Debug)]
pub struct TrainStep {
    pub result: StepResult,
    /// Routed rewards per agent.
    pub rewards: Vec<Vec<UnitReward>>,
    /// Per agent and parameter set, when this step closed a rollout window.
    pub updates: Option<Vec<Vec<UpdateStats>>>,
}

/// Independent learners sharing one environment.
#[derive(Clone, Debug)]
pub struct Trainer {
    pub env: SchedEnv,
    pub bundles: Vec<AgentBundle>,
    pub hyper: PpoHyper,
    steps: u64,
}

impl Trainer {
    /// `archs` holds one architecture for every agent, or a single one used by all.
    pub fn new(config: EnvConfig, archs: &[Architecture], hyper: PpoHyper, seed: u64) -> Result<Self, AgentsError> {
        hyper.validate()?;
        let n = config.num_agents;
        let archs: Vec<Architecture> = match archs.len() {
            1 => vec![archs[0]; n],
            len if len == n => archs.to_vec(),
            got => return Err(AgentsError::ArchitectureCount { expected: n, got }),
        };
        let bundles = archs
            .iter()
            .enumerate()
            .map(|(a, &arch)| AgentBundle::new(a, arch, &config, seed))
            .collect::<Result<Vec<_>, _>>()?;
        let env = SchedEnv::new(config, seed)?;
        Ok(Trainer { env, bundles, hyper, steps: 0 })
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Acts, steps the environment, routes rewards, and updates every
    /// bundle once per rollout window.
    pub fn train_step(&mut self) -> Result<TrainStep, AgentsError> {
        let decisions =
            self.bundles.iter_mut().map(|b| b.act(&self.env)).collect::<Result<Vec<_>, _>>()?;
        let actions: Vec<_> = decisions.iter().map(|d| d.action.clone()).collect();
        let result = self.env.step(&actions)?;
        let mut rewards = Vec::with_capacity(self.bundles.len());
        for (b, d) in self.bundles.iter_mut().zip(&decisions) {
            rewards.push(b.observe(d, &result, self.env.config())?);
        }
        self.steps += 1;
        let mut updates = None;
        if self.steps % self.hyper.rollout_len as u64 == 0 {
            let mut all = Vec::with_capacity(self.bundles.len());
            for b in &mut self.bundles {
                all.push(b.update(&self.hyper)?);
            }
            updates = Some(all);
        }
        Ok(TrainStep { result, rewards, updates })
    }
}
