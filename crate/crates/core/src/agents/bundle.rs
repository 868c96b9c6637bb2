use std::collections::BTreeMap;

use crate::env::{AgentAction, EnvConfig, Participant, SchedEnv, StepResult};
use crate::neural::{gae, ppo_update, sample, Experience, InitGains, NetParams, PolicyNet, PpoHyper, RolloutBuffer, UpdateStats};
use crate::obs::{
    encode_acceptor_obs, encode_full_obs, encode_offer_obs, encode_price_obs, encode_semi_acceptor_obs,
    encode_semi_offer_obs,
};
use crate::rng::{self, ChaCha8Rng, Stream};

use super::reward::{route_rewards, UnitReward};
use super::{feasibility_guard, scripted, AgentsError, Architecture, UnitRole};

/// One acting unit and its experience.
#[derive(Clone, Debug)]
pub struct Unit {
    pub role: UnitRole,
    /// Index into [`AgentBundle::nets`].
    pub net: usize,
    pub buffer: RolloutBuffer,
    /// Id of the sample this unit recorded in the current step.
    step_sample: Option<u64>,
}

/// A sampled decision of one unit.
pub type SampleRef = (usize, u64);

/// Result of [`AgentBundle::act`].
#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub action: AgentAction,
    /// Per slot, the sample that chose its target core.
    pub offer_samples: Vec<Option<SampleRef>>,
    /// Per slot, the sample that chose its price.
    pub price_samples: Vec<Option<SampleRef>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct OfferLink {
    pub offer: Option<SampleRef>,
    pub price: Option<SampleRef>,
}

/// All acting units of one agent.
#[derive(Clone, Debug)]
pub struct AgentBundle {
    pub agent: usize,
    pub arch: Architecture,
    pub nets: Vec<PolicyNet>,
    pub units: Vec<Unit>,
    policy_rng: ChaCha8Rng,
    shuffle_rng: ChaCha8Rng,
    /// Offers registered in the previous step, by uid.
    pub(crate) live_offers: BTreeMap<u64, OfferLink>,
}

fn net_plan(arch: Architecture, roles: &[UnitRole]) -> Vec<usize> {
    match arch {
        Architecture::DistPs | Architecture::DistPrice => roles
            .iter()
            .map(|r| match r {
                UnitRole::Acceptor(_) => 0,
                UnitRole::Offer(_) => 1,
                _ => 2,
            })
            .collect(),
        _ => (0..roles.len()).collect(),
    }
}

impl AgentBundle {
    pub fn new(agent: usize, arch: Architecture, config: &EnvConfig, seed: u64) -> Result<Self, AgentsError> {
        feasibility_guard(arch, config)?;
        let (m, n, k) = (config.num_cores, config.num_agents, config.num_slots);
        let roles = arch.roles(m, k);
        let plan = net_plan(arch, &roles);
        let mut init = rng::stream(seed, Stream::Init(agent));
        let mut nets: Vec<PolicyNet> = Vec::new();
        for (role, &net) in roles.iter().zip(&plan) {
            if net == nets.len() {
                let actions = role.action_count(config)? as usize;
                let input = role.layout().len(m, n, k);
                let params = NetParams::random(input, arch.hidden_width(), actions, InitGains::default(), &mut init);
                nets.push(PolicyNet::new(params));
            }
        }
        let units = roles
            .into_iter()
            .zip(plan)
            .map(|(role, net)| Unit { role, net, buffer: RolloutBuffer::new(), step_sample: None })
            .collect();
        Ok(AgentBundle {
            agent,
            arch,
            nets,
            units,
            policy_rng: rng::stream(seed, Stream::Policy(agent)),
            shuffle_rng: rng::stream(seed, Stream::Shuffle(agent)),
            live_offers: BTreeMap::new(),
        })
    }

    /// Index of the unit that receives settlement payouts earned on `core`.
    pub fn settlement_unit(&self, core: usize) -> Option<usize> {
        self.units.iter().position(|u| match u.role {
            UnitRole::Acceptor(c) => c == core,
            UnitRole::SemiAccept | UnitRole::Full => true,
            _ => false,
        })
    }

    /// Observes `env`, samples every consulted unit and records the samples.
    pub fn act(&mut self, env: &SchedEnv) -> Result<Decision, AgentsError> {
        let cfg = env.config();
        let (m, k) = (cfg.num_cores, cfg.num_slots);
        let a = self.agent;
        let mut action = AgentAction::idle(m, k);
        for (s, slot) in env.slots(a).iter().enumerate() {
            if let Some(job) = &slot.job {
                action.price[s] = job.priority;
            }
        }
        let mut decision = Decision { action, offer_samples: vec![None; k], price_samples: vec![None; k] };
        if self.arch == Architecture::ScriptedFcfs {
            let joint = scripted::fcfs_actions(env);
            decision.action = joint.into_iter().nth(a).expect("one action per agent");
            return Ok(decision);
        }

        let me = Participant::Agent(a);
        let owns = |c: usize| env.cores()[c].owner == me;
        let owns_any = (0..m).any(owns);
        let waiting = |s: usize| env.slot(a, s).job.is_some();
        let any_waiting = (0..k).any(waiting);
        let trading = cfg.trading_enabled;

        for u in 0..self.units.len() {
            self.units[u].step_sample = None;
            let role = self.units[u].role;
            let obs = match role {
                UnitRole::Acceptor(c) if trading && owns(c) => encode_acceptor_obs(env, a, c),
                UnitRole::Offer(s) if waiting(s) => encode_offer_obs(env, a, s),
                UnitRole::Price(s) => {
                    let target = decision.action.offer[s];
                    let registered = target > 0
                        && target <= m
                        && (trading || env.cores()[target - 1].owner == Participant::Auctioneer);
                    if !(cfg.pricing_mode.is_free() && waiting(s) && registered) {
                        continue;
                    }
                    encode_price_obs(env, a, s, target - 1)
                }
                UnitRole::SemiAccept if trading && owns_any => encode_semi_acceptor_obs(env, a),
                UnitRole::SemiOffer if any_waiting => encode_semi_offer_obs(env, a),
                UnitRole::Full if (trading && owns_any) || any_waiting => encode_full_obs(env, a),
                _ => continue,
            };
            let net = &self.nets[self.units[u].net].params;
            let (logits, value) = net.forward(&obs.values)?;
            let (index, log_prob) = sample(&logits, &mut self.policy_rng);
            let id = self.units[u].buffer.push(obs.values, index, log_prob, value);
            self.units[u].step_sample = Some(id);
            role.apply(index as u64, cfg, &mut decision.action)?;
            match role {
                UnitRole::Offer(s) => decision.offer_samples[s] = Some((u, id)),
                UnitRole::Price(s) => decision.price_samples[s] = Some((u, id)),
                UnitRole::SemiOffer | UnitRole::Full => {
                    decision.offer_samples.iter_mut().for_each(|o| *o = Some((u, id)));
                }
                _ => {}
            }
        }
        Ok(decision)
    }

    /// Routes the step's rewards into the unit buffers and remembers which
    /// samples made this step's offers.
    pub fn observe(
        &mut self,
        decision: &Decision,
        result: &StepResult,
        config: &EnvConfig,
    ) -> Result<Vec<UnitReward>, AgentsError> {
        let rewards = route_rewards(self, result, config.pricing_mode)?;
        for r in &rewards {
            let unit = self.units.get_mut(r.unit).ok_or(AgentsError::UnknownUnit { agent: self.agent, unit: r.unit })?;
            match r.sample {
                Some(id) => unit.buffer.credit(id, r.reward),
                None => unit.buffer.credit_latest(r.reward),
            }
        }
        self.live_offers.clear();
        for o in result.registered_offers.iter().filter(|o| o.source_agent == self.agent) {
            let link = OfferLink { offer: decision.offer_samples[o.source_slot], price: decision.price_samples[o.source_slot] };
            self.live_offers.insert(o.uid, link);
        }
        Ok(rewards)
    }

    /// One PPO update per parameter set on the experience of its units.
    ///
    /// Samples taken in the current step stay in the buffers, since their
    /// rewards are not known yet, and so does the newest sample, whose value
    /// bootstraps the rest of the trajectory.
    pub fn update(&mut self, hyper: &PpoHyper) -> Result<Vec<UpdateStats>, AgentsError> {
        let mut stats = Vec::with_capacity(self.nets.len());
        for net in 0..self.nets.len() {
            let mut exp = Experience::default();
            for unit in self.units.iter_mut().filter(|u| u.net == net) {
                let buf = &mut unit.buffer;
                let len = buf.len();
                let fresh = unit.step_sample.map_or(0, |id| (buf.next_id() - id) as usize);
                let cut = len.saturating_sub(fresh.max(1));
                if cut == 0 {
                    continue;
                }
                let head = buf.drain_front(cut);
                let (advantages, returns) = gae(&head.rewards, &head.values, buf.values[0], hyper.gamma, hyper.lambda);
                exp.extend(Experience { obs: head.obs, actions: head.actions, log_probs: head.log_probs, advantages, returns });
            }
            stats.push(ppo_update(&mut self.nets[net], exp, hyper, &mut self.shuffle_rng)?);
        }
        Ok(stats)
    }
}
