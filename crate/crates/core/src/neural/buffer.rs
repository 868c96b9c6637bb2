/// Experience of one acting unit.
///
/// Samples get ids that stay valid across [`RolloutBuffer::drain_front`], so
/// a reward that arrives a few steps late still reaches its decision.
#[derive(Clone, Debug, Default)]
pub struct RolloutBuffer {
    pub obs: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub log_probs: Vec<f64>,
    pub values: Vec<f64>,
    pub rewards: Vec<f64>,
    /// Id of `obs[0]`.
    base: u64,
    /// Reward that arrived when no sample could take it; added to the next one.
    carry: f64,
}

impl RolloutBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores a decision and returns its id.
    pub fn push(&mut self, obs: Vec<f64>, action: usize, log_prob: f64, value: f64) -> u64 {
        self.obs.push(obs);
        self.actions.push(action);
        self.log_probs.push(log_prob);
        self.values.push(value);
        self.rewards.push(std::mem::take(&mut self.carry));
        self.base + self.rewards.len() as u64 - 1
    }

    /// Id the next pushed sample will get.
    pub fn next_id(&self) -> u64 {
        self.base + self.rewards.len() as u64
    }

    /// Adds `reward` to sample `id`. Rewards for drained samples go to the
    /// oldest retained one; with nothing retained they are carried.
    pub fn credit(&mut self, id: u64, reward: f64) {
        let local = id.saturating_sub(self.base) as usize;
        match self.rewards.get_mut(local) {
            Some(r) => *r += reward,
            None => self.carry += reward,
        }
    }

    /// Adds `reward` to the most recent sample, or carries it.
    pub fn credit_latest(&mut self, reward: f64) {
        match self.rewards.last_mut() {
            Some(r) => *r += reward,
            None => self.carry += reward,
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn carry(&self) -> f64 {
        self.carry
    }

    /// Removes and returns the first `n` samples; later ids are unchanged.
    pub fn drain_front(&mut self, n: usize) -> RolloutBuffer {
        let n = n.min(self.len());
        let out = RolloutBuffer {
            obs: self.obs.drain(..n).collect(),
            actions: self.actions.drain(..n).collect(),
            log_probs: self.log_probs.drain(..n).collect(),
            values: self.values.drain(..n).collect(),
            rewards: self.rewards.drain(..n).collect(),
            base: self.base,
            carry: 0.0,
        };
        self.base += n as u64;
        out
    }

    /// Drops all samples; a pending carry survives.
    pub fn clear(&mut self) {
        let n = self.len();
        self.drain_front(n);
    }
}
