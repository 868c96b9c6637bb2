//! Run-level random streams.
//!
//! Every stochastic draw in a run comes from a ChaCha8 generator keyed by the
//! run seed plus a fixed stream id, so the order in which components are
//! constructed never changes what they draw.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Named random streams of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    /// Slot refills in the environment.
    Spawn,
    /// Action sampling of one agent.
    Policy(usize),
    /// Parameter initialisation of one agent.
    Init(usize),
    /// Minibatch shuffling of one agent.
    Shuffle(usize),
    /// Anything test- or tool-specific that must not collide with the above.
    Aux(u64),
}

impl Stream {
    pub fn id(self) -> u64 {
        match self {
            Stream::Spawn => 1,
            Stream::Policy(a) => 0x1_0000 + a as u64,
            Stream::Init(a) => 0x2_0000 + a as u64,
            Stream::Shuffle(a) => 0x3_0000 + a as u64,
            Stream::Aux(n) => 0x100_0000 + n,
        }
    }
}

/// Generator for `stream` of the run identified by `seed`.
pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which.id());
    rng
}
