//! Market-based multi-agent core scheduling: the environment, observation
//! codecs, PPO learners, agent architectures and the experiment harness.

pub mod agents;
pub mod env;
pub mod harness;
pub mod neural;
pub mod obs;
pub mod rng;

pub use agents::{feasibility_guard, AgentBundle, AgentsError, Architecture, Trainer, UnitRole};
pub use env::{AgentAction, EnvConfig, EnvError, JobType, Participant, PricingMode, SchedEnv, StepResult};
pub use harness::{aggregate, run_scenario, run_seeds, AggregateRecord, HarnessError, RunRecord, Scenario, SeriesTable};
pub use neural::{NeuralError, PpoHyper};
pub use obs::{cardinality, CodecError, UnitSpace};
