//! Scenarios, multi-seed runs, windowed metrics, aggregation and export.

mod export;
mod metrics;
mod scenario;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::agents::{AgentsError, Trainer};
use crate::env::StepResult;

pub use export::{export, from_csv_str, import, to_csv_string, ExportFormat, Row, SeriesTable, CSV_HEADER};
pub use metrics::{
    aggregate, mean_std, ntat_series, price_series, AggPoint, AggregateRecord, Recorder, RunRecord, AUCTIONEER_INCOME,
    TRADES, UTILIZATION,
};
pub use scenario::{builtin, builtin_scenarios, mixed_types, Scenario};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown scenario {0:?} (not a builtin name or an existing file)")]
    UnknownScenario(String),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("invalid override {0}")]
    Override(String),
    #[error("aggregate: {0}")]
    Aggregate(String),
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("seed {seed}: {source}")]
    Run { seed: u64, source: AgentsError },
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.to_path_buf(), source }
    }

    /// True when the run failed because an architecture is too large.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, HarnessError::Run { source: AgentsError::Infeasible { .. }, .. })
    }
}

/// Trains the scenario's agents for `total_steps` with `seed`, calling
/// `each` after every step.
pub fn run_with<F: FnMut(&StepResult)>(scenario: &Scenario, seed: u64, mut each: F) -> Result<RunRecord, HarnessError> {
    scenario.validate()?;
    let run_err = |source| HarnessError::Run { seed, source };
    let mut trainer =
        Trainer::new(scenario.env.clone(), &scenario.architectures(), scenario.ppo, seed).map_err(run_err)?;
    let cfg = &scenario.env;
    let mut rec = Recorder::new(&scenario.name, seed, cfg.job_types.len(), cfg.num_cores, scenario.window);
    for t in 1..=scenario.total_steps {
        let step = trainer.train_step().map_err(run_err)?;
        rec.observe(&step.result, &trainer.env);
        each(&step.result);
        if t % scenario.record_every == 0 || t == scenario.total_steps {
            rec.sample(t);
        }
    }
    Ok(rec.finish())
}

/// Deterministic given `(scenario, seed)`.
pub fn run_scenario(scenario: &Scenario, seed: u64) -> Result<RunRecord, HarnessError> {
    run_with(scenario, seed, |_| {})
}

/// Runs every seed of the scenario on `workers` threads; results are in seed order.
pub fn run_seeds(scenario: &Scenario, workers: usize) -> Vec<Result<RunRecord, HarnessError>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().expect("thread pool");
    pool.install(|| scenario.seeds.par_iter().map(|&s| run_scenario(scenario, s)).collect())
}
