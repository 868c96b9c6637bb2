use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::env::{Participant, SchedEnv, StepResult};

/// Per-seed metric series, sampled at `steps`. `None` marks a point with no data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub seed: u64,
    /// Number of completed environment steps at each sample point.
    pub steps: Vec<u64>,
    pub series: BTreeMap<String, Vec<Option<f64>>>,
}

impl RunRecord {
    /// Last sample of `series`.
    pub fn final_value(&self, series: &str) -> Option<f64> {
        self.series.get(series).and_then(|v| v.last().copied().flatten())
    }
}

pub fn ntat_series(type_id: usize) -> String {
    format!("ntat.type{type_id}")
}

pub fn price_series(type_id: usize) -> String {
    format!("price.type{type_id}")
}

pub const TRADES: &str = "trades";
pub const AUCTIONEER_INCOME: &str = "auctioneer_income";
pub const UTILIZATION: &str = "utilization";

#[derive(Clone, Debug, Default)]
struct StepStats {
    ntat: Vec<(f64, u32)>,
    price: Vec<(f64, u32)>,
    trades: u32,
    income: i64,
    busy: usize,
}

/// Trailing-window metrics over the steps seen so far.
#[derive(Clone, Debug)]
pub struct Recorder {
    window: usize,
    cores: usize,
    history: VecDeque<StepStats>,
    record: RunRecord,
}

impl Recorder {
    pub fn new(scenario: &str, seed: u64, num_types: usize, num_cores: usize, window: u64) -> Self {
        let mut series = BTreeMap::new();
        for t in 0..num_types {
            series.insert(ntat_series(t), Vec::new());
            series.insert(price_series(t), Vec::new());
        }
        for name in [TRADES, AUCTIONEER_INCOME, UTILIZATION] {
            series.insert(name.to_string(), Vec::new());
        }
        Recorder {
            window: window.max(1) as usize,
            cores: num_cores,
            history: VecDeque::new(),
            record: RunRecord { scenario: scenario.to_string(), seed, steps: Vec::new(), series },
        }
    }

    /// Adds one step; `env` is the state after that step.
    pub fn observe(&mut self, result: &StepResult, env: &SchedEnv) {
        let types = env.config().job_types.len();
        let mut s = StepStats { ntat: vec![(0.0, 0); types], price: vec![(0.0, 0); types], ..StepStats::default() };
        for c in &result.completed {
            s.ntat[c.type_id].0 += c.ntat;
            s.ntat[c.type_id].1 += 1;
        }
        for t in &result.trades {
            s.price[t.offer.job_type].0 += f64::from(t.price);
            s.price[t.offer.job_type].1 += 1;
            if t.seller != Participant::Auctioneer {
                s.trades += 1;
            }
        }
        s.income = result.auctioneer_income;
        // Cores that computed this step: still running, or just finished.
        s.busy = env.cores().iter().filter(|c| c.running.is_some()).count() + result.completed.len();
        if self.history.len() == self.window {
            self.history.pop_front();
        }
        self.history.push_back(s);
    }

    /// Appends a sample point for the current window.
    pub fn sample(&mut self, step: u64) {
        let types = self.history.back().map_or(0, |s| s.ntat.len());
        let mean = |pick: &dyn Fn(&StepStats) -> (f64, u32)| {
            let (sum, n) = self.history.iter().map(pick).fold((0.0, 0u32), |a, b| (a.0 + b.0, a.1 + b.1));
            (n > 0).then(|| sum / f64::from(n))
        };
        let mut points: Vec<(String, Option<f64>)> = Vec::new();
        for t in 0..types {
            points.push((ntat_series(t), mean(&|s| s.ntat[t])));
            points.push((price_series(t), mean(&|s| s.price[t])));
        }
        let len = self.history.len();
        let trades: u32 = self.history.iter().map(|s| s.trades).sum();
        let income: i64 = self.history.iter().map(|s| s.income).sum();
        let busy: usize = self.history.iter().map(|s| s.busy).sum();
        points.push((TRADES.to_string(), (len > 0).then_some(f64::from(trades))));
        points.push((AUCTIONEER_INCOME.to_string(), (len > 0).then_some(income as f64)));
        points.push((UTILIZATION.to_string(), (len > 0).then(|| busy as f64 / (len * self.cores) as f64)));
        self.record.steps.push(step);
        for (name, value) in points {
            self.record.series.get_mut(&name).expect("series created up front").push(value);
        }
    }

    pub fn finish(self) -> RunRecord {
        self.record
    }
}

/// Pointwise statistics of one series over several seeds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggPoint {
    pub mean: Option<f64>,
    /// Population standard deviation.
    pub std: Option<f64>,
    /// Number of seeds with a value at this point.
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRecord {
    pub scenario: String,
    pub seeds: Vec<u64>,
    pub steps: Vec<u64>,
    pub series: BTreeMap<String, Vec<AggPoint>>,
}

/// Mean and population standard deviation of the present values.
///
/// Values are sorted first so the result does not depend on seed order.
pub fn mean_std(values: &mut [f64]) -> AggPoint {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return AggPoint { mean: None, std: None, count: 0 };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    AggPoint { mean: Some(mean), std: Some(var.sqrt()), count: n }
}

pub fn aggregate(records: &[RunRecord]) -> Result<AggregateRecord, super::HarnessError> {
    let bad = |m: String| Err(super::HarnessError::Aggregate(m));
    let Some(first) = records.first() else { return bad("no records".into()) };
    if records.len() < 2 {
        return bad(format!("need at least 2 records, got {}", records.len()));
    }
    for r in records {
        if r.steps != first.steps {
            return bad(format!("seed {} has {} sample points, seed {} has {}", r.seed, r.steps.len(), first.seed, first.steps.len()));
        }
        if r.series.keys().ne(first.series.keys()) {
            return bad(format!("seed {} has different series than seed {}", r.seed, first.seed));
        }
    }
    let mut series = BTreeMap::new();
    for (name, values) in &first.series {
        let points = (0..values.len())
            .map(|i| {
                let mut present: Vec<f64> = records.iter().filter_map(|r| r.series[name][i]).collect();
                mean_std(&mut present)
            })
            .collect();
        series.insert(name.clone(), points);
    }
    Ok(AggregateRecord {
        scenario: first.scenario.clone(),
        seeds: records.iter().map(|r| r.seed).collect(),
        steps: first.steps.clone(),
        series,
    })
}
