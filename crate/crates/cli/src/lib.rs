//! Subcommands of the `marketsched` binary.

pub mod plot;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use marketsched::harness::{self, export, ExportFormat, HarnessError, RunRecord, Scenario, SeriesTable};
use marketsched::obs::{cardinality, UnitSpace};
use marketsched::Architecture;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_ABORT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "marketsched", version, about = "Run market-based scheduling experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one seed of a scenario and export its metrics.
    Run(RunArgs),
    /// Train several seeds and export per-seed and aggregate metrics.
    Sweep(SweepArgs),
    /// Print the action-space size of every unit kind.
    Cardinality(CardinalityArgs),
    /// Draw exported CSV files as an SVG line chart.
    Plot(PlotArgs),
    /// Run the scripted first-come-first-served policy without trading.
    Baseline(RunArgs),
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Builtin scenario name (e.g. EXP1_TRADING) or path to a TOML scenario file.
    #[arg(long)]
    pub scenario: String,
    /// Architecture for all agents: FULL, SEMI, DIST, DIST_PS, DIST_PRICE or SCRIPTED_FCFS.
    #[arg(long)]
    pub arch: Option<String>,
    /// Override a scenario field, e.g. --set env.num_cores=4 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Seed; defaults to the scenario's first seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Number of seeds (1..=N); defaults to the scenario's seed list.
    #[arg(long, conflicts_with = "seed_list")]
    pub seeds: Option<u64>,
    /// Explicit comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    pub seed_list: Option<Vec<u64>>,
    /// Worker threads.
    #[arg(long, env = "MARKETSCHED_WORKERS", default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct CardinalityArgs {
    /// Cores.
    #[arg(short = 'm', long)]
    pub cores: u32,
    /// Agents.
    #[arg(short = 'n', long)]
    pub agents: u32,
    /// Slots per agent.
    #[arg(short = 'k', long)]
    pub slots: u32,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Exported CSV (or JSON) files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Output SVG file.
    #[arg(long)]
    pub out: PathBuf,
    /// Only draw series whose name contains this text.
    #[arg(long)]
    pub series: Option<String>,
}

/// A problem with the command line or its inputs.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// Maps a failure onto the process exit status.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(h) = cause.downcast_ref::<HarnessError>() {
            return match h {
                _ if h.is_infeasible() => EXIT_INFEASIBLE,
                HarnessError::UnknownScenario(_) | HarnessError::Override(_) | HarnessError::Scenario(_) => EXIT_USAGE,
                _ => EXIT_ABORT,
            };
        }
    }
    EXIT_ABORT
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(a) => cmd_run(&a, false),
        Command::Baseline(a) => cmd_run(&a, true),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Cardinality(a) => {
            print!("{}", cmd_cardinality(a.cores, a.agents, a.slots));
            Ok(())
        }
        Command::Plot(a) => cmd_plot(&a.inputs, &a.out, a.series.as_deref()),
    }
}

/// Resolves the scenario and applies `--arch` and `--set`.
pub fn load_scenario(args: &ScenarioArgs) -> Result<Scenario> {
    let mut s = Scenario::resolve(&args.scenario)?;
    if let Some(arch) = &args.arch {
        s.architecture = arch.parse::<Architecture>().map_err(|e| UsageError(e.to_string()))?;
        s.agent_architectures.clear();
    }
    s.apply_overrides(&args.overrides)?;
    Ok(s)
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seeds: &'a [u64],
    overrides: &'a [String],
    files: Vec<String>,
    scenario: &'a Scenario,
}

fn write_table(table: &SeriesTable, dir: &Path, file: String, files: &mut Vec<String>) -> Result<()> {
    let path = dir.join(&file);
    export(table, &path, ExportFormat::Csv)?;
    files.push(file);
    Ok(())
}

fn write_manifest(dir: &Path, m: &Manifest) -> Result<()> {
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(m)? + "\n";
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_runs(dir: &Path, scenario: &Scenario, records: &[RunRecord], files: &mut Vec<String>) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for r in records {
        write_table(&SeriesTable::from(r), dir, format!("{}_seed{}.csv", scenario.name, r.seed), files)?;
    }
    if records.len() >= 2 {
        let agg = harness::aggregate(records)?;
        write_table(&SeriesTable::from(&agg), dir, format!("{}_aggregate.csv", scenario.name), files)?;
    }
    Ok(())
}

pub fn cmd_run(args: &RunArgs, baseline: bool) -> Result<()> {
    let mut scenario = load_scenario(&args.scenario)?;
    if baseline {
        scenario = scenario.baseline();
    }
    let seed = args.seed.unwrap_or(scenario.seeds[0]);
    scenario.seeds = vec![seed];
    let record = harness::run_scenario(&scenario, seed)?;
    let mut files = Vec::new();
    write_runs(&args.scenario.out, &scenario, std::slice::from_ref(&record), &mut files)?;
    let command = if baseline { "baseline" } else { "run" };
    write_manifest(
        &args.scenario.out,
        &Manifest { tool: "marketsched", version: env!("CARGO_PKG_VERSION"), command, seeds: &[seed], overrides: &args.scenario.overrides, files, scenario: &scenario },
    )?;
    summarize(&record);
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let mut scenario = load_scenario(&args.scenario)?;
    if let Some(list) = &args.seed_list {
        scenario.seeds = list.clone();
    } else if let Some(n) = args.seeds {
        if n == 0 {
            return Err(UsageError("--seeds must be >= 1".into()).into());
        }
        scenario.seeds = (1..=n).collect();
    }
    scenario.validate()?;
    let records = harness::run_seeds(&scenario, args.workers).into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut files = Vec::new();
    write_runs(&args.scenario.out, &scenario, &records, &mut files)?;
    write_manifest(
        &args.scenario.out,
        &Manifest { tool: "marketsched", version: env!("CARGO_PKG_VERSION"), command: "sweep", seeds: &scenario.seeds, overrides: &args.scenario.overrides, files, scenario: &scenario },
    )?;
    for r in &records {
        summarize(r);
    }
    Ok(())
}

fn summarize(r: &RunRecord) {
    let finals: Vec<String> = r
        .series
        .keys()
        .map(|k| match r.final_value(k) {
            Some(v) => format!("{k}={v:.3}"),
            None => format!("{k}=-"),
        })
        .collect();
    println!("{} seed {}: {}", r.scenario, r.seed, finals.join(" "));
}

/// Table of action-space sizes for `m` cores, `n` agents and `k` slots.
pub fn cmd_cardinality(m: u32, n: u32, k: u32) -> String {
    let mut out = format!("M={m} N={n} K={k}\n");
    for space in UnitSpace::ALL {
        let v = match cardinality(space, m as usize, n as usize, k as usize) {
            Ok(v) => v.to_string(),
            Err(e) => e.to_string(),
        };
        out.push_str(&format!("{:<12} {v}\n", space.name()));
    }
    out
}

pub fn cmd_plot(inputs: &[PathBuf], out: &Path, series: Option<&str>) -> Result<()> {
    let tables = inputs
        .iter()
        .map(|p| harness::import(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let labelled: Vec<plot::Input> = inputs
        .iter()
        .zip(&tables)
        .map(|(p, table)| plot::Input {
            label: p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()),
            table,
        })
        .collect();
    let svg = plot::render(&labelled, series);
    std::fs::write(out, svg).with_context(|| format!("writing {}", out.display()))
}
