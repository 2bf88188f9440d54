//! `mrmc`: capacity and energy-efficiency experiments from the command line.
//!
//! Every flag can also be set through an `MRMC_`-prefixed environment
//! variable (`--channels` is `MRMC_CHANNELS`, `--e-tx` is `MRMC_E_TX`, ...).

mod heatmap;
mod output;

use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use mrmc_core::energy::ee_upper_bound;
use mrmc_core::lp::{SolverOptions, Strategy, TupleGrouping};
use mrmc_core::model::{
    enumerate_tuples, generate_random, load_topology, BandwidthMode, GeneratorParams, Topology, UnknownFieldPolicy,
};
use mrmc_core::sweep::{relaxation_sweep, run_config, run_topology, sweep_cr, CrConfig, RunStatus};
use serde::Serialize;

use heatmap::{render_heatmap, Metric};
use output::{write_json, write_relaxation, write_results, RelaxRow, ResultRow};

#[derive(Parser)]
#[command(name = "mrmc", version, about = "Capacity and energy efficiency of multi-radio multi-channel networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration (the input as given unless --channels/--radios pick one).
    Solve(Common),
    /// Solve every channel/radio configuration in a grid and draw heatmaps.
    Sweep(Common),
    /// Minimum energy at fractions of capacity for one configuration.
    Relax(Common),
    /// Print the energy-efficiency upper bound.
    Bound(Common),
    /// Check a topology and report its size.
    Validate(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Sweep(_) => "sweep",
            Command::Relax(_) => "relax",
            Command::Bound(_) => "bound",
            Command::Validate(_) => "validate",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Solve(c) | Command::Sweep(c) | Command::Relax(c) | Command::Bound(c) | Command::Validate(c) => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum StrategyArg {
    Full,
    Colgen,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Full => Strategy::FullEnumeration,
            StrategyArg::Colgen => Strategy::ColumnGeneration,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum UnknownFields {
    Reject,
    Warn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum GroupingArg {
    Link,
    PerTuple,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Bandwidth {
    PerChannel(f64),
    Total(f64),
}

#[derive(Debug, Clone, Serialize)]
struct Span {
    from: usize,
    to: usize,
}

impl Span {
    fn range(&self) -> RangeInclusive<usize> {
        self.from..=self.to
    }

    fn single(&self) -> Option<usize> {
        (self.from == self.to).then_some(self.from)
    }
}

#[derive(Args, Debug, Clone)]
#[command(group = clap::ArgGroup::new("source").args(["input", "generate"]))]
struct Common {
    /// Topology JSON file.
    #[arg(long, env = "MRMC_INPUT")]
    input: Option<PathBuf>,
    /// Random topology, e.g. `n=25 area=1000 seed=7 commodities=3`.
    #[arg(long, env = "MRMC_GENERATE", num_args = 1.., value_delimiter = ' ', value_parser = parse_kv)]
    generate: Option<Vec<(String, String)>>,
    /// Channel range `A..B` (or a single count).
    #[arg(long, env = "MRMC_CHANNELS", value_parser = parse_span)]
    channels: Option<Span>,
    /// Radio range `A..B` (or a single count).
    #[arg(long, env = "MRMC_RADIOS", value_parser = parse_span)]
    radios: Option<Span>,
    #[arg(long, env = "MRMC_STRATEGY", value_enum, default_value = "colgen")]
    strategy: StrategyArg,
    /// Comma-separated capacity fractions in (0, 1].
    #[arg(long, env = "MRMC_RHO", value_delimiter = ',', default_value = "0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")]
    rho: Vec<f64>,
    /// `per-channel`, `per-channel=RATE` or `total=W`.
    #[arg(long, env = "MRMC_BANDWIDTH", value_parser = parse_bandwidth)]
    bandwidth: Option<Bandwidth>,
    #[arg(long = "e-tx", env = "MRMC_E_TX")]
    e_tx: Option<f64>,
    #[arg(long = "e-rx", env = "MRMC_E_RX")]
    e_rx: Option<f64>,
    /// Sleep power per radio.
    #[arg(long, env = "MRMC_P0")]
    p0: Option<f64>,
    /// Sweep worker threads (default: one per core).
    #[arg(long, env = "MRMC_WORKERS")]
    workers: Option<usize>,
    /// Generator seed.
    #[arg(long, env = "MRMC_SEED")]
    seed: Option<u64>,
    #[arg(long, env = "MRMC_OUT", default_value = "results")]
    out: PathBuf,
    /// Leave wall-clock columns empty so reruns are byte-identical.
    #[arg(long, env = "MRMC_NO_TIMING")]
    no_timing: bool,
    #[arg(long, env = "MRMC_UNKNOWN_FIELDS", value_enum, default_value = "reject")]
    unknown_fields: UnknownFields,
    #[arg(long, env = "MRMC_GROUPING", value_enum, default_value = "link")]
    grouping: GroupingArg,
    /// Column cap per stage; hitting it marks the row `capped`.
    #[arg(long, env = "MRMC_MAX_COLUMNS")]
    max_columns: Option<usize>,
    /// Time cap per stage in seconds; hitting it marks the row `capped`.
    #[arg(long, env = "MRMC_TIME_LIMIT")]
    time_limit: Option<f64>,
    /// Maximal-set cap for full enumeration.
    #[arg(long, env = "MRMC_IS_CAP")]
    is_cap: Option<usize>,
}

fn parse_kv(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn parse_span(s: &str) -> Result<Span, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    let (from, to) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
        None => (num(s)?, num(s)?),
    };
    if from == 0 || from > to {
        return Err(format!("range `{s}` must satisfy 1 <= A <= B"));
    }
    Ok(Span { from, to })
}

fn parse_bandwidth(s: &str) -> Result<Bandwidth, String> {
    let positive = |v: &str| match v.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("bandwidth value `{v}` must be a positive number")),
    };
    match s.split_once('=') {
        None if s == "per-channel" => Ok(Bandwidth::PerChannel(1.0)),
        Some(("per-channel", v)) => positive(v).map(Bandwidth::PerChannel),
        Some(("total", v)) => positive(v).map(Bandwidth::Total),
        _ => Err(format!("expected per-channel, per-channel=RATE or total=W, got `{s}`")),
    }
}

/// Everything needed to rerun an invocation, written next to its results.
#[derive(Debug, Serialize)]
struct RunManifest {
    command: &'static str,
    version: &'static str,
    input: Option<PathBuf>,
    generator: Option<GeneratorParams>,
    seed: Option<u64>,
    output: PathBuf,
    strategy: StrategyArg,
    grouping: GroupingArg,
    channels: Option<Span>,
    radios: Option<Span>,
    rho: Option<Vec<f64>>,
    bandwidth: Option<Bandwidth>,
    e_tx: Option<f64>,
    e_rx: Option<f64>,
    p0: Option<f64>,
    workers: Option<usize>,
    max_columns: Option<usize>,
    time_limit_s: Option<f64>,
    is_cap: usize,
    reduced_cost_tol: f64,
    feasibility_tol: f64,
    optimality_tol: f64,
}

fn usage_error(msg: impl std::fmt::Display) -> ! {
    Cli::command().error(clap::error::ErrorKind::ValueValidation, msg).exit()
}

fn generator_params(pairs: &[(String, String)], flag_seed: Option<u64>) -> (GeneratorParams, u64) {
    let mut p = GeneratorParams::default();
    let mut seed = None;
    for (k, v) in pairs {
        let float = || v.parse::<f64>().unwrap_or_else(|_| usage_error(format!("--generate {k}: `{v}` is not a number")));
        let int = || v.parse::<usize>().unwrap_or_else(|_| usage_error(format!("--generate {k}: `{v}` is not an integer")));
        match k.as_str() {
            "n" | "nodes" => p.nodes = int(),
            "area" => p.area_side = float(),
            "commodities" | "k" => p.commodities = int(),
            "demand" => p.demand = float(),
            "comm_range" => p.comm_range = float(),
            "interference_range" => p.interference_range = float(),
            "radios" => p.radios = int(),
            "channels" => p.channels = int(),
            "seed" => seed = Some(v.parse::<u64>().unwrap_or_else(|_| usage_error(format!("--generate seed: `{v}`")))),
            _ => usage_error(format!(
                "unknown --generate key `{k}` (known: n, area, commodities, demand, comm_range, interference_range, radios, channels, seed)"
            )),
        }
    }
    let seed = match (seed, flag_seed) {
        (Some(a), Some(b)) if a != b => usage_error(format!("seed={a} in --generate conflicts with --seed {b}")),
        (a, b) => a.or(b).unwrap_or(0),
    };
    (p, seed)
}

fn load(common: &Common) -> Result<(Topology, Option<GeneratorParams>, Option<u64>)> {
    let (mut topology, generator, seed) = match (&common.input, &common.generate) {
        (Some(path), None) => {
            let policy = match common.unknown_fields {
                UnknownFields::Reject => UnknownFieldPolicy::Reject,
                UnknownFields::Warn => UnknownFieldPolicy::Warn,
            };
            let t = load_topology(path, policy).with_context(|| format!("loading {}", path.display()))?;
            (t, None, common.seed)
        }
        (None, Some(pairs)) => {
            let (mut params, seed) = generator_params(pairs, common.seed);
            apply_energy(common, &mut params.energy);
            if let Some(b) = common.bandwidth {
                params.bandwidth_mode = bandwidth_mode(b);
            }
            let t = generate_random(&params, seed).context("generating topology")?;
            (t, Some(params), Some(seed))
        }
        _ => usage_error("exactly one of --input or --generate is required"),
    };
    apply_energy(common, &mut topology.energy);
    if let Some(b) = common.bandwidth {
        topology.bandwidth_mode = bandwidth_mode(b);
    }
    topology.validate()?;
    Ok((topology, generator, seed))
}

fn apply_energy(common: &Common, energy: &mut mrmc_core::model::EnergyParams) {
    if let Some(v) = common.e_tx {
        energy.e_tx = v;
    }
    if let Some(v) = common.e_rx {
        energy.e_rx = v;
    }
    if let Some(v) = common.p0 {
        energy.p0_sleep = Some(v);
    }
}

fn bandwidth_mode(b: Bandwidth) -> BandwidthMode {
    match b {
        Bandwidth::PerChannel(rate) => BandwidthMode::PerChannelFixed { rate },
        Bandwidth::Total(total_capacity) => BandwidthMode::TotalFixed { total_capacity },
    }
}

fn solver_options(common: &Common) -> SolverOptions {
    let mut o = SolverOptions {
        grouping: match common.grouping {
            GroupingArg::Link => TupleGrouping::LinkAggregated,
            GroupingArg::PerTuple => TupleGrouping::PerTuple,
        },
        max_columns: common.max_columns,
        time_limit: common.time_limit.map(Duration::from_secs_f64),
        ..SolverOptions::default()
    };
    if let Some(cap) = common.is_cap {
        o.is_cap = cap;
    }
    o
}

fn manifest(
    command: &'static str,
    common: &Common,
    generator: Option<GeneratorParams>,
    seed: Option<u64>,
    opts: &SolverOptions,
) -> RunManifest {
    RunManifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        input: common.input.clone(),
        generator,
        seed,
        output: common.out.clone(),
        strategy: common.strategy,
        grouping: common.grouping,
        channels: common.channels.clone(),
        radios: common.radios.clone(),
        rho: (command == "relax").then(|| common.rho.clone()),
        bandwidth: common.bandwidth,
        e_tx: common.e_tx,
        e_rx: common.e_rx,
        p0: common.p0,
        workers: common.workers,
        max_columns: opts.max_columns,
        time_limit_s: common.time_limit,
        is_cap: opts.is_cap,
        reduced_cost_tol: opts.reduced_cost_tol,
        feasibility_tol: opts.feasibility_tol,
        optimality_tol: opts.optimality_tol,
    }
}

/// `--channels`/`--radios` for commands that take one configuration. An
/// unset half falls back to the topology's channels or largest radio count.
fn single_config(common: &Common, topology: &Topology) -> Option<CrConfig> {
    let pick = |span: &Option<Span>, flag: &str| {
        span.as_ref().map(|s| s.single().unwrap_or_else(|| usage_error(format!("--{flag} takes a single value here"))))
    };
    let c = pick(&common.channels, "channels");
    let r = pick(&common.radios, "radios");
    if c.is_none() && r.is_none() {
        return None;
    }
    Some(CrConfig {
        channels: c.unwrap_or(topology.channels),
        radios: r.unwrap_or_else(|| topology.nodes.iter().map(|n| n.radios).max().unwrap_or(1)),
    })
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

fn run(cli: Cli) -> Result<()> {
    let name = cli.command.name();
    let common = cli.command.common().clone();
    let timing = !common.no_timing;
    let opts = solver_options(&common);
    let strategy: Strategy = common.strategy.into();
    let (topology, generator, seed) = load(&common)?;

    match cli.command {
        Command::Validate(_) => {
            let tuples = enumerate_tuples(&topology)?;
            println!(
                "ok: {} nodes, {} links, {} commodities, {} tuples",
                topology.nodes.len(),
                topology.links().len(),
                topology.commodities.len(),
                tuples.len()
            );
        }
        Command::Bound(_) => {
            let bound = ee_upper_bound(&topology)?;
            println!("EE* = {}", output::sig9(bound));
        }
        Command::Solve(_) => {
            let result = match single_config(&common, &topology) {
                Some(c) => run_config(&topology, c, strategy, &opts)?,
                None => run_topology(&topology, strategy, &opts)?,
            };
            prepare_out(&common.out)?;
            let row = ResultRow::new(&result, timing);
            write_results(&common.out, std::slice::from_ref(&row))?;
            write_json(&common.out.join("manifest.json"), &manifest(name, &common, generator, seed, &opts))?;
            println!(
                "capacity {} EE {} ({})",
                row.capacity.map_or("-".into(), |v| v.to_string()),
                row.ee.map_or("-".into(), |v| v.to_string()),
                row.status
            );
        }
        Command::Sweep(_) => {
            let channels = common.channels.clone().unwrap_or(Span { from: 1, to: 8 });
            let radios = common.radios.clone().unwrap_or(Span { from: 1, to: 4 });
            let results = sweep_cr(&topology, channels.range(), radios.range(), strategy, &opts, common.workers)?;
            prepare_out(&common.out)?;
            let rows: Vec<ResultRow> = results.iter().map(|r| ResultRow::new(r, timing)).collect();
            write_results(&common.out, &rows)?;
            for metric in [Metric::Capacity, Metric::EnergyEfficiency] {
                let svg = render_heatmap(&results, metric)?;
                fs::write(common.out.join(metric.file_name()), svg)?;
            }
            write_json(&common.out.join("manifest.json"), &manifest(name, &common, generator, seed, &opts))?;
            let failed = results.iter().filter(|r| r.status == RunStatus::Error).count();
            if let Some(best) = rows.iter().filter(|r| r.ee.is_some()).max_by(|a, b| a.ee.partial_cmp(&b.ee).unwrap()) {
                println!(
                    "{} configurations, best EE {} at channels={} radios={}",
                    rows.len(),
                    best.ee.unwrap(),
                    best.channels,
                    best.radios
                );
            }
            if failed > 0 {
                bail!("{failed} of {} configurations failed; see results.csv", rows.len());
            }
        }
        Command::Relax(_) => {
            let config = single_config(&common, &topology).unwrap_or_else(|| CrConfig {
                channels: topology.channels,
                radios: topology.nodes.iter().map(|n| n.radios).max().unwrap_or(1),
            });
            let at_capacity = run_config(&topology, config, strategy, &opts)?;
            let points = relaxation_sweep(&topology, config, &common.rho, strategy, &opts)?;
            prepare_out(&common.out)?;
            write_results(&common.out, &[ResultRow::new(&at_capacity, timing)])?;
            let rows: Vec<RelaxRow> = points.iter().map(RelaxRow::new).collect();
            write_relaxation(&common.out, &rows)?;
            write_json(&common.out.join("manifest.json"), &manifest(name, &common, generator, seed, &opts))?;
            for r in &rows {
                println!("rho {} EE {}", r.rho, r.ee);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MRMC_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans() {
        let s = parse_span("1..8").unwrap();
        assert_eq!(s.range(), 1..=8);
        assert_eq!(parse_span("2..=3").unwrap().range(), 2..=3);
        assert_eq!(parse_span("4").unwrap().single(), Some(4));
        assert!(parse_span("0..2").is_err());
        assert!(parse_span("3..2").is_err());
        assert!(parse_span("a..2").is_err());
    }

    #[test]
    fn bandwidths() {
        assert_eq!(parse_bandwidth("per-channel").unwrap(), Bandwidth::PerChannel(1.0));
        assert_eq!(parse_bandwidth("per-channel=2").unwrap(), Bandwidth::PerChannel(2.0));
        assert_eq!(parse_bandwidth("total=6").unwrap(), Bandwidth::Total(6.0));
        assert!(parse_bandwidth("total=-1").is_err());
        assert!(parse_bandwidth("shared").is_err());
    }

    #[test]
    fn generator_keys() {
        let pairs: Vec<_> = ["n=12", "area=800", "seed=4", "commodities=2"]
            .iter()
            .map(|s| parse_kv(s).unwrap())
            .collect();
        let (p, seed) = generator_params(&pairs, None);
        assert_eq!((p.nodes, p.area_side, p.commodities, seed), (12, 800.0, 2, 4));
        let (_, seed) = generator_params(&pairs[..2], Some(9));
        assert_eq!(seed, 9);
    }

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
