//! Channel-radio configuration sweeps and throughput relaxation.

use std::ops::RangeInclusive;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conflict::build_mdcg;
use crate::energy::{energy_efficiency, EnergyReport};
use crate::error::{Error, Result};
use crate::lp::{
    solve_capacity, solve_min_energy, solve_two_stage, validate_plan, SchedulePlan, SolveStats, SolveStatus,
    SolverOptions, Strategy, TwoStageOutcome,
};
use crate::model::{enumerate_tuples, Topology, Tuple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CrConfig {
    pub channels: usize,
    pub radios: usize,
}

impl CrConfig {
    pub fn new(channels: usize, radios: usize) -> Result<Self> {
        if channels == 0 || radios == 0 {
            return Err(Error::invalid("configuration channels >= 1 and radios >= 1"));
        }
        Ok(CrConfig { channels, radios })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Capped,
    Error,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Capped => "capped",
            RunStatus::Error => "error",
        }
    }
}

impl From<SolveStatus> for RunStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Optimal => RunStatus::Ok,
            SolveStatus::Capped => RunStatus::Capped,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub lambda: f64,
    /// `(tuple indices, alpha)` of every scheduled set.
    pub active_sets: Vec<(Vec<usize>, f64)>,
    pub total_alpha: f64,
    /// Tuples carrying positive flow.
    pub tuples_used: usize,
    /// Largest residual reported by the plan validator.
    pub max_residual: f64,
}

impl PlanSummary {
    fn new(plan: &SchedulePlan, tuples: &[Tuple], topology: &Topology) -> Self {
        let residuals = validate_plan(plan, tuples, topology);
        let max_residual = if residuals.conflicting_pairs > 0 || residuals.shape_mismatch {
            f64::INFINITY
        } else {
            residuals.max_residual()
        };
        PlanSummary {
            lambda: plan.lambda,
            active_sets: plan.active_sets.iter().map(|(s, a)| (s.members.clone(), *a)).collect(),
            total_alpha: plan.total_alpha(),
            tuples_used: plan.tuple_flows.iter().filter(|f| f.iter().any(|&x| x > 0.0)).count(),
            max_residual,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub tuples: usize,
    pub conflict_edges: usize,
    pub capacity_stage: SolveStats,
    pub energy_stage: SolveStats,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigResult {
    pub config: CrConfig,
    pub capacity: f64,
    /// Absent when the run failed.
    pub report: Option<EnergyReport>,
    pub plan: Option<PlanSummary>,
    pub solver_stats: RunStats,
    pub status: RunStatus,
    pub error: Option<String>,
}

/// Solve the topology exactly as given, keeping per-node radio counts. The
/// row is labelled with the channel count and the largest radio count.
pub fn run_topology(topology: &Topology, strategy: Strategy, options: &SolverOptions) -> Result<ConfigResult> {
    let radios = topology.nodes.iter().map(|n| n.radios).max().unwrap_or(0);
    let config = CrConfig {
        channels: topology.channels,
        radios,
    };
    run_labelled(topology, config, strategy, options)
}

fn run_labelled(topology: &Topology, config: CrConfig, strategy: Strategy, options: &SolverOptions) -> Result<ConfigResult> {
    let started = Instant::now();
    let tuples = enumerate_tuples(topology)?;
    let graph = build_mdcg(&tuples, topology);
    let outcome = solve_two_stage(&tuples, &graph, topology, strategy, options)?;
    let report = energy_efficiency(&outcome.plan, &tuples, topology)?;
    Ok(ConfigResult {
        config,
        capacity: outcome.capacity,
        report: Some(report),
        plan: Some(PlanSummary::new(&outcome.plan, &tuples, topology)),
        solver_stats: RunStats {
            tuples: tuples.len(),
            conflict_edges: graph.edge_count(),
            capacity_stage: outcome.capacity_stats,
            energy_stage: outcome.energy_stats,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        },
        status: outcome.status.into(),
        error: None,
    })
}

/// Apply `config` uniformly to the base topology and run the full pipeline.
pub fn run_config(base: &Topology, config: CrConfig, strategy: Strategy, options: &SolverOptions) -> Result<ConfigResult> {
    run_labelled(&base.with_config(config.channels, config.radios), config, strategy, options)
}

fn failed(config: CrConfig, error: &Error) -> ConfigResult {
    ConfigResult {
        config,
        capacity: 0.0,
        report: None,
        plan: None,
        solver_stats: RunStats::default(),
        status: RunStatus::Error,
        error: Some(error.to_string()),
    }
}

/// Every configuration in the grid, sorted by `(channels, radios)`. Failures
/// become `Error` rows; the rest of the grid still runs. `workers = None`
/// uses rayon's default pool size.
pub fn sweep_cr(
    base: &Topology,
    channels: RangeInclusive<usize>,
    radios: RangeInclusive<usize>,
    strategy: Strategy,
    options: &SolverOptions,
    workers: Option<usize>,
) -> Result<Vec<ConfigResult>> {
    if channels.is_empty() || radios.is_empty() || *channels.start() == 0 || *radios.start() == 0 {
        return Err(Error::invalid("sweep ranges non-empty and >= 1"));
    }
    let grid: Vec<CrConfig> = channels
        .flat_map(|c| radios.clone().map(move |r| CrConfig { channels: c, radios: r }))
        .collect();
    let run = || -> Vec<ConfigResult> {
        grid.par_iter()
            .map(|&config| {
                run_config(base, config, strategy, options).unwrap_or_else(|e| {
                    log::warn!("config ({}, {}) failed: {e}", config.channels, config.radios);
                    failed(config, &e)
                })
            })
            .collect()
    };
    let mut results = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid(format!("worker pool: {e}")))?
            .install(run),
        None => run(),
    };
    results.sort_by_key(|r| r.config);
    Ok(results)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxationPoint {
    pub rho: f64,
    pub target: f64,
    pub report: EnergyReport,
    pub plan: PlanSummary,
    pub status: RunStatus,
}

/// Capacity once, then minimum energy at `rho * capacity` for each `rho` in `(0, 1]`.
pub fn relaxation_sweep(
    base: &Topology,
    config: CrConfig,
    fractions: &[f64],
    strategy: Strategy,
    options: &SolverOptions,
) -> Result<Vec<RelaxationPoint>> {
    if let Some(bad) = fractions.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
        return Err(Error::invalid(format!("relaxation fraction in (0, 1], got {bad}")));
    }
    let topology = base.with_config(config.channels, config.radios);
    let tuples = enumerate_tuples(&topology)?;
    let graph = build_mdcg(&tuples, &topology);
    let stage = solve_capacity(&tuples, &graph, &topology, strategy, options)?;
    fractions
        .iter()
        .map(|&rho| {
            let target = rho * stage.capacity;
            let outcome: TwoStageOutcome = solve_min_energy(&stage, &tuples, &graph, &topology, target, options)?;
            Ok(RelaxationPoint {
                rho,
                target,
                report: energy_efficiency(&outcome.plan, &tuples, &topology)?,
                plan: PlanSummary::new(&outcome.plan, &tuples, &topology),
                status: outcome.status.into(),
            })
        })
        .collect()
}
