//! Capacity first, then minimum energy at that capacity, over either the
//! full set of maximal independent sets or a column-generated subset.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{Formulation, LpSolution, LpStatus, SchedulePlan, Sense, Simplex, SimplexOptions, TupleGrouping};
use crate::conflict::{
    enumerate_maximal_is, max_weight_is, ConflictGraph, IndependentSet, LinkChannelPricer, DEFAULT_IS_CAP,
};
use crate::error::{Error, Result};
use crate::model::{Topology, Tuple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Strategy {
    FullEnumeration,
    #[default]
    ColumnGeneration,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub grouping: TupleGrouping,
    /// Maximal sets allowed under full enumeration.
    pub is_cap: usize,
    /// A priced column enters only if it beats the budget dual by more than this.
    pub reduced_cost_tol: f64,
    /// Stop pricing (status `Capped`) once the master holds this many columns.
    pub max_columns: Option<usize>,
    /// Stop pricing (status `Capped`) after this much time per stage.
    pub time_limit: Option<Duration>,
    pub simplex: SimplexOptions,
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            grouping: TupleGrouping::default(),
            is_cap: DEFAULT_IS_CAP,
            reduced_cost_tol: 1e-7,
            max_columns: None,
            time_limit: None,
            simplex: SimplexOptions::default(),
            feasibility_tol: 1e-7,
            optimality_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    /// Pricing stopped at a column or time cap; values come from a restricted master.
    Capped,
}

impl SolveStatus {
    fn and(self, other: SolveStatus) -> SolveStatus {
        if self == SolveStatus::Optimal && other == SolveStatus::Optimal {
            SolveStatus::Optimal
        } else {
            SolveStatus::Capped
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub simplex_iterations: usize,
    pub pricing_rounds: usize,
    /// Columns in the master when the stage finished.
    pub columns: usize,
}

impl SolveStats {
    fn merge(&self, other: &SolveStats) -> SolveStats {
        SolveStats {
            simplex_iterations: self.simplex_iterations + other.simplex_iterations,
            pricing_rounds: self.pricing_rounds + other.pricing_rounds,
            columns: self.columns.max(other.columns),
        }
    }
}

/// Result of the capacity stage, reusable for any number of energy stages.
#[derive(Debug, Clone)]
pub struct CapacityStage {
    pub strategy: Strategy,
    pub capacity: f64,
    pub lambda: f64,
    pub plan: SchedulePlan,
    /// Columns of the final master; the energy stage starts from these.
    pub columns: Vec<IndependentSet>,
    pub stats: SolveStats,
    pub status: SolveStatus,
    /// Final master and its solved tableau, for warm-starting the energy stage.
    master: Option<Box<(TupleGrouping, Formulation, Simplex)>>,
}

#[derive(Debug, Clone)]
pub struct TwoStageOutcome {
    pub capacity: f64,
    /// Throughput imposed on the energy stage.
    pub target: f64,
    /// Minimum transmission energy at `target`.
    pub energy: f64,
    pub plan: SchedulePlan,
    pub capacity_stats: SolveStats,
    pub energy_stats: SolveStats,
    pub status: SolveStatus,
}

impl TwoStageOutcome {
    pub fn stats(&self) -> SolveStats {
        self.capacity_stats.merge(&self.energy_stats)
    }
}

/// Search nodes after which structured pricing settles for any improving set.
const PRICING_NODE_BUDGET: u64 = 20_000;

/// One greedy maximal set seeded by each tuple, duplicates removed.
pub(crate) fn initial_columns(graph: &ConflictGraph) -> Vec<IndependentSet> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for p in 0..graph.tuple_count() {
        let is = graph.greedy_maximal(&[p]);
        if seen.insert(is.clone()) {
            out.push(is);
        }
    }
    out
}

/// Solve the master, pricing new columns in until none improves (or a cap is hit).
fn run_master(
    formulation: &mut Formulation,
    simplex: &mut Simplex,
    graph: &ConflictGraph,
    pricer: Option<&LinkChannelPricer>,
    price: bool,
    options: &SolverOptions,
) -> Result<(LpSolution, SolveStats, SolveStatus)> {
    let started = Instant::now();
    let iterations_before = simplex.iterations();
    let mut seen: HashSet<IndependentSet> = formulation.columns.iter().cloned().collect();
    let mut stats = SolveStats::default();
    let mut status = SolveStatus::Optimal;
    let mut verified = false;

    loop {
        if simplex.solve()? != LpStatus::Optimal || !price {
            break;
        }
        let solution = simplex.solution();
        let weights = formulation.pricing_weights(&solution.duals);
        let threshold = formulation.pricing_threshold(&solution.duals);
        stats.pricing_rounds += 1;
        let (found, weight) = pricer
            .and_then(|p| p.improving_is(&weights, threshold + options.reduced_cost_tol, PRICING_NODE_BUDGET))
            .unwrap_or_else(|| max_weight_is(graph, &weights));

        let mut entering = None;
        if weight > threshold + options.reduced_cost_tol {
            let extended = graph.greedy_maximal(&found.members);
            if !seen.contains(&extended) {
                entering = Some(extended);
            } else if !seen.contains(&found) {
                entering = Some(found);
            }
        }

        match entering {
            Some(is) => {
                if options.max_columns.is_some_and(|m| formulation.columns.len() >= m)
                    || options.time_limit.is_some_and(|t| started.elapsed() >= t)
                {
                    status = SolveStatus::Capped;
                    break;
                }
                log::trace!("pricing: set of {} tuples, weight {weight:.6} > {threshold:.6}", is.len());
                let (variable, terms) = formulation.column_for(&is);
                simplex.add_column(variable.clone(), &terms)?;
                formulation.register_column(is.clone(), variable, &terms);
                seen.insert(is);
                verified = false;
            }
            None if verified => break,
            None => {
                // confirm on a refactored basis before declaring optimality
                simplex.refactor()?;
                verified = true;
            }
        }
    }

    stats.simplex_iterations = simplex.iterations() - iterations_before;
    stats.columns = formulation.columns.len();
    Ok((simplex.solution(), stats, status))
}

fn starting_columns(graph: &ConflictGraph, strategy: Strategy, options: &SolverOptions) -> Result<Vec<IndependentSet>> {
    match strategy {
        Strategy::FullEnumeration => enumerate_maximal_is(graph, options.is_cap),
        Strategy::ColumnGeneration => Ok(initial_columns(graph)),
    }
}

/// Link-aggregated duals give every tuple of a `(link, channel)` the same
/// weight, which the structured search exploits.
fn structured_pricer(
    tuples: &[Tuple],
    topology: &Topology,
    price: bool,
    options: &SolverOptions,
) -> Option<LinkChannelPricer> {
    (price && options.grouping == TupleGrouping::LinkAggregated).then(|| LinkChannelPricer::new(tuples, topology))
}

/// Maximize the common demand fraction; capacity is `lambda * total demand`.
pub fn solve_capacity(
    tuples: &[Tuple],
    graph: &ConflictGraph,
    topology: &Topology,
    strategy: Strategy,
    options: &SolverOptions,
) -> Result<CapacityStage> {
    let columns = starting_columns(graph, strategy, options)?;
    let mut formulation = Formulation::capacity(tuples, &columns, topology, options.grouping);
    let mut simplex = Simplex::new(formulation.problem.clone(), options.simplex.clone())?;
    let price = strategy == Strategy::ColumnGeneration;
    let pricer = structured_pricer(tuples, topology, price, options);
    let (solution, stats, status) = run_master(&mut formulation, &mut simplex, graph, pricer.as_ref(), price, options)?;
    if !solution.is_optimal() {
        return Err(Error::UnexpectedStatus {
            stage: "capacity",
            status: solution.status,
        });
    }
    let plan = formulation.plan_from_primal(&solution.primal, topology.commodities.len());
    Ok(CapacityStage {
        strategy,
        capacity: solution.objective_value.max(0.0),
        lambda: plan.lambda,
        plan,
        columns: formulation.columns.clone(),
        stats,
        status,
        master: Some(Box::new((options.grouping, formulation, simplex))),
    })
}

/// Minimize transmission energy subject to delivering `target` in total.
pub fn solve_min_energy(
    stage: &CapacityStage,
    tuples: &[Tuple],
    graph: &ConflictGraph,
    topology: &Topology,
    target: f64,
    options: &SolverOptions,
) -> Result<TwoStageOutcome> {
    let (mut formulation, mut simplex) = match stage.master.as_deref() {
        Some((grouping, f, s)) if *grouping == options.grouping => {
            // continue from the capacity optimum: the pinned row starts (near) satisfied
            let (mut f, mut s) = (f.clone(), s.clone());
            let (row, objective) = f.fix_throughput(target, topology.total_demand());
            let c = &f.problem.constraints[row];
            s.add_row(c.name.clone(), c.terms.clone(), c.relation, c.rhs)?;
            s.set_objective(Sense::Minimize, &objective)?;
            (f, s)
        }
        _ => {
            let f = Formulation::min_energy(tuples, &stage.columns, topology, options.grouping, target);
            let s = Simplex::new(f.problem.clone(), options.simplex.clone())?;
            (f, s)
        }
    };
    let price = stage.strategy == Strategy::ColumnGeneration;
    let pricer = structured_pricer(tuples, topology, price, options);
    let (solution, stats, status) = run_master(&mut formulation, &mut simplex, graph, pricer.as_ref(), price, options)?;
    match solution.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::TargetInfeasible { target }),
        other => {
            return Err(Error::UnexpectedStatus {
                stage: "energy",
                status: other,
            })
        }
    }
    let plan = formulation.plan_from_primal(&solution.primal, topology.commodities.len());
    Ok(TwoStageOutcome {
        capacity: stage.capacity,
        target,
        energy: solution.objective_value.max(0.0),
        plan,
        capacity_stats: stage.stats.clone(),
        energy_stats: stats,
        status: stage.status.and(status),
    })
}

/// Capacity, then the least-energy plan that achieves it.
pub fn solve_two_stage(
    tuples: &[Tuple],
    graph: &ConflictGraph,
    topology: &Topology,
    strategy: Strategy,
    options: &SolverOptions,
) -> Result<TwoStageOutcome> {
    let stage = solve_capacity(tuples, graph, topology, strategy, options)?;
    solve_min_energy(&stage, tuples, graph, topology, stage.capacity, options)
}
