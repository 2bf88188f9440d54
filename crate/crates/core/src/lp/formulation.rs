//! Capacity and minimum-energy LPs over a set of independent-set columns.
//!
//! Variables: a flow per (tuple group, commodity), the common demand
//! fraction `lambda`, and one activation fraction `alpha_m` per independent
//! set. Rows:
//!
//! * conservation per (commodity, node): net outflow is `lambda * f0` at the
//!   source, `-lambda * f0` at the destination and zero everywhere else;
//! * the time budget `sum(alpha) <= 1`;
//! * activity per group: `sum_k flow_g^k <= sum_m alpha_m * sum_{p in g ∩ I_m} w_p`;
//! * (min-energy only) the throughput target `lambda * sum(f0) = f_star`.
//!
//! With [`TupleGrouping::PerTuple`] every tuple is its own group and the
//! activity row is the literal per-tuple bound `flow_p / w_p <= sum_{m ∋ p} alpha_m`
//! scaled by `w_p`. [`TupleGrouping::LinkAggregated`] merges tuples on the same
//! directed link with the same unit energy. Flow on a group can always be split
//! across its tuples in proportion to `w_p * active_time_p`, so both groupings
//! have the same optimal values.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{LpProblem, Relation, SchedulePlan, Sense, Variable};
use crate::conflict::IndependentSet;
use crate::model::{NodeIdx, Topology, Tuple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TupleGrouping {
    PerTuple,
    #[default]
    LinkAggregated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TupleGroup {
    pub tx: NodeIdx,
    pub rx: NodeIdx,
    pub unit_energy: f64,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowModel {
    pub groups: Vec<TupleGroup>,
    pub group_of: Vec<usize>,
}

impl FlowModel {
    pub fn new(tuples: &[Tuple], grouping: TupleGrouping) -> Self {
        let mut groups: Vec<TupleGroup> = Vec::new();
        let mut group_of = Vec::with_capacity(tuples.len());
        let mut index: HashMap<(NodeIdx, NodeIdx, u64), usize> = HashMap::new();
        for (p, t) in tuples.iter().enumerate() {
            let g = match grouping {
                TupleGrouping::PerTuple => None,
                TupleGrouping::LinkAggregated => index.get(&(t.tx, t.rx, t.unit_energy().to_bits())).copied(),
            };
            let g = g.unwrap_or_else(|| {
                groups.push(TupleGroup {
                    tx: t.tx,
                    rx: t.rx,
                    unit_energy: t.unit_energy(),
                    members: Vec::new(),
                });
                let g = groups.len() - 1;
                if grouping == TupleGrouping::LinkAggregated {
                    index.insert((t.tx, t.rx, t.unit_energy().to_bits()), g);
                }
                g
            });
            groups[g].members.push(p);
            group_of.push(g);
        }
        FlowModel { groups, group_of }
    }
}

/// An assembled LP plus the bookkeeping needed to add columns and read plans back.
#[derive(Debug, Clone)]
pub struct Formulation {
    pub problem: LpProblem,
    pub model: FlowModel,
    /// `flow_vars[g][k]`
    pub flow_vars: Vec<Vec<usize>>,
    pub lambda: usize,
    pub alpha_vars: Vec<usize>,
    pub columns: Vec<IndependentSet>,
    pub activity_rows: Vec<usize>,
    pub budget_row: usize,
    pub throughput_row: Option<usize>,
    capacities: Vec<f64>,
}

impl Formulation {
    /// Stage 1: maximize `lambda * sum(f0)`.
    pub fn capacity(
        tuples: &[Tuple],
        columns: &[IndependentSet],
        topology: &Topology,
        grouping: TupleGrouping,
    ) -> Self {
        Self::assemble(tuples, columns, topology, grouping, None)
    }

    /// Stage 2: minimize transmission energy subject to `lambda * sum(f0) = f_star`.
    pub fn min_energy(
        tuples: &[Tuple],
        columns: &[IndependentSet],
        topology: &Topology,
        grouping: TupleGrouping,
        f_star: f64,
    ) -> Self {
        Self::assemble(tuples, columns, topology, grouping, Some(f_star))
    }

    /// Turn a capacity formulation into the energy stage in place: pin the
    /// throughput to `target` and minimize transmission energy. Returns the
    /// new row and the objective, for mirroring into a live solver.
    pub fn fix_throughput(&mut self, target: f64, total_demand: f64) -> (usize, Vec<f64>) {
        let row = self
            .problem
            .add_constraint("throughput", vec![(self.lambda, total_demand)], Relation::Equal, target);
        self.throughput_row = Some(row);
        self.problem.sense = Sense::Minimize;
        let mut objective = vec![0.0; self.problem.variables.len()];
        for (g, vars) in self.flow_vars.iter().enumerate() {
            for &v in vars {
                objective[v] = self.model.groups[g].unit_energy;
            }
        }
        for (v, &c) in self.problem.variables.iter_mut().zip(&objective) {
            v.objective = c;
        }
        (row, objective)
    }

    fn assemble(
        tuples: &[Tuple],
        columns: &[IndependentSet],
        topology: &Topology,
        grouping: TupleGrouping,
        f_star: Option<f64>,
    ) -> Self {
        let model = FlowModel::new(tuples, grouping);
        let sense = if f_star.is_some() {
            Sense::Minimize
        } else {
            Sense::Maximize
        };
        let mut problem = LpProblem::new(sense);
        let total_demand = topology.total_demand();
        let commodities = topology.commodities.len();

        let mut flow_vars = Vec::with_capacity(model.groups.len());
        for (g, group) in model.groups.iter().enumerate() {
            let energy = if f_star.is_some() { group.unit_energy } else { 0.0 };
            let vars: Vec<usize> = (0..commodities)
                .map(|k| {
                    let name = match grouping {
                        TupleGrouping::PerTuple => format!("f_t{}_k{k}", group.members[0]),
                        TupleGrouping::LinkAggregated => format!("f_g{g}_n{}_n{}_k{k}", group.tx, group.rx),
                    };
                    problem.add_variable(name, 0.0, f64::INFINITY, energy)
                })
                .collect();
            flow_vars.push(vars);
        }
        let lambda_obj = if f_star.is_some() { 0.0 } else { total_demand };
        let lambda = problem.add_variable("lambda", 0.0, f64::INFINITY, lambda_obj);

        // conservation
        let n = topology.nodes.len();
        for (k, c) in topology.commodities.iter().enumerate() {
            let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
            for (g, group) in model.groups.iter().enumerate() {
                rows[group.tx].push((flow_vars[g][k], 1.0));
                rows[group.rx].push((flow_vars[g][k], -1.0));
            }
            rows[c.source].push((lambda, -c.demand));
            rows[c.destination].push((lambda, c.demand));
            for (u, terms) in rows.into_iter().enumerate() {
                if !terms.is_empty() {
                    problem.add_constraint(format!("flow_k{k}_n{u}"), terms, Relation::Equal, 0.0);
                }
            }
        }

        let budget_row = problem.add_constraint("time_budget", Vec::new(), Relation::LessEq, 1.0);

        let activity_rows = model
            .groups
            .iter()
            .enumerate()
            .map(|(g, _)| {
                let terms = flow_vars[g].iter().map(|&v| (v, 1.0)).collect();
                problem.add_constraint(format!("active_g{g}"), terms, Relation::LessEq, 0.0)
            })
            .collect();

        let throughput_row = f_star.map(|target| {
            problem.add_constraint("throughput", vec![(lambda, total_demand)], Relation::Equal, target)
        });

        let mut formulation = Formulation {
            problem,
            model,
            flow_vars,
            lambda,
            alpha_vars: Vec::new(),
            columns: Vec::new(),
            activity_rows,
            budget_row,
            throughput_row,
            capacities: tuples.iter().map(|t| t.capacity).collect(),
        };
        for is in columns {
            formulation.add_column(is.clone());
        }
        formulation
    }

    /// The variable and row coefficients an independent set contributes.
    pub fn column_for(&self, is: &IndependentSet) -> (Variable, Vec<(usize, f64)>) {
        let mut per_group: Vec<(usize, f64)> = Vec::new();
        for &p in &is.members {
            let g = self.model.group_of[p];
            match per_group.iter_mut().find(|(h, _)| *h == g) {
                Some((_, w)) => *w += self.capacities[p],
                None => per_group.push((g, self.capacities[p])),
            }
        }
        per_group.sort_by_key(|(g, _)| *g);
        let mut terms = vec![(self.budget_row, 1.0)];
        terms.extend(per_group.into_iter().map(|(g, w)| (self.activity_rows[g], -w)));
        let variable = Variable {
            name: format!("alpha_{}", self.columns.len()),
            lower: 0.0,
            upper: f64::INFINITY,
            objective: 0.0,
        };
        (variable, terms)
    }

    /// Append an independent-set column to `self.problem`; returns its variable index.
    pub fn add_column(&mut self, is: IndependentSet) -> usize {
        let (variable, terms) = self.column_for(&is);
        let j = self.problem.variables.len();
        self.problem.variables.push(variable);
        for (i, a) in terms {
            self.problem.constraints[i].terms.push((j, a));
        }
        self.alpha_vars.push(j);
        self.columns.push(is);
        j
    }

    /// Records a column that was already pushed into a solver working on a copy of `problem`.
    pub(crate) fn register_column(&mut self, is: IndependentSet, variable: Variable, terms: &[(usize, f64)]) {
        let j = self.problem.variables.len();
        self.problem.variables.push(variable);
        for &(i, a) in terms {
            self.problem.constraints[i].terms.push((j, a));
        }
        self.alpha_vars.push(j);
        self.columns.push(is);
    }

    fn orientation(&self) -> f64 {
        match self.problem.sense {
            Sense::Maximize => 1.0,
            Sense::Minimize => -1.0,
        }
    }

    /// Pricing weights `w_p * dual(activity row of p)`, oriented so that an
    /// improving column has total weight above [`Self::pricing_threshold`].
    pub fn pricing_weights(&self, duals: &[f64]) -> Vec<f64> {
        let s = self.orientation();
        self.model
            .group_of
            .iter()
            .enumerate()
            .map(|(p, &g)| (s * duals[self.activity_rows[g]] * self.capacities[p]).max(0.0))
            .collect()
    }

    pub fn pricing_threshold(&self, duals: &[f64]) -> f64 {
        self.orientation() * duals[self.budget_row]
    }

    /// Disaggregate an LP solution into per-tuple flows and active sets.
    pub fn plan_from_primal(&self, x: &[f64], commodities: usize) -> SchedulePlan {
        let tuple_count = self.model.group_of.len();
        let mut active_sets = Vec::new();
        let mut active_time = vec![0.0; tuple_count];
        for (is, &j) in self.columns.iter().zip(&self.alpha_vars) {
            let alpha = x[j];
            if alpha > 1e-12 {
                for &p in &is.members {
                    active_time[p] += alpha;
                }
                active_sets.push((is.clone(), alpha));
            }
        }

        let mut tuple_flows = vec![vec![0.0; commodities]; tuple_count];
        for (g, group) in self.model.groups.iter().enumerate() {
            let shares: Vec<f64> = group
                .members
                .iter()
                .map(|&p| self.capacities[p] * active_time[p])
                .collect();
            let total: f64 = shares.iter().sum();
            if total <= 0.0 {
                continue;
            }
            for k in 0..commodities {
                let flow = x[self.flow_vars[g][k]];
                if flow <= 1e-15 {
                    continue;
                }
                for (&p, share) in group.members.iter().zip(&shares) {
                    tuple_flows[p][k] = flow * share / total;
                }
            }
        }

        SchedulePlan {
            active_sets,
            tuple_flows,
            lambda: x[self.lambda].max(0.0),
        }
    }
}

/// Capacity LP with one column per given independent set, in per-tuple form.
pub fn build_capacity_lp(
    tuples: &[Tuple],
    independent_sets: &[IndependentSet],
    topology: &Topology,
) -> LpProblem {
    Formulation::capacity(tuples, independent_sets, topology, TupleGrouping::PerTuple).problem
}

/// Minimum-energy LP at throughput `f_star`, in per-tuple form.
pub fn build_min_energy_lp(
    tuples: &[Tuple],
    independent_sets: &[IndependentSet],
    topology: &Topology,
    f_star: f64,
) -> LpProblem {
    Formulation::min_energy(tuples, independent_sets, topology, TupleGrouping::PerTuple, f_star).problem
}
