use serde::{Deserialize, Serialize};

use crate::conflict::{conflicts, IndependentSet};
use crate::model::{Topology, Tuple};

/// A fractional schedule: how long each independent set is active and what each tuple carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchedulePlan {
    /// `(set, alpha)` for every set with positive activation.
    pub active_sets: Vec<(IndependentSet, f64)>,
    /// `tuple_flows[p][k]`: rate of commodity `k` on tuple `p`.
    pub tuple_flows: Vec<Vec<f64>>,
    pub lambda: f64,
}

impl SchedulePlan {
    /// A plan that never transmits.
    pub fn idle(tuple_count: usize, commodities: usize) -> Self {
        SchedulePlan {
            active_sets: Vec::new(),
            tuple_flows: vec![vec![0.0; commodities]; tuple_count],
            lambda: 0.0,
        }
    }

    /// Active time of each tuple: the total alpha of the sets containing it.
    pub fn active_time(&self, tuple_count: usize) -> Vec<f64> {
        let mut t = vec![0.0; tuple_count];
        for (is, alpha) in &self.active_sets {
            for &p in &is.members {
                t[p] += alpha;
            }
        }
        t
    }

    pub fn total_alpha(&self) -> f64 {
        self.active_sets.iter().map(|(_, a)| a).sum()
    }
}

/// Worst violation per constraint family; all zero for an exact plan.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanResiduals {
    /// Distance of any alpha outside `[0, 1]`.
    pub alpha_range: f64,
    /// `sum(alpha) - 1`, clamped at zero.
    pub time_budget: f64,
    /// `sum_k flow / w_p - active_time_p`, clamped at zero.
    pub activity: f64,
    /// Magnitude of the most negative flow (or lambda).
    pub negativity: f64,
    /// Worst flow imbalance at any node.
    pub conservation: f64,
    /// Pairs of conflicting tuples inside one scheduled set, or out-of-range members.
    pub conflicting_pairs: usize,
    /// Flow table shape does not match the tuples and commodities.
    pub shape_mismatch: bool,
}

impl PlanResiduals {
    pub fn max_residual(&self) -> f64 {
        self.alpha_range
            .max(self.time_budget)
            .max(self.activity)
            .max(self.negativity)
            .max(self.conservation)
    }

    pub fn passes(&self, tol: f64) -> bool {
        !self.shape_mismatch && self.conflicting_pairs == 0 && self.max_residual() <= tol
    }
}

/// Check a plan against the scheduling and flow constraints using only the
/// tuples and the topology; nothing from the solver is consulted.
pub fn validate_plan(plan: &SchedulePlan, tuples: &[Tuple], topology: &Topology) -> PlanResiduals {
    let mut r = PlanResiduals::default();
    let commodities = topology.commodities.len();
    if plan.tuple_flows.len() != tuples.len() || plan.tuple_flows.iter().any(|f| f.len() != commodities) {
        r.shape_mismatch = true;
        return r;
    }

    let mut active = vec![0.0; tuples.len()];
    for (is, alpha) in &plan.active_sets {
        r.alpha_range = r.alpha_range.max(-alpha).max(alpha - 1.0);
        for (i, &p) in is.members.iter().enumerate() {
            if p >= tuples.len() {
                r.conflicting_pairs += 1;
                continue;
            }
            active[p] += alpha;
            for &q in &is.members[i + 1..] {
                if q < tuples.len() && conflicts(&tuples[p], &tuples[q], topology) {
                    r.conflicting_pairs += 1;
                }
            }
        }
    }
    let budget: f64 = plan.active_sets.iter().map(|(_, a)| a).sum();
    r.time_budget = (budget - 1.0).max(0.0);

    r.negativity = (-plan.lambda).max(0.0);
    for (p, flows) in plan.tuple_flows.iter().enumerate() {
        for &f in flows {
            r.negativity = r.negativity.max(-f);
        }
        let used: f64 = flows.iter().sum::<f64>() / tuples[p].capacity;
        r.activity = r.activity.max(used - active[p]);
    }

    for (k, c) in topology.commodities.iter().enumerate() {
        let mut net = vec![0.0; topology.nodes.len()];
        for (t, flows) in tuples.iter().zip(&plan.tuple_flows) {
            net[t.tx] += flows[k];
            net[t.rx] -= flows[k];
        }
        net[c.source] -= plan.lambda * c.demand;
        net[c.destination] += plan.lambda * c.demand;
        for v in net {
            r.conservation = r.conservation.max(v.abs());
        }
    }
    r
}
