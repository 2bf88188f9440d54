//! Transmission and sleep energy per slot, energy efficiency, and its
//! shortest-path upper bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::SchedulePlan;
use crate::model::{shortest_path_hops, Topology, Tuple};

/// Slack below zero tolerated in the sleep-energy radio count before it is an error.
const SLEEP_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// Transmission energy per slot, `E`.
    pub e_transmission: f64,
    /// Sleep energy per slot, `E0`.
    pub e_sleep: f64,
    pub throughput: f64,
    /// `throughput / (E + E0)`; zero for an idle network.
    pub efficiency: f64,
    /// `EE*`, absent when undefined (heterogeneous energies or an unreachable commodity).
    pub upper_bound: Option<f64>,
    pub efficiency_fraction: Option<f64>,
}

/// `sum_p sum_k f_p^k * (e_tx + e_rx)`.
pub fn transmission_energy(plan: &SchedulePlan, tuples: &[Tuple]) -> f64 {
    plan.tuple_flows
        .iter()
        .zip(tuples)
        .map(|(flows, t)| flows.iter().sum::<f64>() * t.unit_energy())
        .sum()
}

/// `P0 * (total radios - sum_m 2 * alpha_m * |I_m|)`: every radio not busy sleeps.
pub fn sleep_energy(plan: &SchedulePlan, topology: &Topology) -> Result<f64> {
    let radios = topology.total_radios() as f64;
    let busy: f64 = plan
        .active_sets
        .iter()
        .map(|(is, alpha)| 2.0 * alpha * is.len() as f64)
        .sum();
    let idle = radios - busy;
    if idle < -SLEEP_TOLERANCE * radios.max(1.0) {
        return Err(Error::EnergyInconsistency(format!(
            "{busy} busy radio-slots exceed the {radios} radios available"
        )));
    }
    Ok(topology.energy.sleep_power() * idle.max(0.0))
}

/// `EE*`: delivered demand over the energy of sending every commodity along a shortest path.
///
/// With equal demands this is `1 / mean_k((e_tx + e_rx) * hops_k)`; unequal
/// demands weight each commodity's path by its share of the throughput.
pub fn ee_upper_bound(topology: &Topology) -> Result<f64> {
    let unit = topology
        .homogeneous_unit_energy()
        .ok_or(Error::HeterogeneousEnergy)?;
    let mut demand = 0.0;
    let mut cost = 0.0;
    for c in &topology.commodities {
        let hops = shortest_path_hops(topology, c)?;
        demand += c.demand;
        cost += c.demand * unit * hops as f64;
    }
    Ok(demand / cost)
}

pub fn energy_efficiency(plan: &SchedulePlan, tuples: &[Tuple], topology: &Topology) -> Result<EnergyReport> {
    let e_transmission = transmission_energy(plan, tuples);
    let e_sleep = sleep_energy(plan, topology)?;
    let throughput = plan.lambda * topology.total_demand();
    let total = e_transmission + e_sleep;
    let efficiency = if throughput > 0.0 && total > 0.0 {
        throughput / total
    } else {
        0.0
    };
    let upper_bound = match ee_upper_bound(topology) {
        Ok(b) => Some(b),
        Err(Error::HeterogeneousEnergy | Error::NoPath { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(EnergyReport {
        e_transmission,
        e_sleep,
        throughput,
        efficiency,
        upper_bound,
        efficiency_fraction: upper_bound.map(|b| efficiency / b),
    })
}
