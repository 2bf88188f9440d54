use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{shortest_path_hops, BandwidthMode, Commodity, EnergyParams, NodeSpec, Topology};
use crate::error::{Error, Result};

/// Parameters for uniform random placement in a square area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub nodes: usize,
    /// Side length of the square deployment area in meters.
    pub area_side: f64,
    pub commodities: usize,
    pub demand: f64,
    pub comm_range: f64,
    pub interference_range: f64,
    pub radios: usize,
    pub channels: usize,
    pub bandwidth_mode: BandwidthMode,
    pub energy: EnergyParams,
    /// Redraw the placement until every commodity has a path.
    pub require_reachable: bool,
    pub max_attempts: usize,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            nodes: 25,
            area_side: 1000.0,
            commodities: 3,
            demand: 1.0,
            comm_range: 250.0,
            interference_range: 500.0,
            radios: 1,
            channels: 1,
            bandwidth_mode: BandwidthMode::default(),
            energy: EnergyParams::default(),
            require_reachable: true,
            max_attempts: 10_000,
        }
    }
}

/// Deterministic random topology: the same `(params, seed)` always yields the same network.
pub fn generate_random(params: &GeneratorParams, seed: u64) -> Result<Topology> {
    if params.nodes < 2 {
        return Err(Error::invalid("generator needs n >= 2"));
    }
    if 2 * params.commodities > params.nodes {
        return Err(Error::invalid(
            "generator needs 2 * commodities <= n (endpoints sampled without replacement)",
        ));
    }
    if !(params.area_side > 0.0 && params.area_side.is_finite()) {
        return Err(Error::invalid("area side > 0"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..params.max_attempts.max(1) {
        let nodes: Vec<NodeSpec> = (0..params.nodes)
            .map(|i| NodeSpec {
                id: format!("n{i}"),
                x: rng.gen_range(0.0..params.area_side),
                y: rng.gen_range(0.0..params.area_side),
                radios: params.radios,
            })
            .collect();
        let endpoints = sample(&mut rng, params.nodes, 2 * params.commodities).into_vec();
        let commodities = endpoints
            .chunks(2)
            .map(|pair| Commodity {
                source: pair[0],
                destination: pair[1],
                demand: params.demand,
            })
            .collect();

        let mut topology = Topology::new(
            nodes,
            params.channels,
            params.comm_range,
            params.interference_range,
            commodities,
        )?;
        topology.bandwidth_mode = params.bandwidth_mode;
        topology.energy = params.energy;
        topology.validate()?;

        let reachable = topology
            .commodities
            .iter()
            .all(|c| shortest_path_hops(&topology, c).is_ok());
        if reachable || !params.require_reachable {
            return Ok(topology);
        }
    }
    Err(Error::invalid(format!(
        "no placement with every commodity reachable within {} attempts",
        params.max_attempts
    )))
}
