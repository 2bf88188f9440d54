//! Physical network, commodities and the tuple resource space.
//!
//! A tuple is one point of the multi-dimensional resource space: a directed
//! link `(tx, rx)` together with the radio used at each end and the channel.
//! A link between nodes with `R_u` and `R_v` radios on a network with `C`
//! channels maps to `R_u * R_v * C` tuples.

mod generate;
mod io;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::{generate_random, GeneratorParams};
pub use io::{load_topology, parse_topology, topology_to_json, UnknownFieldPolicy};

/// Index of a node inside [`Topology::nodes`].
pub type NodeIdx = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub radios: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Commodity {
    pub source: NodeIdx,
    pub destination: NodeIdx,
    pub demand: f64,
}

/// How per-tuple link capacity is derived from the channel count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BandwidthMode {
    /// Every channel carries `rate` regardless of how many channels exist.
    PerChannelFixed { rate: f64 },
    /// A fixed system bandwidth split evenly: each tuple gets `total_capacity / |C|`.
    TotalFixed { total_capacity: f64 },
}

impl Default for BandwidthMode {
    fn default() -> Self {
        BandwidthMode::PerChannelFixed { rate: 1.0 }
    }
}

/// Unit energies (per bit) and sleep power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    pub e_tx: f64,
    pub e_rx: f64,
    /// Sleep power per radio. `None` means 1% of the transmission power,
    /// i.e. `0.01 * (e_tx + e_rx) * 1 rate unit`.
    pub p0_sleep: Option<f64>,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams {
            e_tx: 0.5,
            e_rx: 0.5,
            p0_sleep: None,
        }
    }
}

impl EnergyParams {
    pub const DEFAULT_SLEEP_FRACTION: f64 = 0.01;

    pub fn sleep_power(&self) -> f64 {
        self.p0_sleep
            .unwrap_or(Self::DEFAULT_SLEEP_FRACTION * (self.e_tx + self.e_rx))
    }
}

/// Per-link (optionally per-channel) unit energy override.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyOverride {
    pub tx: NodeIdx,
    pub rx: NodeIdx,
    pub channel: Option<usize>,
    pub e_tx: f64,
    pub e_rx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub nodes: Vec<NodeSpec>,
    pub channels: usize,
    pub comm_range: f64,
    pub interference_range: f64,
    pub commodities: Vec<Commodity>,
    pub bandwidth_mode: BandwidthMode,
    pub energy: EnergyParams,
    pub energy_overrides: Vec<EnergyOverride>,
    /// When set, sources may receive and destinations may transmit (so they
    /// can relay other commodities). Off by default: every source is barred
    /// from receiving and every destination from transmitting.
    pub allow_endpoint_relay: bool,
}

/// One point of the resource space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tuple {
    pub tx: NodeIdx,
    pub rx: NodeIdx,
    pub tx_radio: usize,
    pub rx_radio: usize,
    pub channel: usize,
    pub capacity: f64,
    pub e_tx: f64,
    pub e_rx: f64,
}

impl Tuple {
    pub fn unit_energy(&self) -> f64 {
        self.e_tx + self.e_rx
    }

    /// The two `(node, radio)` endpoints this tuple occupies.
    pub fn radio_endpoints(&self) -> [(NodeIdx, usize); 2] {
        [(self.tx, self.tx_radio), (self.rx, self.rx_radio)]
    }
}

impl Topology {
    /// A topology with default bandwidth (1 rate unit per channel) and default energies.
    pub fn new(
        nodes: Vec<NodeSpec>,
        channels: usize,
        comm_range: f64,
        interference_range: f64,
        commodities: Vec<Commodity>,
    ) -> Result<Self> {
        let topology = Topology {
            nodes,
            channels,
            comm_range,
            interference_range,
            commodities,
            bandwidth_mode: BandwidthMode::default(),
            energy: EnergyParams::default(),
            energy_overrides: Vec::new(),
            allow_endpoint_relay: false,
        };
        topology.validate()?;
        Ok(topology)
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids: Vec<&str> = self.nodes.iter().map(|n| n.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("node identifiers unique (duplicate '{}')", w[0])));
        }
        for node in &self.nodes {
            if !node.x.is_finite() || !node.y.is_finite() {
                return Err(Error::invalid(format!("positions finite (node '{}')", node.id)));
            }
            if node.radios < 1 {
                return Err(Error::invalid(format!("radios >= 1 (node '{}')", node.id)));
            }
        }
        if !(self.comm_range.is_finite() && self.comm_range >= 0.0) {
            return Err(Error::invalid("comm_range finite and non-negative"));
        }
        if !(self.interference_range >= self.comm_range) || !self.interference_range.is_finite() {
            return Err(Error::invalid("interference_range >= comm_range"));
        }
        if self.channels < 1 {
            return Err(Error::invalid("channels >= 1"));
        }
        for (k, c) in self.commodities.iter().enumerate() {
            if c.source >= self.nodes.len() || c.destination >= self.nodes.len() {
                return Err(Error::invalid(format!(
                    "commodity {k} endpoints are existing nodes"
                )));
            }
            if c.source == c.destination {
                return Err(Error::invalid(format!("commodity {k} source != destination")));
            }
            if !(c.demand > 0.0) || !c.demand.is_finite() {
                return Err(Error::invalid(format!("commodity {k} demand > 0")));
            }
        }
        match self.bandwidth_mode {
            BandwidthMode::PerChannelFixed { rate } if !(rate > 0.0 && rate.is_finite()) => {
                return Err(Error::invalid("per-channel rate > 0"));
            }
            BandwidthMode::TotalFixed { total_capacity }
                if !(total_capacity > 0.0 && total_capacity.is_finite()) =>
            {
                return Err(Error::invalid("total_capacity > 0"));
            }
            _ => {}
        }
        let energy_ok = |e: f64| e.is_finite() && e >= 0.0;
        if !energy_ok(self.energy.e_tx) || !energy_ok(self.energy.e_rx) {
            return Err(Error::invalid("unit energies e_tx, e_rx >= 0"));
        }
        if !energy_ok(self.energy.sleep_power()) {
            return Err(Error::invalid("sleep power p0 >= 0"));
        }
        for o in &self.energy_overrides {
            if o.tx >= self.nodes.len() || o.rx >= self.nodes.len() {
                return Err(Error::invalid("energy override endpoints are existing nodes"));
            }
            if !energy_ok(o.e_tx) || !energy_ok(o.e_rx) {
                return Err(Error::invalid("energy override e_tx, e_rx >= 0"));
            }
        }
        Ok(())
    }

    pub fn node_index(&self, id: &str) -> Option<NodeIdx> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn distance(&self, u: NodeIdx, v: NodeIdx) -> f64 {
        let (a, b) = (&self.nodes[u], &self.nodes[v]);
        (a.x - b.x).hypot(a.y - b.y)
    }

    pub fn in_comm_range(&self, u: NodeIdx, v: NodeIdx) -> bool {
        self.distance(u, v) <= self.comm_range
    }

    pub fn in_interference_range(&self, u: NodeIdx, v: NodeIdx) -> bool {
        self.distance(u, v) <= self.interference_range
    }

    pub fn is_source(&self, u: NodeIdx) -> bool {
        self.commodities.iter().any(|c| c.source == u)
    }

    pub fn is_destination(&self, u: NodeIdx) -> bool {
        self.commodities.iter().any(|c| c.destination == u)
    }

    pub fn can_transmit(&self, u: NodeIdx) -> bool {
        self.allow_endpoint_relay || !self.is_destination(u)
    }

    pub fn can_receive(&self, v: NodeIdx) -> bool {
        self.allow_endpoint_relay || !self.is_source(v)
    }

    /// Directed node pairs that carry tuples, sorted by `(tx, rx)`.
    pub fn links(&self) -> Vec<(NodeIdx, NodeIdx)> {
        let n = self.nodes.len();
        let mut links = Vec::new();
        for u in 0..n {
            if !self.can_transmit(u) {
                continue;
            }
            for v in 0..n {
                if u != v && self.can_receive(v) && self.in_comm_range(u, v) {
                    links.push((u, v));
                }
            }
        }
        links
    }

    pub fn total_radios(&self) -> usize {
        self.nodes.iter().map(|n| n.radios).sum()
    }

    pub fn total_demand(&self) -> f64 {
        self.commodities.iter().map(|c| c.demand).sum()
    }

    /// Link capacity of every tuple under the current channel count.
    pub fn tuple_capacity(&self) -> f64 {
        match self.bandwidth_mode {
            BandwidthMode::PerChannelFixed { rate } => rate,
            BandwidthMode::TotalFixed { total_capacity } => total_capacity / self.channels as f64,
        }
    }

    /// Unit energies `(e_tx, e_rx)` of a tuple on `(tx, rx, channel)`.
    /// A channel-specific override wins over a link-wide one.
    pub fn unit_energies(&self, tx: NodeIdx, rx: NodeIdx, channel: usize) -> (f64, f64) {
        let mut link_wide = None;
        for o in &self.energy_overrides {
            if o.tx == tx && o.rx == rx {
                match o.channel {
                    Some(c) if c == channel => return (o.e_tx, o.e_rx),
                    None => link_wide = Some((o.e_tx, o.e_rx)),
                    _ => {}
                }
            }
        }
        link_wide.unwrap_or((self.energy.e_tx, self.energy.e_rx))
    }

    /// `e_tx + e_rx` when every tuple shares it, `None` when overrides make it vary.
    pub fn homogeneous_unit_energy(&self) -> Option<f64> {
        let base = self.energy.e_tx + self.energy.e_rx;
        let uniform = self
            .energy_overrides
            .iter()
            .all(|o| (o.e_tx + o.e_rx - base).abs() <= 1e-12 * base.max(1.0));
        uniform.then_some(base)
    }

    /// Copy with `channels` channels and `radios` radios on every node.
    pub fn with_config(&self, channels: usize, radios: usize) -> Topology {
        let mut t = self.clone();
        t.channels = channels;
        for node in &mut t.nodes {
            node.radios = radios;
        }
        t
    }
}

/// All tuples of the topology, sorted by `(tx, rx, tx_radio, rx_radio, channel)`.
pub fn enumerate_tuples(topology: &Topology) -> Result<Vec<Tuple>> {
    topology.validate()?;
    let capacity = topology.tuple_capacity();
    let mut tuples = Vec::new();
    for (tx, rx) in topology.links() {
        for tx_radio in 0..topology.nodes[tx].radios {
            for rx_radio in 0..topology.nodes[rx].radios {
                for channel in 0..topology.channels {
                    let (e_tx, e_rx) = topology.unit_energies(tx, rx, channel);
                    tuples.push(Tuple {
                        tx,
                        rx,
                        tx_radio,
                        rx_radio,
                        channel,
                        capacity,
                        e_tx,
                        e_rx,
                    });
                }
            }
        }
    }
    Ok(tuples)
}

/// Hop count of the shortest usable path for `commodity`.
pub fn shortest_path_hops(topology: &Topology, commodity: &Commodity) -> Result<usize> {
    let n = topology.nodes.len();
    let mut adjacency = vec![Vec::new(); n];
    for (u, v) in topology.links() {
        adjacency[u].push(v);
    }
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    dist[commodity.source] = 0;
    queue.push_back(commodity.source);
    while let Some(u) = queue.pop_front() {
        if u == commodity.destination {
            return Ok(dist[u]);
        }
        for &v in &adjacency[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    Err(Error::NoPath {
        source_node: topology.nodes[commodity.source].id.clone(),
        destination: topology.nodes[commodity.destination].id.clone(),
    })
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn adjacent_pair_single_tuple() {
        let tuples = enumerate_tuples(&pair(1, 1)).unwrap();
        assert_eq!(tuples.len(), 1);
        assert_eq!((tuples[0].tx, tuples[0].rx), (0, 1));
    }

    #[test]
    fn adjacent_pair_radio_channel_product() {
        let tuples = enumerate_tuples(&pair(2, 2)).unwrap();
        assert_eq!(tuples.len(), 8);
        assert!(tuples.iter().all(|t| t.tx == 0 && t.rx == 1));
        let keys: Vec<_> = tuples
            .iter()
            .map(|t| (t.tx_radio, t.rx_radio, t.channel))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn chain_excludes_out_of_range_and_endpoints() {
        let tuples = enumerate_tuples(&chain(1, 1)).unwrap();
        let links: Vec<_> = tuples.iter().map(|t| (t.tx, t.rx)).collect();
        assert_eq!(links, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn relaxed_endpoints_add_reverse_links() {
        let mut t = chain(1, 1);
        t.allow_endpoint_relay = true;
        let links: Vec<_> = enumerate_tuples(&t).unwrap().iter().map(|t| (t.tx, t.rx)).collect();
        assert_eq!(links, vec![(0, 1), (1, 0), (1, 2), (2, 1)]);
    }

    #[test]
    fn disconnected_topology_yields_no_tuples() {
        let mut t = pair(1, 1);
        t.nodes[1].x = 1000.0;
        assert!(enumerate_tuples(&t).unwrap().is_empty());
    }

    #[test]
    fn total_fixed_splits_capacity() {
        let mut t = pair(1, 4);
        t.bandwidth_mode = BandwidthMode::TotalFixed { total_capacity: 2.0 };
        for tuple in enumerate_tuples(&t).unwrap() {
            assert!((tuple.capacity * 4.0 - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_override_applies_per_link() {
        let mut t = chain(1, 2);
        t.energy_overrides.push(EnergyOverride {
            tx: 1,
            rx: 2,
            channel: Some(1),
            e_tx: 2.0,
            e_rx: 1.0,
        });
        let tuples = enumerate_tuples(&t).unwrap();
        let overridden: Vec<_> = tuples.iter().filter(|t| t.unit_energy() == 3.0).collect();
        assert_eq!(overridden.len(), 1);
        assert_eq!((overridden[0].tx, overridden[0].channel), (1, 1));
        assert_eq!(t.homogeneous_unit_energy(), None);
    }

    #[test]
    fn validation_names_invariant() {
        let mut t = pair(1, 1);
        t.interference_range = 100.0;
        let err = t.validate().unwrap_err().to_string();
        assert!(err.contains("interference_range >= comm_range"), "{err}");

        let mut t = pair(1, 1);
        t.nodes[1].radios = 0;
        assert!(t.validate().unwrap_err().to_string().contains("radios >= 1"));

        let mut t = pair(1, 1);
        t.nodes[1].id = "A".into();
        assert!(t.validate().unwrap_err().to_string().contains("unique"));

        let mut t = pair(1, 1);
        t.commodities[0].destination = 0;
        assert!(t.validate().unwrap_err().to_string().contains("source != destination"));

        let mut t = pair(1, 1);
        t.channels = 0;
        assert!(enumerate_tuples(&t).is_err());
    }

    #[test]
    fn hops_adjacent_and_chain() {
        let t = pair(1, 1);
        assert_eq!(shortest_path_hops(&t, &t.commodities[0]).unwrap(), 1);
        let t = chain(1, 1);
        assert_eq!(shortest_path_hops(&t, &t.commodities[0]).unwrap(), 2);
    }

    #[test]
    fn hops_unreachable_is_error() {
        let mut t = chain(1, 1);
        t.nodes[2].x = 2000.0;
        assert!(matches!(
            shortest_path_hops(&t, &t.commodities[0]),
            Err(Error::NoPath { .. })
        ));
    }

    fn grid(side: usize, spacing: f64) -> Topology {
        let mut nodes = Vec::new();
        for r in 0..side {
            for c in 0..side {
                nodes.push(node(&format!("n{r}_{c}"), c as f64 * spacing, r as f64 * spacing, 1));
            }
        }
        let last = side * side - 1;
        Topology::new(
            nodes,
            1,
            250.0,
            500.0,
            vec![Commodity {
                source: 0,
                destination: last,
                demand: 1.0,
            }],
        )
        .unwrap()
    }

    /// BFS over grid coordinates, independent of the topology's link builder.
    fn grid_bfs(side: usize, from: (usize, usize), to: (usize, usize)) -> usize {
        let mut dist = vec![vec![usize::MAX; side]; side];
        let mut queue = VecDeque::from([from]);
        dist[from.0][from.1] = 0;
        while let Some((r, c)) = queue.pop_front() {
            let d = dist[r][c];
            let steps = [(0i64, 1i64), (1, 0), (0, -1), (-1, 0)];
            for (dr, dc) in steps {
                let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                if nr < 0 || nc < 0 || nr >= side as i64 || nc >= side as i64 {
                    continue;
                }
                let (nr, nc) = (nr as usize, nc as usize);
                // The corner source never receives.
                if (nr, nc) == (0, 0) {
                    continue;
                }
                if dist[nr][nc] == usize::MAX {
                    dist[nr][nc] = d + 1;
                    queue.push_back((nr, nc));
                }
            }
        }
        dist[to.0][to.1]
    }

    #[test]
    fn hops_grid_corner_to_corner() {
        let t = grid(5, 200.0);
        let expected = grid_bfs(5, (0, 0), (4, 4));
        assert_eq!(expected, 8);
        assert_eq!(shortest_path_hops(&t, &t.commodities[0]).unwrap(), expected);
    }

    proptest! {
        #[test]
        fn link_tuple_count_is_radio_channel_product(ru in 1usize..4, rv in 1usize..4, c in 1usize..5) {
            let mut t = pair(1, c);
            t.nodes[0].radios = ru;
            t.nodes[1].radios = rv;
            prop_assert_eq!(enumerate_tuples(&t).unwrap().len(), ru * rv * c);
        }

        #[test]
        fn extra_channel_contains_previous_tuples(c in 1usize..5, r in 1usize..3) {
            let base = chain(r, c);
            let more = base.with_config(c + 1, r);
            let small = enumerate_tuples(&base).unwrap();
            let big = enumerate_tuples(&more).unwrap();
            prop_assert!(big.len() > small.len());
            for t in &small {
                prop_assert!(big.contains(t));
            }
        }

        #[test]
        fn hops_invariant_under_relabel_and_scale(seed in 0u64..200, scale in 0.5f64..3.0) {
            let params = GeneratorParams { nodes: 8, area_side: 600.0, commodities: 1, ..GeneratorParams::default() };
            let t = generate_random(&params, seed).unwrap();
            let base = shortest_path_hops(&t, &t.commodities[0]).ok();

            // reverse node order
            let n = t.nodes.len();
            let mut relabeled = t.clone();
            relabeled.nodes.reverse();
            for c in &mut relabeled.commodities {
                c.source = n - 1 - c.source;
                c.destination = n - 1 - c.destination;
            }
            prop_assert_eq!(shortest_path_hops(&relabeled, &relabeled.commodities[0]).ok(), base);

            let mut scaled = t.clone();
            for node in &mut scaled.nodes {
                node.x *= scale;
                node.y *= scale;
            }
            scaled.comm_range *= scale;
            scaled.interference_range *= scale;
            // Scaling can flip links sitting exactly on the range boundary through rounding;
            // generated positions are continuous so that has probability zero.
            prop_assert_eq!(shortest_path_hops(&scaled, &scaled.commodities[0]).ok(), base);
        }
    }
}
