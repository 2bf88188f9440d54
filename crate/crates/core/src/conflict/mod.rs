//! Multi-dimensional conflict graph (MDCG) over tuples and independent-set search.

mod link_pricing;
mod maximal;
mod mwis;

use std::io::Write;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{Topology, Tuple};

pub use link_pricing::LinkChannelPricer;
pub use maximal::{enumerate_maximal_is, DEFAULT_IS_CAP};
pub use mwis::{max_weight_is, MWIS_TOLERANCE};

/// A set of mutually non-conflicting tuple indices, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IndependentSet {
    pub members: Vec<usize>,
}

impl IndependentSet {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        IndependentSet { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, tuple: usize) -> bool {
        self.members.binary_search(&tuple).is_ok()
    }
}

/// Whether two tuples cannot be active at the same time.
///
/// Radio conflict: they share a `(node, radio)` endpoint. Co-channel
/// interference: same channel and some endpoint of one tuple lies within the
/// interference range of the other tuple's transmitter, in either direction.
pub fn conflicts(a: &Tuple, b: &Tuple, topology: &Topology) -> bool {
    let ea = a.radio_endpoints();
    let eb = b.radio_endpoints();
    if ea.iter().any(|x| eb.contains(x)) {
        return true;
    }
    a.channel == b.channel
        && (topology.in_interference_range(a.tx, b.tx)
            || topology.in_interference_range(a.tx, b.rx)
            || topology.in_interference_range(b.tx, a.rx))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConflictGraph {
    rows: Vec<FixedBitSet>,
}

impl ConflictGraph {
    /// Graph from an explicit undirected edge list; used for tests and external inputs.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut rows = vec![FixedBitSet::with_capacity(n); n];
        for &(i, j) in edges {
            if i != j {
                rows[i].insert(j);
                rows[j].insert(i);
            }
        }
        ConflictGraph { rows }
    }

    pub fn tuple_count(&self) -> usize {
        self.rows.len()
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.rows[i].contains(j)
    }

    pub fn neighbors(&self, i: usize) -> &FixedBitSet {
        &self.rows[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.rows[i].count_ones(..)
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones(..)).sum::<usize>() / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.ones().filter(move |&j| j > i).map(move |j| (i, j)))
    }

    pub fn is_independent(&self, members: &[usize]) -> bool {
        members
            .iter()
            .enumerate()
            .all(|(k, &i)| members[k + 1..].iter().all(|&j| i != j && !self.adjacent(i, j)))
    }

    /// Independent and no outside vertex can be added.
    pub fn is_maximal_independent(&self, members: &[usize]) -> bool {
        if !self.is_independent(members) {
            return false;
        }
        let mut blocked = FixedBitSet::with_capacity(self.tuple_count());
        for &i in members {
            blocked.insert(i);
            blocked.union_with(&self.rows[i]);
        }
        blocked.count_ones(..) == self.tuple_count()
    }

    /// Extend `seed` to a maximal independent set, adding vertices in index order.
    pub fn greedy_maximal(&self, seed: &[usize]) -> IndependentSet {
        let n = self.tuple_count();
        let mut blocked = FixedBitSet::with_capacity(n);
        let mut members = Vec::with_capacity(seed.len());
        for &i in seed {
            debug_assert!(!blocked.contains(i), "seed is not independent");
            members.push(i);
            blocked.insert(i);
            blocked.union_with(&self.rows[i]);
        }
        for i in 0..n {
            if !blocked.contains(i) {
                members.push(i);
                blocked.insert(i);
                blocked.union_with(&self.rows[i]);
            }
        }
        IndependentSet::new(members)
    }

    /// One `i j` pair per line, `i < j`.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (i, j) in self.edges() {
            writeln!(out, "{i} {j}")?;
        }
        Ok(())
    }
}

/// Build the MDCG; `adjacent(i, j) == conflicts(tuples[i], tuples[j])`.
pub fn build_mdcg(tuples: &[Tuple], topology: &Topology) -> ConflictGraph {
    let n = tuples.len();
    let nodes = topology.nodes.len();
    let near: Vec<bool> = (0..nodes * nodes)
        .map(|k| topology.in_interference_range(k / nodes, k % nodes))
        .collect();
    let near = |u: usize, v: usize| near[u * nodes + v];

    let rows = tuples
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            let mut row = FixedBitSet::with_capacity(n);
            let ea = a.radio_endpoints();
            for (j, b) in tuples.iter().enumerate() {
                if i == j {
                    continue;
                }
                let eb = b.radio_endpoints();
                let hit = ea.iter().any(|x| eb.contains(x))
                    || (a.channel == b.channel
                        && (near(a.tx, b.tx) || near(a.tx, b.rx) || near(b.tx, a.rx)));
                if hit {
                    row.insert(j);
                }
            }
            row
        })
        .collect();
    ConflictGraph { rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::enumerate_tuples;
    use crate::model::fixtures::{chain, node, pair};
    use crate::model::{Commodity, Topology};
    use proptest::prelude::*;

    fn tuple(tx: usize, rx: usize, tr: usize, rr: usize, ch: usize) -> Tuple {
        Tuple {
            tx,
            rx,
            tx_radio: tr,
            rx_radio: rr,
            channel: ch,
            capacity: 1.0,
            e_tx: 0.5,
            e_rx: 0.5,
        }
    }

    /// Four nodes: two pairs 400 m apart, interference 500.
    fn two_pairs() -> Topology {
        Topology::new(
            vec![
                node("a", 0.0, 0.0, 2),
                node("b", 100.0, 0.0, 2),
                node("c", 400.0, 0.0, 2),
                node("d", 500.0, 0.0, 2),
            ],
            2,
            250.0,
            500.0,
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn shared_tx_radio_conflicts_across_channels() {
        let t = two_pairs();
        assert!(conflicts(&tuple(0, 1, 0, 0, 0), &tuple(0, 1, 0, 1, 1), &t));
    }

    #[test]
    fn distinct_radios_distinct_channels_do_not_conflict() {
        let t = two_pairs();
        assert!(!conflicts(&tuple(0, 1, 0, 0, 0), &tuple(2, 3, 0, 0, 1), &t));
        assert!(!conflicts(&tuple(0, 1, 0, 0, 0), &tuple(0, 1, 1, 1, 1), &t));
    }

    #[test]
    fn co_channel_within_interference_range() {
        let t = two_pairs();
        // transmitters 400 m apart, interference range 500
        assert!(conflicts(&tuple(0, 1, 0, 0, 0), &tuple(2, 3, 0, 0, 0), &t));
        let mut far = t.clone();
        far.interference_range = 290.0;
        assert!(!conflicts(&tuple(0, 1, 0, 0, 0), &tuple(2, 3, 0, 0, 0), &far));
    }

    #[test]
    fn co_channel_rule_is_symmetrized() {
        // a's transmitter reaches b's receiver, but not the other way round
        let t = Topology::new(
            vec![
                node("a", 0.0, 0.0, 1),
                node("ar", -200.0, 0.0, 1),
                node("b", 450.0, 0.0, 1),
                node("br", 300.0, 0.0, 1),
            ],
            1,
            250.0,
            320.0,
            vec![],
        )
        .unwrap();
        let a = tuple(0, 1, 0, 0, 0);
        let b = tuple(2, 3, 0, 0, 0);
        assert!(!t.in_interference_range(2, 0) && !t.in_interference_range(2, 1));
        assert!(t.in_interference_range(0, 3));
        assert!(conflicts(&a, &b, &t));
        assert!(conflicts(&b, &a, &t));
    }

    #[test]
    fn single_tuple_graph_has_no_edges() {
        let t = pair(1, 1);
        let g = build_mdcg(&enumerate_tuples(&t).unwrap(), &t);
        assert_eq!(g.tuple_count(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn chain_graph_has_one_edge() {
        let t = chain(1, 1);
        let g = build_mdcg(&enumerate_tuples(&t).unwrap(), &t);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn single_link_two_radios_two_channels() {
        let t = pair(2, 2);
        let tuples = enumerate_tuples(&t).unwrap();
        let g = build_mdcg(&tuples, &t);
        let mut expected = 0;
        for i in 0..8 {
            for j in i + 1..8 {
                let (a, b) = (&tuples[i], &tuples[j]);
                let rule = a.tx_radio == b.tx_radio
                    || a.rx_radio == b.rx_radio
                    || a.channel == b.channel;
                assert_eq!(g.adjacent(i, j), rule, "{a:?} {b:?}");
                expected += rule as usize;
            }
        }
        assert_eq!(g.edge_count(), expected);
    }

    #[test]
    fn greedy_maximal_is_maximal() {
        let t = chain(2, 2);
        let g = build_mdcg(&enumerate_tuples(&t).unwrap(), &t);
        for seed in 0..g.tuple_count() {
            let is = g.greedy_maximal(&[seed]);
            assert!(is.contains(seed));
            assert!(g.is_maximal_independent(&is.members));
        }
    }

    #[test]
    fn edge_list_dump() {
        let g = ConflictGraph::from_edges(3, &[(0, 1), (2, 1)]);
        let mut out = Vec::new();
        g.write_edge_list(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "0 1\n1 2\n");
    }

    fn random_topology(seed: u64, radios: usize, channels: usize) -> Topology {
        use crate::model::{generate_random, GeneratorParams};
        let params = GeneratorParams {
            nodes: 6,
            area_side: 500.0,
            commodities: 1,
            radios,
            channels,
            require_reachable: false,
            ..GeneratorParams::default()
        };
        generate_random(&params, seed).unwrap()
    }

    proptest! {
        #[test]
        fn conflict_relation_symmetric(seed in 0u64..500, r in 1usize..3, c in 1usize..3) {
            let t = random_topology(seed, r, c);
            let tuples = enumerate_tuples(&t).unwrap();
            let g = build_mdcg(&tuples, &t);
            for i in 0..tuples.len() {
                prop_assert!(!g.adjacent(i, i));
                for j in 0..tuples.len() {
                    if i != j {
                        prop_assert_eq!(conflicts(&tuples[i], &tuples[j], &t), conflicts(&tuples[j], &tuples[i], &t));
                        prop_assert_eq!(g.adjacent(i, j), conflicts(&tuples[i], &tuples[j], &t));
                    }
                }
            }
        }

        #[test]
        fn independent_sets_use_distinct_radios(seed in 0u64..200) {
            let t = random_topology(seed, 2, 2);
            let tuples = enumerate_tuples(&t).unwrap();
            let g = build_mdcg(&tuples, &t);
            if let Ok(sets) = enumerate_maximal_is(&g, 20_000) {
                for is in sets {
                    let mut endpoints: Vec<_> = is.members.iter().flat_map(|&i| tuples[i].radio_endpoints()).collect();
                    let n = endpoints.len();
                    endpoints.sort();
                    endpoints.dedup();
                    prop_assert_eq!(endpoints.len(), n);
                    prop_assert!(2 * is.len() <= t.total_radios());
                }
            }
        }
    }

    #[test]
    fn demand_does_not_affect_graph() {
        let mut t = chain(1, 2);
        let g1 = build_mdcg(&enumerate_tuples(&t).unwrap(), &t);
        t.commodities = vec![Commodity {
            source: 0,
            destination: 2,
            demand: 7.0,
        }];
        let g2 = build_mdcg(&enumerate_tuples(&t).unwrap(), &t);
        assert_eq!(g1, g2);
    }
}
