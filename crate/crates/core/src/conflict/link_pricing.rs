//! Exact maximum-weight independent sets when tuple weights depend only on
//! `(link, channel)`.
//!
//! Radios of a node are interchangeable, so a set of tuples is independent
//! exactly when (a) links sharing a channel do not interfere and (b) no node
//! takes part in more activations than it has radios; radios can then be
//! handed out in any order. Searching over `(link, channel)` activations
//! instead of raw tuples removes the radio-pair symmetry, and channels whose
//! weights coincide are treated as interchangeable while empty.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use super::{IndependentSet, MWIS_TOLERANCE};
use crate::model::{NodeIdx, Topology, Tuple};

#[derive(Debug, Clone)]
pub struct LinkChannelPricer {
    links: Vec<(NodeIdx, NodeIdx)>,
    channels: usize,
    radios: Vec<usize>,
    /// Link-level co-channel conflict, each link conflicting with itself.
    interferes: Vec<FixedBitSet>,
    /// `members[l * channels + c]`: tuples on link `l`, channel `c`.
    members: Vec<Vec<usize>>,
    tuple_at: HashMap<(usize, usize, usize, usize), usize>,
}

impl LinkChannelPricer {
    pub fn new(tuples: &[Tuple], topology: &Topology) -> Self {
        let channels = topology.channels;
        let mut link_index: HashMap<(NodeIdx, NodeIdx), usize> = HashMap::new();
        let mut links = Vec::new();
        for t in tuples {
            link_index.entry((t.tx, t.rx)).or_insert_with(|| {
                links.push((t.tx, t.rx));
                links.len() - 1
            });
        }
        let mut members = vec![Vec::new(); links.len() * channels];
        let mut tuple_at = HashMap::new();
        for (p, t) in tuples.iter().enumerate() {
            let l = link_index[&(t.tx, t.rx)];
            members[l * channels + t.channel].push(p);
            tuple_at.insert((l, t.tx_radio, t.rx_radio, t.channel), p);
        }
        let near = |u, v| topology.in_interference_range(u, v);
        let interferes = links
            .iter()
            .map(|&(a_tx, a_rx)| {
                let mut row = FixedBitSet::with_capacity(links.len());
                for (j, &(b_tx, b_rx)) in links.iter().enumerate() {
                    if near(a_tx, b_tx) || near(a_tx, b_rx) || near(b_tx, a_rx) {
                        row.insert(j);
                    }
                }
                row
            })
            .collect();
        LinkChannelPricer {
            links,
            channels,
            radios: topology.nodes.iter().map(|n| n.radios).collect(),
            interferes,
            members,
            tuple_at,
        }
    }

    /// Best independent set and its weight, or `None` when the weights differ
    /// between tuples of the same `(link, channel)` and this search does not apply.
    pub fn max_weight_is(&self, weights: &[f64]) -> Option<(IndependentSet, f64)> {
        self.search(weights, f64::NEG_INFINITY, None)
    }

    /// Pricing variant: a set heavier than `floor` whenever one exists, else
    /// the best set found (weight at most `floor`). Once `node_budget` search
    /// nodes are spent, the first incumbent above `floor` is returned even if
    /// it is not the heaviest; without such an incumbent the search runs to
    /// completion, so "nothing above `floor`" is always exact.
    pub fn improving_is(&self, weights: &[f64], floor: f64, node_budget: u64) -> Option<(IndependentSet, f64)> {
        self.search(weights, floor, Some(node_budget))
    }

    fn search(&self, weights: &[f64], floor: f64, node_budget: Option<u64>) -> Option<(IndependentSet, f64)> {
        let c_count = self.channels;
        let mut w = vec![0.0; self.members.len()];
        for (slot, tuples) in self.members.iter().enumerate() {
            let Some(&first) = tuples.first() else { continue };
            let value = weights[first];
            if tuples.iter().any(|&p| weights[p] != value) {
                return None;
            }
            w[slot] = value.max(0.0);
        }

        let mut items: Vec<usize> = (0..self.links.len())
            .filter(|&l| (0..c_count).any(|c| w[l * c_count + c] > 0.0))
            .collect();
        let top = |l: usize| (0..c_count).map(|c| w[l * c_count + c]).fold(0.0, f64::max);
        items.sort_by(|&a, &b| top(b).total_cmp(&top(a)).then(a.cmp(&b)));

        // channels with identical weight columns are interchangeable
        let class_of: Vec<usize> = (0..c_count)
            .map(|c| {
                (0..c)
                    .find(|&d| (0..self.links.len()).all(|l| w[l * c_count + c] == w[l * c_count + d]))
                    .unwrap_or(c)
            })
            .collect();

        let mut search = Search {
            pricer: self,
            w: &w,
            items: &items,
            class_of,
            blocked: vec![FixedBitSet::with_capacity(self.links.len()); c_count],
            used: vec![0; c_count],
            rem: self.radios.clone(),
            chosen: Vec::new(),
            weight: 0.0,
            best: Vec::new(),
            best_weight: 0.0,
            floor,
            nodes: 0,
            node_budget,
        };
        search.greedy();
        search.run(0, 0);

        let best = search.best;
        let mut next_radio = vec![0usize; self.radios.len()];
        let mut out = Vec::with_capacity(best.len());
        for (l, c) in best {
            let (u, v) = self.links[l];
            let key = (l, next_radio[u], next_radio[v], c);
            next_radio[u] += 1;
            next_radio[v] += 1;
            out.push(self.tuple_at[&key]);
        }
        let set = IndependentSet::new(out);
        let total = set.members.iter().map(|&p| weights[p]).sum();
        Some((set, total))
    }
}

struct Search<'a> {
    pricer: &'a LinkChannelPricer,
    w: &'a [f64],
    items: &'a [usize],
    class_of: Vec<usize>,
    blocked: Vec<FixedBitSet>,
    used: Vec<usize>,
    rem: Vec<usize>,
    chosen: Vec<(usize, usize)>,
    weight: f64,
    best: Vec<(usize, usize)>,
    best_weight: f64,
    floor: f64,
    nodes: u64,
    node_budget: Option<u64>,
}

impl Search<'_> {
    fn weight(&self, l: usize, c: usize) -> f64 {
        self.w[l * self.pricer.channels + c]
    }

    fn open(&self, l: usize, c: usize) -> bool {
        let (u, v) = self.pricer.links[l];
        self.weight(l, c) > 0.0 && !self.blocked[c].contains(l) && self.rem[u] > 0 && self.rem[v] > 0
    }

    /// Upper bound on what items `i..` can still add: the least of a
    /// per-channel clique cover, a per-link copy bound and per-node radio bounds.
    fn bound(&self, i: usize) -> f64 {
        let rest = &self.items[i..];
        let channels = self.pricer.channels;

        let mut by_channel = 0.0;
        for c in 0..channels {
            let mut cliques: Vec<(FixedBitSet, f64)> = Vec::new();
            for &l in rest {
                if !self.open(l, c) {
                    continue;
                }
                let wl = self.weight(l, c);
                match cliques.iter_mut().find(|(common, _)| common.contains(l)) {
                    Some((common, top)) => {
                        common.intersect_with(&self.pricer.interferes[l]);
                        *top = top.max(wl);
                    }
                    None => cliques.push((self.pricer.interferes[l].clone(), wl)),
                }
            }
            by_channel += cliques.iter().map(|(_, top)| top).sum::<f64>();
        }

        let nodes = self.rem.len();
        let mut per_link = 0.0;
        let mut at_tx: Vec<Vec<f64>> = vec![Vec::new(); nodes];
        let mut at_rx: Vec<Vec<f64>> = vec![Vec::new(); nodes];
        let mut copies = Vec::with_capacity(channels);
        for &l in rest {
            let (u, v) = self.pricer.links[l];
            copies.clear();
            copies.extend((0..channels).filter(|&c| self.open(l, c)).map(|c| self.weight(l, c)));
            copies.sort_by(|a, b| b.total_cmp(a));
            copies.truncate(self.rem[u].min(self.rem[v]));
            per_link += copies.iter().sum::<f64>();
            at_tx[u].extend_from_slice(&copies);
            at_rx[v].extend_from_slice(&copies);
        }
        let node_bound = |lists: &mut Vec<Vec<f64>>| -> f64 {
            lists
                .iter_mut()
                .enumerate()
                .map(|(u, list)| {
                    list.sort_by(|a, b| b.total_cmp(a));
                    list.iter().take(self.rem[u]).sum::<f64>()
                })
                .sum()
        };
        let by_tx = node_bound(&mut at_tx);
        let by_rx = node_bound(&mut at_rx);
        by_channel.min(per_link).min(by_tx).min(by_rx)
    }

    /// Heaviest `(link, channel)` first, taking whatever still fits.
    fn greedy(&mut self) {
        let mut order: Vec<(usize, usize)> = self
            .items
            .iter()
            .flat_map(|&l| (0..self.pricer.channels).map(move |c| (l, c)))
            .collect();
        order.sort_by(|&(a, c), &(b, d)| self.weight(b, d).total_cmp(&self.weight(a, c)).then((a, c).cmp(&(b, d))));
        for (l, c) in order {
            if self.open(l, c) {
                self.take(l, c);
            }
        }
        // the exact search lists activations in item order
        let rank: Vec<usize> = {
            let mut r = vec![0; self.pricer.links.len()];
            for (i, &l) in self.items.iter().enumerate() {
                r[l] = i;
            }
            r
        };
        let mut picked = std::mem::take(&mut self.chosen);
        self.best_weight = self.weight;
        picked.sort_by_key(|&(l, c)| (rank[l], c));
        self.best = picked;
        self.weight = 0.0;
        self.used.iter_mut().for_each(|u| *u = 0);
        self.rem.clone_from(&self.pricer.radios);
        self.blocked.iter_mut().for_each(FixedBitSet::clear);
    }

    fn take(&mut self, l: usize, c: usize) {
        let (u, v) = self.pricer.links[l];
        self.blocked[c].union_with(&self.pricer.interferes[l]);
        self.used[c] += 1;
        self.rem[u] -= 1;
        self.rem[v] -= 1;
        self.chosen.push((l, c));
        self.weight += self.weight(l, c);
    }

    fn done(&self) -> bool {
        self.node_budget
            .is_some_and(|b| self.nodes >= b && self.best_weight > self.floor + MWIS_TOLERANCE)
    }

    fn run(&mut self, i: usize, min_channel: usize) {
        self.nodes += 1;
        if self.done() {
            return;
        }
        if i == self.items.len() {
            if self.weight > self.best_weight + MWIS_TOLERANCE {
                self.best_weight = self.weight;
                self.best = self.chosen.clone();
            }
            return;
        }
        if self.weight + self.bound(i) <= self.best_weight.max(self.floor) + MWIS_TOLERANCE {
            return;
        }
        let l = self.items[i];
        let (u, v) = self.pricer.links[l];
        for c in min_channel..self.pricer.channels {
            if !self.open(l, c) {
                continue;
            }
            if self.used[c] == 0 && (0..c).any(|d| self.used[d] == 0 && self.class_of[d] == self.class_of[c]) {
                continue;
            }
            let saved = self.blocked[c].clone();
            self.take(l, c);

            self.run(i, c + 1);

            self.weight -= self.weight(l, c);
            self.chosen.pop();
            self.rem[u] += 1;
            self.rem[v] += 1;
            self.used[c] -= 1;
            self.blocked[c] = saved;
        }
        self.run(i + 1, 0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conflict::{build_mdcg, max_weight_is};
    use crate::model::fixtures::{chain, node};
    use crate::model::{enumerate_tuples, Commodity, EnergyOverride};
    use proptest::prelude::*;

    fn link_weights(tuples: &[Tuple], link_w: &[f64], channel_scale: &[f64]) -> Vec<f64> {
        tuples
            .iter()
            .map(|t| link_w[(t.tx * 7 + t.rx * 3) % link_w.len()] * channel_scale[t.channel % channel_scale.len()])
            .collect()
    }

    fn random_topology(coords: &[(f64, f64)], radios: &[usize], channels: usize) -> Topology {
        let nodes = coords
            .iter()
            .zip(radios)
            .enumerate()
            .map(|(i, (&(x, y), &r))| node(&format!("v{i}"), x, y, r))
            .collect();
        Topology::new(
            nodes,
            channels,
            250.0,
            400.0,
            vec![Commodity {
                source: 0,
                destination: 1,
                demand: 1.0,
            }],
        )
        .unwrap()
    }

    #[test]
    fn chain_single_radio() {
        let t = chain(1, 1);
        let tuples = enumerate_tuples(&t).unwrap();
        let pricer = LinkChannelPricer::new(&tuples, &t);
        let (set, w) = pricer.max_weight_is(&[1.0, 2.0]).unwrap();
        assert_eq!(set.members, vec![1]);
        assert_eq!(w, 2.0);
    }

    #[test]
    fn radio_dependent_weights_are_declined() {
        let t = chain(2, 1);
        let tuples = enumerate_tuples(&t).unwrap();
        let pricer = LinkChannelPricer::new(&tuples, &t);
        let mut w = vec![1.0; tuples.len()];
        w[0] = 2.0;
        assert!(pricer.max_weight_is(&w).is_none());
    }

    #[test]
    fn heterogeneous_channels() {
        let mut t = chain(2, 3);
        t.energy_overrides.push(EnergyOverride {
            tx: 0,
            rx: 1,
            channel: Some(2),
            e_tx: 2.0,
            e_rx: 2.0,
        });
        let tuples = enumerate_tuples(&t).unwrap();
        let g = build_mdcg(&tuples, &t);
        let w: Vec<f64> = tuples.iter().map(|tp| tp.unit_energy() + tp.channel as f64 * 0.1).collect();
        let (set, wp) = LinkChannelPricer::new(&tuples, &t).max_weight_is(&w).unwrap();
        let (_, wg) = max_weight_is(&g, &w);
        assert!(g.is_independent(&set.members));
        assert!((wp - wg).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn matches_generic_search(
            coords in proptest::collection::vec((0.0f64..500.0, 0.0f64..500.0), 3..6),
            radios in proptest::collection::vec(1usize..3, 6),
            channels in 1usize..3,
            link_w in proptest::collection::vec(prop_oneof![Just(0.0), 0.0f64..5.0], 1..6),
            channel_scale in proptest::collection::vec(prop_oneof![Just(1.0), 0.5f64..2.0], 1..3),
        ) {
            let t = random_topology(&coords, &radios[..coords.len()], channels);
            let tuples = enumerate_tuples(&t).unwrap();
            prop_assume!(tuples.len() <= 40);
            let g = build_mdcg(&tuples, &t);
            let w = link_weights(&tuples, &link_w, &channel_scale);
            let (set, wp) = LinkChannelPricer::new(&tuples, &t).max_weight_is(&w).unwrap();
            let (_, wg) = max_weight_is(&g, &w);
            prop_assert!(g.is_independent(&set.members));
            prop_assert!((wp - wg).abs() <= 1e-9, "structured {} vs generic {}", wp, wg);
        }

        #[test]
        fn improving_search_respects_floor(
            coords in proptest::collection::vec((0.0f64..500.0, 0.0f64..500.0), 3..6),
            radios in proptest::collection::vec(1usize..3, 6),
            channels in 1usize..3,
            link_w in proptest::collection::vec(0.0f64..5.0, 1..6),
            floor_share in 0.0f64..1.5,
            budget in 0u64..20,
        ) {
            let t = random_topology(&coords, &radios[..coords.len()], channels);
            let tuples = enumerate_tuples(&t).unwrap();
            prop_assume!(tuples.len() <= 40);
            let g = build_mdcg(&tuples, &t);
            let w = link_weights(&tuples, &link_w, &[1.0]);
            let pricer = LinkChannelPricer::new(&tuples, &t);
            let (_, best) = pricer.max_weight_is(&w).unwrap();
            let floor = best * floor_share;
            let (set, found) = pricer.improving_is(&w, floor, budget).unwrap();
            prop_assert!(g.is_independent(&set.members));
            prop_assert!(found <= best + 1e-9);
            prop_assert_eq!(found > floor + 1e-9, best > floor + 1e-9);
        }
    }
}
