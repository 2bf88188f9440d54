//! Exact maximum-weight independent set, the pricing oracle of column generation.

use fixedbitset::FixedBitSet;

use super::{ConflictGraph, IndependentSet};

/// Pruning slack: a branch survives only if its bound beats the incumbent by more than this.
pub const MWIS_TOLERANCE: f64 = 1e-9;

struct Search<'a> {
    graph: &'a ConflictGraph,
    weights: &'a [f64],
    /// Candidate vertices ordered by weight (descending), index ascending on ties.
    order: Vec<usize>,
    best: Vec<usize>,
    best_weight: f64,
}

impl Search<'_> {
    /// Weight of a greedy partition of `candidates` into conflict cliques,
    /// each clique contributing its heaviest member. Never exceeds the plain
    /// sum of candidate weights, and an independent set takes at most one
    /// vertex per clique, so this bounds the best completion.
    fn clique_cover_bound(&self, candidates: &FixedBitSet) -> f64 {
        let mut cliques: Vec<FixedBitSet> = Vec::new();
        let mut bound = 0.0;
        for &v in &self.order {
            if !candidates.contains(v) {
                continue;
            }
            match cliques.iter_mut().find(|common| common.contains(v)) {
                Some(common) => common.intersect_with(self.graph.neighbors(v)),
                None => {
                    bound += self.weights[v];
                    cliques.push(self.graph.neighbors(v).clone());
                }
            }
        }
        bound
    }

    fn run(&mut self, current: &mut Vec<usize>, weight: f64, mut candidates: FixedBitSet) {
        loop {
            if candidates.is_clear() {
                if weight > self.best_weight + MWIS_TOLERANCE {
                    self.best_weight = weight;
                    self.best = current.clone();
                }
                return;
            }
            if weight + self.clique_cover_bound(&candidates) <= self.best_weight + MWIS_TOLERANCE {
                return;
            }
            let v = *self
                .order
                .iter()
                .find(|&&v| candidates.contains(v))
                .expect("candidates non-empty");

            let mut with_v = candidates.clone();
            with_v.difference_with(self.graph.neighbors(v));
            with_v.set(v, false);
            current.push(v);
            self.run(current, weight + self.weights[v], with_v);
            current.pop();

            candidates.set(v, false);
        }
    }
}

/// An independent set of maximum total weight and that weight.
///
/// Branch and bound over the positive-weight vertices: the greedy-by-weight
/// set is the starting incumbent, branching includes then excludes the
/// heaviest remaining candidate, and subtrees are cut with a clique-cover
/// bound. Zero-weight vertices are left out of the returned set.
pub fn max_weight_is(graph: &ConflictGraph, weights: &[f64]) -> (IndependentSet, f64) {
    assert_eq!(weights.len(), graph.tuple_count(), "one weight per vertex");
    debug_assert!(weights.iter().all(|w| *w >= 0.0 && w.is_finite()));

    let mut order: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));

    let mut candidates = FixedBitSet::with_capacity(weights.len());
    for &v in &order {
        candidates.insert(v);
    }

    // greedy incumbent
    let mut blocked = FixedBitSet::with_capacity(weights.len());
    let mut greedy = Vec::new();
    let mut greedy_weight = 0.0;
    for &v in &order {
        if !blocked.contains(v) {
            greedy.push(v);
            greedy_weight += weights[v];
            blocked.union_with(graph.neighbors(v));
        }
    }

    let mut search = Search {
        graph,
        weights,
        order,
        best: greedy,
        best_weight: greedy_weight,
    };
    search.run(&mut Vec::new(), 0.0, candidates);
    let best = IndependentSet::new(search.best);
    let total = best.members.iter().map(|&i| weights[i]).sum();
    (best, total)
}
