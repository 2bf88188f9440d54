use fixedbitset::FixedBitSet;

use super::{ConflictGraph, IndependentSet};
use crate::error::{Error, Result};

pub const DEFAULT_IS_CAP: usize = 200_000;

/// All maximal independent sets, sorted lexicographically.
///
/// Bron-Kerbosch with Tomita pivoting run on the complement of the conflict
/// relation (a maximal independent set is a maximal clique there). Fails once
/// more than `cap` sets have been found.
pub fn enumerate_maximal_is(graph: &ConflictGraph, cap: usize) -> Result<Vec<IndependentSet>> {
    let n = graph.tuple_count();
    let mut out = Vec::new();
    if n == 0 {
        out.push(IndependentSet::new(Vec::new()));
        return Ok(out);
    }
    let mut candidates = FixedBitSet::with_capacity(n);
    candidates.insert_range(..);
    let excluded = FixedBitSet::with_capacity(n);
    let mut current = Vec::new();
    expand(graph, &mut current, candidates, excluded, cap, &mut out)?;
    out.sort();
    Ok(out)
}

/// `P \ N(v) \ {v}`: the members of `set` compatible with `v`.
fn compatible(graph: &ConflictGraph, set: &FixedBitSet, v: usize) -> FixedBitSet {
    let mut s = set.clone();
    s.difference_with(graph.neighbors(v));
    s.set(v, false);
    s
}

fn expand(
    graph: &ConflictGraph,
    current: &mut Vec<usize>,
    mut candidates: FixedBitSet,
    mut excluded: FixedBitSet,
    cap: usize,
    out: &mut Vec<IndependentSet>,
) -> Result<()> {
    if candidates.is_clear() {
        if excluded.is_clear() {
            if out.len() >= cap {
                return Err(Error::IsSpaceTooLarge { cap });
            }
            out.push(IndependentSet::new(current.clone()));
        }
        return Ok(());
    }

    // Pivot: the vertex of P ∪ X compatible with the most candidates.
    let pivot = candidates
        .ones()
        .chain(excluded.ones())
        .max_by_key(|&u| {
            let mut s = candidates.clone();
            s.difference_with(graph.neighbors(u));
            // ties resolved towards the smallest index
            (s.count_ones(..) - s.contains(u) as usize, std::cmp::Reverse(u))
        })
        .expect("P is non-empty");

    // Branch on candidates not compatible with the pivot: N(pivot) ∪ {pivot}.
    let mut branch = candidates.clone();
    let mut keep = graph.neighbors(pivot).clone();
    keep.insert(pivot);
    branch.intersect_with(&keep);

    for v in branch.ones().collect::<Vec<_>>() {
        current.push(v);
        let p = compatible(graph, &candidates, v);
        let x = compatible(graph, &excluded, v);
        expand(graph, current, p, x, cap, out)?;
        current.pop();
        candidates.set(v, false);
        excluded.insert(v);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Every subset, filtered to the maximal independent ones.
    fn brute_force(graph: &ConflictGraph) -> Vec<IndependentSet> {
        let n = graph.tuple_count();
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            if graph.is_maximal_independent(&members) {
                out.push(IndependentSet::new(members));
            }
        }
        out.sort();
        out
    }

    fn cycle(n: usize) -> ConflictGraph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        ConflictGraph::from_edges(n, &edges)
    }

    #[test]
    fn triangle_gives_singletons() {
        let g = ConflictGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let sets = enumerate_maximal_is(&g, 10).unwrap();
        let members: Vec<_> = sets.iter().map(|s| s.members.clone()).collect();
        assert_eq!(members, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn edgeless_gives_everything() {
        let g = ConflictGraph::from_edges(3, &[]);
        let sets = enumerate_maximal_is(&g, 10).unwrap();
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].members, vec![0, 1, 2]);
    }

    #[test]
    fn five_cycle_matches_brute_force() {
        let g = cycle(5);
        let expected = brute_force(&g);
        assert_eq!(expected.len(), 5);
        assert!(expected.iter().all(|s| s.len() == 2));
        assert_eq!(enumerate_maximal_is(&g, 100).unwrap(), expected);
    }

    #[test]
    fn cap_exceeded_is_an_error() {
        let g = cycle(5);
        assert!(matches!(
            enumerate_maximal_is(&g, 4),
            Err(Error::IsSpaceTooLarge { cap: 4 })
        ));
    }

    #[test]
    fn empty_graph_has_the_empty_set() {
        let g = ConflictGraph::from_edges(0, &[]);
        assert_eq!(enumerate_maximal_is(&g, 1).unwrap(), vec![IndependentSet::new(vec![])]);
    }

    fn arb_graph() -> impl Strategy<Value = ConflictGraph> {
        (1usize..11).prop_flat_map(|n| {
            proptest::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
                let mut edges = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        if bits[i * n + j] {
                            edges.push((i, j));
                        }
                    }
                }
                ConflictGraph::from_edges(n, &edges)
            })
        })
    }

    proptest! {
        #[test]
        fn matches_subset_enumeration(g in arb_graph()) {
            let sets = enumerate_maximal_is(&g, 10_000).unwrap();
            for s in &sets {
                prop_assert!(g.is_maximal_independent(&s.members));
            }
            prop_assert_eq!(sets, brute_force(&g));
        }
    }
}
