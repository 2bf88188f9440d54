//! Reference implementations shared by the integration tests. Nothing here
//! calls the library's conflict graph, independent-set search or LP code.

#![allow(dead_code)]

use mrmc_core::model::{Commodity, NodeSpec, Topology, Tuple};

pub fn node(id: &str, x: f64, y: f64, radios: usize) -> NodeSpec {
    NodeSpec {
        id: id.into(),
        x,
        y,
        radios,
    }
}

/// s -> a -> d (2 hops) and s -> b1 -> b2 -> d (3 hops); one radio per node.
pub fn diamond() -> Topology {
    Topology::new(
        vec![
            node("s", 0.0, 0.0, 1),
            node("a", 200.0, 100.0, 1),
            node("b1", 100.0, -220.0, 1),
            node("b2", 300.0, -220.0, 1),
            node("d", 400.0, 0.0, 1),
        ],
        1,
        250.0,
        500.0,
        vec![Commodity {
            source: 0,
            destination: 4,
            demand: 1.0,
        }],
    )
    .unwrap()
}

/// A(0,0) - M(200,0) - D(400,0), one commodity A -> D.
pub fn chain() -> Topology {
    Topology::new(
        vec![
            node("A", 0.0, 0.0, 1),
            node("M", 200.0, 0.0, 1),
            node("D", 400.0, 0.0, 1),
        ],
        1,
        250.0,
        500.0,
        vec![Commodity {
            source: 0,
            destination: 2,
            demand: 1.0,
        }],
    )
    .unwrap()
}

fn dist(t: &Topology, u: usize, v: usize) -> f64 {
    let (a, b) = (&t.nodes[u], &t.nodes[v]);
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

/// Conflict rule written out directly from node positions.
pub fn oracle_conflict(t: &Topology, a: &Tuple, b: &Tuple) -> bool {
    let ends_a = [(a.tx, a.tx_radio), (a.rx, a.rx_radio)];
    let ends_b = [(b.tx, b.tx_radio), (b.rx, b.rx_radio)];
    if ends_a.iter().any(|e| ends_b.contains(e)) {
        return true;
    }
    let r = t.interference_range;
    a.channel == b.channel && (dist(t, a.tx, b.tx) <= r || dist(t, a.tx, b.rx) <= r || dist(t, b.tx, a.rx) <= r)
}

/// Every maximal independent set, by plain Bron-Kerbosch (no pivoting) on the
/// complement of the conflict relation.
pub fn oracle_maximal_sets(t: &Topology, tuples: &[Tuple]) -> Vec<Vec<usize>> {
    let n = tuples.len();
    let conflict: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| i != j && oracle_conflict(t, &tuples[i], &tuples[j])).collect())
        .collect();
    fn bk(conflict: &[Vec<bool>], r: &mut Vec<usize>, p: Vec<usize>, mut x: Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if p.is_empty() && x.is_empty() {
            out.push(r.clone());
            return;
        }
        let mut p = p;
        while let Some(v) = p.first().copied() {
            let np = p.iter().copied().filter(|&u| u != v && !conflict[v][u]).collect();
            let nx = x.iter().copied().filter(|&u| !conflict[v][u]).collect();
            r.push(v);
            bk(conflict, r, np, nx, out);
            r.pop();
            p.remove(0);
            x.push(v);
        }
    }
    let mut out = Vec::new();
    bk(&conflict, &mut Vec::new(), (0..n).collect(), Vec::new(), &mut out);
    out
}

/// `min c'x  s.t.  A x = b, x >= 0` by a two-phase tableau simplex with
/// Bland's rule throughout. Returns `None` when infeasible.
pub fn bland_simplex(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<(f64, Vec<f64>)> {
    let m = a.len();
    let n = c.len();
    let width = n + m + 1;
    let mut tab: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let s = if b[i] < 0.0 { -1.0 } else { 1.0 };
            let mut row = vec![0.0; width];
            for j in 0..n {
                row[j] = s * a[i][j];
            }
            row[n + i] = 1.0;
            row[width - 1] = s * b[i];
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();

    fn run(tab: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], allowed: usize) -> bool {
        let width = tab.first().map_or(0, |r| r.len());
        loop {
            let reduced = |j: usize| cost[j] - basis.iter().zip(tab.iter()).map(|(&bi, row)| cost[bi] * row[j]).sum::<f64>();
            let Some(q) = (0..allowed).find(|&j| !basis.contains(&j) && reduced(j) < -1e-10) else {
                return true;
            };
            let mut leave: Option<(f64, usize)> = None;
            for (i, row) in tab.iter().enumerate() {
                if row[q] > 1e-11 {
                    let ratio = row[width - 1] / row[q];
                    let better = match leave {
                        None => true,
                        Some((r, li)) => ratio < r - 1e-13 || (ratio <= r + 1e-13 && basis[i] < basis[li]),
                    };
                    if better {
                        leave = Some((ratio, i));
                    }
                }
            }
            let Some((_, r)) = leave else { return false };
            let piv = tab[r][q];
            for v in tab[r].iter_mut() {
                *v /= piv;
            }
            let prow = tab[r].clone();
            for (i, row) in tab.iter_mut().enumerate() {
                if i != r && row[q] != 0.0 {
                    let f = row[q];
                    for (v, p) in row.iter_mut().zip(&prow) {
                        *v -= f * p;
                    }
                }
            }
            basis[r] = q;
        }
    }

    let mut phase1 = vec![0.0; n + m];
    for v in &mut phase1[n..] {
        *v = 1.0;
    }
    run(&mut tab, &mut basis, &phase1, n + m);
    let infeas: f64 = basis
        .iter()
        .zip(&tab)
        .filter(|(&bi, _)| bi >= n)
        .map(|(_, row)| row[width - 1])
        .sum();
    let scale = 1.0 + b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if infeas > 1e-9 * scale {
        return None;
    }
    // pivot remaining zero-level artificials out where possible
    for i in 0..m {
        if basis[i] >= n {
            if let Some(q) = (0..n).find(|&j| tab[i][j].abs() > 1e-9 && !basis.contains(&j)) {
                let piv = tab[i][q];
                for v in tab[i].iter_mut() {
                    *v /= piv;
                }
                let prow = tab[i].clone();
                for (k, row) in tab.iter_mut().enumerate() {
                    if k != i && row[q] != 0.0 {
                        let f = row[q];
                        for (v, p) in row.iter_mut().zip(&prow) {
                            *v -= f * p;
                        }
                    }
                }
                basis[i] = q;
            }
        }
    }
    let mut phase2 = c.to_vec();
    phase2.extend(std::iter::repeat(0.0).take(m));
    assert!(run(&mut tab, &mut basis, &phase2, n), "oracle LP unbounded");
    let mut x = vec![0.0; n];
    for (i, &bi) in basis.iter().enumerate() {
        if bi < n {
            x[bi] = tab[i][width - 1];
        }
    }
    let obj = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Some((obj, x))
}

/// Per-tuple scheduling LP over the given columns in equality form.
/// Variables: flows `f[p][k]`, `lambda`, `alpha[m]`, then one slack per inequality row.
struct OracleLp {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    lambda: usize,
    vars: usize,
}

fn oracle_lp(t: &Topology, tuples: &[Tuple], sets: &[Vec<usize>], target: Option<f64>) -> OracleLp {
    let k_count = t.commodities.len();
    let flows = tuples.len() * k_count;
    let lambda = flows;
    let alpha0 = flows + 1;
    let slack0 = alpha0 + sets.len();
    let slacks = 1 + tuples.len();
    let vars = slack0 + slacks;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (k, c) in t.commodities.iter().enumerate() {
        for u in 0..t.nodes.len() {
            let mut row = vec![0.0; vars];
            for (p, tp) in tuples.iter().enumerate() {
                if tp.tx == u {
                    row[p * k_count + k] += 1.0;
                }
                if tp.rx == u {
                    row[p * k_count + k] -= 1.0;
                }
            }
            if u == c.source {
                row[lambda] -= c.demand;
            }
            if u == c.destination {
                row[lambda] += c.demand;
            }
            a.push(row);
            b.push(0.0);
        }
    }
    let mut budget = vec![0.0; vars];
    for m in 0..sets.len() {
        budget[alpha0 + m] = 1.0;
    }
    budget[slack0] = 1.0;
    a.push(budget);
    b.push(1.0);
    for (p, tp) in tuples.iter().enumerate() {
        let mut row = vec![0.0; vars];
        for k in 0..k_count {
            row[p * k_count + k] = 1.0 / tp.capacity;
        }
        for (m, s) in sets.iter().enumerate() {
            if s.contains(&p) {
                row[alpha0 + m] = -1.0;
            }
        }
        row[slack0 + 1 + p] = 1.0;
        a.push(row);
        b.push(0.0);
    }
    if let Some(f) = target {
        let mut row = vec![0.0; vars];
        row[lambda] = t.commodities.iter().map(|c| c.demand).sum();
        a.push(row);
        b.push(f);
    }
    OracleLp { a, b, lambda, vars }
}

/// Capacity and minimum energy at capacity, from scratch.
pub fn oracle_two_stage(t: &Topology, tuples: &[Tuple]) -> (f64, f64) {
    let sets = oracle_maximal_sets(t, tuples);
    let total: f64 = t.commodities.iter().map(|c| c.demand).sum();

    let lp = oracle_lp(t, tuples, &sets, None);
    let mut cost = vec![0.0; lp.vars];
    cost[lp.lambda] = -total;
    let (neg_cap, _) = bland_simplex(&lp.a, &lp.b, &cost).expect("capacity LP feasible");
    let capacity = -neg_cap;

    let lp = oracle_lp(t, tuples, &sets, Some(capacity));
    let k_count = t.commodities.len();
    let mut cost = vec![0.0; lp.vars];
    for (p, tp) in tuples.iter().enumerate() {
        for k in 0..k_count {
            cost[p * k_count + k] = tp.e_tx + tp.e_rx;
        }
    }
    let (energy, _) = bland_simplex(&lp.a, &lp.b, &cost).expect("energy LP feasible at capacity");
    (capacity, energy)
}

/// `|a - b| <= tol * max(|a|, |b|)`, with exact zeros comparing equal.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    let d = (a - b).abs();
    d <= tol * a.abs().max(b.abs()) || d <= 1e-12
}
