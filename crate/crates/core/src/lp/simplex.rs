//! Dense two-phase primal simplex on a full tableau.
//!
//! Dantzig pricing with a fallback to Bland's rule after a run of degenerate
//! pivots. Every row keeps its initial identity column (slack or artificial),
//! so the current basis inverse can be read off the tableau: duals come from
//! the reduced costs of those columns, and new columns can be priced into an
//! optimal tableau without refactoring, which column generation relies on.

use super::{LpProblem, LpSolution, LpStatus, Relation, Sense, Variable};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    /// Smallest tableau entry accepted as a pivot.
    pub pivot_tol: f64,
    /// A column enters only if its reduced cost improves by more than this.
    pub cost_tol: f64,
    /// Phase-1 infeasibility allowed before reporting `Infeasible` (scaled by the rhs norm).
    pub phase1_tol: f64,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
    pub max_iterations: Option<usize>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            pivot_tol: 1e-9,
            cost_tol: 1e-9,
            phase1_tol: 1e-9,
            bland_after: 50,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

/// `x_j = offset + sum(sign * column)`.
#[derive(Debug, Clone)]
struct VarMap {
    offset: f64,
    cols: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    /// Phase-2 costs of the internal minimization.
    cost: Vec<f64>,
    /// Reduced costs for the phase being run.
    reduced: Vec<f64>,
    /// Column that started as the unit vector of each row.
    identity: Vec<usize>,
    /// +1 / -1: the row was negated to make its rhs non-negative.
    sigma: Vec<f64>,
    var_map: Vec<VarMap>,
    /// Tableau row of each problem constraint.
    constraint_rows: Vec<usize>,
    /// The starting rows and rhs, extended with every added column, for refactoring.
    original: Vec<Vec<f64>>,
    original_rhs: Vec<f64>,
}

enum LoopEnd {
    Optimal,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct Simplex {
    problem: LpProblem,
    options: SimplexOptions,
    tableau: Option<Tableau>,
    status: Option<LpStatus>,
    iterations: usize,
}

impl Simplex {
    pub fn new(problem: LpProblem, options: SimplexOptions) -> Result<Self> {
        problem.validate()?;
        Ok(Simplex {
            problem,
            options,
            tableau: None,
            status: None,
            iterations: 0,
        })
    }

    pub fn problem(&self) -> &LpProblem {
        &self.problem
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    fn internal_sign(&self) -> f64 {
        match self.problem.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        }
    }

    /// Solve, continuing from the current basis when the previous solve was optimal.
    pub fn solve(&mut self) -> Result<LpStatus> {
        let warm = self.status == Some(LpStatus::Optimal) && self.tableau.is_some();
        let status = if warm { self.finish()? } else { self.solve_cold()? };
        self.status = Some(status);
        if status != LpStatus::Optimal {
            self.tableau = None;
        }
        Ok(status)
    }

    /// Discard the basis and solve from scratch.
    pub fn resolve_cold(&mut self) -> Result<LpStatus> {
        self.tableau = None;
        self.status = None;
        self.solve()
    }

    /// Recompute the tableau of the current basis from the original rows,
    /// dropping accumulated round-off, then re-optimize. Falls back to a cold
    /// solve when the basis is numerically singular or no longer feasible.
    pub fn refactor(&mut self) -> Result<LpStatus> {
        if self.status != Some(LpStatus::Optimal) {
            return self.resolve_cold();
        }
        let Some(t) = self.tableau.as_ref() else {
            return self.resolve_cold();
        };
        let tol = self.options.pivot_tol;
        let mut fresh = Tableau {
            rows: t.original.clone(),
            rhs: t.original_rhs.clone(),
            basis: t.identity.clone(),
            reduced: vec![0.0; t.kinds.len()],
            ..t.clone()
        };
        let mut wanted = vec![false; t.kinds.len()];
        for &b in &t.basis {
            wanted[b] = true;
        }
        for &q in &t.basis {
            if fresh.basis.contains(&q) {
                continue;
            }
            let row = (0..fresh.rows.len())
                .filter(|&i| !wanted[fresh.basis[i]])
                .max_by(|&a, &b| fresh.rows[a][q].abs().total_cmp(&fresh.rows[b][q].abs()).then(b.cmp(&a)));
            match row {
                Some(r) if fresh.rows[r][q].abs() > tol => pivot(&mut fresh, r, q),
                _ => {
                    log::debug!("refactor: singular basis, solving cold");
                    return self.resolve_cold();
                }
            }
        }
        let scale = 1.0 + fresh.original_rhs.iter().fold(0.0f64, |m, b| m.max(b.abs()));
        if fresh.rhs.iter().any(|&b| b < -1e-9 * scale) {
            log::debug!("refactor: basis infeasible after round-off removal, solving cold");
            return self.resolve_cold();
        }
        for b in fresh.rhs.iter_mut() {
            *b = b.max(0.0);
        }
        let cost = fresh.cost.clone();
        set_reduced_costs(&mut fresh, &cost);
        self.tableau = Some(fresh);
        self.solve()
    }

    /// Append a column with bounds `[0, inf)`. `terms` index the problem's rows.
    pub fn add_column(&mut self, variable: Variable, terms: &[(usize, f64)]) -> Result<usize> {
        if variable.lower != 0.0 || variable.upper != f64::INFINITY {
            return Err(Error::MalformedLp(
                "added columns must have bounds [0, inf)".into(),
            ));
        }
        if let Some(&(i, _)) = terms.iter().find(|(i, _)| *i >= self.problem.constraints.len()) {
            return Err(Error::MalformedLp(format!("added column references missing row {i}")));
        }
        let sign = self.internal_sign();
        let j = self.problem.variables.len();
        let cost = sign * variable.objective;
        self.problem.variables.push(variable);
        for &(i, a) in terms {
            self.problem.constraints[i].terms.push((j, a));
        }

        if let Some(t) = self.tableau.as_mut() {
            let m = t.rows.len();
            let mut column = vec![0.0; m];
            for &(i, a) in terms {
                let r = t.constraint_rows[i];
                let id = t.identity[r];
                let a = t.sigma[r] * a;
                for (k, c) in column.iter_mut().enumerate() {
                    *c += t.rows[k][id] * a;
                }
            }
            let priced: f64 = (0..m).map(|k| t.cost[t.basis[k]] * column[k]).sum();
            let col = t.kinds.len();
            for row in t.original.iter_mut() {
                row.push(0.0);
            }
            for &(i, a) in terms {
                let r = t.constraint_rows[i];
                t.original[r][col] += t.sigma[r] * a;
            }
            for (row, c) in t.rows.iter_mut().zip(&column) {
                row.push(*c);
            }
            t.kinds.push(ColKind::Structural);
            t.cost.push(cost);
            t.reduced.push(cost - priced);
            t.var_map.push(VarMap {
                offset: 0.0,
                cols: vec![(col, 1.0)],
            });
        }
        Ok(j)
    }

    /// Append a constraint. On a solved tableau the row is expressed in the
    /// current basis and given its own slack or artificial, so the next
    /// [`solve`](Self::solve) continues from the current point (through a
    /// short phase 1 if the point violates the new row).
    pub fn add_row(&mut self, name: impl Into<String>, terms: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> Result<usize> {
        if let Some(&(j, _)) = terms.iter().find(|(j, _)| *j >= self.problem.variables.len()) {
            return Err(Error::MalformedLp(format!("added row references missing variable {j}")));
        }
        if !rhs.is_finite() || terms.iter().any(|(_, a)| !a.is_finite()) {
            return Err(Error::MalformedLp("added row has a non-finite coefficient".into()));
        }
        let index = self.problem.add_constraint(name, terms.clone(), relation, rhs);
        let Some(t) = self.tableau.as_mut() else {
            return Ok(index);
        };

        let width = t.kinds.len();
        let mut dense = vec![0.0; width];
        let mut b = rhs;
        for &(j, a) in &terms {
            b -= a * t.var_map[j].offset;
            for &(col, s) in &t.var_map[j].cols {
                dense[col] += a * s;
            }
        }
        let mut values = vec![0.0; width];
        for (i, &k) in t.basis.iter().enumerate() {
            values[k] = t.rhs[i];
        }
        let activity: f64 = dense.iter().zip(&values).map(|(a, v)| a * v).sum();
        let gap = b - activity;

        // (row sign, slack coefficient before the sign, identity column is the slack)
        let (sigma, slack, slack_is_identity) = match relation {
            Relation::LessEq if gap >= 0.0 => (1.0, Some(1.0), true),
            Relation::LessEq => (-1.0, Some(1.0), false),
            Relation::GreaterEq if gap <= 0.0 => (-1.0, Some(-1.0), true),
            Relation::GreaterEq => (1.0, Some(-1.0), false),
            Relation::Equal => (if gap >= 0.0 { 1.0 } else { -1.0 }, None, false),
        };
        let mut new_cols = Vec::new();
        if let Some(coef) = slack {
            new_cols.push((ColKind::Slack, sigma * coef));
        }
        if !slack_is_identity {
            new_cols.push((ColKind::Artificial, 1.0));
        }

        let mut original: Vec<f64> = dense.iter().map(|a| sigma * a).collect();
        let mut live = original.clone();
        let mut live_rhs = sigma * b;
        for (i, &k) in t.basis.iter().enumerate() {
            let f = live[k];
            if f != 0.0 {
                for (l, a) in live.iter_mut().zip(&t.rows[i]) {
                    *l -= f * a;
                }
                live_rhs -= f * t.rhs[i];
                live[k] = 0.0;
            }
        }
        for row in t.rows.iter_mut().chain(t.original.iter_mut()) {
            row.extend(std::iter::repeat(0.0).take(new_cols.len()));
        }
        let mut identity = width;
        for (offset, &(kind, coef)) in new_cols.iter().enumerate() {
            let col = width + offset;
            original.push(coef);
            live.push(coef);
            t.kinds.push(kind);
            t.cost.push(0.0);
            t.reduced.push(0.0);
            if coef == 1.0 {
                identity = col;
            }
        }
        t.rows.push(live);
        t.rhs.push(live_rhs.max(0.0));
        t.original.push(original);
        t.original_rhs.push(sigma * b);
        t.basis.push(identity);
        t.identity.push(identity);
        t.sigma.push(sigma);
        t.constraint_rows.push(t.rows.len() - 1);
        Ok(index)
    }

    /// Replace the objective. A solved tableau stays primal feasible, so the
    /// next [`solve`](Self::solve) only runs phase 2.
    pub fn set_objective(&mut self, sense: Sense, objective: &[f64]) -> Result<()> {
        if objective.len() != self.problem.variables.len() || objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::MalformedLp("objective length or values invalid".into()));
        }
        self.problem.sense = sense;
        for (v, &c) in self.problem.variables.iter_mut().zip(objective) {
            v.objective = c;
        }
        let sign = self.internal_sign();
        if let Some(t) = self.tableau.as_mut() {
            t.cost.iter_mut().for_each(|c| *c = 0.0);
            for (m, &c) in t.var_map.iter().zip(objective) {
                for &(col, s) in &m.cols {
                    t.cost[col] = sign * c * s;
                }
            }
            let cost = t.cost.clone();
            set_reduced_costs(t, &cost);
        }
        Ok(())
    }

    fn build(&self) -> Tableau {
        let p = &self.problem;
        let sign = self.internal_sign();

        let mut var_map = Vec::with_capacity(p.variables.len());
        let mut cost = Vec::new();
        let mut bound_rows: Vec<(usize, f64)> = Vec::new();
        for v in &p.variables {
            let c = sign * v.objective;
            if v.lower.is_finite() {
                let col = cost.len();
                cost.push(c);
                if v.upper.is_finite() {
                    bound_rows.push((col, v.upper - v.lower));
                }
                var_map.push(VarMap {
                    offset: v.lower,
                    cols: vec![(col, 1.0)],
                });
            } else if v.upper.is_finite() {
                let col = cost.len();
                cost.push(-c);
                var_map.push(VarMap {
                    offset: v.upper,
                    cols: vec![(col, -1.0)],
                });
            } else {
                let col = cost.len();
                cost.push(c);
                cost.push(-c);
                var_map.push(VarMap {
                    offset: 0.0,
                    cols: vec![(col, 1.0), (col + 1, -1.0)],
                });
            }
        }
        let structural = cost.len();

        // (dense structural row, relation, rhs)
        let mut raw: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
        for c in &p.constraints {
            let mut row = vec![0.0; structural];
            let mut rhs = c.rhs;
            for &(j, a) in &c.terms {
                rhs -= a * var_map[j].offset;
                for &(col, s) in &var_map[j].cols {
                    row[col] += a * s;
                }
            }
            raw.push((row, c.relation, rhs));
        }
        for &(col, ub) in &bound_rows {
            let mut row = vec![0.0; structural];
            row[col] = 1.0;
            raw.push((row, Relation::LessEq, ub));
        }

        // Slack coefficient, whether an artificial is needed, and row sign.
        let layout: Vec<(Option<f64>, bool, f64)> = raw
            .iter()
            .map(|(_, rel, b)| match rel {
                Relation::LessEq if *b >= 0.0 => (Some(1.0), false, 1.0),
                Relation::LessEq => (Some(-1.0), true, -1.0),
                Relation::GreaterEq if *b <= 0.0 => (Some(1.0), false, -1.0),
                Relation::GreaterEq => (Some(-1.0), true, 1.0),
                Relation::Equal => (None, true, if *b < 0.0 { -1.0 } else { 1.0 }),
            })
            .collect();
        let slacks = layout.iter().filter(|l| l.0.is_some()).count();
        let artificials = layout.iter().filter(|l| l.1).count();
        let n = structural + slacks + artificials;

        let mut kinds = vec![ColKind::Structural; structural];
        kinds.extend(std::iter::repeat(ColKind::Slack).take(slacks));
        kinds.extend(std::iter::repeat(ColKind::Artificial).take(artificials));
        cost.resize(n, 0.0);

        let m = raw.len();
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut identity = Vec::with_capacity(m);
        let mut sigma = Vec::with_capacity(m);
        let (mut next_slack, mut next_art) = (structural, structural + slacks);
        for ((row, _, b), (slack, needs_art, s)) in raw.into_iter().zip(layout) {
            let mut full: Vec<f64> = row.into_iter().map(|a| s * a).collect();
            full.resize(n, 0.0);
            let mut id = None;
            if let Some(coef) = slack {
                // the stored slack coefficient is already in normalized orientation
                full[next_slack] = coef;
                if coef > 0.0 {
                    id = Some(next_slack);
                }
                next_slack += 1;
            }
            if needs_art {
                full[next_art] = 1.0;
                id = Some(next_art);
                next_art += 1;
            }
            let id = id.expect("every row has a unit column");
            rows.push(full);
            rhs.push(s * b);
            basis.push(id);
            identity.push(id);
            sigma.push(s);
        }

        Tableau {
            original: rows.clone(),
            original_rhs: rhs.clone(),
            rows,
            rhs,
            basis,
            kinds,
            reduced: vec![0.0; n],
            cost,
            identity,
            sigma,
            var_map,
            constraint_rows: (0..p.constraints.len()).collect(),
        }
    }

    fn solve_cold(&mut self) -> Result<LpStatus> {
        let mut t = self.build();
        let cost = t.cost.clone();
        set_reduced_costs(&mut t, &cost);
        self.tableau = Some(t);
        self.finish()
    }

    fn infeasibility(t: &Tableau) -> f64 {
        (0..t.rows.len())
            .filter(|&i| t.kinds[t.basis[i]] == ColKind::Artificial)
            .map(|i| t.rhs[i])
            .sum()
    }

    fn phase1_tolerance(&self, t: &Tableau) -> f64 {
        self.options.phase1_tol * (1.0 + t.rhs.iter().fold(0.0f64, |m, b| m.max(b.abs())))
    }

    /// Phase 1 when an artificial sits above zero, then phase 2. Zero-level
    /// artificials are pivoted out where possible; the rest are held at zero
    /// by the ratio test.
    fn finish(&mut self) -> Result<LpStatus> {
        let t = self.tableau.as_mut().expect("tableau present");
        if Self::infeasibility(t) > self.options.phase1_tol * (1.0 + t.rhs.iter().fold(0.0f64, |m, b| m.max(b.abs()))) {
            let phase1: Vec<f64> = t
                .kinds
                .iter()
                .map(|k| if *k == ColKind::Artificial { 1.0 } else { 0.0 })
                .collect();
            set_reduced_costs(t, &phase1);
            // phase 1 is bounded below by zero; run_phase errors otherwise
            self.run_phase(true)?;
            let t = self.tableau.as_ref().expect("tableau present");
            if Self::infeasibility(t) > self.phase1_tolerance(t) {
                return Ok(LpStatus::Infeasible);
            }
        }
        let t = self.tableau.as_mut().expect("tableau present");
        drive_out_artificials(t, self.options.pivot_tol);
        let cost = t.cost.clone();
        set_reduced_costs(t, &cost);
        Ok(match self.run_phase(false)? {
            LoopEnd::Optimal => LpStatus::Optimal,
            LoopEnd::Unbounded => LpStatus::Unbounded,
        })
    }

    fn run_phase(&mut self, phase1: bool) -> Result<LoopEnd> {
        let opts = self.options.clone();
        let t = self.tableau.as_mut().expect("tableau present");
        let limit = opts
            .max_iterations
            .unwrap_or_else(|| 10_000.max(50 * (t.rows.len() + t.kinds.len())));
        let mut degenerate_run = 0usize;
        let mut local = 0usize;
        loop {
            let bland = degenerate_run >= opts.bland_after;
            let entering = {
                let candidates = (0..t.kinds.len()).filter(|&j| {
                    t.kinds[j] != ColKind::Artificial && t.reduced[j] < -opts.cost_tol
                });
                if bland {
                    candidates.min()
                } else {
                    candidates.min_by(|&a, &b| t.reduced[a].total_cmp(&t.reduced[b]).then(a.cmp(&b)))
                }
            };
            let Some(q) = entering else {
                return Ok(LoopEnd::Optimal);
            };

            // in phase 2 a basic artificial must stay at zero, so any entry blocks
            let blocks = |i: usize| {
                let a = t.rows[i][q];
                a > opts.pivot_tol || (!phase1 && t.kinds[t.basis[i]] == ColKind::Artificial && a.abs() > opts.pivot_tol)
            };
            let step = |i: usize| {
                if t.kinds[t.basis[i]] == ColKind::Artificial && !phase1 {
                    0.0
                } else {
                    t.rhs[i].max(0.0) / t.rows[i][q]
                }
            };
            let mut ratio = f64::INFINITY;
            for i in 0..t.rows.len() {
                if blocks(i) {
                    ratio = ratio.min(step(i));
                }
            }
            if ratio == f64::INFINITY {
                return if phase1 {
                    Err(Error::MalformedLp("unbounded phase 1".into()))
                } else {
                    Ok(LoopEnd::Unbounded)
                };
            }
            let slack = 1e-12 * (1.0 + ratio);
            let ties = (0..t.rows.len()).filter(|&i| blocks(i) && step(i) <= ratio + slack);
            let leaving = if bland {
                ties.min_by_key(|&i| t.basis[i])
            } else {
                ties.max_by(|&a, &b| t.rows[a][q].abs().total_cmp(&t.rows[b][q].abs()).then(b.cmp(&a)))
            }
            .expect("ratio test found a row");

            if ratio <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            pivot(t, leaving, q);
            local += 1;
            self.iterations += 1;
            if local > limit {
                return Err(Error::IterationLimit(limit));
            }
            if phase1 && ratio > 0.0 {
                let tol = opts.phase1_tol * (1.0 + t.rhs.iter().fold(0.0f64, |m, b| m.max(b.abs())));
                if Self::infeasibility(t) <= tol {
                    return Ok(LoopEnd::Optimal);
                }
            }
        }
    }

    pub fn status(&self) -> Option<LpStatus> {
        self.status
    }

    pub fn solution(&self) -> LpSolution {
        let status = self.status.unwrap_or(LpStatus::Infeasible);
        let (Some(t), LpStatus::Optimal) = (self.tableau.as_ref(), status) else {
            return LpSolution {
                status,
                objective_value: f64::NAN,
                primal: Vec::new(),
                duals: Vec::new(),
                iterations: self.iterations,
            };
        };

        let mut values = vec![0.0; t.kinds.len()];
        for (i, &b) in t.basis.iter().enumerate() {
            values[b] = t.rhs[i].max(0.0);
        }
        let primal: Vec<f64> = t
            .var_map
            .iter()
            .map(|m| m.offset + m.cols.iter().map(|&(c, s)| s * values[c]).sum::<f64>())
            .collect();

        let sign = self.internal_sign();
        let duals = t
            .constraint_rows
            .iter()
            .map(|&i| {
                let id = t.identity[i];
                let y = t.cost[id] - t.reduced[id];
                sign * t.sigma[i] * y
            })
            .collect();

        LpSolution {
            status,
            objective_value: self.problem.objective_value(&primal),
            primal,
            duals,
            iterations: self.iterations,
        }
    }
}

fn set_reduced_costs(t: &mut Tableau, cost: &[f64]) {
    let mut reduced = cost.to_vec();
    for (i, &b) in t.basis.iter().enumerate() {
        let cb = cost[b];
        if cb != 0.0 {
            for (r, a) in reduced.iter_mut().zip(&t.rows[i]) {
                *r -= cb * a;
            }
        }
    }
    for &b in &t.basis {
        reduced[b] = 0.0;
    }
    t.reduced = reduced;
}

fn pivot(t: &mut Tableau, r: usize, q: usize) {
    let inv = 1.0 / t.rows[r][q];
    for a in t.rows[r].iter_mut() {
        *a *= inv;
    }
    t.rhs[r] *= inv;
    t.rows[r][q] = 1.0;

    let pivot_row = std::mem::take(&mut t.rows[r]);
    let pivot_rhs = t.rhs[r];
    let nonzero: Vec<usize> = (0..pivot_row.len()).filter(|&j| pivot_row[j] != 0.0).collect();
    for i in 0..t.rows.len() {
        if i == r {
            continue;
        }
        let f = t.rows[i][q];
        if f != 0.0 {
            let row = &mut t.rows[i];
            for &j in &nonzero {
                row[j] -= f * pivot_row[j];
            }
            row[q] = 0.0;
            t.rhs[i] -= f * pivot_rhs;
        }
    }
    let f = t.reduced[q];
    if f != 0.0 {
        for &j in &nonzero {
            t.reduced[j] -= f * pivot_row[j];
        }
        t.reduced[q] = 0.0;
    }
    t.rows[r] = pivot_row;
    t.basis[r] = q;
}

/// Pivot zero-level artificials out of the basis where the row allows it.
/// Rows where no other column has a usable entry are redundant and keep their artificial.
fn drive_out_artificials(t: &mut Tableau, pivot_tol: f64) {
    for i in 0..t.rows.len() {
        if t.kinds[t.basis[i]] != ColKind::Artificial {
            continue;
        }
        let best = (0..t.kinds.len())
            .filter(|&j| t.kinds[j] != ColKind::Artificial && t.rows[i][j].abs() > pivot_tol)
            .max_by(|&a, &b| t.rows[i][a].abs().total_cmp(&t.rows[i][b].abs()).then(b.cmp(&a)));
        if let Some(q) = best {
            pivot(t, i, q);
        }
    }
}

pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution> {
    let mut simplex = Simplex::new(problem.clone(), SimplexOptions::default())?;
    simplex.solve()?;
    Ok(simplex.solution())
}
