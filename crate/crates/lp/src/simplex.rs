//! Bounded-variable primal simplex on a dense tableau.
//!
//! Structural variables are shifted so every lower bound is zero. Finite
//! upper bounds are handled implicitly: a nonbasic column sits at either of
//! its bounds and the ratio test includes bound flips. A two-phase method
//! supplies the starting basis. Pricing is Dantzig's largest reduced cost
//! until `5·(m+n)` consecutive degenerate pivots occur, after which Bland's
//! smallest-index rule takes over for the remainder of the phase.

use crate::model::{LinearProgram, Relation, Solution};
use crate::{LpError, FEASIBILITY_TOL};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const RATIO_TIE: f64 = 1e-12;
const GROWTH_LIMIT: f64 = 1e12;

/// Solves `lp` to optimality, reporting infeasibility or unboundedness in
/// the returned status.
pub fn solve_lp(lp: &LinearProgram) -> Result<Solution, LpError> {
    lp.check_well_formed()?;
    solve_with_bounds(lp, lp.lower(), lp.upper())
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

struct Tableau {
    m: usize,
    ncols: usize,
    a: Vec<f64>,
    rhs: Vec<f64>,
    xb: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    at_upper: Vec<bool>,
    upper: Vec<f64>,
    d: Vec<f64>,
    pivot_row: Vec<f64>,
}

pub(crate) fn solve_with_bounds(lp: &LinearProgram, lower: &[f64], upper: &[f64]) -> Result<Solution, LpError> {
    let n = lp.num_vars();
    if lower.iter().zip(upper).any(|(l, u)| l > u) {
        return Ok(Solution::infeasible());
    }
    let rows = lp.constraints();
    let m = rows.len();

    let mut shifted_rhs = Vec::with_capacity(m);
    let mut rel = Vec::with_capacity(m);
    let mut sign = Vec::with_capacity(m);
    for c in rows {
        let b = c.rhs - c.coeffs.iter().map(|&(j, a)| a * lower[j]).sum::<f64>();
        let s = if b < 0.0 { -1.0 } else { 1.0 };
        let r = match (c.relation, s < 0.0) {
            (Relation::Le, false) | (Relation::Ge, true) => Relation::Le,
            (Relation::Ge, false) | (Relation::Le, true) => Relation::Ge,
            (Relation::Eq, _) => Relation::Eq,
        };
        shifted_rhs.push(b * s);
        rel.push(r);
        sign.push(s);
    }
    let n_slack = rel.iter().filter(|r| **r != Relation::Eq).count();
    let n_art = rel.iter().filter(|r| **r != Relation::Le).count();
    let ncols = n + n_slack + n_art;

    let mut t = Tableau {
        m,
        ncols,
        a: vec![0.0; m * ncols],
        rhs: shifted_rhs.clone(),
        xb: shifted_rhs.clone(),
        basis: vec![0; m],
        in_basis: vec![false; ncols],
        at_upper: vec![false; ncols],
        upper: vec![f64::INFINITY; ncols],
        d: vec![0.0; ncols],
        pivot_row: vec![0.0; ncols],
    };
    for j in 0..n {
        t.upper[j] = upper[j] - lower[j];
    }
    let mut next_slack = n;
    let mut next_art = n + n_slack;
    let mut artificials = Vec::with_capacity(n_art);
    for (r, c) in rows.iter().enumerate() {
        let row = &mut t.a[r * ncols..(r + 1) * ncols];
        for &(j, a) in &c.coeffs {
            row[j] = a * sign[r];
        }
        match rel[r] {
            Relation::Le => {
                row[next_slack] = 1.0;
                t.basis[r] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -1.0;
                next_slack += 1;
                row[next_art] = 1.0;
                t.basis[r] = next_art;
                artificials.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = 1.0;
                t.basis[r] = next_art;
                artificials.push(next_art);
                next_art += 1;
            }
        }
    }
    for &b in &t.basis {
        t.in_basis[b] = true;
    }

    if !artificials.is_empty() {
        let mut cost = vec![0.0; ncols];
        for &j in &artificials {
            cost[j] = -1.0;
        }
        // Phase one cannot be unbounded: its objective is bounded above by zero.
        t.run_phase(&cost)?;
        t.refresh_basic_values();
        let residual: f64 = t
            .basis
            .iter()
            .zip(&t.xb)
            .filter(|(b, _)| **b >= n + n_slack)
            .map(|(_, v)| v.max(0.0))
            .sum();
        let scale = 1.0 + shifted_rhs.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if residual > 1e-8 * scale {
            return Ok(Solution::infeasible());
        }
        for &j in &artificials {
            t.upper[j] = 0.0;
            t.at_upper[j] = false;
        }
        for (i, &b) in t.basis.iter().enumerate() {
            if b >= n + n_slack {
                t.xb[i] = 0.0;
            }
        }
    }

    let mut cost = vec![0.0; ncols];
    cost[..n].copy_from_slice(lp.objective());
    match t.run_phase(&cost)? {
        PhaseEnd::Unbounded => return Ok(Solution::unbounded()),
        PhaseEnd::Optimal => {}
    }
    t.refresh_basic_values();

    let mut shifted = vec![0.0; n];
    for j in 0..n {
        if !t.in_basis[j] && t.at_upper[j] {
            shifted[j] = t.upper[j];
        }
    }
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            shifted[b] = t.xb[i];
        }
    }
    let mut values = vec![0.0; n];
    for j in 0..n {
        let mut v = lower[j] + shifted[j];
        if v < lower[j] {
            v = lower[j];
        }
        if v > upper[j] {
            v = upper[j];
        }
        if (v - v.round()).abs() < 1e-12 {
            v = v.round();
        }
        values[j] = v;
    }
    certify(lp, &values)?;
    Ok(Solution { objective_value: lp.objective_value(&values), values, status: crate::Status::Optimal })
}

fn certify(lp: &LinearProgram, values: &[f64]) -> Result<(), LpError> {
    for (r, c) in lp.constraints().iter().enumerate() {
        let act = c.activity(values);
        let mass: f64 = c.coeffs.iter().map(|&(j, a)| (a * values[j]).abs()).sum();
        let gap = match c.relation {
            Relation::Le => act - c.rhs,
            Relation::Ge => c.rhs - act,
            Relation::Eq => (act - c.rhs).abs(),
        };
        if gap > FEASIBILITY_TOL * (1.0 + c.rhs.abs() + mass) {
            return Err(LpError::NumericalInstability(format!(
                "row {r} violated by {gap:e} after solve"
            )));
        }
    }
    Ok(())
}

impl Tableau {
    fn refresh_basic_values(&mut self) {
        for i in 0..self.m {
            let mut v = self.rhs[i];
            let row = &self.a[i * self.ncols..(i + 1) * self.ncols];
            for j in 0..self.ncols {
                if self.at_upper[j] && !self.in_basis[j] && row[j] != 0.0 {
                    v -= row[j] * self.upper[j];
                }
            }
            if v.abs() < 1e-13 {
                v = 0.0;
            }
            self.xb[i] = v;
        }
    }

    fn price(&mut self, cost: &[f64]) {
        self.d.copy_from_slice(cost);
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.a[i * self.ncols..(i + 1) * self.ncols];
            for (dj, &aij) in self.d.iter_mut().zip(row) {
                *dj -= cb * aij;
            }
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
    }

    fn eligible(&self, j: usize) -> bool {
        if self.in_basis[j] || self.upper[j] <= 0.0 {
            return false;
        }
        if self.at_upper[j] {
            self.d[j] < -COST_TOL
        } else {
            self.d[j] > COST_TOL
        }
    }

    fn run_phase(&mut self, cost: &[f64]) -> Result<PhaseEnd, LpError> {
        self.price(cost);
        let degenerate_limit = 5 * (self.m + self.ncols);
        let iteration_cap = 50 * (self.m + self.ncols) + 10_000;
        let mut degenerate_run = 0usize;
        let mut bland = false;
        for _ in 0..iteration_cap {
            let entering = if bland {
                (0..self.ncols).find(|&j| self.eligible(j))
            } else {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..self.ncols {
                    if self.eligible(j) {
                        let score = self.d[j].abs();
                        if best.map_or(true, |(_, s)| score > s) {
                            best = Some((j, score));
                        }
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(q) = entering else {
                return Ok(PhaseEnd::Optimal);
            };
            let s = if self.at_upper[q] { -1.0 } else { 1.0 };

            let mut theta = self.upper[q];
            let mut leave: Option<(usize, bool, f64)> = None;
            for i in 0..self.m {
                let alpha = self.a[i * self.ncols + q];
                let sa = s * alpha;
                let b = self.basis[i];
                let (ratio, to_upper) = if sa > PIVOT_TOL {
                    (self.xb[i].max(0.0) / sa, false)
                } else if sa < -PIVOT_TOL && self.upper[b].is_finite() {
                    ((self.upper[b] - self.xb[i]).max(0.0) / -sa, true)
                } else {
                    continue;
                };
                let better = if ratio < theta - RATIO_TIE {
                    true
                } else if ratio <= theta + RATIO_TIE {
                    match leave {
                        None => false,
                        Some((li, _, la)) => {
                            if bland {
                                b < self.basis[li]
                            } else {
                                alpha.abs() > la.abs() + 1e-12
                                    || ((alpha.abs() - la.abs()).abs() <= 1e-12 && b < self.basis[li])
                            }
                        }
                    }
                } else {
                    false
                };
                if better {
                    theta = ratio;
                    leave = Some((i, to_upper, alpha));
                }
            }
            if theta.is_infinite() {
                return Ok(PhaseEnd::Unbounded);
            }
            if theta <= RATIO_TIE {
                degenerate_run += 1;
                if degenerate_run >= degenerate_limit {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }

            if theta != 0.0 {
                for i in 0..self.m {
                    let alpha = self.a[i * self.ncols + q];
                    if alpha != 0.0 {
                        self.xb[i] -= s * theta * alpha;
                    }
                }
            }
            match leave {
                None => {
                    self.at_upper[q] = !self.at_upper[q];
                }
                Some((r, to_upper, _)) => {
                    let entering_value = if s > 0.0 { theta } else { self.upper[q] - theta };
                    let out = self.basis[r];
                    self.in_basis[out] = false;
                    self.at_upper[out] = to_upper;
                    self.in_basis[q] = true;
                    self.at_upper[q] = false;
                    self.basis[r] = q;
                    self.xb[r] = entering_value;
                    self.pivot(r, q)?;
                }
            }
        }
        Err(LpError::IterationLimit { iterations: iteration_cap })
    }

    fn pivot(&mut self, r: usize, q: usize) -> Result<(), LpError> {
        let nc = self.ncols;
        let piv = self.a[r * nc + q];
        let inv = 1.0 / piv;
        {
            let row = &mut self.a[r * nc..(r + 1) * nc];
            let mut growth: f64 = 0.0;
            for v in row.iter_mut() {
                *v *= inv;
                growth = growth.max(v.abs());
            }
            row[q] = 1.0;
            if growth > GROWTH_LIMIT {
                return Err(LpError::NumericalInstability(format!(
                    "pivot on {piv:e} produced entries of size {growth:e}"
                )));
            }
        }
        self.rhs[r] *= inv;
        self.pivot_row.copy_from_slice(&self.a[r * nc..(r + 1) * nc]);
        let prow = &self.pivot_row;
        let nz: Vec<usize> = (0..nc).filter(|&j| prow[j] != 0.0).collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * nc + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * nc..(i + 1) * nc];
            for &j in &nz {
                row[j] -= f * prow[j];
            }
            row[q] = 0.0;
            self.rhs[i] -= f * self.rhs[r];
        }
        let f = self.d[q];
        if f != 0.0 {
            for &j in &nz {
                self.d[j] -= f * prow[j];
            }
            self.d[q] = 0.0;
        }
        Ok(())
    }
}
