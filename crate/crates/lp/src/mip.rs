use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::model::{MipProblem, Solution, Status};
use crate::simplex::solve_with_bounds;
use crate::{LpError, INTEGRALITY_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MipOptions {
    pub node_limit: usize,
    /// Stop once `(bound - incumbent) <= relative_gap * max(1, |incumbent|)`.
    /// Zero asks for a proven optimum.
    pub relative_gap: f64,
}

impl Default for MipOptions {
    fn default() -> Self {
        MipOptions { node_limit: 1_000_000, relative_gap: 0.0 }
    }
}

/// Outcome of [`solve_mip_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct MipReport {
    /// Best integral solution found, or an infeasible/unbounded status.
    pub solution: Solution,
    /// Upper bound on the optimum when the search stopped.
    pub best_bound: f64,
    pub nodes: usize,
    /// False when the node limit cut the search short.
    pub complete: bool,
}

impl MipReport {
    /// Gap between bound and incumbent, relative to `max(1, |incumbent|)`.
    pub fn relative_gap(&self) -> f64 {
        if !self.solution.is_optimal() {
            return f64::INFINITY;
        }
        let inc = self.solution.objective_value;
        ((self.best_bound - inc).max(0.0)) / inc.abs().max(1.0)
    }
}

struct Node {
    bound: f64,
    id: usize,
    fixings: Vec<(usize, bool)>,
    values: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound).then_with(|| other.id.cmp(&self.id))
    }
}

pub fn solve_mip(mip: &MipProblem) -> Result<Solution, LpError> {
    solve_mip_with(mip, &MipOptions::default())
}

/// Like [`solve_mip_report`], but reaching the node limit is an error.
pub fn solve_mip_with(mip: &MipProblem, options: &MipOptions) -> Result<Solution, LpError> {
    let report = solve_mip_report(mip, options)?;
    if !report.complete {
        return Err(LpError::NodeLimitExceeded { limit: options.node_limit });
    }
    Ok(report.solution)
}

/// Best-first branch-and-bound on the LP relaxation, branching on the most
/// fractional binary (lowest index on ties).
///
/// A dive from the root and a rounding of every queued node supply
/// incumbents. When the node limit is hit the best incumbent is returned
/// with `complete = false`.
pub fn solve_mip_report(mip: &MipProblem, options: &MipOptions) -> Result<MipReport, LpError> {
    let lp = &mip.lp;
    lp.check_well_formed()?;
    let base_lo = lp.lower().to_vec();
    let base_hi = lp.upper().to_vec();

    let solve_node = |fixings: &[(usize, bool)]| -> Result<Solution, LpError> {
        let mut lo = base_lo.clone();
        let mut hi = base_hi.clone();
        for &(j, up) in fixings {
            let v = if up { 1.0 } else { 0.0 };
            lo[j] = v;
            hi[j] = v;
        }
        solve_with_bounds(lp, &lo, &hi)
    };

    let root = solve_node(&[])?;
    if root.status != Status::Optimal {
        let bound = root.objective_value;
        return Ok(MipReport { solution: root, best_bound: bound, nodes: 0, complete: true });
    }

    let mut incumbent: Option<Solution> = None;
    let offer = |incumbent: &mut Option<Solution>, found: Solution| {
        if incumbent.as_ref().map_or(true, |b| found.objective_value > b.objective_value + 1e-12) {
            *incumbent = Some(found);
        }
    };
    if most_fractional(&mip.binaries, &root.values).is_some() {
        if let Some(found) = dive(mip, &root.values, &solve_node)? {
            offer(&mut incumbent, found);
        }
    }
    let gap_closed = |bound: f64, incumbent: &Option<Solution>| {
        incumbent.as_ref().is_some_and(|b| {
            bound - b.objective_value <= 1e-9 + options.relative_gap * b.objective_value.abs().max(1.0)
        })
    };

    let mut heap = BinaryHeap::new();
    let mut next_id = 0usize;
    let mut pending = vec![(Vec::new(), root)];
    let mut processed = 0usize;
    let mut complete = true;
    let mut best_bound = f64::NEG_INFINITY;

    loop {
        for (fixings, sol) in pending.drain(..) {
            if sol.status != Status::Optimal || gap_closed(sol.objective_value, &incumbent) {
                continue;
            }
            match most_fractional(&mip.binaries, &sol.values) {
                None => offer(&mut incumbent, snap(mip, sol)),
                Some(_) => {
                    if let Some(found) = rounding_heuristic(mip, &fixings, &sol.values, &solve_node)? {
                        offer(&mut incumbent, found);
                    }
                    heap.push(Node { bound: sol.objective_value, id: next_id, fixings, values: sol.values });
                    next_id += 1;
                }
            }
        }
        let Some(node) = heap.pop() else { break };
        if gap_closed(node.bound, &incumbent) {
            best_bound = node.bound;
            break;
        }
        if processed >= options.node_limit {
            best_bound = node.bound;
            complete = false;
            break;
        }
        processed += 1;
        let j = most_fractional(&mip.binaries, &node.values).expect("queued nodes are fractional");
        for up in [true, false] {
            let mut child = node.fixings.clone();
            child.push((j, up));
            let child_sol = solve_node(&child)?;
            pending.push((child, child_sol));
        }
    }

    let solution = incumbent.unwrap_or_else(Solution::infeasible);
    let best_bound = best_bound.max(solution.objective_value);
    Ok(MipReport { solution, best_bound, nodes: processed, complete })
}

/// Repeatedly fixes the binary nearest to integrality at its rounded value
/// (the other value if that is infeasible) until the LP solution is integral.
fn dive<F>(mip: &MipProblem, root: &[f64], solve_node: &F) -> Result<Option<Solution>, LpError>
where
    F: Fn(&[(usize, bool)]) -> Result<Solution, LpError>,
{
    let mut fixings: Vec<(usize, bool)> = Vec::new();
    let mut values = root.to_vec();
    loop {
        let mut fixed_now = false;
        let mut pick: Option<(usize, f64)> = None;
        for &j in &mip.binaries {
            if fixings.iter().any(|&(k, _)| k == j) {
                continue;
            }
            let v = values[j];
            let frac = (v - v.round()).abs();
            if frac <= INTEGRALITY_TOL {
                continue;
            }
            if pick.map_or(true, |(_, f)| frac < f) {
                pick = Some((j, frac));
            }
        }
        let Some((j, _)) = pick else {
            let sol = solve_node(&fixings)?;
            return Ok((sol.status == Status::Optimal).then(|| snap(mip, sol)));
        };
        let preferred = values[j] >= 0.5;
        for up in [preferred, !preferred] {
            fixings.push((j, up));
            let sol = solve_node(&fixings)?;
            if sol.status == Status::Optimal {
                values = sol.values;
                fixed_now = true;
                break;
            }
            fixings.pop();
        }
        if !fixed_now {
            return Ok(None);
        }
    }
}

/// Fixes every binary to its rounded (then floored) node value and solves
/// for the continuous columns, returning the better feasible completion.
fn rounding_heuristic<F>(
    mip: &MipProblem,
    fixings: &[(usize, bool)],
    values: &[f64],
    solve_node: &F,
) -> Result<Option<Solution>, LpError>
where
    F: Fn(&[(usize, bool)]) -> Result<Solution, LpError>,
{
    let mut best: Option<Solution> = None;
    for threshold in [0.5, 1.0 - INTEGRALITY_TOL] {
        let mut fixed = fixings.to_vec();
        fixed.extend(mip.binaries.iter().map(|&j| (j, values[j] >= threshold)));
        let sol = solve_node(&fixed)?;
        if sol.status == Status::Optimal && best.as_ref().map_or(true, |b| sol.objective_value > b.objective_value) {
            best = Some(snap(mip, sol));
        }
    }
    Ok(best)
}

fn most_fractional(binaries: &[usize], values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &j in binaries {
        let v = values[j];
        let frac = (v - v.floor()).min(v.ceil() - v);
        if frac <= INTEGRALITY_TOL {
            continue;
        }
        let dist = (v - v.floor() - 0.5).abs();
        if best.map_or(true, |(_, d)| dist < d) {
            best = Some((j, dist));
        }
    }
    best.map(|(j, _)| j)
}

fn snap(mip: &MipProblem, mut sol: Solution) -> Solution {
    for &j in &mip.binaries {
        sol.values[j] = sol.values[j].round();
    }
    sol.objective_value = mip.lp.objective_value(&sol.values);
    sol
}
