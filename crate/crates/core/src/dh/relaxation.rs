use std::collections::{BTreeMap, BTreeSet};

use matchplan_lp::{solve_lp, solve_mip_report, LinearProgram, LpError, MipOptions, MipProblem, Relation};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::{canonical_pair, MarketInstance, MarketState, PlatformDesign, Side};

/// Branch-and-bound settings for the relaxation: stop at a 1e-4 relative
/// gap or after 150 nodes, whichever comes first.
pub const DH_MIP_OPTIONS: MipOptions = MipOptions { node_limit: 150, relative_gap: 1e-4 };

/// Which capacity structure the relaxation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaxationForm {
    /// Separate per-period budgets: Σx + Σw ≤ K and Σy ≤ K.
    TwoPeriod,
    /// One pooled budget over the remaining horizon: Σx + Σw + Σy ≤ K·T.
    MultiPeriod,
}

/// The relaxation as a MIP plus the meaning of each column.
#[derive(Debug, Clone)]
pub struct DhModel {
    pub mip: MipProblem,
    pub form: RelaxationForm,
    /// `(viewer, profile)` of every initiating display column.
    pub x_vars: Vec<((usize, usize), usize)>,
    /// Canonical `(i, j)` of every mutual display column.
    pub w_vars: Vec<((usize, usize), usize)>,
    /// `(viewer, profile)` of every later backlog display column.
    pub y_vars: Vec<((usize, usize), usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DhRelaxationSolution {
    pub x: BTreeSet<(usize, usize)>,
    pub w: BTreeSet<(usize, usize)>,
    pub y: BTreeMap<(usize, usize), f64>,
    pub objective_value: f64,
}

impl DhRelaxationSolution {
    /// Expected mutual matches of the chosen `w`, Σ β·w, in `period`.
    pub fn mutual_value(&self, instance: &MarketInstance, period: usize) -> f64 {
        self.w.iter().map(|&(i, j)| instance.beta(period, i, j)).sum()
    }
}

/// Builds the relaxation from the instance's initial state.
pub fn build_dh_relaxation(instance: &MarketInstance, design: &PlatformDesign, form: RelaxationForm) -> Result<DhModel> {
    build_dh_relaxation_from(&instance.initial_state(), instance, design, form)
}

/// Builds the relaxation for the periods starting at `state.period`.
///
/// Columns are ordered x, then w, then y; within each block by viewer (side
/// I before side J) and then partner, so branching is reproducible.
pub fn build_dh_relaxation_from(
    state: &MarketState,
    instance: &MarketInstance,
    design: &PlatformDesign,
    form: RelaxationForm,
) -> Result<DhModel> {
    let t = state.period;
    let horizon = instance.horizon();
    if form == RelaxationForm::MultiPeriod && !instance.is_time_homogeneous() {
        return Err(Error::TimeInhomogeneousMultiPeriod);
    }
    let later = (t + 1).min(horizon);
    let y_period = match form {
        RelaxationForm::TwoPeriod => later,
        RelaxationForm::MultiPeriod => t,
    };
    let n = instance.n_users();
    let mut lp = LinearProgram::new();
    let name = |prefix: &str, a: usize, b: usize| format!("{prefix}_{}_{}", instance.name(a), instance.name(b));

    let mut x_vars = Vec::new();
    let mut x_index = BTreeMap::new();
    for u in instance.users() {
        if !design.may_initiate(instance.side(u)) {
            continue;
        }
        for v in state.potentials[u].iter() {
            if state.backlog[u].contains(v) || instance.phi(t, u, v) <= 0.0 || instance.phi(y_period, v, u) <= 0.0 {
                continue;
            }
            let k = lp.add_named_var(name("x", u, v), 0.0, 0.0, 1.0);
            x_vars.push(((u, v), k));
            x_index.insert((u, v), k);
        }
    }

    let mut w_vars = Vec::new();
    if design.allows_mutual(t, horizon) {
        for i in instance.users_of(Side::I) {
            for j in state.potentials[i].iter() {
                let b = instance.beta(t, i, j);
                if b > 0.0 && state.is_fresh_pair(i, j) {
                    let k = lp.add_named_var(name("w", i, j), b, 0.0, 1.0);
                    w_vars.push(((i, j), k));
                }
            }
        }
    }

    let mut y_vars = Vec::new();
    for u in instance.users() {
        for v in state.potentials[u].iter() {
            let in_backlog = state.backlog[u].contains(v);
            if !in_backlog && !x_index.contains_key(&(v, u)) {
                continue;
            }
            let p = instance.phi(y_period, u, v);
            if p <= 0.0 {
                continue;
            }
            let k = lp.add_named_var(name("y", u, v), p, 0.0, 1.0);
            y_vars.push(((u, v), k));
            if let Some(&xk) = x_index.get(&(v, u)) {
                let rhs = if in_backlog { 1.0 } else { 0.0 };
                lp.add_constraint([(k, 1.0), (xk, -instance.phi(t, v, u))], Relation::Le, rhs);
            }
        }
    }

    let mut by_pair: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for &((u, v), k) in &x_vars {
        by_pair.entry(canonical_pair(instance, u, v)).or_default().push(k);
    }
    for &(e, k) in &w_vars {
        by_pair.entry(e).or_default().push(k);
    }
    for cols in by_pair.values().filter(|c| c.len() > 1) {
        lp.add_constraint(cols.iter().map(|&k| (k, 1.0)), Relation::Le, 1.0);
    }

    let mut display_cols: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut later_cols: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &((u, _), k) in &x_vars {
        display_cols[u].push(k);
    }
    for &((i, j), k) in &w_vars {
        display_cols[i].push(k);
        display_cols[j].push(k);
    }
    for &((u, _), k) in &y_vars {
        later_cols[u].push(k);
    }
    for u in instance.users() {
        let cap = instance.capacity(u) as f64;
        match form {
            RelaxationForm::TwoPeriod => {
                if display_cols[u].len() as f64 > cap {
                    lp.add_constraint(display_cols[u].iter().map(|&k| (k, 1.0)), Relation::Le, cap);
                }
                if later_cols[u].len() as f64 > cap {
                    lp.add_constraint(later_cols[u].iter().map(|&k| (k, 1.0)), Relation::Le, cap);
                }
            }
            RelaxationForm::MultiPeriod => {
                let budget = cap * (horizon + 1 - t) as f64;
                let all: Vec<usize> = display_cols[u].iter().chain(&later_cols[u]).copied().collect();
                if all.len() as f64 > budget {
                    lp.add_constraint(all.into_iter().map(|k| (k, 1.0)), Relation::Le, budget);
                }
            }
        }
    }

    let binaries = x_vars.iter().chain(&w_vars).map(|&(_, k)| k).collect();
    Ok(DhModel { mip: MipProblem::new(lp, binaries)?, form, x_vars, w_vars, y_vars })
}

impl DhModel {
    pub fn decode(&self, values: &[f64], objective_value: f64) -> DhRelaxationSolution {
        DhRelaxationSolution {
            x: self.x_vars.iter().filter(|&&(_, k)| values[k] > 0.5).map(|&(a, _)| a).collect(),
            w: self.w_vars.iter().filter(|&&(_, k)| values[k] > 0.5).map(|&(e, _)| e).collect(),
            y: self.y_vars.iter().filter(|&&(_, k)| values[k] > 0.0).map(|&(a, k)| (a, values[k])).collect(),
            objective_value,
        }
    }

    /// Solves the MIP with [`DH_MIP_OPTIONS`].
    pub fn solve(&self) -> Result<DhRelaxationSolution> {
        self.solve_with(&DH_MIP_OPTIONS)
    }

    /// Solves the MIP under `options`. If the node limit stops the search,
    /// the best incumbent is used and the remaining gap is logged.
    pub fn solve_with(&self, options: &MipOptions) -> Result<DhRelaxationSolution> {
        let report = solve_mip_report(&self.mip, options)?;
        if !report.solution.is_optimal() {
            let status = report.solution.status;
            return Err(LpError::NumericalInstability(format!("relaxation solve ended {status:?}")).into());
        }
        if !report.complete {
            log::warn!(
                "relaxation stopped after {} nodes: incumbent {:.6}, bound {:.6} (relative gap {:.2e})",
                report.nodes,
                report.solution.objective_value,
                report.best_bound,
                report.relative_gap()
            );
        }
        Ok(self.decode(&report.solution.values, report.solution.objective_value))
    }

    /// Solves the LP relaxation, returning raw column values.
    pub fn solve_continuous(&self) -> Result<(Vec<f64>, f64)> {
        let sol = solve_lp(&self.mip.lp)?;
        Ok((sol.values, sol.objective_value))
    }
}

/// Builds and solves the relaxation from the initial state.
pub fn solve_dh_relaxation(
    instance: &MarketInstance,
    design: &PlatformDesign,
    form: RelaxationForm,
) -> Result<DhRelaxationSolution> {
    build_dh_relaxation(instance, design, form)?.solve()
}
