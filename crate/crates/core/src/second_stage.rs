//! Final-period optimization.
//!
//! With only sequential matches left, the best a user can do in the last
//! period is to see the backlog members most likely to be liked back, so
//! the value of a backlog family is a per-user top-K sum ([`f_user`],
//! [`f_total`]). When mutual displays are still allowed, fresh pairs compete
//! with backlog members for capacity; [`solve_second_general`] solves that
//! b-matching problem as an LP, whose constraint matrix is totally
//! unimodular.

use matchplan_lp::{is_binary_value, solve_lp, solve_mip, LinearProgram, MipProblem, Relation};

use crate::error::{Error, Result};
use crate::market::{DisplayPlan, MarketInstance, MarketState, PlatformDesign, Side, UserSet};

/// Best `capacity` members of `backlog` by `phi2`, ties by ascending id.
/// Returns the summed probability and the chosen members in rank order.
pub fn f_user(backlog: &UserSet, phi2: impl Fn(usize) -> f64, capacity: usize) -> (f64, Vec<usize>) {
    let mut ranked: Vec<(usize, f64)> = backlog.iter().map(|v| (v, phi2(v))).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    ranked.truncate(capacity);
    (ranked.iter().map(|r| r.1).sum(), ranked.into_iter().map(|r| r.0).collect())
}

/// Σ over users of [`f_user`] evaluated with period-`period` probabilities.
pub fn f_total(backlog: &[UserSet], instance: &MarketInstance, period: usize) -> f64 {
    instance
        .users()
        .map(|u| f_user(&backlog[u], |v| instance.phi(period, u, v), instance.capacity(u)).0)
        .sum()
}

/// Adds backlog displays to `plan` so that each user's load reaches its
/// capacity, best backlog members first. Members already shown are skipped.
pub fn fill_from_backlog(plan: &mut DisplayPlan, state: &MarketState, instance: &MarketInstance) {
    for u in instance.users() {
        let load = plan.load(u);
        let room = instance.capacity(u).saturating_sub(load);
        if room == 0 || state.backlog[u].is_empty() {
            continue;
        }
        let mut candidates = state.backlog[u].clone();
        candidates.difference_with(&plan.shown_to(u));
        let (_, chosen) = f_user(&candidates, |v| instance.phi(state.period, u, v), room);
        for v in chosen {
            plan.x.insert((u, v));
        }
    }
}

/// The last-period plan without mutual displays: every user sees their
/// best backlog members. Returns the plan and its value f.
pub fn backlog_plan(state: &MarketState, instance: &MarketInstance) -> (DisplayPlan, f64) {
    let mut plan = DisplayPlan::new();
    fill_from_backlog(&mut plan, state, instance);
    let value = plan.x.iter().map(|&(u, v)| instance.phi(state.period, u, v)).sum();
    (plan, value)
}

struct GeneralModel {
    mip: MipProblem,
    arcs: Vec<(usize, usize)>,
    pairs: Vec<(usize, usize)>,
}

fn build_general(state: &MarketState, with_pairs: bool, instance: &MarketInstance) -> GeneralModel {
    let t = state.period;
    let mut lp = LinearProgram::new();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); instance.n_users()];
    let mut arcs = Vec::new();
    for u in instance.users() {
        for v in state.backlog[u].iter() {
            let p = instance.phi(t, u, v);
            if p > 0.0 {
                let k = lp.add_named_var(format!("x_{}_{}", instance.name(u), instance.name(v)), p, 0.0, 1.0);
                rows[u].push((k, 1.0));
                arcs.push((u, v));
            }
        }
    }
    let mut pairs = Vec::new();
    if with_pairs {
        for i in instance.users_of(Side::I) {
            for j in state.potentials[i].iter() {
                let b = instance.beta(t, i, j);
                if b > 0.0 && state.is_fresh_pair(i, j) {
                    let k = lp.add_named_var(format!("w_{}_{}", instance.name(i), instance.name(j)), b, 0.0, 1.0);
                    rows[i].push((k, 1.0));
                    rows[j].push((k, 1.0));
                    pairs.push((i, j));
                }
            }
        }
    }
    for (u, row) in rows.into_iter().enumerate() {
        if row.len() > instance.capacity(u) {
            lp.add_constraint(row, Relation::Le, instance.capacity(u) as f64);
        }
    }
    let binaries = (0..lp.num_vars()).collect();
    GeneralModel { mip: MipProblem::new(lp, binaries).expect("all variables lie in [0, 1]"), arcs, pairs }
}

fn decode(model: &GeneralModel, values: &[f64]) -> DisplayPlan {
    let mut plan = DisplayPlan::new();
    for (k, &arc) in model.arcs.iter().enumerate() {
        if values[k] > 0.5 {
            plan.x.insert(arc);
        }
    }
    for (k, &pair) in model.pairs.iter().enumerate() {
        if values[model.arcs.len() + k] > 0.5 {
            plan.w.insert(pair);
        }
    }
    plan
}

/// Capacity-constrained b-matching over backlog arcs (weight φ) and, when
/// `with_pairs` is set, fresh pairs (weight β). Fresh pairs come back in the
/// plan's `w` whether or not the period allows mutual displays; callers map
/// them to displays.
pub(crate) fn solve_bmatching(
    state: &MarketState,
    with_pairs: bool,
    instance: &MarketInstance,
    strict: bool,
) -> Result<(DisplayPlan, f64)> {
    let model = build_general(state, with_pairs, instance);
    let sol = solve_lp(&model.mip.lp)?;
    match sol.values.iter().position(|&v| !is_binary_value(v)) {
        None => Ok((decode(&model, &sol.values), sol.objective_value)),
        Some(k) if strict => {
            Err(Error::NonIntegralVertex { variable: model.mip.lp.var_name(k), value: sol.values[k] })
        }
        Some(k) => {
            log::warn!("b-matching LP vertex fractional at {} = {}; branching", model.mip.lp.var_name(k), sol.values[k]);
            let sol = solve_mip(&model.mip)?;
            Ok((decode(&model, &sol.values), sol.objective_value))
        }
    }
}

/// Best final-period plan when fresh pairs may be shown mutually: maximize
/// Σ φ·x over backlog displays plus Σ β·w over fresh pairs, subject to each
/// user's capacity. Returns [`Error::NonIntegralVertex`] if the LP vertex is
/// fractional.
pub fn solve_second_general_strict(
    state: &MarketState,
    design: &PlatformDesign,
    instance: &MarketInstance,
) -> Result<(DisplayPlan, f64)> {
    solve_bmatching(state, design.allows_mutual(state.period, instance.horizon()), instance, true)
}

/// As [`solve_second_general_strict`], but a fractional vertex is logged and
/// resolved by branch-and-bound.
pub fn solve_second_general(
    state: &MarketState,
    design: &PlatformDesign,
    instance: &MarketInstance,
) -> Result<(DisplayPlan, f64)> {
    solve_bmatching(state, design.allows_mutual(state.period, instance.horizon()), instance, false)
}

/// The last-period decision used by every two-period policy: the general
/// problem when mutual displays are still allowed, the backlog top-K
/// otherwise.
pub fn final_period_plan(
    state: &MarketState,
    design: &PlatformDesign,
    instance: &MarketInstance,
) -> Result<DisplayPlan> {
    if design.allows_mutual(state.period, instance.horizon()) {
        Ok(solve_second_general(state, design, instance)?.0)
    } else {
        Ok(backlog_plan(state, instance).0)
    }
}
