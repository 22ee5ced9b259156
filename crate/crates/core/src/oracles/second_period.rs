use matchplan_lp::{solve_lp, LinearProgram, Relation};
use serde::Serialize;

use crate::dh::{solve_dh_relaxation, RelaxationForm};
use crate::error::{Error, Result};
use crate::market::{DisplayPlan, MarketInstance, PlatformDesign, UserSet};
use crate::second_stage::{f_total, f_user};

use super::plans::{fresh_displays, immediate_value};

/// Largest number of displayed edges [`exact_m2`] enumerates.
pub const M2_EDGE_LIMIT: usize = 20;
/// Largest per-user in-degree [`distribution_problem`] accepts.
pub const DISTRIBUTION_DEGREE_LIMIT: usize = 12;

fn second_period(instance: &MarketInstance) -> usize {
    instance.horizon().min(2)
}

/// For each user: backlog members that survive period 1 untouched, and the
/// users who see them fresh in period 1 (potential new backlog members).
fn backlog_inputs(plan: &DisplayPlan, instance: &MarketInstance) -> (Vec<UserSet>, Vec<Vec<usize>>) {
    let state = instance.initial_state();
    let mut base = state.backlog.clone();
    for (u, b) in base.iter_mut().enumerate() {
        b.difference_with(&plan.shown_to(u));
    }
    let mut incoming = vec![Vec::new(); instance.n_users()];
    for (v, u) in fresh_displays(plan, &state) {
        incoming[u].push(v);
    }
    (base, incoming)
}

/// Expected final-period sequential matches after the first-period plan,
/// by enumerating every like pattern of the fresh displays.
pub fn exact_m2(plan: &DisplayPlan, instance: &MarketInstance) -> Result<f64> {
    let state = instance.initial_state();
    let edges = fresh_displays(plan, &state);
    if edges.len() > M2_EDGE_LIMIT {
        return Err(Error::TooManyEdges { count: edges.len(), limit: M2_EDGE_LIMIT });
    }
    let (base, _) = backlog_inputs(plan, instance);
    let t2 = second_period(instance);
    let mut total = 0.0;
    for mask in 0u64..(1u64 << edges.len()) {
        let mut prob = 1.0;
        let mut family = base.clone();
        for (b, &(v, u)) in edges.iter().enumerate() {
            let p = instance.phi(1, v, u);
            if mask >> b & 1 == 1 {
                prob *= p;
                family[u].insert(v);
            } else {
                prob *= 1.0 - p;
            }
        }
        if prob > 0.0 {
            total += prob * f_total(&family, instance, t2);
        }
    }
    Ok(total)
}

/// Expected first-period matches of a plan from the initial state.
pub fn exact_m1(plan: &DisplayPlan, instance: &MarketInstance) -> f64 {
    immediate_value(plan, &instance.initial_state(), instance).total
}

/// Best expected final-period value over all joint distributions of each
/// user's new backlog whose marginals match the like probabilities.
///
/// Separable per user; each user's problem is an LP over the subsets of
/// their incoming displays.
pub fn distribution_problem(plan: &DisplayPlan, instance: &MarketInstance) -> Result<f64> {
    let (base, incoming) = backlog_inputs(plan, instance);
    let t2 = second_period(instance);
    let mut total = 0.0;
    for u in instance.users() {
        let viewers = &incoming[u];
        if viewers.len() > DISTRIBUTION_DEGREE_LIMIT {
            return Err(Error::TooManyEdges { count: viewers.len(), limit: DISTRIBUTION_DEGREE_LIMIT });
        }
        let value_of = |mask: usize| {
            let mut b = base[u].clone();
            for (k, &v) in viewers.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    b.insert(v);
                }
            }
            f_user(&b, |v| instance.phi(t2, u, v), instance.capacity(u)).0
        };
        if viewers.is_empty() {
            total += value_of(0);
            continue;
        }
        let mut lp = LinearProgram::new();
        let subsets = 1usize << viewers.len();
        for mask in 0..subsets {
            lp.add_var(value_of(mask), 0.0, 1.0);
        }
        lp.add_constraint((0..subsets).map(|m| (m, 1.0)), Relation::Eq, 1.0);
        for (k, &v) in viewers.iter().enumerate() {
            let members = (0..subsets).filter(|m| m >> k & 1 == 1).map(|m| (m, 1.0));
            lp.add_constraint(members, Relation::Eq, instance.phi(1, v, u));
        }
        total += solve_lp(&lp)?.objective_value;
    }
    Ok(total)
}

/// LP value of the final-period displays when each incoming display may be
/// used fractionally up to its like probability.
pub fn relaxation_f(plan: &DisplayPlan, instance: &MarketInstance) -> Result<f64> {
    let (base, incoming) = backlog_inputs(plan, instance);
    let t2 = second_period(instance);
    let mut lp = LinearProgram::new();
    for u in instance.users() {
        let mut row = Vec::new();
        for v in base[u].iter() {
            row.push((lp.add_var(instance.phi(t2, u, v), 0.0, 1.0), 1.0));
        }
        for &v in &incoming[u] {
            row.push((lp.add_var(instance.phi(t2, u, v), 0.0, instance.phi(1, v, u)), 1.0));
        }
        if row.len() > instance.capacity(u) {
            lp.add_constraint(row, Relation::Le, instance.capacity(u) as f64);
        }
    }
    Ok(solve_lp(&lp)?.objective_value)
}

/// Values along the chain M² ≥ (1 − 1/e)·G and G ≥ F at the relaxation's
/// optimal first-period plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationGapReport {
    pub m1: f64,
    pub m2: f64,
    pub g: f64,
    pub f: f64,
    /// M²/G, or 1 when G is zero.
    pub ratio: f64,
    pub passed: bool,
}

pub fn correlation_gap_check(instance: &MarketInstance, design: &PlatformDesign) -> Result<CorrelationGapReport> {
    let relaxation = solve_dh_relaxation(instance, design, RelaxationForm::TwoPeriod)?;
    let plan = DisplayPlan { x: relaxation.x, w: relaxation.w };
    let m1 = exact_m1(&plan, instance);
    let m2 = exact_m2(&plan, instance)?;
    let g = distribution_problem(&plan, instance)?;
    let f = relaxation_f(&plan, instance)?;
    let ratio = if g > 1e-12 { m2 / g } else { 1.0 };
    let bound = 1.0 - (-1.0f64).exp();
    let passed = m2 >= bound * g - 1e-9 && g >= f - 1e-9;
    Ok(CorrelationGapReport { m1, m2, g, f, ratio, passed })
}
